//! Dense state-vector register.
//!
//! Qubit 0 is the leftmost symbol of a ket string and the most significant
//! bit of the amplitude index, so `|10⟩` lives at index 2.
//!
//! Every public operation takes the register by reference and returns a new
//! one; in-place kernels are kept crate-private.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 14;

/// Accumulated round-off allowed on norms and unitarity.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Threshold separating malformed inputs from round-off.
pub const INPUT_TOLERANCE: f64 = 1e-8;

/// Sampled branches lighter than this are treated as a logic error.
pub const BRANCH_FLOOR: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 complex matrix acting on one qubit.
///
/// Construction through [`Unitary2::new`] checks unitarity;
/// [`Unitary2::from_entries`] does not, and the check is repeated wherever
/// the matrix is applied to a register.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2 {
    m: [[Complex64; 2]; 2],
}

impl Unitary2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let u = Self { m };
        u.check()?;
        Ok(u)
    }

    pub const fn from_entries(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self::from_entries([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]])
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub const fn identity() -> Self {
        Self::from_entries([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn pauli_x() -> Self {
        Self::from_entries([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn pauli_y() -> Self {
        Self::from_entries([[ZERO, -I], [I, ZERO]])
    }

    pub fn pauli_z() -> Self {
        Self::from_entries([[ONE, ZERO], [ZERO, -ONE]])
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real([[h, h], [h, -h]])
    }

    pub fn dagger(&self) -> Self {
        let m = &self.m;
        Self::from_entries([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    /// Largest entrywise deviation of `U·U†` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let p = *self * self.dagger();
        let id = Self::identity();
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((p.m[r][c] - id.m[r][c]).norm());
            }
        }
        if worst.is_nan() {
            f64::INFINITY
        } else {
            worst
        }
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    fn check(&self) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect > INPUT_TOLERANCE {
            return Err(Error::NotUnitary { defect });
        }
        Ok(())
    }

    /// Action on the amplitude pair `(a, b)` of `a|0⟩ + b|1⟩`.
    pub fn apply_to(&self, (a, b): (Complex64, Complex64)) -> (Complex64, Complex64) {
        let m = &self.m;
        (m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (0..2).all(|r| (0..2).all(|c| (self.m[r][c] - other.m[r][c]).norm() <= tol))
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Self::from_entries(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Unitary2 {
        match self {
            Pauli::I => Unitary2::identity(),
            Pauli::X => Unitary2::pauli_x(),
            Pauli::Y => Unitary2::pauli_y(),
            Pauli::Z => Unitary2::pauli_z(),
        }
    }

    fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis, one label per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self(ops)
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    /// `p` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[q] = p;
        Self(ops)
    }

    /// The same Pauli on every listed qubit.
    pub fn on(n: usize, qubits: &[usize], p: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        for &q in qubits {
            ops[q] = p;
        }
        Self(ops)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Symplectic test: two Pauli strings commute iff they anticommute on an
    /// even number of sites.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let anti = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Product up to a global phase.
    pub fn compose(&self, other: &Self) -> Self {
        let ops = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let x = a.has_x() ^ b.has_x();
                let z = a.has_z() ^ b.has_z();
                match (x, z) {
                    (false, false) => Pauli::I,
                    (true, false) => Pauli::X,
                    (true, true) => Pauli::Y,
                    (false, true) => Pauli::Z,
                }
            })
            .collect();
        Self(ops)
    }

    /// Bit masks and `i`-power describing the action on basis states:
    /// `P|k⟩ = i^{#Y} (−1)^{popcount(k & z)} |k ⊕ x⟩`.
    pub(crate) fn action_masks(&self) -> (usize, usize, u32) {
        let n = self.0.len();
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ys = 0u32;
        for (q, &p) in self.0.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            if p.has_x() {
                x |= bit;
            }
            if p.has_z() {
                z |= bit;
            }
            if p == Pauli::Y {
                ys += 1;
            }
        }
        (x, z, ys % 4)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::PauliLabel(c)),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// Outcome of a ±1-valued observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Syndrome-bit encoding: `+1 ↦ 0`, `−1 ↦ 1`.
    pub fn bit(self) -> u8 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Computational basis state; `bits[0]` is qubit 0.
    pub fn basis_state(n_qubits: usize, bits: &str) -> Result<Self> {
        check_qubits(n_qubits)?;
        let invalid = || Error::InvalidBits {
            bits: bits.to_owned(),
            n_qubits,
        };
        if bits.chars().count() != n_qubits {
            return Err(invalid());
        }
        let mut index = 0usize;
        for c in bits.chars() {
            index <<= 1;
            match c {
                '0' => {}
                '1' => index |= 1,
                _ => return Err(invalid()),
            }
        }
        Ok(Self::basis_index(n_qubits, index))
    }

    /// Panics if `index` is out of range; callers inside the crate guarantee it.
    pub(crate) fn basis_index(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Self { n_qubits, amps }
    }

    /// Builds a register from raw amplitudes. The squared norm must be 1
    /// within the input tolerance; the result is renormalized exactly.
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::BadLength(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubits(n_qubits)?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let mut state = Self { n_qubits, amps };
        state.scale(1.0 / norm_sqr.sqrt());
        Ok(state)
    }

    /// Normalizes an arbitrary nonzero vector.
    pub(crate) fn normalized(n_qubits: usize, mut amps: Vec<Amplitude>) -> Result<Self> {
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sqr.is_finite() {
            return Err(Error::NonFinite);
        }
        if norm_sqr < BRANCH_FLOOR {
            return Err(Error::DegenerateBranch { prob: norm_sqr });
        }
        let s = 1.0 / norm_sqr.sqrt();
        amps.iter_mut().for_each(|a| *a *= s);
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Amplitude {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of measuring the basis state `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    pub fn apply_1q(&self, u: &Unitary2, target: usize) -> Result<Self> {
        self.check_qubit(target)?;
        u.check()?;
        let mut out = self.clone();
        out.apply_1q_in_place(u, target);
        Ok(out)
    }

    pub fn apply_controlled(&self, u: &Unitary2, control: usize, target: usize) -> Result<Self> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::ControlIsTarget(control));
        }
        u.check()?;
        let cbit = self.bit(control);
        let tbit = self.bit(target);
        let m = u.entries();
        let mut out = self.clone();
        for i in 0..out.dim() {
            if i & cbit != 0 && i & tbit == 0 {
                let j = i | tbit;
                let (a, b) = (out.amps[i], out.amps[j]);
                out.amps[i] = m[0][0] * a + m[0][1] * b;
                out.amps[j] = m[1][0] * a + m[1][1] * b;
            }
        }
        Ok(out)
    }

    pub fn apply_pauli_string(&self, ops: &PauliString) -> Result<Self> {
        self.check_pauli(ops)?;
        let mut out = self.clone();
        out.apply_pauli_in_place(ops);
        Ok(out)
    }

    /// Projective measurement of one qubit in the computational basis.
    pub fn measure_qubit<R: Rng + ?Sized>(&self, target: usize, rng: &mut R) -> Result<(u8, Self)> {
        self.check_qubit(target)?;
        let bit = self.bit(target);
        let p0: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let outcome = u8::from(rng.random::<f64>() >= p0);
        let keep = if outcome == 0 { 0 } else { bit };
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| if i & bit == keep { a } else { ZERO })
            .collect();
        let post = Self::normalized(self.n_qubits, amps)?;
        Ok((outcome, post))
    }

    /// Projective measurement of the observable `ops` using `(I ± P)/2`.
    pub fn measure_pauli_string<R: Rng + ?Sized>(
        &self,
        ops: &PauliString,
        rng: &mut R,
    ) -> Result<(Sign, Self)> {
        self.check_pauli(ops)?;
        if ops.is_identity() {
            return Err(Error::IdentityPauliString);
        }
        let plus = self.project_unnormalized(ops, Sign::Plus);
        let p_plus: f64 = plus.iter().map(|a| a.norm_sqr()).sum();
        let (sign, amps) = if rng.random::<f64>() < p_plus {
            (Sign::Plus, plus)
        } else {
            (Sign::Minus, self.project_unnormalized(ops, Sign::Minus))
        };
        let post = Self::normalized(self.n_qubits, amps)?;
        Ok((sign, post))
    }

    /// Both branches of a Pauli measurement without sampling: the Born
    /// probability of `sign` and the renormalized post-state. Branches whose
    /// probability does not exceed `floor` come back as `None`.
    pub fn project_pauli(
        &self,
        ops: &PauliString,
        sign: Sign,
        floor: f64,
    ) -> Result<Option<(f64, Self)>> {
        self.check_pauli(ops)?;
        if ops.is_identity() {
            return Err(Error::IdentityPauliString);
        }
        let mut amps = self.project_unnormalized(ops, sign);
        let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if prob <= floor {
            return Ok(None);
        }
        let s = 1.0 / prob.sqrt();
        amps.iter_mut().for_each(|a| *a *= s);
        Ok(Some((
            prob,
            Self {
                n_qubits: self.n_qubits,
                amps,
            },
        )))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_size(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨a|b⟩|²`, clamped into `[0, 1]`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// Number of basis components with modulus above `threshold`.
    pub fn support_size(&self, threshold: f64) -> usize {
        self.amps.iter().filter(|a| a.norm() > threshold).count()
    }

    /// Nonzero components as `(ket string, amplitude)` in index order.
    pub fn kets(&self, threshold: f64) -> Vec<(String, Amplitude)> {
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > threshold)
            .map(|(i, &a)| (format!("{:0width$b}", i, width = self.n_qubits), a))
            .collect()
    }

    pub(crate) fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    pub(crate) fn check_qubit(&self, index: usize) -> Result<()> {
        if index >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub(crate) fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(())
    }

    fn check_pauli(&self, ops: &PauliString) -> Result<()> {
        if ops.len() != self.n_qubits {
            return Err(Error::PauliLength {
                len: ops.len(),
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub(crate) fn apply_1q_in_place(&mut self, u: &Unitary2, target: usize) {
        let bit = self.bit(target);
        let m = u.entries();
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let (a, b) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[j] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub(crate) fn apply_pauli_in_place(&mut self, ops: &PauliString) {
        let (x, z, ys) = ops.action_masks();
        let global = I.powu(ys);
        let src = self.amps.clone();
        for (k, &a) in src.iter().enumerate() {
            let phase = if (k & z).count_ones() % 2 == 0 {
                global
            } else {
                -global
            };
            self.amps[k ^ x] = phase * a;
        }
    }

    /// `(ψ ± Pψ)/2` without renormalization.
    fn project_unnormalized(&self, ops: &PauliString, sign: Sign) -> Vec<Amplitude> {
        let (x, z, ys) = ops.action_masks();
        let global = I.powu(ys) * sign.value();
        // (Pψ)[k] = phase(k ⊕ x) ψ[k ⊕ x]
        self.amps
            .iter()
            .enumerate()
            .map(|(k, &a)| {
                let src = k ^ x;
                let phase = if (src & z).count_ones() % 2 == 0 {
                    global
                } else {
                    -global
                };
                (a + phase * self.amps[src]) * 0.5
            })
            .collect()
    }

    /// Scales every amplitude whose `qubit` is 1 by `factor`, leaving the
    /// register unnormalized.
    pub(crate) fn scale_excited(&mut self, qubit: usize, factor: f64) {
        let bit = self.bit(qubit);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= factor;
            }
        }
    }

    pub(crate) fn renormalize(self) -> Result<Self> {
        Self::normalized(self.n_qubits, self.amps)
    }

    fn scale(&mut self, s: f64) {
        self.amps.iter_mut().for_each(|a| *a *= s);
    }

    /// `Σ c_k |ψ_k⟩` for same-size registers, renormalized.
    pub(crate) fn superpose(terms: &[(Complex64, &StateVector)]) -> Result<Self> {
        let n = terms[0].1.n_qubits;
        let mut amps = vec![ZERO; 1 << n];
        for (c, s) in terms {
            for (acc, a) in amps.iter_mut().zip(&s.amps) {
                *acc += c * a;
            }
        }
        Self::normalized(n, amps)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    Ok(())
}
