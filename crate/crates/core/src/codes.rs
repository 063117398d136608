//! Shor 9-qubit and Steane 7-qubit codes, plus an unencoded baseline.
//!
//! Stabilizers are listed Z-type first, then X-type, and syndrome bits
//! follow that order. Recovery tables are derived from the stabilizers by
//! sweeping Pauli errors in order of increasing weight, so every syndrome
//! maps to a lowest-weight correction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::statevec::{Pauli, PauliString, Sign, StateVector, INPUT_TOLERANCE};

/// Rows of the [7,4] Hamming parity-check matrix; column `j` is `j` in binary.
pub const HAMMING_PARITY_CHECK: [[u8; 7]; 3] = [
    [0, 0, 0, 1, 1, 1, 1],
    [0, 1, 1, 0, 0, 1, 1],
    [1, 0, 1, 0, 1, 0, 1],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CodeName {
    Shor9,
    Steane7,
    Uncoded,
}

impl CodeName {
    pub const ALL: [CodeName; 3] = [CodeName::Shor9, CodeName::Steane7, CodeName::Uncoded];

    pub fn as_str(self) -> &'static str {
        match self {
            CodeName::Shor9 => "shor9",
            CodeName::Steane7 => "steane7",
            CodeName::Uncoded => "uncoded",
        }
    }

    pub fn build(self) -> CodeSpec {
        match self {
            CodeName::Shor9 => shor_code(),
            CodeName::Steane7 => steane_code(),
            CodeName::Uncoded => uncoded(),
        }
    }
}

impl fmt::Display for CodeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CodeName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownCode(s.to_owned()))
    }
}

/// Logical amplitudes `alpha|0⟩ + beta|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogicalQubit {
    alpha: Complex64,
    beta: Complex64,
}

impl LogicalQubit {
    /// Accepts amplitudes normalized within the input tolerance. They are
    /// stored as given; [`CodeSpec::encode`] renormalizes.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::LogicalNorm(norm_sqr));
        }
        Ok(Self { alpha, beta })
    }

    pub fn zero() -> Self {
        Self {
            alpha: Complex64::new(1.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
        }
    }

    pub fn one() -> Self {
        Self {
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(1.0, 0.0),
        }
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }
}

impl Default for LogicalQubit {
    fn default() -> Self {
        Self::zero()
    }
}

/// Syndrome bits, `0 ↔ +1` and `1 ↔ −1`, one per stabilizer.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syndrome(Vec<u8>);

impl Syndrome {
    pub fn new(bits: Vec<u8>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyndromeResult {
    pub syndrome: Syndrome,
    pub post_state: StateVector,
}

/// One outcome of a full syndrome measurement with its Born probability.
#[derive(Clone, Debug, PartialEq)]
pub struct SyndromeBranch {
    pub probability: f64,
    pub result: SyndromeResult,
}

#[derive(Clone, Debug)]
pub struct CodeSpec {
    name: CodeName,
    n_physical: usize,
    stabilizers: Vec<PauliString>,
    recovery: BTreeMap<Syndrome, PauliString>,
    codewords: [StateVector; 2],
}

impl CodeSpec {
    fn new(name: CodeName, stabilizers: Vec<PauliString>, codewords: [StateVector; 2]) -> Self {
        let n_physical = codewords[0].n_qubits();
        let recovery = build_recovery_table(n_physical, &stabilizers);
        Self {
            name,
            n_physical,
            stabilizers,
            recovery,
            codewords,
        }
    }

    pub fn name(&self) -> CodeName {
        self.name
    }

    pub fn n_physical(&self) -> usize {
        self.n_physical
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    pub fn recovery_table(&self) -> &BTreeMap<Syndrome, PauliString> {
        &self.recovery
    }

    /// `alpha|0_L⟩ + beta|1_L⟩`.
    pub fn encode(&self, logical: &LogicalQubit) -> StateVector {
        StateVector::superpose(&[
            (logical.alpha(), &self.codewords[0]),
            (logical.beta(), &self.codewords[1]),
        ])
        .expect("codewords are orthonormal")
    }

    /// Basis codeword `|0_L⟩` or `|1_L⟩`.
    pub fn codeword(&self, bit: u8) -> &StateVector {
        &self.codewords[usize::from(bit != 0)]
    }

    /// Syndrome a Pauli error would raise: bit `i` is set iff the error
    /// anticommutes with stabilizer `i`.
    pub fn syndrome_of(&self, error: &PauliString) -> Syndrome {
        Syndrome(
            self.stabilizers
                .iter()
                .map(|s| u8::from(!s.commutes_with(error)))
                .collect(),
        )
    }

    pub fn correction(&self, syndrome: &Syndrome) -> Result<&PauliString> {
        if syndrome.0.len() != self.stabilizers.len() {
            return Err(Error::SyndromeLength {
                got: syndrome.0.len(),
                expected: self.stabilizers.len(),
            });
        }
        self.recovery
            .get(syndrome)
            .ok_or_else(|| Error::MissingSyndrome(syndrome.to_string()))
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.n_qubits() != self.n_physical {
            return Err(Error::DimensionMismatch {
                left: state.n_qubits(),
                right: self.n_physical,
            });
        }
        Ok(())
    }
}

/// Lowest-weight correction for every reachable syndrome.
fn build_recovery_table(n: usize, stabilizers: &[PauliString]) -> BTreeMap<Syndrome, PauliString> {
    let syndrome_of = |e: &PauliString| {
        Syndrome(
            stabilizers
                .iter()
                .map(|s| u8::from(!s.commutes_with(e)))
                .collect(),
        )
    };
    let target = 1usize << stabilizers.len();
    let mut table = BTreeMap::new();
    for weight in 0..=n {
        for support in combinations(n, weight) {
            for assignment in 0..3usize.pow(weight as u32) {
                let mut ops = vec![Pauli::I; n];
                let mut code = assignment;
                for &q in &support {
                    ops[q] = [Pauli::X, Pauli::Y, Pauli::Z][code % 3];
                    code /= 3;
                }
                let error = PauliString::new(ops);
                table.entry(syndrome_of(&error)).or_insert(error);
            }
        }
        if table.len() == target {
            break;
        }
    }
    table
}

/// `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn ket_state(n: usize, kets: &[(usize, f64)]) -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    for &(index, amp) in kets {
        amps[index] = Complex64::new(amp, 0.0);
    }
    StateVector::from_amplitudes(amps).expect("codeword is normalized")
}

/// Nine-qubit code: three phase-coherent blocks of a three-qubit
/// repetition code.
pub fn shor_code() -> CodeSpec {
    let n = 9;
    let amp = 1.0 / (2.0 * 2f64.sqrt());
    let mut zero = Vec::new();
    let mut one = Vec::new();
    for blocks in 0..8usize {
        // Block b is 111 when bit b of `blocks` is set; block 0 is leftmost.
        let mut index = 0usize;
        for b in 0..3 {
            index <<= 3;
            if blocks & (1 << (2 - b)) != 0 {
                index |= 0b111;
            }
        }
        let sign = if blocks.count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        zero.push((index, amp));
        one.push((index, sign * amp));
    }
    let mut stabilizers = Vec::new();
    for block in 0..3 {
        let q = 3 * block;
        stabilizers.push(PauliString::on(n, &[q, q + 1], Pauli::Z));
        stabilizers.push(PauliString::on(n, &[q + 1, q + 2], Pauli::Z));
    }
    stabilizers.push(PauliString::on(n, &[0, 1, 2, 3, 4, 5], Pauli::X));
    stabilizers.push(PauliString::on(n, &[3, 4, 5, 6, 7, 8], Pauli::X));
    CodeSpec::new(
        CodeName::Shor9,
        stabilizers,
        [ket_state(n, &zero), ket_state(n, &one)],
    )
}

/// Seven-qubit CSS code on the Hamming code: `|0_L⟩` is the uniform
/// superposition of the row space of the parity-check matrix and `|1_L⟩`
/// its complement coset.
pub fn steane_code() -> CodeSpec {
    let n = 7;
    let rows: Vec<usize> = HAMMING_PARITY_CHECK
        .iter()
        .map(|row| {
            row.iter()
                .fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
        })
        .collect();
    let amp = 1.0 / 8f64.sqrt();
    let mut zero = Vec::new();
    let mut one = Vec::new();
    for mask in 0..8usize {
        let word = (0..3)
            .filter(|&r| mask & (1 << r) != 0)
            .fold(0usize, |acc, r| acc ^ rows[r]);
        zero.push((word, amp));
        one.push((word ^ 0b111_1111, amp));
    }
    let supports: Vec<Vec<usize>> = HAMMING_PARITY_CHECK
        .iter()
        .map(|row| (0..n).filter(|&q| row[q] == 1).collect())
        .collect();
    let stabilizers = [Pauli::Z, Pauli::X]
        .into_iter()
        .flat_map(|p| supports.iter().map(move |s| PauliString::on(n, s, p)))
        .collect();
    CodeSpec::new(
        CodeName::Steane7,
        stabilizers,
        [ket_state(n, &zero), ket_state(n, &one)],
    )
}

/// A bare physical qubit: no stabilizers and an identity recovery.
pub fn uncoded() -> CodeSpec {
    CodeSpec::new(
        CodeName::Uncoded,
        Vec::new(),
        [ket_state(1, &[(0, 1.0)]), ket_state(1, &[(1, 1.0)])],
    )
}

/// Measures every stabilizer in order, collapsing the register.
pub fn extract_syndrome<R: Rng + ?Sized>(
    state: &StateVector,
    code: &CodeSpec,
    rng: &mut R,
) -> Result<SyndromeResult> {
    code.check_state(state)?;
    let mut post = state.clone();
    let mut bits = Vec::with_capacity(code.stabilizers.len());
    for s in &code.stabilizers {
        let (sign, next) = post.measure_pauli_string(s, rng)?;
        bits.push(sign.bit());
        post = next;
    }
    Ok(SyndromeResult {
        syndrome: Syndrome(bits),
        post_state: post,
    })
}

/// Every syndrome outcome whose probability exceeds `floor`, in
/// lexicographic syndrome order. The probabilities of all branches sum to 1
/// up to the pruned mass.
pub fn syndrome_branches(
    state: &StateVector,
    code: &CodeSpec,
    floor: f64,
) -> Result<Vec<SyndromeBranch>> {
    code.check_state(state)?;
    let mut out = Vec::new();
    let mut bits = Vec::with_capacity(code.stabilizers.len());
    branch_into(state, 1.0, &code.stabilizers, floor, &mut bits, &mut out)?;
    Ok(out)
}

fn branch_into(
    state: &StateVector,
    prob: f64,
    remaining: &[PauliString],
    floor: f64,
    bits: &mut Vec<u8>,
    out: &mut Vec<SyndromeBranch>,
) -> Result<()> {
    let Some((first, rest)) = remaining.split_first() else {
        out.push(SyndromeBranch {
            probability: prob,
            result: SyndromeResult {
                syndrome: Syndrome(bits.clone()),
                post_state: state.clone(),
            },
        });
        return Ok(());
    };
    for sign in [Sign::Plus, Sign::Minus] {
        if let Some((p, post)) = state.project_pauli(first, sign, floor / prob)? {
            bits.push(sign.bit());
            branch_into(&post, prob * p, rest, floor, bits, out)?;
            bits.pop();
        }
    }
    Ok(())
}

/// Born-weighted average of the post-recovery infidelity over every
/// syndrome outcome, for a fixed code and logical reference.
///
/// Walks the same projection tree as [`syndrome_branches`] but keeps the
/// branches unnormalized in reusable buffers, and compares each leaf with
/// the reference pushed through that syndrome's correction
/// (`⟨ψ_L|C_s v⟩ = ⟨C_s ψ_L|v⟩` for Hermitian Paulis).
#[derive(Clone, Debug)]
pub struct SyndromeAverager {
    n_qubits: usize,
    projectors: Vec<PauliAction>,
    /// `C_s|ψ_L⟩`, indexed by the syndrome read as a big-endian integer.
    corrected_references: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug)]
struct PauliAction {
    flip: usize,
    /// Phase picked up by the source index `k` in `P|k⟩`.
    phases: Vec<Complex64>,
}

impl SyndromeAverager {
    pub fn new(code: &CodeSpec, reference: &LogicalQubit) -> Result<Self> {
        let n = code.n_physical;
        let dim = 1usize << n;
        let projectors = code
            .stabilizers
            .iter()
            .map(|s| {
                let (flip, z, ys) = s.action_masks();
                let global = Complex64::new(0.0, 1.0).powu(ys);
                let phases = (0..dim)
                    .map(|k| {
                        if (k & z).count_ones() % 2 == 0 {
                            global
                        } else {
                            -global
                        }
                    })
                    .collect();
                PauliAction { flip, phases }
            })
            .collect();
        let encoded = code.encode(reference);
        let m = code.stabilizers.len();
        let corrected_references = (0..1usize << m)
            .map(|index| {
                let bits = (0..m).map(|i| ((index >> (m - 1 - i)) & 1) as u8).collect();
                let correction = code.correction(&Syndrome(bits))?;
                Ok(encoded
                    .apply_pauli_string(correction)?
                    .amplitudes()
                    .to_vec())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_qubits: n,
            projectors,
            corrected_references,
        })
    }

    /// Expected `1 − F` after syndrome extraction and recovery.
    pub fn expected_infidelity(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: state.n_qubits(),
                right: self.n_qubits,
            });
        }
        let dim = state.dim();
        let mut levels = vec![vec![Complex64::new(0.0, 0.0); dim]; self.projectors.len() + 1];
        levels[0].copy_from_slice(state.amplitudes());
        let mut acc = (0.0, 0.0);
        self.descend(&mut levels, 0, 0, &mut acc);
        let (mass, lost) = acc;
        Ok((lost / mass).clamp(0.0, 1.0))
    }

    fn descend(
        &self,
        levels: &mut [Vec<Complex64>],
        depth: usize,
        index: usize,
        acc: &mut (f64, f64),
    ) {
        let Some(action) = self.projectors.get(depth) else {
            let current = &levels[depth];
            let prob: f64 = current.iter().map(|a| a.norm_sqr()).sum();
            let overlap: Complex64 = self.corrected_references[index]
                .iter()
                .zip(current)
                .map(|(r, v)| r.conj() * v)
                .sum();
            acc.0 += prob;
            acc.1 += (prob - overlap.norm_sqr()).max(0.0);
            return;
        };
        for (bit, sign) in [(0usize, 1.0), (1, -1.0)] {
            let (head, tail) = levels.split_at_mut(depth + 1);
            let current = &head[depth];
            let mut prob = 0.0;
            for (k, out) in tail[0].iter_mut().enumerate() {
                let src = k ^ action.flip;
                let v = (current[k] + sign * action.phases[src] * current[src]) * 0.5;
                prob += v.norm_sqr();
                *out = v;
            }
            if prob > SYNDROME_MASS_FLOOR {
                self.descend(levels, depth + 1, (index << 1) | bit, acc);
            }
        }
    }
}

/// Branch mass below which a syndrome subtree is skipped.
const SYNDROME_MASS_FLOOR: f64 = 1e-30;

/// Applies the table's correction for the measured syndrome.
pub fn recover(result: &SyndromeResult, code: &CodeSpec) -> Result<StateVector> {
    code.check_state(&result.post_state)?;
    let correction = code.correction(&result.syndrome)?;
    if correction.is_identity() {
        return Ok(result.post_state.clone());
    }
    result.post_state.apply_pauli_string(correction)
}

/// Fidelity of `state` with the ideal encoding of `reference`.
pub fn logical_fidelity(
    state: &StateVector,
    code: &CodeSpec,
    reference: &LogicalQubit,
) -> Result<f64> {
    code.check_state(state)?;
    state.fidelity(&code.encode(reference))
}
