//! Error channels and correlated error placement.
//!
//! An [`ErrorModel`] pairs an operator family ([`ErrorKind`]) with a rule
//! for choosing which qubits it hits ([`Placement`]). Placements drawn from
//! Bose-Einstein statistics are uniform over multisets of qubits, so one
//! qubit may be hit several times; Fermi placements are uniform over
//! subsets.

use std::fmt;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::statevec::{StateVector, Unitary2};

/// Exact probability of one occupancy pattern.
pub type PatternProbability = Ratio<BigUint>;

/// Parameters `(e1, e2)` of the general single-qubit error
/// `[[e1*, e2*], [e2, −e1]] / √(|e1|² + |e2|²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralErrorParams {
    pub e1: Complex64,
    pub e2: Complex64,
}

impl GeneralErrorParams {
    pub fn new(e1: Complex64, e2: Complex64) -> Result<Self> {
        if e1.norm_sqr() + e2.norm_sqr() == 0.0 {
            return Err(Error::ZeroErrorVector);
        }
        Ok(Self { e1, e2 })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    #[default]
    Y,
    Z,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationErrorParams {
    pub axis: Axis,
    pub theta: f64,
}

impl RotationErrorParams {
    pub fn new(axis: Axis, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::RotationAngle(theta));
        }
        Ok(Self { axis, theta })
    }
}

/// Exponential decoherence with rate `lambda` observed after time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayModel {
    lambda: f64,
    t: f64,
}

impl DecayModel {
    pub fn new(lambda: f64, t: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::DecayRate(lambda));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::DecayTime(t));
        }
        Ok(Self { lambda, t })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.lambda, t)
    }
}

/// The discrete flips of the usual error-correction error set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flip {
    Bit,
    Phase,
    BitAndPhase,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorKind {
    Flip(Flip),
    GeneralUnitary(GeneralErrorParams),
    Rotation(RotationErrorParams),
    Decay(DecayModel),
}

impl ErrorKind {
    /// The single-qubit operator this kind applies, or `None` for decay,
    /// which is not unitary.
    pub fn operator(&self) -> Result<Option<Unitary2>> {
        Ok(match self {
            ErrorKind::Flip(f) => Some(pauli_unitary(*f)),
            ErrorKind::GeneralUnitary(p) => Some(build_general_unitary(p)?),
            ErrorKind::Rotation(p) => Some(rotation_unitary(p)),
            ErrorKind::Decay(_) => None,
        })
    }

    /// Substitutes a sweep strength: the angle of a rotation or the elapsed
    /// time of a decay. Flip and general-unitary kinds have no strength and
    /// are returned unchanged.
    pub fn with_strength(&self, strength: f64) -> Result<Self> {
        Ok(match self {
            ErrorKind::Rotation(p) => {
                ErrorKind::Rotation(RotationErrorParams::new(p.axis, strength)?)
            }
            ErrorKind::Decay(m) => ErrorKind::Decay(m.at_time(strength)?),
            other => *other,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorKind::Flip(Flip::Bit) => "bit_flip",
            ErrorKind::Flip(Flip::Phase) => "phase_flip",
            ErrorKind::Flip(Flip::BitAndPhase) => "bit_and_phase_flip",
            ErrorKind::GeneralUnitary(_) => "general_unitary",
            ErrorKind::Rotation(_) => "rotation",
            ErrorKind::Decay(_) => "decay",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistics {
    BoseEinstein,
    Fermi,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Placement {
    Fixed(Vec<usize>),
    BoseEinstein(usize),
    Fermi(usize),
    AllQubits,
}

impl Placement {
    /// Checks the rule against a register of `n_cells` qubits without
    /// sampling.
    pub fn validate(&self, n_cells: usize) -> Result<()> {
        match self {
            Placement::Fixed(qubits) => {
                if let Some(&q) = qubits.iter().find(|&&q| q >= n_cells) {
                    return Err(Error::QubitOutOfRange {
                        index: q,
                        n_qubits: n_cells,
                    });
                }
            }
            Placement::Fermi(n) if *n > n_cells => {
                return Err(Error::TooManyFermions {
                    cells: n_cells,
                    errors: *n,
                })
            }
            _ => {}
        }
        if n_cells == 0 {
            return Err(Error::NoCells);
        }
        Ok(())
    }

    /// Occupancy per qubit for one draw of this rule.
    pub fn occupancy<R: Rng + ?Sized>(&self, n_cells: usize, rng: &mut R) -> Result<Vec<usize>> {
        self.validate(n_cells)?;
        match self {
            Placement::Fixed(qubits) => {
                let mut occ = vec![0; n_cells];
                for &q in qubits {
                    occ[q] += 1;
                }
                Ok(occ)
            }
            Placement::AllQubits => Ok(vec![1; n_cells]),
            Placement::BoseEinstein(n) => {
                sample_placement(n_cells, *n, Statistics::BoseEinstein, rng)
            }
            Placement::Fermi(n) => sample_placement(n_cells, *n, Statistics::Fermi, rng),
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::Fixed(qubits) => {
                let list: Vec<String> = qubits.iter().map(usize::to_string).collect();
                write!(f, "fixed:{}", list.join(","))
            }
            Placement::BoseEinstein(n) => write!(f, "bose_einstein:{n}"),
            Placement::Fermi(n) => write!(f, "fermi:{n}"),
            Placement::AllQubits => f.write_str("all"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorModel {
    pub kind: ErrorKind,
    pub placement: Placement,
}

pub fn build_general_unitary(p: &GeneralErrorParams) -> Result<Unitary2> {
    let norm_sqr = p.e1.norm_sqr() + p.e2.norm_sqr();
    if norm_sqr == 0.0 {
        return Err(Error::ZeroErrorVector);
    }
    let s = 1.0 / norm_sqr.sqrt();
    Ok(Unitary2::from_entries([
        [p.e1.conj() * s, p.e2.conj() * s],
        [p.e2 * s, -p.e1 * s],
    ]))
}

/// Half-angle axis rotation `exp(−iθσ/2)`.
pub fn rotation_unitary(p: &RotationErrorParams) -> Unitary2 {
    let (s, c) = (p.theta / 2.0).sin_cos();
    let z = Complex64::new(0.0, 0.0);
    match p.axis {
        Axis::X => Unitary2::from_entries([
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ]),
        Axis::Y => Unitary2::from_real([[c, -s], [s, c]]),
        Axis::Z => Unitary2::from_entries([[Complex64::new(c, -s), z], [z, Complex64::new(c, s)]]),
    }
}

/// `X`, `Z`, or the combined flip taking `(a, b)` to `(−b, a)`.
pub fn pauli_unitary(flip: Flip) -> Unitary2 {
    match flip {
        Flip::Bit => Unitary2::pauli_x(),
        Flip::Phase => Unitary2::pauli_z(),
        // Z first, then X.
        Flip::BitAndPhase => Unitary2::pauli_x() * Unitary2::pauli_z(),
    }
}

/// `p_t = 1 − λ·e^{−λt}`.
///
/// At `t = 0` this is `1 − λ`, which is nonzero whenever `λ < 1`.
pub fn decoherence_prob(m: &DecayModel) -> Result<f64> {
    // Re-validate: the fields are private but the model may have been built
    // through `at_time` with a bad time.
    let m = DecayModel::new(m.lambda, m.t)?;
    Ok(1.0 - m.lambda * (-m.lambda * m.t).exp())
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Probability of each pattern of `errors` indistinguishable errors in
/// `cells` cells with unlimited occupancy: `1 / C(N + n − 1, n)`.
pub fn bose_einstein_pattern_prob(cells: usize, errors: usize) -> Result<PatternProbability> {
    if cells == 0 {
        return Err(Error::NoCells);
    }
    Ok(Ratio::new(
        BigUint::from(1u32),
        binomial(cells + errors - 1, errors),
    ))
}

/// Probability of each pattern with at most one error per cell:
/// `1 / C(N, n)`.
pub fn fermi_pattern_prob(cells: usize, errors: usize) -> Result<PatternProbability> {
    if errors > cells {
        return Err(Error::TooManyFermions { cells, errors });
    }
    Ok(Ratio::new(BigUint::from(1u32), binomial(cells, errors)))
}

/// Draws an occupancy vector uniformly among all patterns of the given
/// statistics.
///
/// Bose-Einstein draws use stars and bars: choosing which `n` of the
/// `N + n − 1` slots hold stars is a bijection onto multisets.
pub fn sample_placement<R: Rng + ?Sized>(
    cells: usize,
    errors: usize,
    statistics: Statistics,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if cells == 0 {
        return Err(Error::NoCells);
    }
    let mut occ = vec![0usize; cells];
    match statistics {
        Statistics::Fermi => {
            if errors > cells {
                return Err(Error::TooManyFermions { cells, errors });
            }
            for cell in index::sample(rng, cells, errors) {
                occ[cell] += 1;
            }
        }
        Statistics::BoseEinstein => {
            let slots = cells + errors - 1;
            let mut stars: Vec<usize> = index::sample(rng, slots, errors).into_vec();
            stars.sort_unstable();
            // A star in slot s has s − (stars before it) bars to its left.
            for (rank, slot) in stars.into_iter().enumerate() {
                occ[slot - rank] += 1;
            }
        }
    }
    Ok(occ)
}

/// Applies one draw of `model` to `state`.
///
/// Unitary kinds act once per unit of occupancy, so two bit flips landing on
/// the same qubit cancel. Decay scales the `|1⟩` amplitudes of each hit
/// qubit by `√(1 − p_t)` and renormalizes, which is a post-selected
/// amplitude-damping surrogate.
pub fn apply_error_model<R: Rng + ?Sized>(
    state: &StateVector,
    model: &ErrorModel,
    rng: &mut R,
) -> Result<StateVector> {
    let occupancy = model.placement.occupancy(state.n_qubits(), rng)?;
    apply_with_occupancy(state, &model.kind, &occupancy)
}

pub(crate) fn apply_with_occupancy(
    state: &StateVector,
    kind: &ErrorKind,
    occupancy: &[usize],
) -> Result<StateVector> {
    let mut out = state.clone();
    match kind.operator()? {
        Some(u) => {
            if !u.is_unitary(crate::statevec::INPUT_TOLERANCE) {
                return Err(Error::NotUnitary {
                    defect: u.unitarity_defect(),
                });
            }
            for (qubit, &count) in occupancy.iter().enumerate() {
                for _ in 0..count {
                    out.apply_1q_in_place(&u, qubit);
                }
            }
            Ok(out)
        }
        None => {
            let ErrorKind::Decay(m) = kind else {
                unreachable!()
            };
            if let Some((qubit, &count)) = occupancy.iter().enumerate().find(|(_, &c)| c > 1) {
                return Err(Error::DecayOccupancy { qubit, count });
            }
            let factor = (1.0 - decoherence_prob(m)?).sqrt();
            for (qubit, _) in occupancy.iter().enumerate().filter(|(_, &c)| c == 1) {
                out.scale_excited(qubit, factor);
            }
            out.renormalize()
        }
    }
}
