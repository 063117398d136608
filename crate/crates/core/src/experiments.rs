//! Monte Carlo harness: encode, inject, extract a syndrome, recover, and
//! compare against the ideal encoding.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! `(seed, grid index, trial index, role)`, so sweeps give bit-identical
//! results no matter how rayon schedules them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{self, CodeName, CodeSpec, LogicalQubit, SyndromeAverager};
use crate::error::{Error, Result};
use crate::noise::{self, Axis, ErrorKind, ErrorModel, Placement, RotationErrorParams};
use crate::statevec::StateVector;

/// Amplitudes at or below this modulus do not count towards support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Infidelities below this are treated as numerical zero by the slope fit.
pub const FIT_FLOOR: f64 = 1e-13;

/// How a trial turns the post-error state into an infidelity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Estimator {
    /// Sample one syndrome by the Born rule, as a physical run would.
    Sampled,
    /// Average the recovered infidelity over every syndrome outcome,
    /// weighted by its Born probability. Same expectation as `Sampled`,
    /// without the variance from rare multi-error syndromes.
    #[default]
    BranchAverage,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Sampled => "sampled",
            Estimator::BranchAverage => "branch_average",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sampled" => Ok(Estimator::Sampled),
            "branch_average" => Ok(Estimator::BranchAverage),
            _ => Err(Error::Config(format!("unknown estimator {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub code: CodeName,
    /// Rotation angles and decay times are replaced by each grid value.
    pub error_kind: ErrorKind,
    pub placement: Placement,
    pub theta_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub logical_input: LogicalQubit,
    pub estimator: Estimator,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.theta_grid.is_empty() {
            return Err(Error::Config("theta grid is empty".into()));
        }
        if let Some(t) = self.theta_grid.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::Config(format!(
                "theta value {t} must be finite and non-negative"
            )));
        }
        if self.theta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "theta grid must be strictly increasing".into(),
            ));
        }
        let n = self.code.build().n_physical();
        self.placement.validate(n)?;
        for &theta in &self.theta_grid {
            self.error_kind.with_strength(theta)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialOutcome {
    pub infidelity: f64,
    pub support: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub mean_infidelity_coded: f64,
    pub std_coded: f64,
    pub mean_infidelity_uncoded: f64,
    pub std_uncoded: f64,
    pub mean_support: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// `None` when fewer than two grid points clear the fit floor.
    pub slope_coded: Option<f64>,
    pub slope_uncoded: Option<f64>,
}

/// A configuration with its codes and reference states built once.
#[derive(Clone, Debug)]
pub struct Experiment {
    config: ExperimentConfig,
    code: CodeSpec,
    baseline: CodeSpec,
    averager: SyndromeAverager,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let code = config.code.build();
        Ok(Self {
            averager: SyndromeAverager::new(&code, &config.logical_input)?,
            code,
            baseline: codes::uncoded(),
            config,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    fn corrupt<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Result<StateVector> {
        let occupancy = self
            .config
            .placement
            .occupancy(self.code.n_physical(), rng)?;
        self.corrupt_with(theta, &occupancy)
    }

    /// The encoded input after the error acts, at strength `theta`, on the
    /// given per-qubit occupancy.
    pub fn corrupt_with(&self, theta: f64, occupancy: &[usize]) -> Result<StateVector> {
        let kind = self.config.error_kind.with_strength(theta)?;
        noise::apply_with_occupancy(
            &self.code.encode(&self.config.logical_input),
            &kind,
            occupancy,
        )
    }

    /// One physical run: the syndrome is sampled.
    pub fn run_trial<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Result<TrialOutcome> {
        let corrupted = self.corrupt(theta, rng)?;
        let support = corrupted.support_size(SUPPORT_THRESHOLD);
        let measured = codes::extract_syndrome(&corrupted, &self.code, rng)?;
        let recovered = codes::recover(&measured, &self.code)?;
        let fidelity = codes::logical_fidelity(&recovered, &self.code, &self.config.logical_input)?;
        Ok(TrialOutcome {
            infidelity: (1.0 - fidelity).clamp(0.0, 1.0),
            support,
        })
    }

    /// One error draw, with the infidelity averaged over all syndromes.
    pub fn expected_trial<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Result<TrialOutcome> {
        let occupancy = self
            .config
            .placement
            .occupancy(self.code.n_physical(), rng)?;
        self.expected_for(theta, &occupancy)
    }

    /// Branch-averaged outcome for one fixed placement; deterministic.
    fn expected_for(&self, theta: f64, occupancy: &[usize]) -> Result<TrialOutcome> {
        let corrupted = self.corrupt_with(theta, occupancy)?;
        Ok(TrialOutcome {
            infidelity: self.averager.expected_infidelity(&corrupted)?,
            support: corrupted.support_size(SUPPORT_THRESHOLD),
        })
    }

    /// The same error kind applied exactly once to a bare qubit.
    pub fn uncoded_trial<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Result<f64> {
        let model = ErrorModel {
            kind: self.config.error_kind.with_strength(theta)?,
            placement: Placement::AllQubits,
        };
        let bare = self.baseline.encode(&self.config.logical_input);
        let corrupted = noise::apply_error_model(&bare, &model, rng)?;
        Ok((1.0 - corrupted.fidelity(&bare)?).clamp(0.0, 1.0))
    }

    /// Coded outcomes of every trial at one grid point, in trial order.
    ///
    /// Under [`Estimator::BranchAverage`] an outcome depends only on the
    /// sampled placement, so each distinct occupancy is evaluated once.
    fn coded_outcomes(&self, grid_index: usize, theta: f64) -> Result<Vec<TrialOutcome>> {
        let (seed, n) = (self.config.seed, self.code.n_physical());
        let trials = 0..self.config.trials;
        match self.config.estimator {
            Estimator::Sampled => trials
                .into_par_iter()
                .map(|t| self.run_trial(theta, &mut trial_rng(seed, grid_index, t, 0)))
                .collect(),
            Estimator::BranchAverage => {
                let placements = trials
                    .into_par_iter()
                    .map(|t| {
                        self.config
                            .placement
                            .occupancy(n, &mut trial_rng(seed, grid_index, t, 0))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let distinct: Vec<&Vec<usize>> = placements
                    .iter()
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                let evaluated: BTreeMap<&Vec<usize>, TrialOutcome> = distinct
                    .into_par_iter()
                    .map(|occ| Ok((occ, self.expected_for(theta, occ)?)))
                    .collect::<Result<_>>()?;
                Ok(placements.iter().map(|occ| evaluated[occ]).collect())
            }
        }
    }

    pub fn sweep(&self) -> Result<SweepResult> {
        let mut rows = Vec::with_capacity(self.config.theta_grid.len());
        for (g, &theta) in self.config.theta_grid.iter().enumerate() {
            let seed = self.config.seed;
            let coded = self.coded_outcomes(g, theta)?;
            let bare = (0..self.config.trials)
                .into_par_iter()
                .map(|t| self.uncoded_trial(theta, &mut trial_rng(seed, g, t, 1)))
                .collect::<Result<Vec<_>>>()?;
            let support: Vec<f64> = coded.iter().map(|c| c.support as f64).collect();
            let coded: Vec<f64> = coded.iter().map(|c| c.infidelity).collect();
            let (mean_c, std_c) = mean_std(&coded);
            let (mean_u, std_u) = mean_std(&bare);
            rows.push(SweepRow {
                theta,
                mean_infidelity_coded: mean_c,
                std_coded: std_c,
                mean_infidelity_uncoded: mean_u,
                std_uncoded: std_u,
                mean_support: mean_std(&support).0,
            });
        }
        let slope = |pick: fn(&SweepRow) -> f64| {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .map(|r| (r.theta, pick(r)))
                .filter(|&(t, v)| t > 0.0 && v >= FIT_FLOOR)
                .collect();
            fit_power_law(&points).ok()
        };
        Ok(SweepResult {
            slope_coded: slope(|r| r.mean_infidelity_coded),
            slope_uncoded: slope(|r| r.mean_infidelity_uncoded),
            rows,
        })
    }
}

/// Independent stream for one trial of one grid point.
pub fn trial_rng(seed: u64, grid_index: usize, trial: usize, role: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((grid_index as u64) << 40) | ((trial as u64) << 1) | role);
    rng
}

/// Ordered mean and sample standard deviation (zero for one sample).
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_trial<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    theta: f64,
    rng: &mut R,
) -> Result<TrialOutcome> {
    Experiment::new(config.clone())?.run_trial(theta, rng)
}

pub fn sweep_theta(config: &ExperimentConfig) -> Result<SweepResult> {
    Experiment::new(config.clone())?.sweep()
}

/// Least-squares slope of `log infidelity` against `log theta`.
///
/// Points with infidelity below [`FIT_FLOOR`] are dropped before fitting.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<f64> {
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(x.is_finite() && y.is_finite() && *x > 0.0 && *y > 0.0))
    {
        return Err(Error::PowerLaw(format!(
            "point ({x}, {y}) is not positive and finite"
        )));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y >= FIT_FLOOR)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::PowerLaw(format!(
            "need at least two points above {FIT_FLOOR:e}, got {}",
            logs.len()
        )));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::PowerLaw("all theta values coincide".into()));
    }
    Ok(sxy / sxx)
}

fn rotate_all(state: &StateVector, theta: f64) -> StateVector {
    let u = noise::rotation_unitary(&RotationErrorParams {
        axis: Axis::Y,
        theta,
    });
    let mut out = state.clone();
    for q in 0..out.n_qubits() {
        out.apply_1q_in_place(&u, q);
    }
    out
}

/// Support of the encoded `|0⟩` before and after rotating every physical
/// qubit by `theta` about y.
pub fn proliferation_experiment(
    code: CodeName,
    theta: f64,
    threshold: f64,
) -> Result<(usize, usize)> {
    RotationErrorParams::new(Axis::Y, theta)?;
    let encoded = code.build().encode(&LogicalQubit::zero());
    let before = encoded.support_size(threshold);
    let after = rotate_all(&encoded, theta).support_size(threshold);
    Ok((before, after))
}

/// Index of the concentrated amplitude in the sensitivity state.
pub const SENSITIVITY_TARGET: usize = 0;

/// Concentrated state of the sensitivity experiment: probability `p` on
/// [`SENSITIVITY_TARGET`] and `1 − p` spread evenly over the rest.
fn concentrated_state(n_qubits: usize, target_prob: f64, theta: f64) -> Result<StateVector> {
    if !(2..=10).contains(&n_qubits) {
        return Err(Error::SensitivityQubits(n_qubits));
    }
    if !(target_prob > 0.0 && target_prob < 1.0) {
        return Err(Error::Probability(target_prob));
    }
    RotationErrorParams::new(Axis::Y, theta)?;
    let dim = 1usize << n_qubits;
    let rest = ((1.0 - target_prob) / (dim - 1) as f64).sqrt();
    let amps = (0..dim)
        .map(|k| {
            let a = if k == SENSITIVITY_TARGET {
                target_prob.sqrt()
            } else {
                rest
            };
            Complex64::new(a, 0.0)
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

/// Relative loss `(p − p')/p` of the probability `p` concentrated on one
/// basis state when every qubit is rotated by `theta`.
pub fn sensitivity_experiment(n_qubits: usize, target_prob: f64, theta: f64) -> Result<f64> {
    let prepared = concentrated_state(n_qubits, target_prob, theta)?;
    let after = rotate_all(&prepared, theta).probability(SENSITIVITY_TARGET);
    Ok((target_prob - after) / target_prob)
}

/// Mean relative change `|q' − q|/q` of the probabilities of the
/// non-target basis states under the same rotation. Once the target holds
/// most of the probability, this grows with the concentration.
pub fn background_disturbance(n_qubits: usize, target_prob: f64, theta: f64) -> Result<f64> {
    let prepared = concentrated_state(n_qubits, target_prob, theta)?;
    let after = rotate_all(&prepared, theta);
    let others = prepared.dim() - 1;
    let q = (1.0 - target_prob) / others as f64;
    let total: f64 = (0..prepared.dim())
        .filter(|&k| k != SENSITIVITY_TARGET)
        .map(|k| (after.probability(k) - q).abs() / q)
        .sum();
    Ok(total / others as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensitivityRow {
    pub target_prob: f64,
    pub relative_damage: f64,
    pub background_disturbance: f64,
}

/// Both sensitivity measures over a grid of concentrations.
pub fn sensitivity_table(
    n_qubits: usize,
    probs: &[f64],
    theta: f64,
) -> Result<Vec<SensitivityRow>> {
    probs
        .iter()
        .map(|&p| {
            Ok(SensitivityRow {
                target_prob: p,
                relative_damage: sensitivity_experiment(n_qubits, p, theta)?,
                background_disturbance: background_disturbance(n_qubits, p, theta)?,
            })
        })
        .collect()
}
