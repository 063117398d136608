//! Flat `key = value` experiment configs.
//!
//! ```text
//! # Steane code, one fermionic bit flip
//! code = steane7
//! error.kind = bit_flip
//! error.placement = fermi:1
//! theta = 0
//! trials = 100
//! ```
//!
//! Blank lines and `#` comments are ignored, values may be double-quoted,
//! and every key may appear at most once. The theta grid is given as a
//! single `theta`, an explicit `theta.values` list, or a range
//! `theta.min`, `theta.max`, `theta.points` and optional `theta.scale`
//! (`linear` or `log`).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use qec_lab::noise::{DecayModel, GeneralErrorParams, RotationErrorParams};
use qec_lab::{
    Axis, CodeName, Error as CoreError, ErrorKind, Estimator, ExperimentConfig, Flip, LogicalQubit,
    Placement,
};

use crate::report::shortest;

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0;

const KEYS: &[&str] = &[
    "code",
    "error.kind",
    "error.placement",
    "error.axis",
    "error.e1_re",
    "error.e1_im",
    "error.e2_re",
    "error.e2_im",
    "error.lambda",
    "theta",
    "theta.values",
    "theta.min",
    "theta.max",
    "theta.points",
    "theta.scale",
    "trials",
    "seed",
    "estimator",
    "logical.alpha_re",
    "logical.alpha_im",
    "logical.beta_re",
    "logical.beta_im",
];

const LOGICAL_KEYS: [&str; 4] = [
    "logical.alpha_re",
    "logical.alpha_im",
    "logical.beta_re",
    "logical.beta_im",
];
const GENERAL_KEYS: [&str; 4] = ["error.e1_re", "error.e1_im", "error.e2_re", "error.e2_im"];
const RANGE_KEYS: [&str; 4] = ["theta.min", "theta.max", "theta.points", "theta.scale"];

/// A config problem, anchored to the line that caused it when there is one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: key `{}`: {}", self.key, self.message),
            None => write!(f, "key `{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Entry {
    line: Option<usize>,
    value: String,
}

/// Parsed but unresolved key-value pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    entries: BTreeMap<String, Entry>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = Document::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError {
                    line: Some(line),
                    key: content.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            let value = unquote(value.trim());
            let err = |message: String| ConfigError {
                line: Some(line),
                key: key.to_string(),
                message,
            };
            if !KEYS.contains(&key) {
                return Err(err("unknown key".into()));
            }
            if let Some(prev) = doc.entries.get(key) {
                return Err(err(format!(
                    "duplicate key, first set on line {}",
                    prev.line.unwrap_or(0)
                )));
            }
            doc.entries.insert(
                key.to_string(),
                Entry {
                    line: Some(line),
                    value: value.to_string(),
                },
            );
        }
        Ok(doc)
    }

    /// Sets `key` from outside the file, replacing any file value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError {
                line: None,
                key: key.to_string(),
                message: "unknown key".into(),
            });
        }
        self.entries.insert(
            key.to_string(),
            Entry {
                line: None,
                value: value.to_string(),
            },
        );
        Ok(())
    }

    /// Drops every key under `prefix`, e.g. `theta` or `logical`, before
    /// a group is overridden as a whole.
    pub fn clear_group(&mut self, prefix: &str) {
        self.entries.retain(|k, _| {
            k != prefix
                && !k
                    .strip_prefix(prefix)
                    .is_some_and(|rest| rest.starts_with('.'))
        });
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.get(key).and_then(|e| e.line),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn required(&self, key: &str) -> Result<&str, ConfigError> {
        self.get(key)
            .map(|e| e.value.as_str())
            .ok_or_else(|| self.error(key, "missing required key"))
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|e| {
                e.value
                    .parse::<T>()
                    .map_err(|_| self.error(key, format!("invalid number {:?}", e.value)))
            })
            .transpose()
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.number::<f64>(key)? {
            Some(v) if !v.is_finite() => Err(self.error(key, format!("{v} is not finite"))),
            v => Ok(v),
        }
    }

    /// Rejects keys that have no meaning for the resolved error kind.
    fn forbid(&self, keys: &[&str], kind: &str) -> Result<(), ConfigError> {
        match keys.iter().find(|k| self.contains(k)) {
            Some(k) => Err(self.error(k, format!("does not apply to error kind {kind}"))),
            None => Ok(()),
        }
    }

    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let code: CodeName = self
            .required("code")?
            .parse()
            .map_err(|e: CoreError| self.error("code", e.to_string()))?;
        let n = code.build().n_physical();
        let error_kind = self.error_kind()?;
        let placement = match self.get("error.placement") {
            Some(e) => parse_placement(&e.value).map_err(|m| self.error("error.placement", m))?,
            None => Placement::AllQubits,
        };
        placement
            .validate(n)
            .map_err(|e| self.error("error.placement", format!("{e} for code {code}")))?;
        if matches!(error_kind, ErrorKind::Decay(_)) && can_stack(&placement) {
            return Err(self.error(
                "error.placement",
                "decay cannot hit one qubit twice; use fermi, all or distinct fixed qubits",
            ));
        }
        let theta_grid = self.theta_grid()?;
        for &theta in &theta_grid {
            error_kind
                .with_strength(theta)
                .map_err(|e| self.error(self.theta_key(), format!("{e} (value {theta})")))?;
        }
        let trials = self.number::<usize>("trials")?.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(self.error("trials", "must be at least 1"));
        }
        let seed = self.number::<u64>("seed")?.unwrap_or(DEFAULT_SEED);
        let estimator = match self.get("estimator") {
            Some(e) => e
                .value
                .parse::<Estimator>()
                .map_err(|err| self.error("estimator", err.to_string()))?,
            None => Estimator::default(),
        };
        let logical_input = self.logical()?;
        let config = ExperimentConfig {
            code,
            error_kind,
            placement,
            theta_grid,
            trials,
            seed,
            logical_input,
            estimator,
        };
        config
            .validate()
            .map_err(|e| self.error("code", e.to_string()))?;
        Ok(config)
    }

    fn error_kind(&self) -> Result<ErrorKind, ConfigError> {
        let name = self.required("error.kind")?;
        let kind = match name {
            "bit_flip" => ErrorKind::Flip(Flip::Bit),
            "phase_flip" => ErrorKind::Flip(Flip::Phase),
            "bit_and_phase_flip" => ErrorKind::Flip(Flip::BitAndPhase),
            "rotation" => {
                let axis = match self.get("error.axis").map(|e| e.value.as_str()) {
                    None | Some("y") => Axis::Y,
                    Some("x") => Axis::X,
                    Some("z") => Axis::Z,
                    Some(other) => {
                        return Err(self.error("error.axis", format!("unknown axis {other:?}")))
                    }
                };
                ErrorKind::Rotation(
                    RotationErrorParams::new(axis, 0.0).expect("zero angle is valid"),
                )
            }
            "general_unitary" => {
                let [e1_re, e1_im, e2_re, e2_im] = GENERAL_KEYS.map(|k| self.real(k));
                let e1 = Complex64::new(e1_re?.unwrap_or(0.0), e1_im?.unwrap_or(0.0));
                let e2 = Complex64::new(e2_re?.unwrap_or(0.0), e2_im?.unwrap_or(0.0));
                let params = GeneralErrorParams::new(e1, e2)
                    .map_err(|e| self.error("error.e1_re", e.to_string()))?;
                ErrorKind::GeneralUnitary(params)
            }
            "decay" => {
                let lambda = self
                    .real("error.lambda")?
                    .ok_or_else(|| self.error("error.lambda", "missing required key"))?;
                let model = DecayModel::new(lambda, 0.0)
                    .map_err(|e| self.error("error.lambda", e.to_string()))?;
                ErrorKind::Decay(model)
            }
            other => return Err(self.error("error.kind", format!("unknown error kind {other:?}"))),
        };
        if !matches!(kind, ErrorKind::Rotation(_)) {
            self.forbid(&["error.axis"], name)?;
        }
        if !matches!(kind, ErrorKind::GeneralUnitary(_)) {
            self.forbid(&GENERAL_KEYS, name)?;
        }
        if !matches!(kind, ErrorKind::Decay(_)) {
            self.forbid(&["error.lambda"], name)?;
        }
        Ok(kind)
    }

    fn theta_key(&self) -> &'static str {
        ["theta", "theta.values", "theta.min"]
            .into_iter()
            .find(|k| self.contains(k))
            .unwrap_or("theta")
    }

    fn theta_grid(&self) -> Result<Vec<f64>, ConfigError> {
        let forms = [
            self.contains("theta"),
            self.contains("theta.values"),
            RANGE_KEYS.iter().any(|k| self.contains(k)),
        ];
        match forms.iter().filter(|&&f| f).count() {
            0 => {
                return Err(self.error(
                    "theta",
                    "missing: give theta, theta.values or a theta range",
                ))
            }
            1 => {}
            _ => {
                return Err(self.error(
                    self.theta_key(),
                    "give only one of theta, theta.values or a theta range",
                ))
            }
        }
        let grid = if let Some(v) = self.real("theta")? {
            vec![v]
        } else if let Some(e) = self.get("theta.values") {
            e.value
                .split(',')
                .map(|s| {
                    s.trim().parse::<f64>().map_err(|_| {
                        self.error("theta.values", format!("invalid number {:?}", s.trim()))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?
        } else {
            self.theta_range()?
        };
        let key = self.theta_key();
        if let Some(t) = grid.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(self.error(key, format!("value {t} must be finite and non-negative")));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(self.error(key, "values must be strictly increasing"));
        }
        Ok(grid)
    }

    fn theta_range(&self) -> Result<Vec<f64>, ConfigError> {
        let min = self
            .real("theta.min")?
            .ok_or_else(|| self.error("theta.min", "missing required key"))?;
        let max = self
            .real("theta.max")?
            .ok_or_else(|| self.error("theta.max", "missing required key"))?;
        let points = self
            .number::<usize>("theta.points")?
            .ok_or_else(|| self.error("theta.points", "missing required key"))?;
        let log = match self.get("theta.scale").map(|e| e.value.as_str()) {
            None | Some("linear") => false,
            Some("log") => true,
            Some(other) => {
                return Err(self.error(
                    "theta.scale",
                    format!("expected linear or log, got {other:?}"),
                ))
            }
        };
        if points == 0 {
            return Err(self.error("theta.points", "must be at least 1"));
        }
        if points == 1 && min != max {
            return Err(self.error("theta.points", "a single point needs theta.min = theta.max"));
        }
        if points > 1 && min >= max {
            return Err(self.error("theta.max", "must exceed theta.min"));
        }
        if log && min <= 0.0 {
            return Err(self.error("theta.min", "log scale needs a positive minimum"));
        }
        Ok(range_grid(min, max, points, log))
    }

    fn logical(&self) -> Result<LogicalQubit, ConfigError> {
        let present: Vec<&str> = LOGICAL_KEYS
            .iter()
            .copied()
            .filter(|k| self.contains(k))
            .collect();
        if present.is_empty() {
            return Ok(LogicalQubit::zero());
        }
        let [a_re, a_im, b_re, b_im] = LOGICAL_KEYS.map(|k| self.real(k));
        let alpha = Complex64::new(a_re?.unwrap_or(0.0), a_im?.unwrap_or(0.0));
        let beta = Complex64::new(b_re?.unwrap_or(0.0), b_im?.unwrap_or(0.0));
        LogicalQubit::new(alpha, beta).map_err(|_| {
            let norm = alpha.norm_sqr() + beta.norm_sqr();
            self.error(
                present[0],
                format!("logical input is not normalized: |alpha|^2 + |beta|^2 = {norm}"),
            )
        })
    }
}

/// Evenly spaced grid, geometrically when `log`. Endpoints are exact.
pub fn range_grid(min: f64, max: f64, points: usize, log: bool) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| match i {
            0 => min,
            i if i == points - 1 => max,
            i if log => 10f64.powf(min.log10() + (max.log10() - min.log10()) * i as f64 / last),
            i => min + (max - min) * i as f64 / last,
        })
        .collect()
}

fn can_stack(placement: &Placement) -> bool {
    match placement {
        Placement::BoseEinstein(n) => *n > 1,
        Placement::Fixed(qubits) => qubits
            .iter()
            .enumerate()
            .any(|(i, q)| qubits[..i].contains(q)),
        _ => false,
    }
}

fn unquote(value: &str) -> &str {
    value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(value)
}

/// Parses `all`, `fixed:0,3`, `bose_einstein:n` (or `be:n`) and
/// `fermi:n` (or `fd:n`).
pub fn parse_placement(text: &str) -> Result<Placement, String> {
    if text == "all" {
        return Ok(Placement::AllQubits);
    }
    let (rule, arg) = text
        .split_once(':')
        .ok_or_else(|| format!("unknown placement {text:?}"))?;
    let count = || {
        arg.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid error count {arg:?}"))
    };
    match rule.trim() {
        "fixed" => arg
            .split(',')
            .map(|q| {
                q.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("invalid qubit index {q:?}"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Placement::Fixed),
        "bose_einstein" | "be" => count().map(Placement::BoseEinstein),
        "fermi" | "fd" => count().map(Placement::Fermi),
        other => Err(format!("unknown placement rule {other:?}")),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    Document::parse(text)?.resolve()
}

/// Writes `config` back in the flat format. Grids are emitted as explicit
/// `theta.values` so that reparsing reproduces them bit for bit.
pub fn emit(config: &ExperimentConfig) -> String {
    let mut lines = vec![
        format!("code = {}", config.code),
        format!("error.kind = {}", config.error_kind.name()),
    ];
    match &config.error_kind {
        ErrorKind::Rotation(p) => lines.push(format!("error.axis = {}", p.axis.name())),
        ErrorKind::GeneralUnitary(p) => {
            lines.push(format!("error.e1_re = {}", shortest(p.e1.re)));
            lines.push(format!("error.e1_im = {}", shortest(p.e1.im)));
            lines.push(format!("error.e2_re = {}", shortest(p.e2.re)));
            lines.push(format!("error.e2_im = {}", shortest(p.e2.im)));
        }
        ErrorKind::Decay(m) => lines.push(format!("error.lambda = {}", shortest(m.lambda()))),
        ErrorKind::Flip(_) => {}
    }
    lines.push(format!("error.placement = {}", config.placement));
    let grid: Vec<String> = config.theta_grid.iter().map(|&t| shortest(t)).collect();
    lines.push(format!("theta.values = {}", grid.join(",")));
    lines.push(format!("trials = {}", config.trials));
    lines.push(format!("seed = {}", config.seed));
    lines.push(format!("estimator = {}", config.estimator));
    let (a, b) = (config.logical_input.alpha(), config.logical_input.beta());
    lines.push(format!("logical.alpha_re = {}", shortest(a.re)));
    lines.push(format!("logical.alpha_im = {}", shortest(a.im)));
    lines.push(format!("logical.beta_re = {}", shortest(b.re)));
    lines.push(format!("logical.beta_im = {}", shortest(b.im)));
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
