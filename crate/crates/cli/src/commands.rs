use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qec_lab::codes::{self, SyndromeAverager};
use qec_lab::experiments::{self, trial_rng, Experiment, SUPPORT_THRESHOLD};
use qec_lab::noise::{bose_einstein_pattern_prob, fermi_pattern_prob};
use qec_lab::{CodeName, ExperimentConfig, LogicalQubit};

use crate::config::{ConfigError, Document};
use crate::error::CliError;
use crate::report;

#[derive(Debug, Parser)]
#[command(
    name = "qeclab",
    version,
    about = "Quantum error-correction laboratory"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Flags shared by every command. Overrides win over config-file values.
#[derive(Debug, Default, Args)]
pub struct Common {
    /// Experiment config file (flat `key = value` lines)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the artifact here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed [default: 0]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Code: shor9, steane7 or uncoded
    #[arg(long, global = true)]
    pub code: Option<String>,
    /// Error kind, e.g. rotation, bit_flip, general_unitary, decay
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// Error placement: all, fixed:i,j, bose_einstein:n or fermi:n
    #[arg(long, global = true)]
    pub placement: Option<String>,
    /// Strength: one value, or a comma-separated grid for sweep
    #[arg(long, global = true)]
    pub theta: Option<String>,
    /// Trials per grid point
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Syndrome estimator: branch_average or sampled
    #[arg(long, global = true)]
    pub estimator: Option<String>,
    /// Logical input a_re,a_im[,b_re,b_im]; with two numbers beta is real
    /// and non-negative
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub logical: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the encoded logical state
    Encode {
        /// Decimals per amplitude
        #[arg(long, default_value_t = 10)]
        digits: usize,
    },
    /// Apply one draw of the error model and print the corrupted state
    Inject {
        #[arg(long, default_value_t = 10)]
        digits: usize,
    },
    /// Inject, measure the syndrome, recover and report the fidelity
    Correct,
    /// Run the theta sweep and write the CSV
    Sweep,
    /// Support of the encoded |0> before and after rotating every qubit
    Proliferate,
    /// Damage to a concentrated amplitude versus its concentration
    Sensitivity {
        /// Register size
        #[arg(long, default_value_t = 4)]
        qubits: usize,
        /// Comma-separated target probabilities
        #[arg(long, default_value = "0.05,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95")]
        probs: String,
    },
    /// Exact probability of one occupancy pattern
    Stats {
        /// Bose-Einstein statistics for N cells and n errors
        #[arg(long, num_args = 2, value_names = ["N", "n"], conflicts_with = "fd", required_unless_present = "fd")]
        be: Option<Vec<usize>>,
        /// Fermi statistics for N cells and n errors
        #[arg(long, num_args = 2, value_names = ["N", "n"])]
        fd: Option<Vec<usize>>,
    },
}

const DEFAULT_PROLIFERATION_THETA: f64 = 0.01;
const DEFAULT_SENSITIVITY_THETA: f64 = 0.1;

/// Runs one command, sending its artifact to `--out` or to `stdout`.
pub fn run_command(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = render(cfg)?;
    match &cfg.common.out {
        Some(path) => report::write_atomic(path, &text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                action: "cannot write",
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn render(cfg: &RunConfig) -> Result<String, CliError> {
    let common = &cfg.common;
    match &cfg.command {
        Command::Encode { digits } => {
            let enc = encoding(common)?;
            let state = enc.code.build().encode(&enc.logical_input);
            Ok(report::render_kets(&state, *digits))
        }
        Command::Inject { digits } => {
            let (exp, theta) = single_point(common)?;
            let code = exp.config().code.build();
            let mut rng = trial_rng(exp.config().seed, 0, 0, 0);
            let occupancy = exp
                .config()
                .placement
                .occupancy(code.n_physical(), &mut rng)?;
            let state = exp.corrupt_with(theta, &occupancy)?;
            let mut out = format!(
                "# occupancy={}\n# support={}\n",
                join(&occupancy),
                state.support_size(SUPPORT_THRESHOLD)
            );
            out.push_str(&report::render_kets(&state, *digits));
            Ok(out)
        }
        Command::Correct => {
            let (exp, theta) = single_point(common)?;
            let config = exp.config();
            let code = config.code.build();
            let mut rng = trial_rng(config.seed, 0, 0, 0);
            let occupancy = config.placement.occupancy(code.n_physical(), &mut rng)?;
            let corrupted = exp.corrupt_with(theta, &occupancy)?;
            let measured = codes::extract_syndrome(&corrupted, &code, &mut rng)?;
            let correction = code.correction(&measured.syndrome)?.to_string();
            let recovered = codes::recover(&measured, &code)?;
            let before = codes::logical_fidelity(&corrupted, &code, &config.logical_input)?;
            let after = codes::logical_fidelity(&recovered, &code, &config.logical_input)?;
            let expected = SyndromeAverager::new(&code, &config.logical_input)?
                .expected_infidelity(&corrupted)?;
            Ok(format!(
                "occupancy={}\nsyndrome={}\ncorrection={}\ninfidelity_before={}\ninfidelity_after={}\nexpected_infidelity_after={}\n",
                join(&occupancy),
                measured.syndrome,
                correction,
                (1.0 - before).max(0.0),
                (1.0 - after).max(0.0),
                expected,
            ))
        }
        Command::Sweep => {
            let config = experiment_config(common)?;
            let result = Experiment::new(config.clone())?.sweep()?;
            report::render_csv(&result, Some(&config))
        }
        Command::Proliferate => {
            let code = code_flag(common)?.unwrap_or(CodeName::Steane7);
            let theta = theta_flag(common)?.unwrap_or(DEFAULT_PROLIFERATION_THETA);
            let (before, after) =
                experiments::proliferation_experiment(code, theta, SUPPORT_THRESHOLD)?;
            Ok(format!(
                "code,theta,support_before,support_after\n{code},{theta},{before},{after}\n"
            ))
        }
        Command::Sensitivity { qubits, probs } => {
            let theta = theta_flag(common)?.unwrap_or(DEFAULT_SENSITIVITY_THETA);
            let probs = parse_list(probs).map_err(|message| CliError::Argument {
                flag: "--probs",
                message,
            })?;
            let rows = experiments::sensitivity_table(*qubits, &probs, theta)?;
            Ok(report::render_sensitivity(*qubits, theta, &rows))
        }
        Command::Stats { be, fd } => {
            let prob = match (be, fd) {
                (Some(v), _) => bose_einstein_pattern_prob(v[0], v[1])?,
                (_, Some(v)) => fermi_pattern_prob(v[0], v[1])?,
                (None, None) => unreachable!("clap requires one of --be and --fd"),
            };
            Ok(format!("{prob}\n"))
        }
    }
}

/// Code and logical input only, for `encode`.
struct Encoding {
    code: CodeName,
    logical_input: LogicalQubit,
}

fn encoding(common: &Common) -> Result<Encoding, CliError> {
    if common.config.is_some() {
        let config = experiment_config(common)?;
        return Ok(Encoding {
            code: config.code,
            logical_input: config.logical_input,
        });
    }
    let code = code_flag(common)?.ok_or_else(|| ConfigError {
        line: None,
        key: "code".into(),
        message: "missing: pass --code or --config".into(),
    })?;
    let mut doc = Document::default();
    apply_logical(&mut doc, common)?;
    doc.set("code", code.as_str())?;
    doc.set("error.kind", "rotation")?;
    doc.set("theta", "0")?;
    let config = doc.resolve()?;
    Ok(Encoding {
        code,
        logical_input: config.logical_input,
    })
}

/// Reads `--config`, then applies the flag overrides. Without a file the
/// error kind defaults to `rotation`.
pub fn experiment_config(common: &Common) -> Result<ExperimentConfig, CliError> {
    build_config(common, None)
}

fn build_config(
    common: &Common,
    default_theta: Option<&str>,
) -> Result<ExperimentConfig, CliError> {
    let mut doc = match &common.config {
        Some(path) => Document::parse(&read(path)?)?,
        None => {
            let mut doc = Document::default();
            doc.set("error.kind", "rotation")?;
            doc
        }
    };
    if let Some(code) = &common.code {
        doc.set("code", code)?;
    }
    if let Some(kind) = &common.kind {
        doc.set("error.kind", kind)?;
    }
    if let Some(p) = &common.placement {
        doc.set("error.placement", p)?;
    }
    if let Some(theta) = &common.theta {
        doc.clear_group("theta");
        doc.set("theta.values", theta)?;
    }
    if let Some(trials) = common.trials {
        doc.set("trials", &trials.to_string())?;
    }
    if let Some(seed) = common.seed {
        doc.set("seed", &seed.to_string())?;
    }
    if let Some(e) = &common.estimator {
        doc.set("estimator", e)?;
    }
    apply_logical(&mut doc, common)?;
    if let Some(theta) = default_theta {
        if !["theta", "theta.values", "theta.min"]
            .iter()
            .any(|k| doc.contains(k))
        {
            doc.set("theta", theta)?;
        }
    }
    Ok(doc.resolve()?)
}

fn apply_logical(doc: &mut Document, common: &Common) -> Result<(), CliError> {
    let Some(text) = &common.logical else {
        return Ok(());
    };
    let bad = |message: String| CliError::Argument {
        flag: "--logical",
        message,
    };
    let v = parse_list(text).map_err(bad)?;
    let (a_re, a_im, b_re, b_im) = match v[..] {
        [a_re, a_im] => {
            let rest = 1.0 - (a_re * a_re + a_im * a_im);
            if rest < -qec_lab::statevec::INPUT_TOLERANCE {
                return Err(bad(format!("|alpha|^2 = {} exceeds 1", 1.0 - rest)));
            }
            (a_re, a_im, rest.max(0.0).sqrt(), 0.0)
        }
        [a_re, a_im, b_re, b_im] => (a_re, a_im, b_re, b_im),
        _ => {
            return Err(bad(format!(
                "expected 2 or 4 comma-separated numbers, got {}",
                v.len()
            )))
        }
    };
    doc.clear_group("logical");
    for (key, value) in [
        ("logical.alpha_re", a_re),
        ("logical.alpha_im", a_im),
        ("logical.beta_re", b_re),
        ("logical.beta_im", b_im),
    ] {
        doc.set(key, &value.to_string())?;
    }
    Ok(())
}

/// An experiment whose grid holds exactly one strength, zero unless given.
fn single_point(common: &Common) -> Result<(Experiment, f64), CliError> {
    let config = build_config(common, Some("0"))?;
    if config.theta_grid.len() != 1 {
        return Err(CliError::Argument {
            flag: "--theta",
            message: format!(
                "this command takes one strength, the config has {}",
                config.theta_grid.len()
            ),
        });
    }
    let theta = config.theta_grid[0];
    Ok((Experiment::new(config)?, theta))
}

fn code_flag(common: &Common) -> Result<Option<CodeName>, CliError> {
    common
        .code
        .as_deref()
        .map(|c| {
            c.parse::<CodeName>().map_err(|e| CliError::Argument {
                flag: "--code",
                message: e.to_string(),
            })
        })
        .transpose()
}

fn theta_flag(common: &Common) -> Result<Option<f64>, CliError> {
    common
        .theta
        .as_deref()
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| CliError::Argument {
                flag: "--theta",
                message: format!("expected one number, got {t:?}"),
            })
        })
        .transpose()
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number {:?}", s.trim()))
        })
        .collect()
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        action: "cannot read",
        path: path.to_path_buf(),
        source,
    })
}
