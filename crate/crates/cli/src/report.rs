//! Text and CSV artifacts. Every file is written to a temporary sibling and
//! renamed into place, so a failed run never leaves a partial file.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use qec_lab::experiments::SensitivityRow;
use qec_lab::{ExperimentConfig, StateVector, SweepResult};

use crate::config;
use crate::error::CliError;

pub const CSV_HEADER: &str =
    "theta,mean_infid_coded,std_coded,mean_infid_uncoded,std_uncoded,mean_support";

/// Amplitudes below this magnitude are not listed.
pub const KET_THRESHOLD: f64 = 1e-12;

/// The shorter of the plain and exponent renderings of `v`. Both carry the
/// fewest digits that parse back to exactly `v`.
pub fn shortest(v: f64) -> String {
    let plain = v.to_string();
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

/// Sweep CSV, optionally preceded by the resolved config as `#` comments.
pub fn render_csv(
    result: &SweepResult,
    config: Option<&ExperimentConfig>,
) -> Result<String, CliError> {
    if result.rows.is_empty() {
        return Err(CliError::EmptyResult);
    }
    let mut out = String::new();
    if let Some(cfg) = config {
        for line in config::emit(cfg).lines() {
            writeln!(out, "# {line}").unwrap();
        }
    }
    writeln!(out, "{CSV_HEADER}").unwrap();
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            shortest(r.theta),
            shortest(r.mean_infidelity_coded),
            shortest(r.std_coded),
            shortest(r.mean_infidelity_uncoded),
            shortest(r.std_uncoded),
            shortest(r.mean_support)
        )
        .unwrap();
    }
    writeln!(out, "# slope_coded={}", slope(result.slope_coded)).unwrap();
    writeln!(out, "# slope_uncoded={}", slope(result.slope_uncoded)).unwrap();
    Ok(out)
}

fn slope(s: Option<f64>) -> String {
    s.map_or_else(|| "nan".to_string(), shortest)
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<(), CliError> {
    write_atomic(path, &render_csv(result, None)?)
}

/// Writes `contents` to a temporary file beside `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |action, source| CliError::Io {
        action,
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| io("cannot create a temporary file for", e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| io("cannot write", e))?;
    tmp.persist(path)
        .map_err(|e| io("cannot replace", e.error))?;
    Ok(())
}

/// One `|bits> amplitude` line per nonzero component, with `digits`
/// decimals.
pub fn render_kets(state: &StateVector, digits: usize) -> String {
    let mut out = String::new();
    for (bits, a) in state.kets(KET_THRESHOLD) {
        write!(out, "|{bits}> {:.digits$}", a.re).unwrap();
        if a.im.abs() >= KET_THRESHOLD {
            write!(out, "{:+.digits$}i", a.im).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn render_sensitivity(n_qubits: usize, theta: f64, rows: &[SensitivityRow]) -> String {
    let mut out = format!("# n_qubits={n_qubits}\n# theta={theta}\ntarget_prob,relative_damage,background_disturbance\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{}",
            shortest(r.target_prob),
            shortest(r.relative_damage),
            shortest(r.background_disturbance)
        )
        .unwrap();
    }
    out
}
