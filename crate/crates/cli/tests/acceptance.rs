//! Acceptance criteria 1 to 8. Each criterion prints one PASS/FAIL line
//! and the target exits nonzero if any criterion fails. It runs without
//! the libtest harness so the lines are never captured.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::ToPrimitive;
use qec_lab::codes::{self, SyndromeAverager};
use qec_lab::experiments::{proliferation_experiment, sweep_theta, SUPPORT_THRESHOLD};
use qec_lab::noise::{
    bose_einstein_pattern_prob, build_general_unitary, decoherence_prob, fermi_pattern_prob,
    sample_placement, DecayModel, GeneralErrorParams, RotationErrorParams, Statistics,
};
use qec_lab::{
    Axis, CodeName, ErrorKind, Estimator, ExperimentConfig, LogicalQubit, Pauli, PauliString,
    Placement,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn qeclab(args: &[&str], envs: &[(&str, &str)]) -> Result<String, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qeclab"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd
        .output()
        .map_err(|e| format!("cannot run qeclab: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "qeclab {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn parse_kets(text: &str) -> Result<BTreeMap<String, f64>, String> {
    text.lines()
        .map(|line| {
            let (ket, amp) = line
                .split_once(' ')
                .ok_or_else(|| format!("bad line {line:?}"))?;
            let bits = ket
                .trim_start_matches('|')
                .trim_end_matches('>')
                .to_string();
            let amp = amp
                .parse::<f64>()
                .map_err(|_| format!("bad amplitude in {line:?}"))?;
            Ok((bits, amp))
        })
        .collect()
}

fn within_runtime(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

/// Codeword kets printed by `encode` against the closed-form lists.
fn criterion_1() -> Check {
    let start = Instant::now();
    let blocks = ["000", "111"];
    let mut shor = Vec::new();
    for a in blocks {
        for b in blocks {
            for c in blocks {
                let minus = [a, b, c].iter().filter(|s| **s == "111").count();
                shor.push((format!("{a}{b}{c}"), minus));
            }
        }
    }
    let amp = 1.0 / (2.0 * 2f64.sqrt());
    for (logical, flip_signs) in [("1,0", false), ("0,0", true)] {
        let kets = parse_kets(&qeclab(
            &[
                "encode",
                "--code",
                "shor9",
                "--logical",
                logical,
                "--digits",
                "17",
            ],
            &[],
        )?)?;
        ensure(kets.len() == 8, || {
            format!("shor9 {logical}: {} kets", kets.len())
        })?;
        for (bits, minus) in &shor {
            let sign = if flip_signs && minus % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            let got = kets
                .get(bits)
                .ok_or_else(|| format!("shor9 missing |{bits}>"))?;
            ensure((got - sign * amp).abs() <= 1e-12, || {
                format!("shor9 |{bits}> = {got}")
            })?;
        }
    }

    let h = qec_lab::codes::HAMMING_PARITY_CHECK;
    let even: Vec<String> = (0..8u8)
        .map(|m| {
            (0..7)
                .map(|j| {
                    let bit = (0..3)
                        .filter(|&r| m >> (2 - r) & 1 == 1)
                        .fold(0, |acc, r| acc ^ h[r][j]);
                    char::from(b'0' + bit)
                })
                .collect()
        })
        .collect();
    let complement = |s: &String| -> String {
        s.chars()
            .map(|c| if c == '0' { '1' } else { '0' })
            .collect()
    };
    let amp = 1.0 / 8f64.sqrt();
    for (logical, words, parity) in [
        ("1,0", even.clone(), 0),
        ("0,0,1,0", even.iter().map(complement).collect(), 1),
    ] {
        let kets = parse_kets(&qeclab(
            &[
                "encode",
                "--code",
                "steane7",
                "--logical",
                logical,
                "--digits",
                "17",
            ],
            &[],
        )?)?;
        ensure(kets.len() == 8, || {
            format!("steane7 {logical}: {} kets", kets.len())
        })?;
        for w in &words {
            let got = kets
                .get(w)
                .ok_or_else(|| format!("steane7 missing |{w}>"))?;
            ensure((got - amp).abs() <= 1e-12, || {
                format!("steane7 |{w}> = {got}")
            })?;
            let weight = w.chars().filter(|&c| c == '1').count();
            ensure(weight % 2 == parity, || {
                format!("|{w}> has the wrong weight parity")
            })?;
        }
    }
    let printed = qeclab(&["encode", "--code", "steane7", "--logical", "1,0"], &[])?;
    ensure(
        printed.lines().count() == 8 && printed.lines().all(|l| l.ends_with(" 0.3535533906")),
        || format!("default encode output: {printed}"),
    )?;
    within_runtime(start, Duration::from_secs(5))?;
    Ok("shor9 |0>,|1> and steane7 |0>,|1> match to 1e-12".into())
}

fn test_logical() -> LogicalQubit {
    LogicalQubit::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap()
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let logical = test_logical();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for name in [CodeName::Shor9, CodeName::Steane7] {
        let code = name.build();
        let encoded = code.encode(&logical);
        for q in 0..code.n_physical() {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                let error = PauliString::single(code.n_physical(), q, p);
                let corrupted = encoded
                    .apply_pauli_string(&error)
                    .map_err(|e| e.to_string())?;
                let measured = codes::extract_syndrome(&corrupted, &code, &mut rng)
                    .map_err(|e| e.to_string())?;
                let recovered = codes::recover(&measured, &code).map_err(|e| e.to_string())?;
                let infid = 1.0
                    - codes::logical_fidelity(&recovered, &code, &logical)
                        .map_err(|e| e.to_string())?;
                ensure(infid < 1e-9, || {
                    format!("{name} {p:?} on {q}: infidelity {infid}")
                })?;
                worst = worst.max(infid);
                cases += 1;
            }
        }
    }
    ensure(cases == 48, || format!("{cases} cases"))?;
    within_runtime(start, Duration::from_secs(1))?;
    Ok(format!("{cases} cases, worst infidelity {worst:.1e}"))
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let logical = test_logical();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for name in [CodeName::Shor9, CodeName::Steane7] {
        let code = name.build();
        let averager = SyndromeAverager::new(&code, &logical).map_err(|e| e.to_string())?;
        let encoded = code.encode(&logical);
        for _ in 0..200 {
            let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let params = GeneralErrorParams::new(c(), c()).map_err(|e| e.to_string())?;
            let u = build_general_unitary(&params).map_err(|e| e.to_string())?;
            let q = rng.random_range(0..code.n_physical());
            let corrupted = encoded.apply_1q(&u, q).map_err(|e| e.to_string())?;
            // Every syndrome branch, weighted by its probability.
            let expected = averager
                .expected_infidelity(&corrupted)
                .map_err(|e| e.to_string())?;
            // One physical measurement.
            let measured =
                codes::extract_syndrome(&corrupted, &code, &mut rng).map_err(|e| e.to_string())?;
            let recovered = codes::recover(&measured, &code).map_err(|e| e.to_string())?;
            let sampled = 1.0
                - codes::logical_fidelity(&recovered, &code, &logical)
                    .map_err(|e| e.to_string())?;
            ensure(expected < 1e-9 && sampled < 1e-9, || {
                format!("{name} qubit {q}: expected {expected}, sampled {sampled}")
            })?;
            worst = worst.max(expected).max(sampled);
        }
    }
    within_runtime(start, Duration::from_secs(5))?;
    Ok(format!(
        "400 random unitaries, worst infidelity {worst:.1e}"
    ))
}

fn rotation_config(code: CodeName, grid: Vec<f64>) -> ExperimentConfig {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ExperimentConfig {
        code,
        error_kind: ErrorKind::Rotation(RotationErrorParams::new(Axis::Y, 0.0).unwrap()),
        placement: Placement::AllQubits,
        theta_grid: grid,
        trials: 10_000,
        seed: 0,
        logical_input: LogicalQubit::new(Complex64::new(h, 0.0), Complex64::new(h, 0.0)).unwrap(),
        estimator: Estimator::BranchAverage,
    }
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let grid: Vec<f64> = (0..9).map(|i| 10f64.powf(-3.0 + i as f64 / 4.0)).collect();
    let mut summary = Vec::new();
    for name in [CodeName::Shor9, CodeName::Steane7] {
        let result =
            sweep_theta(&rotation_config(name, grid.clone())).map_err(|e| e.to_string())?;
        let coded = result
            .slope_coded
            .ok_or_else(|| format!("{name}: no coded slope"))?;
        let uncoded = result
            .slope_uncoded
            .ok_or_else(|| format!("{name}: no uncoded slope"))?;
        ensure((uncoded - 2.0).abs() <= 0.3, || {
            format!("{name}: slope_uncoded {uncoded}")
        })?;
        ensure((coded - 4.0).abs() <= 0.3, || {
            format!("{name}: slope_coded {coded}")
        })?;
        let at = sweep_theta(&rotation_config(name, vec![0.05])).map_err(|e| e.to_string())?;
        let residual = at.rows[0].mean_infidelity_coded;
        ensure(residual > 1e-8, || {
            format!("{name}: coded infidelity at 0.05 is {residual}")
        })?;
        ensure(residual < at.rows[0].mean_infidelity_uncoded, || {
            format!("{name}: coding did not help")
        })?;
        summary.push(format!(
            "{name} coded {coded:.3} uncoded {uncoded:.3} residual(0.05) {residual:.2e}"
        ));
    }
    within_runtime(start, Duration::from_secs(180))?;
    Ok(summary.join("; "))
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let steane = proliferation_experiment(CodeName::Steane7, 0.01, SUPPORT_THRESHOLD)
        .map_err(|e| e.to_string())?;
    let shor = proliferation_experiment(CodeName::Shor9, 0.01, SUPPORT_THRESHOLD)
        .map_err(|e| e.to_string())?;
    ensure(steane == (8, 128), || format!("steane7 {steane:?}"))?;
    ensure(shor == (8, 512), || format!("shor9 {shor:?}"))?;
    let printed = qeclab(
        &["proliferate", "--code", "steane7", "--theta", "0.01"],
        &[],
    )?;
    ensure(printed.lines().nth(1) == Some("steane7,0.01,8,128"), || {
        printed.clone()
    })?;
    within_runtime(start, Duration::from_secs(5))?;
    Ok("steane7 (8, 128), shor9 (8, 512)".into())
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn criterion_6() -> Check {
    let start = Instant::now();
    const SAMPLES: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cells_checked = 0;
    let mut worst_z: f64 = 0.0;
    for cells in 1..=5usize {
        for errors in 0..=3usize {
            for stats in [Statistics::BoseEinstein, Statistics::Fermi] {
                let (patterns, exact) = match stats {
                    Statistics::BoseEinstein => (
                        binomial(cells + errors - 1, errors),
                        bose_einstein_pattern_prob(cells, errors),
                    ),
                    Statistics::Fermi if errors <= cells => {
                        (binomial(cells, errors), fermi_pattern_prob(cells, errors))
                    }
                    Statistics::Fermi => continue,
                };
                let exact = exact.map_err(|e| e.to_string())?;
                ensure(
                    *exact.numer() == 1u32.into() && *exact.denom() == patterns.into(),
                    || format!("{stats:?} N={cells} n={errors}: {exact}, expected 1/{patterns}"),
                )?;
                let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
                for _ in 0..SAMPLES {
                    let occ = sample_placement(cells, errors, stats, &mut rng)
                        .map_err(|e| e.to_string())?;
                    *counts.entry(occ).or_default() += 1;
                }
                ensure(counts.len() as u64 == patterns, || {
                    format!(
                        "{stats:?} N={cells} n={errors}: {} patterns seen, expected {patterns}",
                        counts.len()
                    )
                })?;
                let p = exact.to_f64().unwrap();
                let sigma = (SAMPLES as f64 * p * (1.0 - p)).sqrt();
                for (occ, &count) in &counts {
                    ensure(occ.iter().sum::<usize>() == errors, || {
                        format!("{occ:?} has the wrong total")
                    })?;
                    if stats == Statistics::Fermi {
                        ensure(occ.iter().all(|&c| c <= 1), || {
                            format!("{occ:?} doubly occupied")
                        })?;
                    }
                    let dev = (count as f64 - SAMPLES as f64 * p).abs();
                    if sigma > 0.0 {
                        worst_z = worst_z.max(dev / sigma);
                    }
                    ensure(dev <= 3.0 * sigma, || {
                        format!(
                            "{stats:?} N={cells} n={errors} {occ:?}: {count} vs {} ± {sigma:.1}",
                            SAMPLES as f64 * p
                        )
                    })?;
                }
                cells_checked += 1;
            }
        }
    }
    for flag in ["--be", "--fd"] {
        let printed = qeclab(&["stats", flag, "3", "1"], &[])?;
        ensure(printed == "1/3\n", || {
            format!("stats {flag} 3 1 printed {printed:?}")
        })?;
    }
    within_runtime(start, Duration::from_secs(60))?;
    Ok(format!("{cells_checked} (N, n, statistics) cases, worst deviation {worst_z:.2} sigma; (3, 1) -> 1/3"))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.25).collect();
    for i in 1..=100 {
        let lambda = i as f64 / 100.0;
        let p = |t: f64| {
            decoherence_prob(&DecayModel::new(lambda, t).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())
        };
        let p0 = p(0.0)?;
        ensure((p0 - (1.0 - lambda)).abs() <= 1e-15, || {
            format!("lambda {lambda}: p_0 = {p0}")
        })?;
        let mut last = p0;
        for &t in &times[1..] {
            let v = p(t)?;
            ensure(v >= last, || format!("lambda {lambda}: p drops at t = {t}"))?;
            last = v;
        }
        let far = p(1e5)?;
        ensure((1.0 - far).abs() <= 1e-12, || {
            format!("lambda {lambda}: p_inf = {far}")
        })?;
    }
    within_runtime(start, Duration::from_secs(5))?;
    Ok("100 lambdas in (0, 1]: p_0 = 1 - lambda, monotone, p -> 1".into())
}

fn criterion_8() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("sweep.cfg");
    std::fs::write(
        &config,
        "code = steane7\nerror.kind = rotation\nerror.placement = bose_einstein:3\n\
         theta.min = 0.05\ntheta.max = 0.8\ntheta.points = 4\ntheta.scale = log\n\
         trials = 2000\nseed = 17\nestimator = sampled\n",
    )
    .map_err(|e| e.to_string())?;
    let config = config.to_str().unwrap();
    let run = |name: &str, threads: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        qeclab(
            &["sweep", "--config", config, "--out", out.to_str().unwrap()],
            &[("RAYON_NUM_THREADS", threads)],
        )?;
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let reference = run("a.csv", "1")?;
    for (name, threads) in [("b.csv", "1"), ("c.csv", "4"), ("d.csv", "8")] {
        ensure(run(name, threads)? == reference, || {
            format!("{name} with {threads} threads differs")
        })?;
    }
    let reseeded = qeclab(&["sweep", "--config", config, "--seed", "18"], &[])?;
    ensure(reseeded.as_bytes() != reference.as_slice(), || {
        "seed has no effect".into()
    })?;

    for args in [
        &[
            "correct",
            "--code",
            "shor9",
            "--kind",
            "rotation",
            "--placement",
            "be:3",
            "--theta",
            "0.7",
            "--seed",
            "5",
        ][..],
        &[
            "inject",
            "--code",
            "steane7",
            "--kind",
            "bit_flip",
            "--placement",
            "fermi:2",
            "--seed",
            "9",
        ][..],
        &["sensitivity", "--qubits", "5"][..],
    ] {
        let a = qeclab(args, &[("RAYON_NUM_THREADS", "1")])?;
        let b = qeclab(args, &[("RAYON_NUM_THREADS", "4")])?;
        ensure(a == b, || format!("{args:?} differs between runs"))?;
    }
    within_runtime(start, Duration::from_secs(120))?;
    Ok(
        "sweep CSV byte-identical over 1, 4 and 8 worker threads; other commands repeat exactly"
            .into(),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("codeword exactness", criterion_1),
        ("exhaustive single-Pauli correction", criterion_2),
        ("analog single-error discretization", criterion_3),
        ("residual-error scaling", criterion_4),
        ("component proliferation", criterion_5),
        ("occupancy statistics", criterion_6),
        ("decay model", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
