use std::process::{Command, Output};

fn qeclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qeclab"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn encode_steane_zero() {
    let text = stdout(&qeclab(&[
        "encode",
        "--code",
        "steane7",
        "--logical",
        "1,0",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8);
    assert_eq!(lines[0], "|0000000> 0.3535533906");
    assert!(lines.contains(&"|1101001> 0.3535533906"));
}

#[test]
fn encode_plus_state_has_both_cosets() {
    let h = std::f64::consts::FRAC_1_SQRT_2.to_string();
    let text = stdout(&qeclab(&[
        "encode",
        "--code",
        "steane7",
        "--logical",
        &format!("{h},0,{h},0"),
    ]));
    assert_eq!(text.lines().count(), 16);
    assert!(text.lines().all(|l| l.ends_with(" 0.2500000000")));
}

#[test]
fn stats_prints_exact_ratios() {
    assert_eq!(stdout(&qeclab(&["stats", "--be", "3", "1"])), "1/3\n");
    assert_eq!(stdout(&qeclab(&["stats", "--be", "3", "2"])), "1/6\n");
    assert_eq!(stdout(&qeclab(&["stats", "--fd", "7", "2"])), "1/21\n");
    let err = qeclab(&["stats", "--fd", "2", "3"]);
    assert_eq!(err.status.code(), Some(2));
}

#[test]
fn sweep_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let status = qeclab(&[
        "sweep",
        "--code",
        "steane7",
        "--theta",
        "0,0.1,0.2",
        "--trials",
        "50",
        "--placement",
        "fermi:2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout(&status).is_empty());
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# code = steane7"));
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(lines[header], qec_lab_cli::report::CSV_HEADER);
    assert_eq!(lines[header + 1], "0,0,0,0,0,8");
    assert_eq!(lines.len(), header + 6);
    assert!(lines[header + 4].starts_with("# slope_coded="));
    assert!(lines[header + 5].starts_with("# slope_uncoded="));

    // The embedded config reproduces the run.
    let embedded: String = lines[..header]
        .iter()
        .map(|l| format!("{}\n", &l[2..]))
        .collect();
    let cfg_path = dir.path().join("embedded.cfg");
    std::fs::write(&cfg_path, embedded).unwrap();
    let again = stdout(&qeclab(&["sweep", "--config", cfg_path.to_str().unwrap()]));
    assert_eq!(again, csv);
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "code = shor8\nerror.kind = bit_flip\ntheta = 0\n").unwrap();
    let out = qeclab(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(
        msg.contains("line 1") && msg.contains("`code`") && msg.contains("unknown code"),
        "{msg}"
    );

    std::fs::write(
        &path,
        "code = steane7\nerror.kind = bit_flip\nerror.placement = fermi:9\ntheta = 0\n",
    )
    .unwrap();
    let out = qeclab(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error.placement"));

    let out = qeclab(&["encode", "--code", "steane7", "--logical", "0.8,0,0.7,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("logical"), "{}", stderr(&out));

    let out = qeclab(&["encode", "--code", "steane7", "--logical", "1,2,3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--logical"));
}

#[test]
fn io_errors_exit_3() {
    let out = qeclab(&["sweep", "--config", "/nonexistent/path.cfg"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("/nonexistent/path.cfg"));

    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("no_such_dir").join("out.csv");
    let out = qeclab(&[
        "sweep",
        "--code",
        "steane7",
        "--theta",
        "0.1",
        "--trials",
        "5",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("no_such_dir"));
    assert!(!target.exists());
}

#[test]
fn correct_single_flip() {
    let text = stdout(&qeclab(&[
        "correct",
        "--code",
        "steane7",
        "--kind",
        "bit_flip",
        "--placement",
        "fixed:3",
    ]));
    assert!(text.contains("occupancy=0,0,0,1,0,0,0\n"), "{text}");
    assert!(text.contains("correction=IIIXIII\n"), "{text}");
    let after: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("infidelity_after="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(after < 1e-9);
}

#[test]
fn inject_reports_support() {
    let text = stdout(&qeclab(&["inject", "--code", "steane7", "--theta", "0.01"]));
    assert!(
        text.starts_with("# occupancy=1,1,1,1,1,1,1\n# support=128\n"),
        "{text}"
    );
    assert_eq!(text.lines().count(), 130);
}

#[test]
fn sensitivity_table() {
    let text = stdout(&qeclab(&[
        "sensitivity",
        "--qubits",
        "3",
        "--probs",
        "0.2,0.9",
        "--theta",
        "0.1",
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[2],
        "target_prob,relative_damage,background_disturbance"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[3].starts_with("0.2,"));
}
