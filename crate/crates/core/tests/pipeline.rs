use num_complex::Complex64;
use qec_lab::codes::{extract_syndrome, logical_fidelity, recover};
use qec_lab::experiments::sweep_theta;
use qec_lab::noise::{apply_error_model, DecayModel, RotationErrorParams};
use qec_lab::{
    Axis, CodeName, ErrorKind, ErrorModel, Estimator, ExperimentConfig, Flip, LogicalQubit,
    Placement,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn logical() -> LogicalQubit {
    LogicalQubit::new(Complex64::new(0.28, 0.0), Complex64::new(0.0, 0.96)).unwrap()
}

#[test]
fn one_fermionic_flip_of_any_kind_is_corrected() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in [CodeName::Shor9, CodeName::Steane7] {
        let code = name.build();
        let encoded = code.encode(&logical());
        for flip in [Flip::Bit, Flip::Phase, Flip::BitAndPhase] {
            let model = ErrorModel {
                kind: ErrorKind::Flip(flip),
                placement: Placement::Fermi(1),
            };
            for _ in 0..50 {
                let corrupted = apply_error_model(&encoded, &model, &mut rng).unwrap();
                let measured = extract_syndrome(&corrupted, &code, &mut rng).unwrap();
                assert!(!measured.syndrome.is_trivial());
                let recovered = recover(&measured, &code).unwrap();
                assert!(1.0 - logical_fidelity(&recovered, &code, &logical()).unwrap() < 1e-9);
            }
        }
    }
}

#[test]
fn two_flips_defeat_both_codes_sometimes() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for name in [CodeName::Shor9, CodeName::Steane7] {
        let code = name.build();
        let encoded = code.encode(&logical());
        let model = ErrorModel {
            kind: ErrorKind::Flip(Flip::Bit),
            placement: Placement::Fermi(2),
        };
        let failures = (0..200)
            .filter(|_| {
                let corrupted = apply_error_model(&encoded, &model, &mut rng).unwrap();
                let recovered = recover(
                    &extract_syndrome(&corrupted, &code, &mut rng).unwrap(),
                    &code,
                )
                .unwrap();
                logical_fidelity(&recovered, &code, &logical()).unwrap() < 1.0 - 1e-9
            })
            .count();
        assert!(failures > 0, "{name}");
    }
}

#[test]
fn sampled_sweep_of_single_flips_is_clean() {
    let cfg = ExperimentConfig {
        code: CodeName::Steane7,
        error_kind: ErrorKind::Flip(Flip::BitAndPhase),
        placement: Placement::Fermi(1),
        theta_grid: vec![0.0, 1.0],
        trials: 200,
        seed: 4,
        logical_input: logical(),
        estimator: Estimator::Sampled,
    };
    let result = sweep_theta(&cfg).unwrap();
    for row in &result.rows {
        assert!(row.mean_infidelity_coded < 1e-9);
        // The bare qubit has no protection against the same flip.
        assert!(row.mean_infidelity_uncoded > 0.1);
        // Both cosets are populated and a flip permutes kets.
        assert_eq!(row.mean_support, 16.0);
    }
    assert_eq!(result.slope_coded, None);
}

#[test]
fn decay_sweep_grows_with_time() {
    let cfg = ExperimentConfig {
        code: CodeName::Shor9,
        error_kind: ErrorKind::Decay(DecayModel::new(0.5, 0.0).unwrap()),
        placement: Placement::Fermi(1),
        theta_grid: vec![0.0, 1.0, 4.0],
        trials: 100,
        seed: 0,
        logical_input: LogicalQubit::new(Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0))
            .unwrap(),
        estimator: Estimator::BranchAverage,
    };
    let rows = sweep_theta(&cfg).unwrap().rows;
    let uncoded: Vec<f64> = rows.iter().map(|r| r.mean_infidelity_uncoded).collect();
    assert!(uncoded.windows(2).all(|w| w[0] < w[1]), "{uncoded:?}");
    assert!(rows
        .iter()
        .all(|r| r.mean_infidelity_coded <= r.mean_infidelity_uncoded));
}

#[test]
fn rotation_about_z_only_dephases() {
    let cfg = ExperimentConfig {
        code: CodeName::Shor9,
        error_kind: ErrorKind::Rotation(RotationErrorParams::new(Axis::Z, 0.0).unwrap()),
        placement: Placement::AllQubits,
        theta_grid: vec![0.2],
        trials: 1,
        seed: 0,
        logical_input: LogicalQubit::zero(),
        estimator: Estimator::BranchAverage,
    };
    // R_z is diagonal, so the bare |0⟩ keeps fidelity one and the code
    // support stays at the eight codeword kets.
    let row = sweep_theta(&cfg).unwrap().rows[0];
    assert!(row.mean_infidelity_uncoded < 1e-15);
    assert_eq!(row.mean_support, 8.0);
}
