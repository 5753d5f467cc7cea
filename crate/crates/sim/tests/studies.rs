use std::f64::consts::TAU;

use fouriervol_sim::experiments::{derive_seed, run_study, FOURIER_CELL, HY_CELL};
use fouriervol_sim::*;

fn constant(sigma: f64, n_assets: usize, corr: f64) -> ModelSpec {
    ModelSpec::uniform(VolSpec::ConstantVol { sigma }, n_assets, corr).unwrap()
}

fn cosine_vol() -> ModelSpec {
    ModelSpec::uniform(VolSpec::DeterministicVol { a: 0.1, b: 0.05 }, 1, 0.0).unwrap()
}

#[test]
fn constant_vol_first_coefficient_is_unbiased() {
    let report = consistency_study(&ConsistencyConfig::new(constant(0.3, 1, 0.0), vec![100, 200, 400], 150, 11)).unwrap();
    report.verify().unwrap();
    for n in [100, 200, 400] {
        for part in ["re", "im"] {
            let c = report.check(&format!("alpha1_{part}_within_3se[n={n}]")).unwrap();
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
    // True k = 1 coefficient of a flat spot path is zero.
    assert!(report.records.iter().all(|r| r.get("alpha1_true_re").unwrap().abs() < 1e-15));
}

#[test]
fn near_zero_vol_has_near_zero_sup_error() {
    let mut config = ConsistencyConfig::new(constant(1e-8, 1, 0.0), vec![100, 400, 1600], 5, 3);
    config.grid_points = 64;
    let report = consistency_study(&config).unwrap();
    assert!(report.records.iter().all(|r| r.estimate < 1e-6));
}

#[test]
fn short_ladders_are_config_errors() {
    let config = ConsistencyConfig::new(cosine_vol(), vec![100, 200], 5, 0);
    assert!(matches!(consistency_study(&config), Err(SimError::Config(_))));
    let config = ConsistencyConfig::new(cosine_vol(), vec![100, 300, 200], 5, 0);
    assert!(matches!(consistency_study(&config), Err(SimError::Config(_))));
}

#[test]
fn zero_weight_gives_a_zero_statistic() {
    let mut config = CltConfig::new(cosine_vol(), SamplingKind::Even { n: 400 }, 4, 1);
    config.test_function = TestFunction::Zero;
    let report = clt_study(&config).unwrap();
    assert!(report.records.iter().all(|r| r.estimate == 0.0));
    assert!(report.checks.is_empty());
}

#[test]
fn limit_variance_routes_agree() {
    for scheme in [SamplingKind::Even { n: 2000 }, SamplingKind::Jittered { n: 2000 }] {
        let report = clt_study(&CltConfig::new(cosine_vol(), scheme, 2, 5)).unwrap();
        let c = report.check("limit_variance_routes_agree_2pct").unwrap();
        assert!(c.passed, "{scheme:?}: {}", c.detail);
    }
    // Bivariate jittered grids have no closed form and use H_n alone.
    let two = ModelSpec::uniform(VolSpec::DeterministicVol { a: 0.1, b: 0.05 }, 2, 0.5).unwrap();
    let mut config = CltConfig::new(two, SamplingKind::Jittered { n: 2000 }, 2, 5);
    config.pair = (0, 1);
    config.cutoff = CutoffRule::Fixed(60);
    let report = clt_study(&config).unwrap();
    assert!(report.diagnostics.contains_key("theory_variance_h_n"));
    assert!(!report.diagnostics.contains_key("theory_variance_analytic"));
}

#[test]
fn cutoffs_outside_the_regime_are_rejected() {
    let two = ModelSpec::uniform(VolSpec::DeterministicVol { a: 0.1, b: 0.05 }, 2, 0.5).unwrap();
    let mut config = CltConfig::new(two, SamplingKind::Even { n: 2000 }, 2, 5);
    config.pair = (0, 1);
    let err = clt_study(&config).unwrap_err().to_string();
    assert!(err.starts_with("ConfigError") && err.contains("N^(4/3)"), "{err}");

    let mut config = CltConfig::new(cosine_vol(), SamplingKind::Even { n: 2000 }, 2, 5);
    config.cutoff = CutoffRule::Fixed(5);
    assert!(clt_study(&config).unwrap_err().to_string().contains("N^(2 alpha)"));

    let heston = ModelSpec::uniform(
        VolSpec::StochasticVol {
            kappa: 1.0,
            theta: 0.1,
            xi: 0.2,
        },
        1,
        0.0,
    )
    .unwrap();
    assert!(clt_study(&CltConfig::new(heston, SamplingKind::Even { n: 100 }, 2, 0)).is_err());
    let poisson = SamplingKind::Poisson { intensity: 10.0 };
    assert!(clt_study(&CltConfig::new(cosine_vol(), poisson, 2, 0)).is_err());
}

#[test]
fn negligible_vol_gives_negligible_mse() {
    let mut config = MseConfig::new(constant(1e-10, 2, 0.3), vec![200], 1, 9);
    config.pair = (0, 1);
    let report = mse_sweep(&config).unwrap();
    assert!(report.summary.iter().all(|c| c.mse < 1e-30), "{:?}", report.summary);
}

#[test]
fn mse_cells_share_random_numbers_across_cutoffs() {
    let mut config = MseConfig::new(constant(0.3, 1, 0.0), vec![300], 6, 2);
    config.noise_levels = vec![0.0, 0.01];
    let report = mse_sweep(&config).unwrap();
    report.verify().unwrap();
    // Every cell of one replication compares against the same truth.
    for rep in 0..6 {
        let truths: Vec<f64> = report.records.iter().filter(|r| r.replication == rep).map(|r| r.truth).collect();
        assert!(truths.windows(2).all(|w| w[0] == w[1]));
    }
    assert_eq!(report.checks.len(), 2);
}

#[test]
fn epps_report_has_every_cell() {
    let model = constant(0.3, 2, 0.5);
    let config = EppsConfig::new(model, 20.0, vec![TAU / 10.0, TAU / 50.0], 8, 4);
    let report = epps_study(&config).unwrap();
    report.verify().unwrap();
    assert_eq!(report.summary.len(), 4);
    assert!(report.cell(FOURIER_CELL).is_some() && report.cell(HY_CELL).is_some());
    assert_eq!(report.checks.len(), 3);
    let one_asset = EppsConfig::new(constant(0.3, 1, 0.0), 20.0, vec![1.0, 0.5], 8, 4);
    assert!(epps_study(&one_asset).is_err());
}

#[test]
fn reports_do_not_depend_on_the_worker_count() {
    let mut config = EppsConfig::new(constant(0.3, 2, 0.5), 20.0, vec![TAU / 10.0, TAU / 50.0], 12, 77);
    let mut study = StudyConfig::Epps(config.clone());
    study.set_threads(Some(1));
    let one = run_study(&study).unwrap();
    config.threads = Some(3);
    let three = epps_study(&config).unwrap();
    assert_eq!(one.records, three.records);
    assert_eq!(one.summary, three.summary);
}

#[test]
fn reports_round_trip_through_files() {
    let report = mse_sweep(&MseConfig::new(constant(0.2, 1, 0.0), vec![200], 4, 1)).unwrap();
    let dir = std::env::temp_dir().join(format!("fouriervol-report-{}", derive_seed(1, &[std::process::id() as u64])));
    std::fs::create_dir_all(&dir).unwrap();
    let (rec_path, sum_path) = (dir.join("records.jsonl"), dir.join("summary.json"));
    report.write_records(std::fs::File::create(&rec_path).unwrap()).unwrap();
    report.write_summary(std::fs::File::create(&sum_path).unwrap()).unwrap();
    let back = ExperimentReport::read(
        std::io::BufReader::new(std::fs::File::open(&rec_path).unwrap()),
        std::fs::File::open(&sum_path).unwrap(),
    )
    .unwrap();
    assert_eq!(back, report);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn study_configs_deserialize_from_json() {
    let text = r#"{
        "study": "epps",
        "model": {"assets": [{"vol": {"kind": "constant_vol", "sigma": 0.3}},
                             {"vol": {"kind": "constant_vol", "sigma": 0.2}}],
                  "correlation": 0.5},
        "intensity": 30.0,
        "deltas": [0.6, 0.1],
        "cutoff": "auto",
        "replications": 3,
        "seed": 1
    }"#;
    let config: StudyConfig = serde_json::from_str(text).unwrap();
    assert!(matches!(config, StudyConfig::Epps(_)));
    assert_eq!(run_study(&config).unwrap().replications, 3);
}
