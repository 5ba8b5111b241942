use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use relaxwave::harness::{emit_outputs, profile, run_experiment, ExperimentConfig, ExperimentKind, Format, Setting};
use relaxwave::harness::config::Shape;

const KINDS: [(ExperimentKind, &str); 4] = [
    (ExperimentKind::Stability, "stability"),
    (ExperimentKind::RelaxSweep, "relax_sweep"),
    (ExperimentKind::ProfileOnly, "profile"),
    (ExperimentKind::EntropyCheck, "entropy_check"),
];

fn all_formats() -> BTreeSet<Format> {
    Format::ALL.into_iter().collect()
}

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(kind);
    c.grid.half_width = Setting::Value(120.0);
    c.grid.cells = 256;
    c.solver.end_time = 1.0;
    c.solver.output_stride = 4;
    c
}

#[test]
fn shipped_configs_are_the_presets() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for (kind, name) in KINDS {
        let cfg = ExperimentConfig::load(&dir.join(format!("{name}.toml"))).unwrap();
        assert_eq!(cfg, ExperimentConfig::preset(kind), "{name}");
        cfg.validate().unwrap();
    }
}

#[test]
fn stability_run_writes_every_artifact() {
    let cfg = small(ExperimentKind::Stability);
    let out = run_experiment(&cfg, 2).unwrap();
    assert!(out.passed.is_some());
    let s = &out.summary;
    assert_eq!(s["config_hash"].as_str().unwrap(), cfg.content_hash().unwrap());
    assert_eq!(s["grid"]["cells"], 256);
    assert!(s["max_conservation_residual"][0].as_f64().unwrap() < 1e-12);
    assert!(s["sup_error_initial"].as_f64().unwrap() > 0.0);

    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let files = emit_outputs(&dir, &out.summary, &out.artifacts, &cfg.to_toml_string().unwrap(), &all_formats()).unwrap();
    let names: BTreeSet<String> = files
        .iter()
        .map(|f| f.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for expected in [
        "config.toml",
        "diagnostics.csv",
        "floor_diagnostics.csv",
        "shift.csv",
        "final_state.csv",
        "final_state.json",
        "summary.json",
        "sup_error.svg",
        "eta.svg",
        "xdot.svg",
    ] {
        assert!(names.contains(expected), "missing {expected}: {names:?}");
    }
    let echoed = ExperimentConfig::load(&dir.join("config.toml")).unwrap();
    assert_eq!(echoed, cfg);
    let header = fs::read_to_string(dir.join("diagnostics.csv")).unwrap();
    assert!(header.starts_with("t,eta,Y,Jbad,Jgood,residual,supE,"));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = small(ExperimentKind::Stability);
    let a = run_experiment(&cfg, 1).unwrap();
    let b = run_experiment(&cfg, 3).unwrap();
    assert_eq!(a.summary, b.summary);
    // The first residual is NaN, so compare the written bytes.
    let csv = |t: &relaxwave::harness::Table| {
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        buf
    };
    assert_eq!(a.artifacts.tables.len(), b.artifacts.tables.len());
    for (x, y) in a.artifacts.tables.iter().zip(&b.artifacts.tables) {
        assert_eq!(csv(x), csv(y), "{}", x.name);
    }
}

#[test]
fn small_sweep_orders_by_tau() {
    let mut cfg = small(ExperimentKind::RelaxSweep);
    cfg.grid.half_width = Setting::Value(40.0);
    cfg.grid.cells = 128;
    cfg.solver.end_time = 0.2;
    let out = run_experiment(&cfg, 3).unwrap();
    let rows = out.summary["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let gaps: Vec<f64> = rows.iter().map(|r| r["relaxation_gap"].as_f64().unwrap()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(out.summary["classical"]["relaxation_gap"].as_f64().unwrap() < 1e-12);
}

#[test]
fn profile_experiment_reports_node_checks() {
    let cfg = ExperimentConfig::preset(ExperimentKind::ProfileOnly);
    let out = profile(&cfg).unwrap();
    assert_eq!(out.passed, None);
    let check = &out.summary["check"];
    assert!(check["system_residual"].as_f64().unwrap() < 1e-8);
    assert!(check["monotone"].as_bool().unwrap());
}

#[test]
fn invalid_settings_are_validation_errors() {
    let mut cfg = ExperimentConfig::preset(ExperimentKind::Stability);
    cfg.solver.cfl = 1.2;
    let err = run_experiment(&cfg, 1).unwrap_err();
    assert!(err.is_validation(), "{err}");

    let mut cfg = ExperimentConfig::preset(ExperimentKind::EntropyCheck);
    cfg.model.tau = 0.0;
    assert!(run_experiment(&cfg, 1).unwrap_err().is_validation());
}

#[test]
fn repeated_tau_gives_identical_rows() {
    let mut cfg = small(ExperimentKind::RelaxSweep);
    cfg.grid.half_width = Setting::Value(40.0);
    cfg.grid.cells = 128;
    cfg.solver.end_time = 0.2;
    cfg.sweep.as_mut().unwrap().tau_list = vec![1e-2, 1e-2, 1e-3];
    let out = run_experiment(&cfg, 2).unwrap();
    let rows = out.summary["rows"].as_array().unwrap();
    assert_eq!(rows[0], rows[1]);
    assert_ne!(rows[1], rows[2]);
}

#[test]
fn zero_amplitude_starts_on_the_composite() {
    let mut shifts = Vec::new();
    for v_minus in [0.9, 1.0] {
        let mut cfg = small(ExperimentKind::Stability);
        cfg.waves.v_minus = v_minus;
        cfg.perturbation.shape = Shape::Zero;
        cfg.solver.end_time = 5.0;
        let s = run_experiment(&cfg, 2).unwrap().summary;
        assert_eq!(s["sup_error_initial"].as_f64().unwrap(), 0.0);
        assert_eq!(s["perturbation_h2_norm"].as_f64().unwrap(), 0.0);
        shifts.push(s["shift_final"].as_f64().unwrap().abs());
    }
    // Without the rarefaction the shock sees exactly v_m and barely moves.
    assert!(shifts[1] < 0.1 * shifts[0], "{shifts:?}");
}
