use std::path::{Path, PathBuf};
use std::process::Command;

use neurohom::io::{encode, read_field, read_meta, FieldData};
use neurohom_cli::config::MicroSpec;
use neurohom_cli::ExperimentConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_neurohom"))
}

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_experiment();
    cfg.grid.points = 1024;
    cfg.grid.cell_points = 16;
    cfg.time.horizon = 0.2;
    cfg.time.step = 1e-2;
    cfg.time.stride = 5;
    cfg.schedule = vec![0.25, 0.125];
    cfg
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> PathBuf {
    let path = dir.join("experiment.toml");
    std::fs::write(&path, toml::to_string(cfg).unwrap()).unwrap();
    path
}

fn dumps(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "nfh") {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

fn assert_round_trip(path: &Path) -> FieldData {
    let field = read_field(path).unwrap();
    assert_eq!(encode(&field), std::fs::read(path).unwrap(), "{}", path.display());
    assert!(!read_meta(path).unwrap().is_empty());
    field
}

#[test]
fn validate_accepts_the_default_config() {
    let out = bin().arg("validate").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn non_decreasing_schedule_fails_with_a_message() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.schedule = vec![0.125, 0.25];
    let path = write_config(tmp.path(), &cfg);
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("strictly decreasing"));
}

#[test]
fn contraction_bound_violation_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.picard.rho = Some(0.5);
    let path = write_config(tmp.path(), &cfg);
    let out = bin().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("2(k1+1)ρ<1"));
}

#[test]
fn verify_passes_on_the_default_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["verify", "--seed", "3", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report = std::fs::read_to_string(tmp.path().join("verify.txt")).unwrap();
    assert!(!report.contains("FAIL"));
}

#[test]
fn oracle_mode_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin().args(["oracle", "--out"]).arg(tmp.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn hetero_solves_write_reloadable_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    cfg.integrator = neurohom_cli::IntegratorChoice::Both;
    cfg.output.trajectory_dumps = true;
    let path = write_config(tmp.path(), &cfg);
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["solve-hetero", "--threads", "2", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files = dumps(&out_dir);
    // two scales, two integrators, five outputs each
    assert_eq!(files.len(), 2 * 2 * 5);
    for f in &files {
        assert!(matches!(assert_round_trip(f), FieldData::Macro(_)));
    }
    let report = std::fs::read_to_string(out_dir.join("eps0_picard/report.txt")).unwrap();
    assert!(report.contains("max_contraction_ratio="));
}

#[test]
fn homog_solve_writes_two_scale_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), &small_config());
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["solve-homog", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_dir)
        .env("NEUROHOM_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let files = dumps(&out_dir);
    assert_eq!(files.len(), 2);
    for f in &files {
        assert!(matches!(assert_round_trip(f), FieldData::TwoScale(_)));
    }
}

#[test]
fn sweep_artifacts_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), &small_config());
    let out_dir = tmp.path().join("out");
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in dumps(&out_dir) {
        assert_round_trip(&f);
    }
    let summary = std::fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("scope=verified on the configured test family only"));
    let csv = std::fs::read_to_string(out_dir.join("pairing/phi0_cos1.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("eps,pairing,limit,abs_error"));
    assert_eq!(csv.lines().count(), 3);
    let echoed = ExperimentConfig::parse(&std::fs::read_to_string(out_dir.join("config.toml")).unwrap()).unwrap();
    assert_eq!(echoed, small_config());
}

#[test]
fn cell_sampled_microstructure_loads_from_a_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let cell = neurohom::MacroGrid::new(1, 0.5, 16).unwrap();
    let values: Vec<f64> = (0..16)
        .map(|j| 1.0 + 0.5 * (std::f64::consts::TAU * j as f64 / 16.0).cos())
        .collect();
    let field = neurohom::MacroField::new(cell, values).unwrap();
    neurohom::io::write_field(&tmp.path().join("p.nfh"), &field.into(), &[]).unwrap();
    let mut cfg = small_config();
    cfg.firing.g = MicroSpec::CellFile { path: "p.nfh".into() };
    let path = write_config(tmp.path(), &cfg);
    let loaded = ExperimentConfig::load(&path).unwrap();
    let g = loaded.firing_rate().unwrap();
    assert!((g.g().mean_value() - 1.0).abs() < 1e-12);
    assert!(neurohom_cli::validate(&loaded).is_empty());
}

#[test]
fn mixed_micro_variants_are_rejected() {
    let text = neurohom_cli::config::DEFAULT_CONFIG.replace(
        "g = { kind = \"trig\",",
        "g = { kind = \"constant\", value = 1.0, extra = 1,",
    );
    assert!(ExperimentConfig::parse(&text).is_err());
}
