use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relaxwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxwave")).args(args).output().unwrap()
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let text = r#"
experiment = "stability"
output_dir = "unused"
seed = 0

[model]
gamma = 2.0
mu = 1.0
tau = 0.01

[waves]
v_plus = 1.2
u_plus = 0.0
v_m = 1.0
v_minus = 0.9

[grid]
half_width = 120.0
cells = 128

[solver]
cfl = 0.9
end_time = 0.5
output_stride = 5

[shift]
lambda_amp = "auto"

[perturbation]
shape = "gaussian_bump"
amplitude = 0.01
center = "auto"
width = "auto"
target_fields = ["v", "u"]
"#;
    let path = dir.join("small.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn json_only_run_writes_just_the_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let out_dir = tmp.path().join("out");
    let out = relaxwave(&[
        "stability",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let entries: Vec<_> = fs::read_dir(&out_dir).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["experiment"], "stability");
    assert!(summary["config_hash"].is_string());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let read_all = |dir: &Path| {
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let mut runs = Vec::new();
    let dir = tmp.path().join("run");
    for jobs in ["1", "2"] {
        let out = relaxwave(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--jobs", jobs]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        runs.push(read_all(&dir));
    }
    assert!(runs[0].iter().any(|(n, _)| n == "diagnostics.csv"));
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn profile_subcommand_writes_nodes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("profile");
    let out = relaxwave(&["profile", "--out", dir.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("profile.csv")).unwrap();
    assert!(csv.lines().count() > 100);
}

#[test]
fn invalid_configuration_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let text = fs::read_to_string(&cfg).unwrap().replace("tau = 0.01", "tau = 1.5");
    fs::write(&cfg, text).unwrap();
    let out = relaxwave(&["stability", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));

    let out = relaxwave(&["relax-sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = relaxwave(&["profile", "--format", "png"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_input_and_foreign_output_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = relaxwave(&["stability", "--config", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let busy = tmp.path().join("busy");
    fs::create_dir(&busy).unwrap();
    fs::write(busy.join("notes.txt"), "keep").unwrap();
    let out = relaxwave(&["profile", "--out", busy.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(busy.join("notes.txt").exists());
}
