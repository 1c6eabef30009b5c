use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ma(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ma"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("MA_SEED")
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn blocki_suite_writes_two_hundred_passing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = ma(&["check", "--suite", "blocki", "--trials", "200"], dir.path());
    assert!(out.status.success());
    let rows = csv_rows(&dir.path().join("checks.csv"));
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r[5] == "true"));
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["versions"]["ma_core"].is_string());
}

#[test]
fn hardy_oracle_reports_three_quarters() {
    let dir = tempfile::tempdir().unwrap();
    let out = ma(&["oracle", "--name", "hardy_family", "--alpha", "0.25"], dir.path());
    assert!(out.status.success());
    let result = json(&dir.path().join("result.json"));
    assert!((result["lambda"].as_f64().unwrap() - 0.75).abs() < 1e-15);
}

#[test]
fn hardy_ladder_is_nonincreasing() {
    let dir = tempfile::tempdir().unwrap();
    let out = ma(
        &["eigen", "--measure", "hardy:s=2", "--m-schedule", "2:256", "--mesh", "401"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("ladder.csv"));
    let lams: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(lams.len(), 8);
    assert!(lams.windows(2).all(|w| w[1] <= w[0]));
    let header = fs::read_to_string(dir.path().join("ladder.csv")).unwrap();
    assert!(header.lines().next().unwrap().contains("lambda_m [1]"));
}

#[test]
fn identical_runs_give_identical_csvs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["check", "--suite", "energy", "--trials", "40", "--seed", "0x1234"];
    assert!(ma(&args, a.path()).status.success());
    assert!(ma(&args, b.path()).status.success());
    let read = |d: &Path| fs::read(d.join("checks.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let seed = json(&a.path().join("manifest.json"))["seed"].as_u64().unwrap();
    assert_eq!(seed, 0x1234);
}

#[test]
fn seed_precedence_is_config_env_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 7\n").unwrap();
    let run = |env: Option<&str>, flag: Option<&str>| {
        let out_dir = tempfile::tempdir().unwrap();
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ma"));
        cmd.args(["check", "--suite", "energy", "--trials", "2", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out_dir.path())
            .env_remove("MA_SEED");
        if let Some(e) = env {
            cmd.env("MA_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        assert!(cmd.output().unwrap().status.success());
        json(&out_dir.path().join("manifest.json"))["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, None), 7);
    assert_eq!(run(Some("11"), None), 11);
    assert_eq!(run(Some("11"), Some("13")), 13);
}

#[test]
fn bad_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "tol = -1.0\n").unwrap();
    let out = ma(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tol"));

    fs::write(&cfg, "seed = [\n").unwrap();
    let out = ma(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let out = ma(&["check", "--suite", "nonsense"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_writes_ledger_and_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = ma(&["solve", "--measure", "hardy:s=1.5", "--mesh", "201", "--m-schedule", "2,4,8,16"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_rows(&dir.path().join("ledger.csv")).len(), 4);
    let result = json(&dir.path().join("result.json"));
    assert!(result["solution"]["values"].as_array().unwrap().len() == 201);
}
