use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_inclusive-irl"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_lava(out: &Path) -> Output {
    run(&[
        "run", "--env", "lavaworld", "--method", "ours", "--n-demos", "3", "--seeds", "0..9",
        "--beta-grid", "0.5,2,10", "--out", out.to_str().unwrap(), "--jobs", "2",
    ])
}

#[test]
fn run_writes_one_row_per_cell_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = run_lava(a.path());
    assert!(oa.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(stdout(&oa).lines().filter(|l| l.starts_with("lavaworld ours")).count(), 30);
    let csv_a = std::fs::read(a.path().join("records.csv")).unwrap();
    let text = String::from_utf8(csv_a.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "\"env\",\"method\",\"beta_h\",\"beta_r\",\"seed\",\"n_demos\",\"belief_true\",\"entropy\",\"entropy_gold\",\"risk\",\"regret\",\"weight_error\",\"choice_set_size\",\"wall_time_ms\""
    );
    assert_eq!(lines.count(), 30);
    assert!(text.lines().nth(1).unwrap().starts_with("\"lavaworld\",\"ours\",0.5,0.5,0,3,"));

    let ob = run(&[
        "run", "--env", "lavaworld", "--method", "ours", "--n-demos", "3", "--seeds", "0..9",
        "--beta-grid", "0.5,2,10", "--out", b.path().to_str().unwrap(), "--jobs", "1",
    ]);
    assert!(ob.status.success());
    assert_eq!(csv_a, std::fs::read(b.path().join("records.csv")).unwrap());

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["experiment"]["env"]["name"], "lavaworld");
    assert_eq!(json["experiment"]["seeds"].as_array().unwrap().len(), 10);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "jobs = 1\n[experiment]\nmethods = [\"birl\", \"ideal\"]\nbeta_grid = [1.0]\nseeds = [0, 1]\n",
    )
    .unwrap();
    let out = dir.path().join("r");
    let o = run(&[
        "run", "--config", cfg.to_str().unwrap(), "--seeds", "4", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.contains(",1.0,1.0,4,3,")), "{text}");

    std::fs::write(&cfg, "[experiment]\nbeta_gird = [1.0]\n").unwrap();
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta_gird"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["run", "--method", "bogus", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for m in ["ideal", "birl", "noise", "ours"] {
        assert!(err.contains(m), "{err}");
    }
    assert_eq!(run(&["run", "--env", "mars", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--seeds", "3..1", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--n-demos", "0", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["run", "--env", "lavaworld"]).status.code(), Some(2));
    assert_eq!(run(&["prop4", "--choices", "1", "--beta", "5", "--n", "50"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn prop4_reports_bound_and_estimate() {
    let o = run(&["prop4", "--choices", "2", "--beta", "5", "--n", "50", "--trials", "20000"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("bound     0.285"), "{s}");
    assert!(s.contains("within 3σ: yes"), "{s}");

    let o = run(&["prop4", "--choices", "2", "--beta", "0", "--n", "1"]);
    assert!(stdout(&o).contains("bound     0.500000"));
    let o = run(&["prop4", "--choices", "2", "--beta", "5", "--n", "50", "--trials", "1"]);
    assert!(o.status.success());
}

#[test]
fn props_passes_and_is_deterministic() {
    let a = run(&["props", "--seed", "7"]);
    let b = run(&["props", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().filter(|l| l.starts_with("PASS")).count(), 3);
    assert!(run(&["props", "--seed", "8"]).status.success());
    assert!(run(&["props"]).status.success());
}

#[test]
fn version_prints_schema() {
    let o = run(&["version"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("csv schema 1"));
}
