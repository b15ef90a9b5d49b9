use std::path::Path;
use std::process::{Command, Output};

fn hiermc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hiermc"))
        .args(args)
        .env_remove("HIERMC_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generate(dir: &Path, seed: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "--seed", seed, "generate", "--n", "60", "--m", "20", "--out", dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    hiermc(&args)
}

const CORNER: &[&str] = &["--p", "1", "--theta", "0", "--alpha", "1", "--beta", "0.5", "--gamma", "0"];

#[test]
fn theory_line_and_exit_codes() {
    let o = hiermc(&["theory", "--n", "1000", "--m", "500", "--theta", "0", "--delta-g", "0.333333333333", "--delta-c", "0.166666666667"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("p_star=0.0828931 regime=clustering-limited"), "{}", stdout(&o));

    let o = hiermc(&["theory", "--n", "1000", "--m", "500", "--theta", "0.1", "--delta-g", "0", "--delta-c", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate model"));

    let o = hiermc(&["theory", "--n", "1000", "--m", "500", "--theta", "0.1", "--delta-g", "0.5", "--delta-c", "0.5"]);
    assert!(stdout(&o).contains("prefactor=2.5"), "{}", stdout(&o));
}

#[test]
fn malformed_edge_list_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let obs = dir.path().join("y.txt");
    std::fs::write(&graph, "0 1\n0 x\n").unwrap();
    std::fs::write(&obs, "0 0 1\n").unwrap();
    let o = hiermc(&[
        "recover", "--graph", graph.to_str().unwrap(), "--observations", obs.to_str().unwrap(), "--n", "6", "--m", "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("g.txt:2"));
}

#[test]
fn generate_then_recover_corner() {
    let dir = tempfile::tempdir().unwrap();
    let o = generate(dir.path(), "3", CORNER);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["graph.txt", "observations.txt", "truth.txt", "partition.txt", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let inst = dir.path().to_str().unwrap();
    let truth = dir.path().join("truth.txt");
    let o = hiermc(&["recover", "--instance", inst, "--truth", truth.to_str().unwrap()]);
    let line = stdout(&o);
    assert!(line.contains("success=true"), "{line}");
    assert!(line.contains("alpha_hat="));

    let o = hiermc(&["recover", "--instance", inst]);
    let line = stdout(&o);
    assert!(o.status.success());
    assert!(!line.contains("success="), "{line}");
    assert!(line.contains("theta_hat="), "{line}");
}

#[test]
fn seed_flag_beats_environment() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let args = |d: &Path| {
        vec![
            "generate".to_string(), "--n".into(), "60".into(), "--m".into(), "20".into(), "--p".into(), "0.3".into(),
            "--theta".into(), "0.1".into(), "--alpha".into(), "0.5".into(), "--beta".into(), "0.2".into(),
            "--gamma".into(), "0.05".into(), "--out".into(), d.to_str().unwrap().into(),
        ]
    };
    let run = |d: &Path, env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_hiermc"));
        c.env_remove("HIERMC_SEED");
        if let Some(e) = env {
            c.env("HIERMC_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        assert!(c.args(args(d)).output().unwrap().status.success());
        std::fs::read_to_string(d.join("graph.txt")).unwrap()
    };
    let env_only = run(dirs[0].path(), Some("11"), None);
    let flag_only = run(dirs[1].path(), None, Some("11"));
    let both = run(dirs[2].path(), Some("11"), Some("12"));
    assert_eq!(env_only, flag_only);
    assert_ne!(both, flag_only);
}

#[test]
fn sweep_writes_one_row_per_multiplier() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"n": 120, "m": 40, "graph": {"form": "absolute", "alpha": 0.6, "beta": 0.2, "gamma": 0.02},
            "theta": 0.1, "multipliers": [0.5, 1.0, 2.0], "trials": 3, "flag": "groups-and-vectors"}"#,
    )
    .unwrap();
    let out = dir.path().join("sweep.csv");
    let o = hiermc(&["sweep", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 4, "{csv}");
    assert!(dir.path().join("sweep.csv.manifest.json").exists());
}

#[test]
fn oracle_on_tiny_instance() {
    // generated vectors need more columns; write an n=6, m=2 instance by hand
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let rows = ["01", "10", "11", "01", "10", "11"];
    std::fs::write(d.join("truth.txt"), rows.join("\n") + "\n").unwrap();
    let part: String = (0..6).map(|u| format!("{u} {} {}\n", u / 3, u % 3)).collect();
    std::fs::write(d.join("partition.txt"), part).unwrap();
    std::fs::write(d.join("graph.txt"), "0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n").unwrap();
    let obs: String = rows
        .iter()
        .enumerate()
        .flat_map(|(u, r)| r.chars().enumerate().map(move |(c, v)| format!("{u} {c} {v}\n")))
        .collect();
    std::fs::write(d.join("observations.txt"), obs).unwrap();
    std::fs::write(
        d.join("manifest.json"),
        r#"{"seed": 0, "spec": {
            "config": {"n": 6, "m": 2, "c": 2, "g": 3, "r": 2, "q": 2, "group_sizes": [1, 1, 1, 1, 1, 1]},
            "graph": {"alpha": 0.95, "beta": 0.9, "gamma": 0.05},
            "observation": {"p": 1.0, "theta": 0.05},
            "profile": {"tau": [0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125]}}}"#,
    )
    .unwrap();
    let o = hiermc(&["oracle", "--instance", d.to_str().unwrap(), "--with-pipeline"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o);
    assert!(line.starts_with("candidates=184320 "), "{line}");
    assert!(line.contains("mle_is_truth=true"), "{line}");
    assert!(line.contains("pipeline_l="), "{line}");
}
