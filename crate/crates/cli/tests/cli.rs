use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frenet-racer"))
}

fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["fly"]).status.code(), Some(2));
    assert_eq!(run(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["eval"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["train", "eval", "sweep", "export", "validate-config"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    let train_help = String::from_utf8_lossy(&run(&["train", "--help"]).stdout).into_owned();
    for flag in ["--config", "--seed", "--out", "--replicas"] {
        assert!(train_help.contains(flag));
    }
}

#[test]
fn bundled_configs_validate() {
    for entry in std::fs::read_dir(assets().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") && !path.to_string_lossy().ends_with(".schema.json") {
            let o = run(&["validate-config", "--config", s(&path)]);
            assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
            assert!(stderr(&o).contains("\"event\":\"config_ok\""));
        }
    }
}

#[test]
fn bad_configs_are_reported_with_their_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let o = run(&["validate-config", "--config", s(&missing)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.json"));

    let typo = dir.path().join("typo.json");
    std::fs::write(&typo, r#"{"algorithm": "partial", "total_step": 5}"#).unwrap();
    let o = run(&["validate-config", "--config", s(&typo)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("total_step"));

    let no_track = dir.path().join("track.json");
    std::fs::write(&no_track, r#"{"algorithm": "partial", "track": "imola"}"#).unwrap();
    let o = run(&["validate-config", "--config", s(&no_track)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("imola"));
}

#[test]
fn assets_directory_follows_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"algorithm": "partial", "track": "test_oval"}"#).unwrap();
    let o = bin()
        .args(["validate-config", "--config", s(&cfg)])
        .env("FRENET_RACER_ASSETS", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = bin()
        .args(["validate-config", "--config", s(&cfg)])
        .env("FRENET_RACER_ASSETS", assets())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn train_eval_sweep_export_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let run_dir = root.join("run");
    let cfg = assets().join("configs/test_oval_smoke.json");
    let o = run(&[
        "train", "--config", s(&cfg), "--steps", "600", "--replicas", "2", "--seed", "3", "--out", s(&run_dir),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for r in 0..2 {
        let rd = run_dir.join(format!("replica_{r}"));
        assert!(rd.join("final.ckpt").exists());
        assert!(rd.join("train_log.jsonl").exists());
        let saved: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(rd.join("config.json")).unwrap()).unwrap();
        assert_eq!(saved["seed"], 3 + r);
    }
    assert!(stderr(&o).lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));

    let ckpt = run_dir.join("replica_0/final.ckpt");
    let eval_dir = root.join("eval");
    let o = run(&[
        "eval", "--checkpoint", s(&ckpt), "--laps", "3", "--trajectories", "1", "--out", s(&eval_dir),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let agg: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(agg["laps"], 3);
    let episodes = std::fs::read_to_string(eval_dir.join("episodes.csv")).unwrap();
    assert_eq!(episodes.lines().count(), 4);
    let traj = std::fs::read_to_string(eval_dir.join("trajectories/episode_0000.csv")).unwrap();
    assert_eq!(traj.lines().next().unwrap(), "t,x,y,psi,v,s,n,action0,action1,reward");

    // same checkpoint and seed -> identical aggregates
    let again = run(&["eval", "--checkpoint", s(&ckpt), "--laps", "3", "--out", s(&root.join("eval2"))]);
    assert_eq!(again.stdout, o.stdout);

    let sweep_dir = root.join("sweep");
    let o = run(&[
        "sweep", "--checkpoint", s(&ckpt), "--kind", "friction", "--values", "0.5,1.0489", "--laps", "2", "--out",
        s(&sweep_dir),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(sweep_dir.join("sweep_friction.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("mu,success_pct,mean_lap_time_s,laps"));
    assert_eq!(lines.count(), 2);

    let export_dir = root.join("export");
    let o = run(&[
        "export", "--input", s(&sweep_dir.join("sweep_friction.json")), "--format", "csv", "--out", s(&export_dir),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(export_dir.join("sweep_friction.csv")).unwrap(), csv);

    let o = run(&["sweep", "--checkpoint", s(&ckpt), "--kind", "friction", "--values", "0.2", "--out", s(&sweep_dir)]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["eval", "--checkpoint", s(&root.join("missing.ckpt"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.ckpt"));
}
