use std::path::PathBuf;

use spatial_concepts::explore::Policy;
use spco::commands::{eval, replay_run, run, suite, Overrides};

fn preset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../presets/{name}.toml"))
}

#[test]
fn run_replay_and_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.toml");
    let text = std::fs::read_to_string(preset("exp1"))
        .unwrap()
        .replace("particles = 1000", "particles = 10")
        .replace("rooms = 8", "rooms = 4");
    std::fs::write(&small, text).unwrap();

    let out = dir.path().join("run");
    let overrides = Overrides {
        seed: Some(2),
        policy: Some(Policy::SpcoaeCost),
        steps: Some(6),
        ..Overrides::default()
    };
    run(&small, &out, &overrides).unwrap();
    let metrics = std::fs::read(out.join("metrics.csv")).unwrap();

    let again = dir.path().join("replay");
    replay_run(
        &out.join("config.toml"),
        &out.join("observations.json"),
        None,
        &again,
    )
    .unwrap();
    assert_eq!(std::fs::read(again.join("metrics.csv")).unwrap(), metrics);

    let e = eval(&out).unwrap();
    assert_eq!(e.steps, 6);
    assert!(e.travel_total > 0.0);
    assert!((0.0..=100.0).contains(&e.nms_c));
}

#[test]
fn suite_writes_its_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    let text = std::fs::read_to_string(preset("policy_suite"))
        .unwrap()
        .replace("particles = 200", "particles = 6")
        .replace("rooms = 8", "rooms = 4")
        .replace("seeds = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]", "seeds = [0]");
    std::fs::write(&cfg, text).unwrap();
    let table = suite(&cfg, dir.path()).unwrap();
    assert_eq!(table.lines().count(), 2 + 5);
    for f in ["runs.csv", "summary.csv", "summary.md"] {
        assert!(dir.path().join(f).exists());
    }
}
