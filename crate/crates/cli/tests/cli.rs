use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn gpcn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpcn"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PGCN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status.code(),
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Synthesizes a small two-class graph and a config that trains on it.
fn setup(dir: &Path) -> PathBuf {
    ok(gpcn(
        &["synth", "--n", "120", "--p-in", "0.1", "--p-out", "0.01", "--feature-dim", "4", "--seed", "3", "--out", "g.txt"],
        dir,
    ));
    let config = dir.join("exp.toml");
    fs::write(
        &config,
        r#"
name = "toy"
output_dir = "run"

[dataset]
path = "g.txt"

[model]
kind = "gpcn_link"
hidden = 8
l_layers = 2
gamma = 0.5

[train]
lr = 0.05
max_epochs = 40
patience = 20

[split]
seeds = [0, 1]

[grid]
lr = [0.01, 0.05]
gamma = [0.25, 0.5]

[sweep]
gamma = [0.25]
l_layers = [1, 2]
dropout = [0.0]
"#,
    )
    .unwrap();
    config
}

#[test]
fn synth_writes_dataset_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    let text = fs::read_to_string(tmp.path().join("g.txt")).unwrap();
    assert!(text.starts_with("120 "));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("g.txt.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "synth");
    assert_eq!(m["seeds"], serde_json::json!([3]));
    assert_eq!(m["outputs"], serde_json::json!(["g.txt"]));

    // Same seed, same bytes.
    ok(gpcn(
        &["synth", "--n", "120", "--p-in", "0.1", "--p-out", "0.01", "--feature-dim", "4", "--seed", "3", "--out", "h.txt"],
        tmp.path(),
    ));
    assert_eq!(text, fs::read_to_string(tmp.path().join("h.txt")).unwrap());
}

#[test]
fn homophily_and_spectrum_report_on_a_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    let out = stdout(&ok(gpcn(&["homophily", "g.txt"], tmp.path())));
    let edge: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("edge_homophily: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(edge > 0.7, "{out}");
    assert!(out.contains("classes: 2"));

    let out = stdout(&ok(gpcn(&["spectrum", "g.txt", "--k", "3"], tmp.path())));
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue");
    assert_eq!(lines.len(), 4);
    let top: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((top - 1.0).abs() < 1e-8, "{top}");

    ok(gpcn(&["spectrum", "g.txt", "--out", "spec"], tmp.path()));
    let csv = fs::read_to_string(tmp.path().join("spec/spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 121);
    assert_eq!(manifest(&tmp.path().join("spec"))["command"], "spectrum");
}

#[test]
fn train_is_reproducible_and_feeds_the_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let config = setup(tmp.path());
    let config = config.to_str().unwrap();
    let out = stdout(&ok(gpcn(&["train", "--config", config], tmp.path())));
    assert!(out.contains("test accuracy:"), "{out}");

    let run = tmp.path().join("run");
    let first = fs::read(run.join("results.csv")).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("model,dataset,seed,"));
    assert_eq!(text.lines().count(), 3);
    for seed in [0, 1] {
        assert!(run.join(format!("checkpoint-seed{seed}.pgck")).exists());
    }
    let m = manifest(&run);
    assert_eq!(m["command"], "train");
    assert_eq!(m["seeds"], serde_json::json!([0, 1]));
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);

    ok(gpcn(&["train", "--config", config, "--jobs", "2"], tmp.path()));
    assert_eq!(first, fs::read(run.join("results.csv")).unwrap());

    let out = stdout(&ok(gpcn(
        &["bound", "g.txt", "run/checkpoint-seed0.pgck", "--theorem", "1", "--profile", "1,2,4"],
        tmp.path(),
    )));
    let lines: Vec<_> = out.lines().collect();
    assert!(lines[0].starts_with("L,gamma_theta,mu,"));
    assert_eq!(lines.len(), 5);
    ok(gpcn(&["bound", "g.txt", "run/checkpoint-seed0.pgck", "--out", "b"], tmp.path()));
    assert!(tmp.path().join("b/bound.csv").exists());
    assert_eq!(manifest(&tmp.path().join("b"))["command"], "bound");
}

#[test]
fn grid_and_ablate_write_their_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let config = setup(tmp.path());
    let config = config.to_str().unwrap();

    let out = stdout(&ok(gpcn(&["grid", "--config", config, "--seed", "0", "--out", "grid"], tmp.path())));
    assert!(out.contains("cells: 4"), "{out}");
    let grid = tmp.path().join("grid");
    assert_eq!(fs::read_to_string(grid.join("grid.csv")).unwrap().lines().count(), 5);
    let best = fs::read_to_string(grid.join("best.toml")).unwrap();
    assert!(best.contains("[model]") && best.contains("gpcn_link"), "{best}");
    assert_eq!(manifest(&grid)["seeds"], serde_json::json!([0]));

    ok(gpcn(&["ablate", "--config", config, "--seed", "0", "--out", "abl"], tmp.path()));
    let csv = fs::read_to_string(tmp.path().join("abl/ablation.csv")).unwrap();
    assert!(csv.starts_with("factor,value,model"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn verify_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stdout(&ok(gpcn(&["verify"], tmp.path())));
    assert!(!out.contains("FAIL"), "{out}");
    assert!(out.contains("checks passed"));
}

#[test]
fn failures_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = setup(tmp.path());
    let code = |args: &[&str]| gpcn(args, tmp.path()).status.code();

    assert_eq!(code(&["--version"]), Some(0));
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["train", "--no-such-flag"]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["train"]), Some(1));

    let bad = tmp.path().join("bad.toml");
    let text = fs::read_to_string(&config).unwrap();
    fs::write(&bad, text.replace("[train]", "[train]\nlearning_rate = 0.1")).unwrap();
    assert_eq!(code(&["train", "--config", bad.to_str().unwrap()]), Some(1));
    fs::write(&bad, text.replace("hidden = 8", "hidden = 0")).unwrap();
    assert_eq!(code(&["train", "--config", bad.to_str().unwrap()]), Some(1));
    fs::write(&bad, text.replace("g.txt", "missing.txt")).unwrap();
    assert_eq!(code(&["train", "--config", bad.to_str().unwrap()]), Some(2));

    assert_eq!(code(&["homophily", "missing.txt"]), Some(2));
    fs::write(tmp.path().join("broken.txt"), "3 1 2\n0 9\n").unwrap();
    let o = gpcn(&["homophily", "broken.txt"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(code(&["spectrum", "g.txt", "--k", "many"]), Some(1));
    assert_eq!(code(&["synth", "--n", "10", "--p-in", "0.1", "--p-out", "0.1"]), Some(1));
    assert_eq!(code(&["synth", "--n", "10", "--p-in", "2", "--p-out", "0.1", "--out", "x.txt"]), Some(1));
}
