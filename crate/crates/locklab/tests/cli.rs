//! End-to-end smoke tests of the installed binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use locklab::bench::{parse_bench, write_bench};
use locklab_core::randgen::{random_netlist, RandNetlistParams};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locklab"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn locklab");
    assert!(
        out.status.success(),
        "locklab {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_demo_bench(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let n = random_netlist(&RandNetlistParams::medium(), seed);
    let path = dir.join(name);
    fs::write(&path, write_bench(&n)).unwrap();
    path
}

fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.toml");
    fs::write(
        &path,
        r#"
[extraction]
forward_depth = 4

[locking]
key_bits = 8

[dataset]
relocks = 8
relock_key_bits = 8
locks_per_netlist = 4

[model]
epochs = 4

[evolution]
population = 3
generations = 2
epochs_per_fitness = 2
"#,
    )
    .unwrap();
    path
}

#[test]
fn keygen_is_deterministic_and_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = run_ok(&[
        "keygen",
        "--bits",
        "16",
        "--seed",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let out2 = run_ok(&[
        "keygen",
        "--bits",
        "16",
        "--seed",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(stdout(&out1), stdout(&out2));
    assert_eq!(stdout(&out1).trim().len(), 16);
    let key_json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("key.json")).unwrap()).unwrap();
    assert_eq!(key_json["key"].as_str().unwrap(), stdout(&out1).trim());
}

#[test]
fn lock_produces_bench_and_record_and_eval_scores_them() {
    let dir = tempfile::tempdir().unwrap();
    let bench = write_demo_bench(dir.path(), "demo.bench", 11);
    run_ok(&[
        "lock",
        bench.to_str().unwrap(),
        "--scheme",
        "epic",
        "--key-bits",
        "16",
        "--seed",
        "7",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let locked_path = dir.path().join("locked.bench");
    let record_path = dir.path().join("lockrecord.json");
    assert!(locked_path.is_file() && record_path.is_file());
    let locked = parse_bench(&fs::read_to_string(&locked_path).unwrap()).unwrap();
    assert_eq!(locked.key_inputs.len(), 16);

    // a self-evaluation of the true key scores 100
    let out = run_ok(&[
        "eval",
        "--pred",
        record_path.to_str().unwrap(),
        "--truth",
        record_path.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&out).trim(), "100");
}

#[test]
fn transform_and_optimize_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let nary = dir.path().join("nary.bench");
    fs::write(
        &nary,
        "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(z)\nt = NOT(y)\ny = NOT(x)\nx = AND(a, b, c)\nz = BUF(t)\n",
    )
    .unwrap();
    run_ok(&[
        "transform",
        nary.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let generic =
        parse_bench(&fs::read_to_string(dir.path().join("generic.bench")).unwrap()).unwrap();
    assert!(generic.gates().all(|g| g.fanin.len() <= 2));

    run_ok(&[
        "optimize",
        dir.path().join("generic.bench").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let optimized =
        parse_bench(&fs::read_to_string(dir.path().join("optimized.bench")).unwrap()).unwrap();
    assert!(optimized.logic_gate_count() < generic.logic_gate_count());
}

#[test]
fn extract_writes_one_row_per_key_input() {
    let dir = tempfile::tempdir().unwrap();
    let bench = write_demo_bench(dir.path(), "demo.bench", 13);
    let cfgp = tiny_config(dir.path());
    run_ok(&[
        "lock",
        bench.to_str().unwrap(),
        "--config",
        cfgp.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    run_ok(&[
        "extract",
        dir.path().join("locked.bench").to_str().unwrap(),
        "--lockrecord",
        dir.path().join("lockrecord.json").to_str().unwrap(),
        "--config",
        cfgp.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(dir.path().join("localities.csv")).unwrap();
    assert_eq!(
        csv.lines().count(),
        1 + 8,
        "header plus one row per key bit"
    );
    assert!(csv.starts_with("label,v0,"));
}

#[test]
fn srs_dataset_train_attack_eval_chain() {
    let dir = tempfile::tempdir().unwrap();
    let bench = write_demo_bench(dir.path(), "demo.bench", 17);
    let cfgp = tiny_config(dir.path());

    let ds_dir = dir.path().join("ds");
    run_ok(&[
        "gen-dataset",
        "--scenario",
        "srs",
        "--target",
        bench.to_str().unwrap(),
        "--config",
        cfgp.to_str().unwrap(),
        "--seed",
        "21",
        "--out",
        ds_dir.to_str().unwrap(),
    ]);
    for f in [
        "dataset/manifest.json",
        "dataset/data.csv",
        "dataset/provenance.csv",
        "dataset/test_vectors.csv",
        "target/locked.bench",
        "truth/lockrecord.json",
    ] {
        assert!(ds_dir.join(f).is_file(), "missing {f}");
    }

    let model_dir = dir.path().join("model");
    run_ok(&[
        "train",
        "--dataset",
        ds_dir.join("dataset").to_str().unwrap(),
        "--kind",
        "mlp",
        "--config",
        cfgp.to_str().unwrap(),
        "--seed",
        "22",
        "--out",
        model_dir.to_str().unwrap(),
    ]);
    assert!(model_dir.join("model.json").is_file());

    let attack_dir = dir.path().join("attack");
    let out = run_ok(&[
        "attack",
        "--scenario",
        "srs",
        "--target",
        bench.to_str().unwrap(),
        "--kind",
        "mlp",
        "--config",
        cfgp.to_str().unwrap(),
        "--seed",
        "23",
        "--out",
        attack_dir.to_str().unwrap(),
    ]);
    assert!(stdout(&out).contains("kpa"));
    assert!(attack_dir.join("report.json").is_file());

    let out = run_ok(&[
        "eval",
        "--pred",
        attack_dir.join("predicted_key.json").to_str().unwrap(),
        "--truth",
        attack_dir.join("truth/lockrecord.json").to_str().unwrap(),
    ]);
    let kpa: f64 = stdout(&out).trim().parse().unwrap();
    assert!((0.0..=100.0).contains(&kpa));

    let img_dir = dir.path().join("imgs");
    run_ok(&[
        "export-image",
        "--dataset",
        ds_dir.join("dataset").to_str().unwrap(),
        "--png",
        "--out",
        img_dir.to_str().unwrap(),
    ]);
    assert!(img_dir.join("label0.pgm").is_file());
    assert!(img_dir.join("label1.pgm").is_file());
    assert!(img_dir.join("label0.png").is_file());
}

#[test]
fn evolve_emits_log_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let bench = write_demo_bench(dir.path(), "demo.bench", 19);
    let cfgp = tiny_config(dir.path());
    let ds_dir = dir.path().join("ds");
    run_ok(&[
        "gen-dataset",
        "--scenario",
        "srs",
        "--target",
        bench.to_str().unwrap(),
        "--config",
        cfgp.to_str().unwrap(),
        "--seed",
        "31",
        "--out",
        ds_dir.to_str().unwrap(),
    ]);
    let out_dir = dir.path().join("evo");
    let out = run_ok(&[
        "evolve",
        "--dataset",
        ds_dir.join("dataset").to_str().unwrap(),
        "--config",
        cfgp.to_str().unwrap(),
        "--seed",
        "32",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(stdout(&out).contains("best architecture"));
    assert!(out_dir.join("model.json").is_file());
    let log = fs::read_to_string(out_dir.join("evolution.jsonl")).unwrap();
    assert_eq!(
        log.lines().count(),
        6,
        "population x generations evaluations"
    );
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(
            v.get("genotype").is_some() && v.get("kpa").is_some() && v.get("wall_ms").is_some()
        );
    }
}

#[test]
fn equiv_check_reports_equivalence_and_counterexamples() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bench");
    fs::write(&a, "INPUT(x)\nINPUT(y)\nOUTPUT(z)\nz = NAND(x, y)\n").unwrap();
    let b = dir.path().join("b.bench");
    fs::write(
        &b,
        "INPUT(x)\nINPUT(y)\nOUTPUT(z)\nnx = NOT(x)\nny = NOT(y)\nz = OR(nx, ny)\n",
    )
    .unwrap();
    let out = run_ok(&[
        "equiv-check",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--mode",
        "exhaustive",
    ]);
    assert_eq!(stdout(&out).trim(), "equivalent");

    let c = dir.path().join("c.bench");
    fs::write(&c, "INPUT(x)\nINPUT(y)\nOUTPUT(z)\nz = AND(x, y)\n").unwrap();
    let out = run_ok(&[
        "equiv-check",
        a.to_str().unwrap(),
        c.to_str().unwrap(),
        "--mode",
        "random",
        "--seed",
        "4",
    ]);
    assert!(stdout(&out).contains("counterexample"));
}

#[test]
fn failures_exit_nonzero_with_json_stderr() {
    // missing input file
    let out = bin()
        .args(["transform", "/nonexistent.bench"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert!(err["error"]
        .as_str()
        .unwrap()
        .contains("/nonexistent.bench"));

    // config schema violation
    let dir = tempfile::tempdir().unwrap();
    let cfgp = dir.path().join("bad.toml");
    fs::write(&cfgp, "[locking]\nkey_bitz = 4\n").unwrap();
    let out = bin()
        .args(["keygen", "--config", cfgp.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert!(err["error"].as_str().unwrap().contains("unknown field"));

    // unknown flag (clap handles this one)
    let out = bin().args(["keygen", "--frobnicate"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn lock_subcommand_matches_the_library_exactly() {
    use locklab_core::seed;
    let dir = tempfile::tempdir().unwrap();
    let bench = write_demo_bench(dir.path(), "demo.bench", 29);
    run_ok(&[
        "lock",
        bench.to_str().unwrap(),
        "--key-bits",
        "8",
        "--seed",
        "77",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let from_cli =
        parse_bench(&fs::read_to_string(dir.path().join("locked.bench")).unwrap()).unwrap();

    let source = parse_bench(&fs::read_to_string(&bench).unwrap()).unwrap();
    let generic = locklab_core::transform::to_generic(&source).unwrap();
    let key = locklab_core::locking::keygen(8, seed::derive(77, &[0x10]));
    let (from_lib, _) =
        locklab_core::locking::lock_epic(&generic, &key, seed::derive(77, &[0x11])).unwrap();
    assert!(
        from_cli.isomorphic(&from_lib),
        "the subcommand is a thin adapter"
    );
}

#[test]
fn version_reports_format_versions() {
    let out = run_ok(&["--version"]);
    let text = stdout(&out);
    assert!(text.contains("bench format 1"));
    assert!(text.contains("model format 1"));
}
