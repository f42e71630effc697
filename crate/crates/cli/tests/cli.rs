use std::path::Path;
use std::process::{Command, Output};

fn arsense(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arsense"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn synth_instance(dir: &Path) {
    let out = arsense(
        &[
            "synth", "--n", "200", "--k", "2", "--min-sep", "90", "--poles", "0.9,0.5", "--m", "50", "--seed", "3",
            "--out", "inst",
        ],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_writes_instance_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    synth_instance(tmp.path());
    for f in ["u.csv", "x.csv", "model.json", "G.csv", "y.csv", "manifest.json"] {
        assert!(tmp.path().join("inst").join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("inst/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "synth");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 5);
}

#[test]
fn synth_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    synth_instance(tmp.path());
    let first = std::fs::read(tmp.path().join("inst/y.csv")).unwrap();
    synth_instance(tmp.path());
    assert_eq!(first, std::fs::read(tmp.path().join("inst/y.csv")).unwrap());
}

#[test]
fn decode_recovers_noiseless_instance() {
    let tmp = tempfile::tempdir().unwrap();
    synth_instance(tmp.path());
    let out = arsense(
        &["decode", "--y", "inst/y.csv", "--G", "inst/G.csv", "--p", "2", "--truth", "inst", "--out", "dec"],
        tmp.path(),
    );
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("success = Exact"), "{stdout}");
    assert!(tmp.path().join("dec/u_hat.csv").is_file());
}

#[test]
fn blind_decode_needs_lambda() {
    let tmp = tempfile::tempdir().unwrap();
    synth_instance(tmp.path());
    let out = arsense(&["decode", "--y", "inst/x.csv", "--p", "2"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lambda"));
}

#[test]
fn verify_doc_passes_on_separated_instance() {
    let tmp = tempfile::tempdir().unwrap();
    synth_instance(tmp.path());
    let out = arsense(&["verify", "doc", "--instance", "inst", "--out", "v"], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(tmp.path().join("v/doc.json").is_file());
}

#[test]
fn failed_assumption_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    synth_instance(tmp.path());
    // S = 50 allows fewer than one spike at the required separation.
    let out = arsense(&["verify", "thm1", "--instance", "inst", "--s", "50", "--out", "v"], tmp.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_input_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = arsense(&["decode", "--y", "nope.csv", "--G", "nope.csv", "--p", "2"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&arsense(&["synth", "--bogus"], tmp.path())), 2);
}

#[test]
fn bad_config_prints_schema() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.toml"), "name = \"x\"\nkind = \"sparsity\"\nseed = 1\nn = 10\nfoo = 3\n").unwrap();
    let out = arsense(&["experiment", "custom", "--config", "bad.toml"], tmp.path());
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("foo"), "{err}");
    assert!(err.contains("epsilon_schedule"), "{err}");
}

#[test]
fn unstable_config_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("unstable.toml"),
        "name = \"u\"\nkind = \"sparsity\"\nseed = 1\nm = 20\nn = 50\nar = [-1.5]\nsweep = [1]\n",
    )
    .unwrap();
    let out = arsense(&["experiment", "custom", "--config", "unstable.toml"], tmp.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn experiment_replay_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("small.toml"),
        "name = \"small\"\nkind = \"sparsity\"\nseed = 9\ntrials = 3\nm = 30\nn = 60\npoles = [0.5]\nsweep = [1, 2]\n",
    )
    .unwrap();
    let out = arsense(&["experiment", "custom", "--config", "small.toml", "--out", "runs"], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("runs/small");
    for f in ["small_toeplitz-gaussian.csv", "small_toeplitz-gaussian_approx.csv", "small.svg", "result.json"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let out = arsense(&["replay", "runs/small/manifest.json", "--out", "again"], tmp.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(dir.join("small_toeplitz-gaussian.csv")).unwrap(),
        std::fs::read(tmp.path().join("again/small/small_toeplitz-gaussian.csv")).unwrap()
    );
}

#[test]
fn replay_detects_tampered_output() {
    let tmp = tempfile::tempdir().unwrap();
    synth_instance(tmp.path());
    let manifest = tmp.path().join("inst/manifest.json");
    let text = std::fs::read_to_string(&manifest).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["outputs"][0]["sha256"] = serde_json::Value::String("0".repeat(64));
    std::fs::write(&manifest, serde_json::to_string(&value).unwrap()).unwrap();
    let out = arsense(&["replay", "inst/manifest.json", "--out", "again"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("differs"));
}
