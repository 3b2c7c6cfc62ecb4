use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn chansim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chansim")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn fixtures() -> TempDir {
    let dir = TempDir::new().unwrap();
    let out = chansim(&["fixtures", "emit", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn write(dir: &Path, name: &str, value: &Value) -> String {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, serde_json::to_vec(value).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn noisy_quantum_simulation_verifies() {
    let dir = fixtures();
    let cert = path(dir.path(), "cert.json");
    let input = path(dir.path(), "povm_states.json");
    let out = chansim(&["simulate", "quantum", "--in", &input, "--noise", "delta:0.5", "--out", &cert]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert!(c["result"]["residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(c["result"]["mixture"]["states"], 2);

    let v = chansim(&["verify", &cert, "--in", &input]);
    assert_eq!(code(&v), 0);
    assert_eq!(stdout_json(&v)["valid"], true);
}

#[test]
fn octahedron_pairwise_violation() {
    let dir = fixtures();
    let out = chansim(&["certify", "pairwise", "--in", &path(dir.path(), "octahedron.json"), "--d", "2"]);
    assert_eq!(code(&out), 2);
    let c = stdout_json(&out);
    assert_eq!(c["result"]["value"].as_f64(), Some(6.0));
    assert_eq!(c["result"]["bound"].as_f64(), Some(5.0));
    assert_eq!(c["result"]["verdict"], "violation");

    let pass = chansim(&["certify", "pairwise", "--in", &path(dir.path(), "octahedron.json"), "--d", "3"]);
    assert_eq!(code(&pass), 0);
}

#[test]
fn octahedron_asymmetry_and_storability() {
    let dir = fixtures();
    let out = chansim(&["certify", "asymmetry", "--in", &path(dir.path(), "octahedron_polytope.json")]);
    assert_eq!(code(&out), 0);
    let c = stdout_json(&out);
    assert!((c["result"]["asymmetry"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((c["result"]["infstor"].as_f64().unwrap() - 2.0).abs() < 1e-6);

    let st = chansim(&["certify", "storability", "--in", &path(dir.path(), "octahedron.json")]);
    assert_eq!(code(&st), 0);
    assert_eq!(stdout_json(&st)["result"]["value"].as_f64(), Some(2.0));
}

#[test]
fn tampered_certificate_is_rejected() {
    let dir = fixtures();
    let cert = path(dir.path(), "cert.json");
    let input = path(dir.path(), "depolarization.json");
    assert_eq!(code(&chansim(&["simulate", "quantum", "--in", &input, "--noise", "delta:1/2", "--out", &cert])), 0);
    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let w = c["result"]["mixture"]["terms"][0]["weight"].as_f64().unwrap();
    c["result"]["mixture"]["terms"][0]["weight"] = json!(w * 0.9);
    let bad = write(dir.path(), "bad.json", &c);
    let v = chansim(&["verify", &bad]);
    assert_eq!(code(&v), 2);
    assert_eq!(stdout_json(&v)["valid"], false);

    let wrong_input = chansim(&["verify", &cert, "--in", &path(dir.path(), "povm_states.json")]);
    assert_eq!(code(&wrong_input), 2);
}

#[test]
fn certificates_are_byte_identical_across_runs() {
    let dir = fixtures();
    let input = path(dir.path(), "depolarization.json");
    let a = chansim(&["simulate", "quantum", "--in", &input, "--noise", "delta:0.5"]);
    let b = chansim(&["simulate", "quantum", "--in", &input, "--noise", "delta:0.5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let other = TempDir::new().unwrap();
    chansim(&["fixtures", "emit", "--dir", other.path().to_str().unwrap()]);
    for name in ["povm_states.json", "depolarization.json"] {
        assert_eq!(std::fs::read(dir.path().join(name)).unwrap(), std::fs::read(other.path().join(name)).unwrap());
    }
}

#[test]
fn noiseless_simulation_and_ball() {
    let dir = fixtures();
    let out = chansim(&["simulate", "quantum", "--in", &path(dir.path(), "depolarization.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["result"]["mixture"]["states"], 3);

    let ball = json!({
        "effects": [{"c": 0.5, "v": [0.5, 0.0]}, {"c": 0.5, "v": [-0.5, 0.0]}],
        "ball_states": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]],
        "norm_index": 2
    });
    let input = write(dir.path(), "ball.json", &ball);
    let cert = path(dir.path(), "ball_cert.json");
    assert_eq!(code(&chansim(&["simulate", "ball", "--in", &input, "--delta", "1/4", "--out", &cert])), 0);
    assert_eq!(code(&chansim(&["verify", &cert])), 0);
}

#[test]
fn reduce_and_verify() {
    let dir = fixtures();
    let cert = path(dir.path(), "reduce.json");
    let input = path(dir.path(), "octahedron.json");
    let out = chansim(&["simulate", "reduce", "--in", &input, "--p", "0.25,0.25,0.25,0.25", "--out", &cert]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = chansim(&["verify", &cert, "--in", &input]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));
}

#[test]
fn noisy_to_noiseless_threshold() {
    let dir = TempDir::new().unwrap();
    // extremal columns of the 1/2-noisy 3-state channel
    let (hi, lo) = (1.0 - 2.0 / 6.0, 1.0 / 6.0);
    let target = json!({"states": [[hi, lo, lo], [lo, hi, lo], [lo, lo, hi]]});
    let input = write(dir.path(), "noisy.json", &target);
    let ok = chansim(&["simulate", "noisy-to-noiseless", "--in", &input, "--noise", "delta:1/2", "--d", "3"]);
    assert_eq!(code(&ok), 0);
    let ok2 = chansim(&["simulate", "noisy-to-noiseless", "--in", &input, "--noise", "delta:1/2", "--d", "2"]);
    assert_eq!(code(&ok2), 0);
    let cert = path(dir.path(), "w.json");
    let no = chansim(&[
        "simulate",
        "noisy-to-noiseless",
        "--in",
        &input,
        "--noise",
        "delta:1/2",
        "--d",
        "1",
        "--out",
        &cert,
    ]);
    assert_eq!(code(&no), 2);
    let c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["result"]["kind"], "noiseless_witness");
    assert_eq!(code(&chansim(&["verify", &cert])), 0);
}

#[test]
fn signalling_replacer_and_subset() {
    let s = chansim(&["certify", "signalling", "--n", "8", "--delta", "0.125"]);
    assert_eq!(code(&s), 0);
    assert_eq!(stdout_json(&s)["result"]["dimension"], 8);
    let s = chansim(&["certify", "signalling", "--n", "8", "--delta", "1/7"]);
    assert_eq!(stdout_json(&s)["result"]["dimension"], 7);

    let r = chansim(&["certify", "replacer", "--m", "4", "--n", "4", "--delta", "1/2"]);
    assert_eq!(code(&r), 0);
    assert_eq!(stdout_json(&r)["result"]["bounds"]["exact"], 3);

    let dir = TempDir::new().unwrap();
    let id = write(dir.path(), "id.json", &json!([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]));
    assert_eq!(code(&chansim(&["certify", "subset", "--in", &id, "--r", "2", "--d", "2"])), 2);
    assert_eq!(code(&chansim(&["certify", "subset", "--in", &id, "--r", "2", "--d", "3"])), 0);
}

#[test]
fn holevo_commuting_case_is_tight() {
    let dir = TempDir::new().unwrap();
    let z = [0.0, 0.0];
    let doc = json!({
        "povm": {"outcomes": [[[[1.0, 0.0], z], [z, z]], [[z, z], [z, [1.0, 0.0]]]]},
        "states": [[[[0.9, 0.0], z], [z, [0.1, 0.0]]], [[[0.2, 0.0], z], [z, [0.8, 0.0]]]],
        "priors": [0.3, 0.7]
    });
    let out = chansim(&["certify", "holevo", "--in", &write(dir.path(), "h.json", &doc)]);
    assert_eq!(code(&out), 0);
    let r = &stdout_json(&out)["result"];
    assert!((r["chi"].as_f64().unwrap() - r["information"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let missing = path(dir.path(), "missing.json");
    let out = chansim(&["certify", "pairwise", "--in", &missing, "--d", "2", "--json-errors"]);
    assert_eq!(code(&out), 1);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "io");

    let bad = write(dir.path(), "bad.json", &json!([[0.5, 0.5], [0.4, 0.5]]));
    assert_eq!(code(&chansim(&["certify", "pairwise", "--in", &bad, "--d", "1"])), 1);
    assert_eq!(code(&chansim(&["simulate", "bogus"])), 1);
    let usage = chansim(&["certify", "signalling", "--n", "3", "--delta", "x", "--json-errors"]);
    assert_eq!(code(&usage), 1);
    assert_eq!(serde_json::from_slice::<Value>(&usage.stderr).unwrap()["error"]["kind"], "usage");
    assert_eq!(code(&chansim(&["--help"])), 0);
}

#[test]
fn pure_states_rejected_under_noise() {
    let dir = TempDir::new().unwrap();
    let z = [0.0, 0.0];
    let one = [1.0, 0.0];
    let doc = json!({
        "povm": {"outcomes": [[[one, z], [z, z]], [[z, z], [z, one]]]},
        "states": [[[one, z], [z, z]]]
    });
    let out = chansim(&["simulate", "quantum", "--in", &write(dir.path(), "p.json", &doc), "--noise", "delta:0.5"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn witness_recomputed_against_input() {
    let dir = fixtures();
    let input = path(dir.path(), "octahedron.json");
    let cert = path(dir.path(), "w.json");
    assert_eq!(code(&chansim(&["certify", "pairwise", "--in", &input, "--d", "2", "--out", &cert])), 2);
    assert_eq!(code(&chansim(&["verify", &cert, "--in", &input])), 0);

    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    c["result"]["value"] = json!(5.5);
    let bad = write(dir.path(), "bad.json", &c);
    assert_eq!(code(&chansim(&["verify", &bad])), 0);
    assert_eq!(code(&chansim(&["verify", &bad, "--in", &input])), 2);
}
