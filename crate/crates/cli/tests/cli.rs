use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_khess"))
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> String {
    root().join("configs").join(name).display().to_string()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("khess-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "stdout must be one JSON object: {text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema_version"], 1);
    v
}

/// Exit code and the parsed one-line stderr record.
fn failure(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().unwrap();
    let err = String::from_utf8(out.stderr).unwrap();
    let last = err.trim_end().lines().last().unwrap_or_default().to_string();
    let v: Value = serde_json::from_str(&last).unwrap_or_else(|_| panic!("no JSON error line in {err:?}"));
    assert_eq!(v["error"]["exit_code"], code);
    (code, v)
}

fn required_keys(schema: &str) -> Vec<String> {
    let s: Value =
        serde_json::from_str(&fs::read_to_string(root().join("docs/schemas").join(schema)).unwrap()).unwrap();
    s["required"].as_array().unwrap().iter().map(|k| k.as_str().unwrap().to_string()).collect()
}

#[test]
fn exponents_canonical() {
    let v = json_ok(&["exponents", "--n", "3", "--k", "1", "--q", "6", "--l0", "0", "--linf", "0"]);
    assert_eq!(v["q_star"], 5.0);
    assert_eq!(v["q_jl"], "inf");
    assert_eq!(v["P4"][0], 0.6);
    assert_eq!(v["P4"][1], 0.4);
    let p4 = &v["stationary_points"]["l0"][3];
    assert_eq!(p4["kind"], "stable focus");
    assert!((p4["eigenvalues"][0][0].as_f64().unwrap() + 0.1).abs() < 1e-12);
}

#[test]
fn exponents_text() {
    let out = run(&["exponents", "--n", "11", "--k", "1", "--q", "6", "--l0", "0", "--linf", "-1", "--format", "text"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let qjl = text.lines().find(|l| l.starts_with("q_jl ")).unwrap();
    let v: f64 = qjl.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((v - 6.92198).abs() < 1e-4, "{qjl}");
    assert!(text.contains("stable focus") || text.contains("node"));
}

#[test]
fn exponents_negative_l0_from_weight() {
    let v = json_ok(&["exponents", "--config", &config("canonical.toml"), "--linf", "-2"]);
    assert_eq!(v["l0"], 0.0);
    assert_eq!(v["delta"], 0.0);
}

#[test]
fn classify_example1_is_p2() {
    let dir = scratch("classify");
    let orb = dir.join("orbit.csv");
    let v = json_ok(&[
        "classify",
        "--config",
        &config("example1.toml"),
        "--w0",
        "-1",
        "--emit-orbit",
        orb.to_str().unwrap(),
    ]);
    assert_eq!(v["verdict"], "P2");
    for key in required_keys("classification.schema.json") {
        assert!(v.get(&key).is_some(), "missing {key}");
    }
    let d = v["decay"]["rel_error"].as_f64().unwrap();
    assert!(d < 0.01, "{d}");
    let text = fs::read_to_string(&orb).unwrap();
    assert!(text.starts_with("t,x,y\n"));
    assert_eq!(text.lines().count() - 1, v["orbit"]["samples"].as_u64().unwrap() as usize);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn classify_p4_with_longer_horizon() {
    let v = json_ok(&["classify", "--config", &config("canonical.toml"), "--w0", "-1", "--t-end", "60"]);
    assert_eq!(v["verdict"], "P4plus");
    assert_eq!(v["p4_focus"], true);
}

#[test]
fn check_weight_report() {
    let v = json_ok(&["check-weight", "--config", &config("canonical.toml")]);
    for key in required_keys("assumption_report.schema.json") {
        assert!(v.get(&key).is_some(), "missing {key}");
    }
    assert_eq!(v["entire_ok"], true);
    let v = json_ok(&["check-weight", "--config", &config("example1.toml")]);
    assert_eq!(v["rho2"]["status"], "fails");
    assert!(v["rho2"]["witness"].is_object());
}

#[test]
fn solve_then_orbit() {
    let dir = scratch("solve");
    let prof = dir.join("p.csv");
    let orb = dir.join("o.csv");
    let v = json_ok(&[
        "solve",
        "--config",
        &config("canonical.toml"),
        "--w0",
        "-1",
        "--rmax",
        "10",
        "--out",
        prof.to_str().unwrap(),
    ]);
    assert_eq!(v["profile"]["truncated"], Value::Null);
    let text = fs::read_to_string(&prof).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,w,wprime"));
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((last[0] - 10.0).abs() < 1e-12);
    json_ok(&[
        "orbit",
        "--config",
        &config("canonical.toml"),
        "--from-profile",
        prof.to_str().unwrap(),
        "--out",
        orb.to_str().unwrap(),
    ]);
    let o = fs::read_to_string(&orb).unwrap();
    assert!(o.starts_with("t,x,y\n"));
    let first: Vec<f64> = o.lines().nth(1).unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    // regular orbits start at (n + l0, 0)
    assert!((first[1] - 3.0).abs() < 1e-6 && first[2] < 1e-6, "{first:?}");
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn solve_json_artifact() {
    let dir = scratch("json");
    let prof = dir.join("p.json");
    json_ok(&[
        "solve",
        "--config",
        &config("canonical.toml"),
        "--w0",
        "-1",
        "--rmax",
        "2",
        "--data-format",
        "json",
        "--out",
        prof.to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&prof).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["columns"], serde_json::json!(["r", "w", "wprime"]));
    assert!(v["rows"].as_array().unwrap().len() > 10);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn singular_canonical() {
    let v = json_ok(&["singular", "--config", &config("canonical.toml")]);
    assert!((v["lambda_tilde"].as_f64().unwrap() - 0.24).abs() < 1e-10);
    assert!((v["w_tilde_at_1"].as_f64().unwrap() + 1.0).abs() < 1e-10);
}

#[test]
fn sweep_count_and_determinism() {
    let dir = scratch("sweep");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    let v = json_ok(&[
        "sweep",
        "--config",
        &config("canonical.toml"),
        "--amin",
        "1",
        "--amax",
        "1e4",
        "--count",
        "64",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert!((v["lambda_tilde"].as_f64().unwrap() - 0.24).abs() < 1e-10);
    json_ok(&[
        "--jobs",
        "1",
        "sweep",
        "--config",
        &config("canonical.toml"),
        "--amin",
        "1",
        "--amax",
        "1e4",
        "--count",
        "64",
        "--out",
        b.to_str().unwrap(),
    ]);
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb, "output depends on the worker count");
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("a,lambda\n"));
    let lam: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(lam.len() >= 64);
    // the oscillation around λ̃ shrinks along the curve
    let dev = |s: &[f64]| s.iter().map(|l| (l - 0.24).abs()).fold(0.0, f64::max);
    assert!(dev(&lam[48..]) < dev(&lam[..16]));
    let c =
        json_ok(&["count", "--config", &config("canonical.toml"), "--lambda", "0.24", "--curve", a.to_str().unwrap()]);
    assert!(c["count"].as_u64().unwrap() >= 3, "{c}");
    assert_eq!(c["roots"].as_array().unwrap().len() as u64, c["count"].as_u64().unwrap());
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn intersections_canonical() {
    let v = json_ok(&["intersections", "--config", &config("canonical.toml"), "--a", "1", "--interval", "0,1e6"]);
    assert!(v["count"].as_u64().unwrap() >= 5, "{v}");
}

#[test]
fn maximal_below_and_above() {
    let v = json_ok(&["maximal", "--n", "3", "--k", "1", "--q", "3", "--lambda", "1"]);
    assert_eq!(v["status"], "converged");
    let v = json_ok(&["maximal", "--n", "3", "--k", "1", "--q", "3", "--lambda", "2"]);
    assert_eq!(v["status"], "diverged");
}

#[test]
fn tabulated_weight_relative_to_config() {
    let dir = scratch("table");
    let mut rows = String::from("r,rho\n");
    for i in -60..=60 {
        let r = 10f64.powf(i as f64 / 10.0);
        rows.push_str(&format!("{r:?},{:?}\n", 1.0 / (1.0 + r * r)));
    }
    fs::write(dir.join("rho.csv"), rows).unwrap();
    let cfg = dir.join("t.toml");
    fs::write(&cfg, "[params]\nn = 5\nk = 1\nq = 3.0\n\n[weight]\nkind = \"tabulated\"\ntable = \"rho.csv\"\n")
        .unwrap();
    let v = json_ok(&["check-weight", "--config", cfg.to_str().unwrap()]);
    assert!((v["l_inf"].as_f64().unwrap() + 2.0).abs() < 1e-3, "{v}");
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn unknown_subcommand_is_usage() {
    let (code, v) = failure(&["frobnicate"]);
    assert_eq!(code, 64);
    assert_eq!(v["error"]["kind"], "usage");
}

#[test]
fn missing_output_path_is_usage() {
    let (code, _) = failure(&["solve", "--n", "3", "--k", "1", "--q", "6", "--w0", "-1", "--rmax", "1"]);
    assert_eq!(code, 64);
}

#[test]
fn unreadable_config() {
    let (code, v) = failure(&["check-weight", "--config", "/nonexistent/khess.toml"]);
    assert_eq!(code, 66);
    assert_eq!(v["error"]["kind"], "unreadable");
}

#[test]
fn invalid_config_names_the_line() {
    let dir = scratch("badcfg");
    let cfg = dir.join("bad.toml");
    fs::write(&cfg, "[params]\nn = 3\nk = 1\nqq = 6.0\n").unwrap();
    let (code, v) = failure(&["check-weight", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    let msg = v["error"]["message"].as_str().unwrap();
    assert!(msg.contains("bad.toml:4:1:") && msg.contains("qq"), "{msg}");
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn domain_and_numeric_errors() {
    let (code, v) = failure(&["singular", "--n", "3", "--k", "1", "--q", "3"]);
    assert_eq!((code, v["error"]["kind"].as_str()), (1, Some("domain")));
    let dir = scratch("numeric");
    let cfg = dir.join("c.toml");
    fs::write(&cfg, "[params]\nn = 3\nk = 1\nq = 6.0\n\n[integrator]\nmax_steps = 3\n").unwrap();
    let out = dir.join("p.csv");
    let (code, v) = failure(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--w0",
        "-1",
        "--rmax",
        "100",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!((code, v["error"]["kind"].as_str()), (2, Some("numeric")));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn unwritable_output() {
    let (code, v) = failure(&[
        "solve",
        "--n",
        "3",
        "--k",
        "1",
        "--q",
        "6",
        "--w0",
        "-1",
        "--rmax",
        "1",
        "--out",
        "/nonexistent/dir/p.csv",
    ]);
    assert_eq!(code, 73);
    assert_eq!(v["error"]["kind"], "output");
}
