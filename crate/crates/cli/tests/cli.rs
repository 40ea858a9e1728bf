use std::path::Path;
use std::process::{Command, Output};

use flagcalc::io::SampledSpectrumJson;
use serde_json::Value;

fn flagcalc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagcalc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--jobs")
        .arg("1")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const SMALL: [&str; 4] = ["--grid", "32:4,32:8", "--line", "32:3"];

#[test]
fn identities_pass_with_defaults_and_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = flagcalc(&["identities", "--seed", "7"], a.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(code(&flagcalc(&["identities", "--seed", "7"], b.path())), 0);
    let (ja, jb) = (
        std::fs::read(a.path().join("identities.json")).unwrap(),
        std::fs::read(b.path().join("identities.json")).unwrap(),
    );
    assert_eq!(ja, jb);
    let v = json(&a.path().join("identities.json"));
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["identities"].as_array().unwrap().len(), 15);
}

#[test]
fn impossible_tolerance_exits_one_and_names_the_identity() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"tolerances": {"plancherel": 0.0}, "draws": 2}"#).unwrap();
    let o = flagcalc(&["identities", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("transform.plancherel"));
    assert!(d.path().join("identities.json").exists());
}

#[test]
fn estimates_verdicts_set_the_exit_code() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&flagcalc(&["estimates", "--kernel", "perturbed-identity"], d.path())), 0);
    for f in ["estimates.csv", "estimates.json", "sym0.csv", "sym0.json"] {
        assert!(d.path().join(f).exists(), "{f}");
    }
    assert_eq!(code(&flagcalc(&["estimates", "--kernel", "abs-w"], d.path())), 1);
    let inline = "expr:1 + 0.1*(w1^2 + w2^2)/(w1^2 + w2^2 + abs(lambda))";
    assert_eq!(code(&flagcalc(&["estimates", "--kernel", inline], d.path())), 0);
}

#[test]
fn configuration_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&flagcalc(&["estimates", "--kernel", "no-such-kernel"], d.path())), 2);
    assert_eq!(code(&flagcalc(&["estimates", "--kernel", "expr:1 + ("], d.path())), 2);
    assert_eq!(code(&flagcalc(&["invert", "--lambda-band", "0,2"], d.path())), 2);
    assert_eq!(code(&flagcalc(&["identities", "--grid", "48:4,32:8"], d.path())), 2);
    let cfg = d.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"kernal": "delta"}"#).unwrap();
    assert_eq!(code(&flagcalc(&["identities", "--config", cfg.to_str().unwrap()], d.path())), 2);
}

#[test]
fn non_invertible_kernel_exits_three_with_the_sigma_table() {
    let d = tempfile::tempdir().unwrap();
    let o = flagcalc(&["invert", "--kernel", "riesz"], d.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma_min"));
    let csv = std::fs::read_to_string(d.path().join("uniform.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
    assert!(!d.path().join("summary.json").exists());
}

#[test]
fn invert_writes_a_loadable_inverse() {
    let d = tempfile::tempdir().unwrap();
    let mut args = vec!["invert", "--kernel", "perturbed-identity"];
    args.extend(SMALL);
    let o = flagcalc(&args, d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&d.path().join("summary.json"));
    assert_eq!(s["passed"], Value::Bool(true));
    assert!(s["inversion"]["max_residual"].as_f64().unwrap() < 1e-8);
    let inv: SampledSpectrumJson = serde_json::from_str(&std::fs::read_to_string(d.path().join("inverse.json")).unwrap()).unwrap();
    assert_eq!(inv.to_sampled::<f64>().unwrap().symbols().len(), 34);
    let f = flagcalc::io::load_field::<f64>(&d.path().join("inverse-kernel.fksf")).unwrap();
    assert_eq!(f.values().len(), 32 * 32 * 32);
}

#[test]
fn report_digests_earlier_results() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&flagcalc(&["identities", "--seed", "1"], d.path())), 0);
    let o = flagcalc(&["report"], d.path());
    assert_eq!(code(&o), 0);
    let cat = json(&d.path().join("catalog.json"));
    assert_eq!(cat["kernels"].as_array().unwrap().len(), 8);
    assert!(String::from_utf8_lossy(&o.stdout).contains("15/15 identities pass"));
    assert!(json(&d.path().join("report.json"))["identities.json"].is_object());
}
