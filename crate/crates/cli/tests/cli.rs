use std::path::PathBuf;
use std::process::{Command, Output};

fn spec(name: &str, body: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn mo_spec() -> PathBuf {
    spec("mo.json", r#"{"family":"mo","parameters":{"lambda1":1,"lambda2":2,"lambda12":3}}"#)
}

fn blm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blm"))
        .args(args)
        .env_remove("BLM_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn validate_valid_model() {
    let o = blm(&["validate", mo_spec().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["passed"], true);
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"theta_bounds") && names.contains(&"cdf_sum_bound"));
}

#[test]
fn validate_rejects_with_report() {
    let p = spec(
        "bad_theta.json",
        r#"{"family":"custom","parameters":{},"theta":3,
            "marginals":[{"type":"exponential","rate":1},{"type":"exponential","rate":1}]}"#,
    );
    let o = blm(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["passed"], false);
    let failing: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    // 2(1 − e^{−x}) < 1 − e^{−3x} near the origin, so the cdf bound fails too
    assert_eq!(failing, ["theta_bounds", "cdf_sum_bound"]);
    // other commands refuse the model outright
    let o = blm(&["eval", p.to_str().unwrap(), "--x", "1", "--y", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"]["clause"], "theta_bounds");
    let o = blm(&["eval", p.to_str().unwrap(), "--x", "1", "--y", "1", "--permissive"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn eval_survival() {
    let o = blm(&["eval", mo_spec().to_str().unwrap(), "--x", "1", "--y", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - (-11.0f64).exp()).abs() < 1e-13);
    assert_eq!(stdout(&o).trim(), "1.67017008e-05");
}

#[test]
fn density_on_and_off_diagonal() {
    let p = mo_spec();
    let o = blm(&["density", p.to_str().unwrap(), "--x", "2", "--y", "1"]);
    assert_eq!(o.status.code(), Some(0));
    // below the diagonal H̄ = e^{-(λ1+λ12)x - λ2 y}, so h = (λ1+λ12) λ2 H̄
    let v: f64 = stdout(&o).trim().parse().unwrap();
    let expected = 4.0 * 2.0 * (-(4.0 * 2.0 + 2.0 * 1.0) as f64).exp();
    assert!((v - expected).abs() < 1e-8 * expected, "{v} vs {expected}");
    let o = blm(&["density", p.to_str().unwrap(), "--x", "1", "--y", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"]["kind"], "domain");
}

#[test]
fn moments_and_transform_csv() {
    let p = spec("mo111.json", r#"{"family":"mo","parameters":{"lambda1":1,"lambda2":1,"lambda12":1}}"#);
    let o = blm(&["moments", p.to_str().unwrap(), "--i", "2", "--j", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("i,j,closed_form,oracle,abs_diff"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..2], ["2", "1"]);
    let closed: f64 = row[2].parse().unwrap();
    assert!((closed - 7.0 / 18.0).abs() < 1e-8);
    assert!(row[4].parse::<f64>().unwrap() < 1e-8);

    let o = blm(&["transform", p.to_str().unwrap(), "--s", "1", "--t", "1"]);
    let text = stdout(&o);
    assert!(text.starts_with("s,t,closed_form,oracle,abs_diff\n"));
    let closed: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((closed - 7.0 / 15.0).abs() < 1e-8);
    let o = blm(&["transform", p.to_str().unwrap(), "--s", "2", "--t", "1.5", "--kind", "mgf"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"]["kind"], "domain");
}

#[test]
fn sample_is_deterministic() {
    let p = mo_spec();
    let a = blm(&["sample", p.to_str().unwrap(), "--n", "50", "--seed", "9"]);
    let b = blm(&["sample", p.to_str().unwrap(), "--n", "50", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# sampler=mo(") && header.contains("seed=9"), "{header}");
    assert_eq!(lines.next(), Some("x,y"));
    assert_eq!(lines.count(), 50);
    let c = blm(&["sample", p.to_str().unwrap(), "--n", "50", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_blm"))
        .args(["sample", p.to_str().unwrap(), "--n", "50"])
        .env("BLM_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
    let u = blm(&["sample", p.to_str().unwrap(), "--n", "5", "--universal"]);
    assert!(stdout(&u).starts_with("# sampler=blm("));
}

#[test]
fn checks() {
    let p = mo_spec();
    let p = p.to_str().unwrap();
    let o = blm(&["check", p, "--kind", "tp2", "--grid", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verdict"], "pass");
    let o = blm(&["check", p, "--kind", "rr2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "fail");
    for kind in ["ifr_product", "theorem6", "pqd"] {
        assert_eq!(blm(&["check", p, "--kind", kind]).status.code(), Some(0), "{kind}");
    }
    let o = blm(&["check", p, "--kind", "tp_order", "--order", "4", "--kernel", "copula"]);
    assert_eq!(o.status.code(), Some(0));
    let o = blm(&["check", p, "--kind", "ifra"]);
    assert_eq!(json(&o)["holds"], "yes");
    let bb = spec("bb.json", r#"{"family":"block_basu","parameters":{"lambda1":1,"lambda2":1,"lambda12":1}}"#);
    let o = blm(&["check", bb.to_str().unwrap(), "--kind", "theorem7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // the density condition needs an absolutely continuous law
    let o = blm(&["check", p, "--kind", "density_condition"]);
    assert_eq!(json(&o)["error"]["kind"], "precondition");
}

#[test]
fn compare_relations() {
    let weak = spec("weak.json", r#"{"family":"mo","parameters":{"lambda1":0.8,"lambda2":0.8,"lambda12":0.2}}"#);
    let strong = spec("strong.json", r#"{"family":"mo","parameters":{"lambda1":0.5,"lambda2":0.5,"lambda12":0.5}}"#);
    let (w, s) = (weak.to_str().unwrap(), strong.to_str().unwrap());
    for rel in ["uo", "concordance", "slepian", "st"] {
        let o = blm(&["compare", w, s, "--relation", rel]);
        assert_eq!(o.status.code(), Some(0), "{rel}: {}", stdout(&o));
    }
    let o = blm(&["compare", s, w, "--relation", "uo"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["holds"], "no");
    let o = blm(&["compare", s, w, "--relation", "lt"]);
    assert_eq!(o.status.code(), Some(0));
    let o = blm(&["compare", w, mo_spec().to_str().unwrap(), "--relation", "concordance"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"]["kind"], "precondition");
}

#[test]
fn mttf_values() {
    let p = spec("mo111b.json", r#"{"family":"mo","parameters":{"lambda1":1,"lambda2":1,"lambda12":1}}"#);
    let series = blm(&["mttf", p.to_str().unwrap(), "--system", "series"]);
    let parallel = blm(&["mttf", p.to_str().unwrap(), "--system", "parallel"]);
    assert_eq!(stdout(&series).trim(), "3.33333333e-01");
    assert_eq!(stdout(&parallel).trim(), "6.66666667e-01");
}

#[test]
fn parse_errors_exit_two() {
    let p = spec("broken.json", "{\"family\": \"mo\",\n  \"parameters\": {\"lambda1\": 1,, }}");
    let o = blm(&["eval", p.to_str().unwrap(), "--x", "1", "--y", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 2 column"), "{err}");
    assert!(o.stdout.is_empty());

    let p = spec("unknown.json", r#"{"family":"gumbel","parameters":{}}"#);
    let o = blm(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 1 column"));

    let p = spec("missing.json", r#"{"family":"mo","parameters":{"lambda1":1,"lambda2":1}}"#);
    assert_eq!(blm(&["validate", p.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(blm(&["eval", mo_spec().to_str().unwrap(), "--x", "1"]).status.code(), Some(2));
    assert_eq!(blm(&["check", mo_spec().to_str().unwrap(), "--kind", "theorem9"]).status.code(), Some(2));
    assert_eq!(blm(&["eval", "/nonexistent/spec.json", "--x", "1", "--y", "1"]).status.code(), Some(2));
}

#[test]
fn gmo_models() {
    let p = spec(
        "gmo.json",
        r#"{"family":"gmo","parameters":{},"marginals":[
            {"type":"weibull","shape":2,"scale":1},
            {"type":"exponential","rate":1},
            {"type":"lomax","alpha":2,"beta":1}]}"#,
    );
    let p = p.to_str().unwrap();
    assert_eq!(blm(&["validate", p]).status.code(), Some(0));
    assert_eq!(blm(&["check", p, "--kind", "tp2"]).status.code(), Some(0));
    assert_eq!(blm(&["check", p, "--kind", "pqd"]).status.code(), Some(0));
    let s = blm(&["sample", p, "--n", "10", "--seed", "1"]);
    assert!(stdout(&s).starts_with("# sampler=gmo("));
    let o = blm(&["moments", p]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"]["kind"], "unsupported");
}
