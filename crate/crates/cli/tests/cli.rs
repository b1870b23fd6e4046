use std::path::PathBuf;
use std::process::{Command, Output};

fn data(rel: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", rel].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitshift")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn field_reports_case_and_linear_part() {
    let k2 = run(&["--json", "field", &data("fields/two_ellipses.json")]);
    assert_eq!(code(&k2), 0);
    let v = json(&k2);
    assert_eq!(v["case"], "NF1_ZeroLinear");
    assert_eq!(v["nabla"], serde_json::json!([[0.0, 0.0], [0.0, 0.0]]));
    assert_eq!(v["coprime"], true);

    let circle = run(&["--json", "field", &data("fields/circle.json")]);
    let v = json(&circle);
    assert_eq!(v["case"], "NF3_NonDegenerate");
    assert_eq!(v["nabla"], serde_json::json!([[0.0, -2.0], [2.0, 0.0]]));

    let source = run(&["field", &data("fields/source.json")]);
    assert_eq!(code(&source), 3);
    assert!(stdout(&source).contains("NotTC"));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"F1": "-y +"}"#).unwrap();
    assert_eq!(code(&run(&["field", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["field", "/nonexistent/field.json"])), 2);
    assert_eq!(code(&run(&["verify", "--grid", "4x16"])), 2);
    assert_eq!(code(&run(&["verify", "--tol", "-1e-10"])), 2);
    assert_eq!(code(&run(&["period", &data("fields/circle.json"), "--levels", "0.1,1"])), 2);
}

#[test]
fn period_csv_schema_and_columns() {
    let circle = run(&["period", &data("fields/circle.json"), "--levels", "1,0.5,0.25"]);
    assert_eq!(code(&circle), 0);
    let text = stdout(&circle);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,x,y,theta,residual"));
    let thetas: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(thetas.len(), 3);
    assert!(thetas.iter().all(|t| (t - std::f64::consts::PI).abs() < 1e-8));

    let k2 = run(&["period", &data("fields/two_ellipses.json")]);
    let thetas: Vec<f64> =
        stdout(&k2).lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(thetas.len(), 4);
    assert!(thetas.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn numbers_carry_17_significant_digits() {
    let o = run(&["period", &data("fields/circle.json"), "--levels", "1"]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    for cell in row.split(',') {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.replace('.', "").len(), 17, "{cell}");
    }
}

#[test]
fn shift_recover_roundtrip_identity_and_rejection() {
    for field in ["fields/circle.json", "fields/two_ellipses.json"] {
        let o = run(&["--json", "--grid", "16x32", "shift", "recover", &data(field), &data("maps/varying_shift.json")]);
        assert_eq!(code(&o), 0);
        assert!(json(&o)["roundtrip_error"].as_f64().unwrap() <= 1e-6);
    }
    let id = run(&["shift", "recover", &data("fields/circle.json"), &data("maps/identity.json")]);
    assert_eq!(code(&id), 0);
    let text = stdout(&id);
    assert!(text.starts_with("level,angle,lambda\n"));
    for l in text.lines().skip(1) {
        assert_eq!(l.split(',').nth(2).unwrap().parse::<f64>().unwrap(), 0.0);
    }
    let off = run(&["shift", "recover", &data("fields/circle.json"), &data("maps/radial_scaling.json")]);
    assert_eq!(code(&off), 4);
}

#[test]
fn deform_reports_frames_and_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["--out", out, "deform", &data("fields/circle.json"), &data("maps/varying_shift.json"), "--frames", "6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let frames = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".svg"))
        .count();
    assert_eq!(frames, 6);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("deform.json")).unwrap()).unwrap();
    assert!(report["boundary_residual"].as_f64().unwrap() <= 1e-10);
    assert!(report["homotopy"]["boundary_residual"].as_f64().unwrap() <= 1e-10);

    let fold = run(&["deform", &data("fields/circle.json"), &data("maps/fold.json")]);
    assert_eq!(code(&fold), 5);
    let tight = run(&["deform", &data("fields/circle.json"), &data("maps/fold.json"), "--a", "0.4", "--b", "0.8"]);
    assert_eq!(code(&tight), 5);
}

#[test]
fn verify_passes_and_is_reproducible() {
    let a = run(&["--json", "--seed", "7", "verify"]);
    assert_eq!(code(&a), 0);
    let b = run(&["--json", "--seed", "7", "verify"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    for c in v["checks"].as_array().unwrap() {
        assert!(c["name"].is_string() && c["measured"].is_number() && c["bound"].is_number());
    }
    let text = run(&["verify"]);
    assert!(stdout(&text).lines().all(|l| !l.starts_with("FAIL")));
}

#[test]
fn plot_draws_closed_orbits_deterministically() {
    let a = run(&["plot", &data("fields/circle.json")]);
    assert_eq!(code(&a), 0);
    let svg = stdout(&a);
    assert_eq!(svg.matches("<path").count(), 4);
    assert_eq!(svg.matches(" Z\"").count(), 4);
    assert_eq!(a.stdout, run(&["plot", &data("fields/circle.json")]).stdout);
    let k2 = run(&["plot", &data("fields/two_ellipses.json"), "--map", &data("maps/constant_shift.json")]);
    assert_eq!(stdout(&k2).matches("<path").count(), 8);
}

#[test]
fn flow_half_turn() {
    let o = run(&["--tol", "1e-10", "flow", &data("fields/circle.json"), "--x", "1", "--y", "0", "--t", "3.141592653589793"]);
    assert_eq!(code(&o), 0);
    let last = stdout(&o).lines().last().unwrap().to_string();
    let v: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    // F = (-2y, 2x): a full turn in time π
    assert!((v[1] - 1.0).abs() < 1e-8 && v[2].abs() < 1e-8);
}
