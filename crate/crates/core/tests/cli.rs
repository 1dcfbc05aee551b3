use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use micz_core::conic_geometry::orbit_residuals;
use micz_core::linalg::{mdot, MinkVec4, Vec3};
use micz_core::lorentz::{act, OrientedSymmetry};
use micz_core::orbit_params::{to_minkowski, EuclideanOrbitParams, MinkowskiOrbitParams};
use serde_json::Value;
use tempfile::TempDir;

fn micz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_micz")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

const CIRCLE: &str = r#"{"A":[0,0,0],"L":[1,0,0]}"#;
const CHARGED: &str = r#"{"A":[0.5,0,0.5],"L":[0,0,2]}"#;
const PARABOLA: &str = r#"{"a":[1,0,1,0],"l":[0,1,0,0]}"#;
const HYPERBOLA: &str = r#"{"A":[1.5,0,0],"L":[0,0,1]}"#;

#[test]
fn convert_circle_to_minkowski() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "c.json", CIRCLE);
    let out = micz(&["convert", "-i", s(&input)]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(floats(&v["a"]), vec![1.0, 0.0, 0.0, 0.0]);
    assert_eq!(floats(&v["l"]), vec![0.0, 1.0, 0.0, 0.0]);
}

#[test]
fn convert_round_trip_reproduces_values() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", CHARGED);
    let mid = dir.path().join("mid.json");
    let back = dir.path().join("back.json");
    assert_eq!(micz(&["convert", "-i", s(&input), "-o", s(&mid)]).status.code(), Some(0));
    assert_eq!(micz(&["convert", "-i", s(&mid), "-o", s(&back)]).status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&back).unwrap()).unwrap();
    for (got, want) in floats(&v["A"]).iter().zip([0.5, 0.0, 0.5]) {
        assert!((got - want).abs() <= 4.0 * f64::EPSILON * want.abs());
    }
    for (got, want) in floats(&v["L"]).iter().zip([0.0, 0.0, 2.0]) {
        assert!((got - want).abs() <= 4.0 * f64::EPSILON * want.abs());
    }
    // explicit target form
    let same = micz(&["convert", "-i", s(&input), "--to", "euclidean"]);
    assert_eq!(floats(&stdout_json(&same)["L"]), vec![0.0, 0.0, 2.0]);
}

#[test]
fn invalid_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let colliding = write(&dir, "bad.json", r#"{"A":[0,0,1],"L":[0,0,1]}"#);
    let out = micz(&["convert", "-i", s(&colliding)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colliding"));

    for body in ["{", "[]", r#"{"A":[0,0],"L":[1,0,0]}"#, r#"{"A":[0,0,0],"L":[1,0,0],"x":1}"#, "null"] {
        let path = write(&dir, "junk.json", body);
        assert_eq!(micz(&["info", "-i", s(&path)]).status.code(), Some(2), "{body}");
    }
    let not_unit = write(&dir, "nu.json", r#"{"a":[1,0,0,0],"l":[0,2,0,0]}"#);
    assert_eq!(micz(&["info", "-i", s(&not_unit)]).status.code(), Some(2));
    assert_eq!(micz(&["info", "-i", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(micz(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn info_reports_scalar_functionals() {
    let dir = TempDir::new().unwrap();
    let circle = write(&dir, "c.json", CIRCLE);
    let out = micz(&["info", "-i", s(&circle)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "{\"mu\":0.0,\"energy\":-0.5,\"eccentricity\":0.0,\"class\":\"Elliptic\",\"is_circle\":true}\n"
    );

    let parabola = write(&dir, "p.json", PARABOLA);
    let v = stdout_json(&micz(&["info", "-i", s(&parabola)]));
    assert_eq!(v["energy"].as_f64(), Some(0.0));
    assert_eq!(v["class"], "Parabolic");

    let charged = write(&dir, "m.json", CHARGED);
    let v = stdout_json(&micz(&["info", "-i", s(&charged)]));
    assert_eq!(v["mu"].as_f64(), Some(1.0));
    assert!((v["energy"].as_f64().unwrap() + 1.0 / 12.0).abs() < 1e-15);
    assert!((v["eccentricity"].as_f64().unwrap() - 0.4f64.sqrt()).abs() < 1e-15);
    assert_eq!(v["is_circle"], false);
}

fn parse_csv(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn sample_rows_lie_on_the_orbit() {
    let dir = TempDir::new().unwrap();
    for (name, body) in [("m.json", CHARGED), ("p.json", PARABOLA), ("h.json", HYPERBOLA)] {
        let input = write(&dir, name, body);
        let out = micz(&["sample", "-i", s(&input), "--n", "40", "--range-cap", "200"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let (header, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
        assert_eq!(header, "x,y,z,x0");
        assert!(rows.len() >= 40);
        let v: Value = serde_json::from_str(body).unwrap();
        let q = if v.get("A").is_some() {
            let p = EuclideanOrbitParams::new(
                Vec3::from_array(floats(&v["A"]).try_into().unwrap()),
                Vec3::from_array(floats(&v["L"]).try_into().unwrap()),
            )
            .unwrap();
            to_minkowski(&p).unwrap()
        } else {
            MinkowskiOrbitParams::new(
                MinkVec4::from_array(floats(&v["a"]).try_into().unwrap()),
                MinkVec4::from_array(floats(&v["l"]).try_into().unwrap()),
            )
            .unwrap()
        };
        let p = micz_core::orbit_params::to_euclidean(&q);
        for row in rows {
            let r = Vec3::new(row[0], row[1], row[2]);
            assert!(orbit_residuals(&p, r).unwrap().max_abs() < 1e-9);
            let x = MinkVec4::new(row[3], row[0], row[1], row[2]);
            assert!((mdot(q.a(), x) - 1.0).abs() < 1e-9);
            assert!(mdot(q.l(), x).abs() < 1e-9);
        }
    }
}

#[test]
fn integrate_writes_csv_and_drift() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "s.json", r#"{"q":[1,0,0],"v":[0,1,0],"mu":0}"#);
    let report = dir.path().join("drift.json");
    let out = micz(&["integrate", "-i", s(&state), "--T", "6.283185307179586", "--report", s(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, "t,qx,qy,qz,vx,vy,vz");
    assert_eq!(rows[0], vec![0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let last = rows.last().unwrap();
    assert!((last[1] - 1.0).abs() < 1e-6 && last[2].abs() < 1e-6);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));
    let drift: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    for key in ["max_dL", "max_dA", "max_dE"] {
        assert!(drift[key].as_f64().unwrap() < 1e-8, "{key}");
    }

    // parameter input goes through the synthesized state; drift on stderr
    let params = write(&dir, "m.json", CHARGED);
    let out = micz(&["integrate", "-i", s(&params), "--T", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let drift: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(drift["max_dE"].as_f64().unwrap() < 1e-8);
}

#[test]
fn integrator_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let state = write(&dir, "s.json", r#"{"q":[1,0,0],"v":[0,1,0],"mu":0}"#);
    let out = micz(&["integrate", "-i", s(&state), "--T", "50", "--max-steps", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let fall = write(&dir, "f.json", r#"{"q":[1,0,0],"v":[0,0,0],"mu":0}"#);
    assert_eq!(micz(&["integrate", "-i", s(&fall), "--T", "5"]).status.code(), Some(3));
    let origin = write(&dir, "o.json", r#"{"q":[0,0,0],"v":[0,1,0],"mu":0}"#);
    assert_eq!(micz(&["integrate", "-i", s(&origin)]).status.code(), Some(2));
}

#[test]
fn canonicalize_and_transport() {
    let dir = TempDir::new().unwrap();
    let charged = write(&dir, "m.json", CHARGED);
    let out = micz(&["canonicalize", "-i", s(&charged)]);
    assert_eq!(out.status.code(), Some(0));
    let g: OrientedSymmetry = serde_json::from_slice(&out.stdout).unwrap();
    let p =
        to_minkowski(&EuclideanOrbitParams::new(Vec3::new(0.5, 0.0, 0.5), Vec3::new(0.0, 0.0, 2.0)).unwrap()).unwrap();
    let image = act(&g, &p).unwrap();
    assert!((image.a() - MinkVec4::new(1.0, 0.0, 0.0, 0.0)).max_abs() < 1e-8);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("residual "));

    let circle = write(&dir, "c.json", CIRCLE);
    let out = micz(&["transport", "-i", s(&circle), "-i", s(&charged)]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["lambda"].as_f64().unwrap() > 0.0);
    assert_eq!(v["matrix"].as_array().unwrap().len(), 4);

    let parabola = write(&dir, "p.json", PARABOLA);
    let hyperbola = write(&dir, "h.json", HYPERBOLA);
    assert_eq!(micz(&["transport", "-i", s(&circle), "-i", s(&parabola)]).status.code(), Some(4));
    assert_eq!(micz(&["canonicalize", "-i", s(&hyperbola)]).status.code(), Some(4));
    assert_eq!(micz(&["transport", "-i", s(&circle)]).status.code(), Some(2));
}

#[test]
fn verify_is_deterministic_and_detects_faults() {
    let a = micz(&["verify", "--seed", "11", "--count", "8"]);
    let b = micz(&["verify", "--seed", "11", "--count", "8"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["all_passed"], true);

    let bad = micz(&["verify", "--seed", "11", "--count", "8", "--perturb", "1e-3"]);
    assert_eq!(bad.status.code(), Some(1));
    let report = stdout_json(&bad);
    let families = report["families"].as_array().unwrap();
    let validation = families.iter().find(|f| f["name"] == "validation").unwrap();
    assert_eq!(validation["passed"], false);
}

#[test]
fn commands_are_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "h.json", HYPERBOLA);
    for args in [
        vec!["sample", "-i", s(&input), "--n", "17"],
        vec!["integrate", "-i", s(&input), "--T", "3"],
        vec!["info", "-i", s(&input)],
    ] {
        let a = micz(&args);
        let b = micz(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stderr, b.stderr);
    }
}
