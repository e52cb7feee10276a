use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const ELLIPSOID: &str = "family = ellipsoid\na = 1.05\nb = 1.0\nc = 0.95\ntheta = 1.0\nphi = 0.6\n";

fn run(mode: &str, config: Option<&Path>, sets: &[&str]) -> i32 {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_conjloc"));
    cmd.arg(mode);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    for s in sets {
        cmd.arg("--set").arg(s);
    }
    cmd.output().unwrap().status.code().unwrap()
}

fn ellipsoid_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("ellipsoid.conf");
    fs::write(&path, ELLIPSOID).unwrap();
    path
}

fn out(dir: &Path, name: &str) -> String {
    format!("output_dir={}", dir.join(name).display())
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn column(path: &Path, name: &str) -> Vec<Option<f64>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let idx = reader.headers().unwrap().iter().position(|h| h == name).unwrap();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            let field = &r[idx];
            (!field.is_empty()).then(|| field.parse().unwrap())
        })
        .collect()
}

fn count(text: &str, pattern: &str) -> usize {
    text.matches(pattern).count()
}

#[test]
fn sphere_locus_files() {
    let tmp = TempDir::new().unwrap();
    let code = run("locus", None, &["family=sphere", "theta=1.0", "phi=0.3", &out(tmp.path(), "s")]);
    assert_eq!(code, 0);
    let dir = tmp.path().join("s");
    let r = column(&dir.join("locus.csv"), "R");
    assert_eq!(r.len(), 256);
    assert!(r.iter().all(|x| (x.unwrap() - std::f64::consts::PI).abs() < 1e-6));
    let summary = json(dir.join("summary.json"));
    assert_eq!(summary["cusp_count"], 0);
    assert!(summary["diameter"].as_f64().unwrap() < 1e-6);
    assert_eq!(json(dir.join("cusps.json")).as_array().unwrap().len(), 0);
    let svg = fs::read_to_string(dir.join("locus.svg")).unwrap();
    assert_eq!(count(&svg, r#"class="point""#), 1);
}

#[test]
fn ellipsoid_locus_round_trip() {
    let tmp = TempDir::new().unwrap();
    let conf = ellipsoid_config(tmp.path());
    assert_eq!(run("locus", Some(&conf), &["n_psi=128", &out(tmp.path(), "e")]), 0);
    let dir = tmp.path().join("e");
    let summary = json(dir.join("summary.json"));
    assert_eq!(summary["cusp_count"], 4);
    assert_eq!(summary["class_counts"]["A1"], 4);
    let cusps = json(dir.join("cusps.json"));
    let cusps = cusps.as_array().unwrap();
    assert_eq!(cusps.len(), 4);
    for c in cusps {
        assert_eq!(c["a_class"], "A1");
        assert_eq!(c["local_type"], serde_json::json!([2, 3]));
    }

    // cusps recomputed from the CSV alone
    let psi: Vec<f64> = column(&dir.join("locus.csv"), "psi").into_iter().flatten().collect();
    let xi2: Vec<f64> = column(&dir.join("locus.csv"), "xi2_R").into_iter().flatten().collect();
    let n = psi.len();
    let mut brackets = Vec::new();
    for k in 0..n {
        if xi2[k].signum() != xi2[(k + 1) % n].signum() {
            brackets.push((psi[k], if k + 1 < n { psi[k + 1] } else { psi[0] + std::f64::consts::TAU }));
        }
    }
    assert_eq!(brackets.len(), cusps.len());
    for (lo, hi) in brackets {
        let inside = cusps.iter().any(|c| {
            let p = c["psi_star"].as_f64().unwrap();
            (lo..=hi).contains(&p) || (lo..=hi).contains(&(p + std::f64::consts::TAU))
        });
        assert!(inside, "no cusp in [{lo}, {hi}]");
    }

    let svg = fs::read_to_string(dir.join("locus.svg")).unwrap();
    assert_eq!(count(&svg, r#"class="cusp""#), 4);
}

#[test]
fn outputs_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let conf = ellipsoid_config(tmp.path());
    for name in ["a", "b"] {
        assert_eq!(run("contours", Some(&conf), &["n_psi=64", &out(tmp.path(), name)]), 0);
    }
    for file in ["contours.csv", "locus.csv", "contours.svg", "summary.json", "cusps.json"] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        let b = fs::read(tmp.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
    // thread count does not change the bytes
    assert_eq!(run("contours", Some(&conf), &["n_psi=64", "threads=1", &out(tmp.path(), "c")]), 0);
    let a = fs::read(tmp.path().join("a/contours.csv")).unwrap();
    let c = fs::read(tmp.path().join("c/contours.csv")).unwrap();
    assert_eq!(a, c);
}

#[test]
fn contours_mark_intersections() {
    let tmp = TempDir::new().unwrap();
    let sets = ["family=sectoral_harmonic", "n=3", "epsilon=0.1", "theta=1.3", "phi=0.3", "n_psi=128"];
    let mut args: Vec<&str> = sets.to_vec();
    let o = out(tmp.path(), "h");
    args.push(&o);
    assert_eq!(run("contours", None, &args), 0);
    let dir = tmp.path().join("h");
    let summary = json(dir.join("summary.json"));
    assert_eq!(summary["intersection_count"], 6);
    let svg = fs::read_to_string(dir.join("contours.svg")).unwrap();
    assert_eq!(count(&svg, r#"class="intersection""#), 6);
    assert_eq!(column(&dir.join("contours.csv"), "rho").len(), 128);
}

#[test]
fn beta_mode_reports_loops() {
    let tmp = TempDir::new().unwrap();
    let conf = ellipsoid_config(tmp.path());
    assert_eq!(run("beta", Some(&conf), &[&out(tmp.path(), "b")]), 0);
    let summary = json(tmp.path().join("b/summary.json"));
    assert_eq!(summary["loop_count"], 4);
    for d in summary["passage_distances"].as_array().unwrap() {
        assert!(d.as_f64().unwrap() < 1e-3);
    }
}

#[test]
fn path_scan_marks_each_zero() {
    let tmp = TempDir::new().unwrap();
    let conf = ellipsoid_config(tmp.path());
    let sets = [
        "path=meridian",
        "path_phi=0",
        "t_start=0.4",
        "t_end=1.2",
        "n_samples=41",
        "direction=forward",
    ];
    let mut args: Vec<&str> = sets.to_vec();
    let o = out(tmp.path(), "p");
    args.push(&o);
    assert_eq!(run("path-scan", Some(&conf), &args), 0);
    let dir = tmp.path().join("p");
    let zeros = json(dir.join("zeros.json"));
    assert_eq!(zeros.as_array().unwrap().len(), 1);
    assert!((zeros[0]["t"].as_f64().unwrap() - 0.797899465847).abs() < 1e-4);
    let svg = fs::read_to_string(dir.join("path_scan.svg")).unwrap();
    assert_eq!(count(&svg, r#"class="zero""#), 1);
    assert_eq!(column(&dir.join("path_scan.csv"), "xi3_R").len(), 41);
}

#[test]
fn region_map_mode() {
    let tmp = TempDir::new().unwrap();
    let conf = ellipsoid_config(tmp.path());
    assert_eq!(run("region-map", Some(&conf), &["n_theta=2", "n_phi=4", &out(tmp.path(), "r")]), 0);
    let dir = tmp.path().join("r");
    assert_eq!(json(dir.join("summary.json"))["distinct_counts"], serde_json::json!([4]));
    let counts = column(&dir.join("region_map.csv"), "cusp_count");
    assert_eq!(counts.len(), 8);
    assert!(counts.iter().all(|c| *c == Some(4.0)));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let conf = ellipsoid_config(tmp.path());
    // usage and configuration errors
    assert_eq!(run("frobnicate", None, &[]), 64);
    assert_eq!(run("locus", None, &["family=blob"]), 64);
    assert_eq!(run("locus", Some(&conf), &["bogus=1"]), 64);
    assert_eq!(run("locus", Some(&conf), &["phi"]), 64);
    assert_eq!(run("locus", Some(&tmp.path().join("missing.conf")), &[]), 64);
    // directions without a conjugate point make the result partial
    let o = out(tmp.path(), "partial");
    assert_eq!(run("locus", Some(&conf), &["s_max=3.1", "n_psi=64", &o]), 2);
    let summary = json(tmp.path().join("partial/summary.json"));
    assert_eq!(summary["partial"], true);
    assert!(summary["missing_directions"].as_u64().unwrap() > 0);
    // the sphere has no ξ₂ contour
    let o = out(tmp.path(), "fail");
    assert_eq!(run("contours", None, &["family=sphere", "theta=1", "phi=0", "n_psi=64", &o]), 1);
}

#[test]
fn set_overrides_the_config_file() {
    let tmp = TempDir::new().unwrap();
    let conf = ellipsoid_config(tmp.path());
    assert_eq!(run("locus", Some(&conf), &["n_psi=64", "theta=1.3", &out(tmp.path(), "o")]), 0);
    let summary = json(tmp.path().join("o/summary.json"));
    assert_eq!(summary["base"]["theta"], 1.3);
    assert_eq!(summary["n_psi"], 64);
}
