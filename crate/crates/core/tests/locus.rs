mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use common::{ellipsoid, harmonic, sphere};
use conjloc::locus::{
    beta_curve, project_tangent_plane, sweep_R, sweep_rho, AClass, Orientation, RhoBranch, SweepOptions,
};
use conjloc::scan::{bifurcation_locate_to, BifurcationOutcome};
use conjloc::{ChartPoint, Error};

fn opts(n_psi: usize) -> SweepOptions {
    SweepOptions {
        n_psi,
        ..SweepOptions::default()
    }
}

#[test]
fn sphere_locus_is_the_antipode() {
    let s = sphere();
    let p = ChartPoint::standard(1.1, 0.4);
    let curve = sweep_R(&s, p, &opts(256)).unwrap();
    assert_eq!(curve.records.len(), 256);
    assert!(!curve.is_partial());
    let (lo, hi) = curve.r_range();
    assert!(hi - lo < 1e-8);
    assert!((lo - PI).abs() < 1e-8);
    assert!(curve.diameter() < 1e-6);
    assert!(curve.cusps.is_empty());
    for r in curve.complete_records() {
        assert!(r.tangent_plane_uv[0].hypot(r.tangent_plane_uv[1]) < 1e-6);
        assert!((r.polar_uv[0].hypot(r.polar_uv[1]) - PI).abs() < 1e-8);
        assert!(r.dxi1_at_r < 0.0);
    }
    let pts: Vec<[f64; 3]> = curve.complete_records().map(|r| r.point.xyz).collect();
    for uv in project_tangent_plane(&s, p, &pts).unwrap() {
        assert!(uv[0].hypot(uv[1]) < 1e-6);
    }
}

#[test]
fn sphere_contour_is_undefined() {
    let s = sphere();
    let p = ChartPoint::standard(1.1, 0.4);
    assert_eq!(sweep_rho(&s, p, &opts(64), RhoBranch::First).unwrap_err(), Error::ContourUndefined);
}

#[test]
fn ellipsoid_has_four_ordinary_cusps() {
    let e = ellipsoid();
    let curve = sweep_R(&e, ChartPoint::standard(1.0, 0.6), &opts(256)).unwrap();
    assert_eq!(curve.cusp_count(), 4);
    let max_rp = curve.max_r_prime();
    for c in &curve.cusps {
        assert_eq!(c.a_class, AClass::A1);
        assert_eq!(c.local_type, (2, 3));
        assert!(c.prop1_consistent);
        assert!(c.r_prime.abs() < 1e-4 * max_rp, "R' = {} vs max {max_rp}", c.r_prime);
        let expected = if c.r_second > 0.0 { Orientation::TowardP } else { Orientation::AwayFromP };
        assert_eq!(c.orientation, expected);
        assert!(c.xi3_value.abs() > 1e-5 * c.xi3_scale);
        // the refined direction is a zero of ξ₂(R)
        assert!(curve.evaluate(c.psi_star).unwrap().xi2_at_r.abs() < 1e-8);
    }
}

#[test]
fn cusp_count_is_even_and_away_from_cusps_r_moves() {
    let h = harmonic();
    let curve = sweep_R(&h, ChartPoint::standard(1.2, 0.9), &opts(128)).unwrap();
    assert_eq!(curve.cusp_count() % 2, 0);
    let max_rp = curve.max_r_prime();
    let max_xi2 = curve.complete_records().fold(0.0f64, |m, r| m.max(r.xi2_at_r.abs()));
    let fd = |psi: f64| {
        let h = 1e-3;
        let r = |x: f64| curve.evaluate(x).unwrap().r;
        (r(psi - 2.0 * h) - 8.0 * r(psi - h) + 8.0 * r(psi + h) - r(psi + 2.0 * h)) / (12.0 * h)
    };
    for rec in curve.complete_records().step_by(8) {
        if rec.xi2_at_r.abs() > 0.01 * max_xi2 {
            assert!(fd(rec.psi).abs() > 1e-4 * max_rp);
        }
    }
}

#[test]
fn harmonic_six_and_eight_cusp_regions() {
    let h = harmonic();
    let six = sweep_R(&h, ChartPoint::standard(1.3, 0.3), &opts(256)).unwrap();
    let eight = sweep_R(&h, ChartPoint::standard(FRAC_PI_2, 0.0), &opts(256)).unwrap();
    assert_eq!(six.cusp_count(), 6);
    assert_eq!(eight.cusp_count(), 8);
}

#[test]
fn contour_intersections_mark_the_cusps() {
    let h = harmonic();
    for (p, n) in [(ChartPoint::standard(1.3, 0.3), 6), (ChartPoint::standard(FRAC_PI_2, 0.0), 8)] {
        let rho = sweep_rho(&h, p, &opts(256), RhoBranch::NearestToConjugate).unwrap();
        assert_eq!(rho.intersections.len(), n);
        for x in &rho.intersections {
            assert!((x.r - x.rho).abs() < 1e-7, "{x:?}");
        }
        let curve = sweep_R(&h, p, &opts(256)).unwrap();
        for c in &curve.cusps {
            let gap = rho
                .intersections
                .iter()
                .map(|x| (x.psi - c.psi_star).rem_euclid(TAU).min((c.psi_star - x.psi).rem_euclid(TAU)))
                .fold(f64::INFINITY, f64::min);
            assert!(gap < 1e-6, "cusp at {} has no intersection", c.psi_star);
        }
    }
}

#[test]
fn symmetric_base_point_has_cusps_on_symmetry_directions() {
    let h = harmonic();
    let p = ChartPoint::standard(FRAC_PI_2, 0.3);
    let curve = sweep_R(&h, p, &opts(128)).unwrap();
    for psi in h.symmetry_directions(p) {
        let c = curve
            .cusps
            .iter()
            .find(|c| (c.psi_star - psi).rem_euclid(TAU).min((psi - c.psi_star).rem_euclid(TAU)) < 1e-12)
            .unwrap_or_else(|| panic!("no cusp at {psi}"));
        assert!(c.symmetric);
    }
}

#[test]
fn r_is_even_about_symmetry_directions() {
    let h = harmonic();
    let p = ChartPoint::standard(1.25, PI / 3.0);
    let curve = sweep_R(&h, p, &opts(64)).unwrap();
    for psi in h.symmetry_directions(p) {
        for k in 1..=5 {
            let d = k as f64 * PI / 20.0;
            let a = curve.evaluate(psi + d).unwrap();
            let b = curve.evaluate(psi - d).unwrap();
            assert!((a.r - b.r).abs() < 1e-8, "psi {psi} delta {d}: {} vs {}", a.r, b.r);
            assert!((a.xi2_at_r + b.xi2_at_r).abs() < 1e-8);
        }
    }
}

#[test]
fn projection_respects_the_mirror() {
    let h = harmonic();
    let p = ChartPoint::standard(FRAC_PI_2, 0.3);
    let curve = sweep_R(&h, p, &opts(64)).unwrap();
    for k in 1..16 {
        let psi = k as f64 * PI / 16.0;
        let a = curve.evaluate(psi).unwrap().tangent_plane_uv;
        let b = curve.evaluate(-psi).unwrap().tangent_plane_uv;
        assert!((a[0] - b[0]).abs() < 1e-8 && (a[1] + b[1]).abs() < 1e-8, "{a:?} {b:?}");
    }
}

#[test]
fn ellipsoid_beta_curve_has_one_loop_per_cusp() {
    let e = ellipsoid();
    let p = ChartPoint::standard(1.0, 0.6);
    let curve = sweep_R(&e, p, &opts(256)).unwrap();
    let rho = sweep_rho(&e, p, &opts(256), RhoBranch::NearestToConjugate).unwrap();
    let beta = beta_curve(&e, p, &rho, &curve).unwrap();
    assert_eq!(beta.loop_count, curve.cusp_count());
    assert_eq!(beta.passage_distances.len(), 4);
    for d in &beta.passage_distances {
        assert!(*d < 1e-3);
    }
}

#[test]
fn beta_develops_a_singularity_at_a_bifurcation() {
    let h = harmonic();
    let o = opts(128);
    let out = bifurcation_locate_to(&h, ChartPoint::standard(1.487, 0.13), ChartPoint::standard(1.321, 0.13), &o, 1e-9)
        .unwrap();
    let BifurcationOutcome::Boundary(report) = out else {
        panic!("no boundary: {out:?}");
    };
    assert_eq!((report.lo_count.min(report.hi_count), report.lo_count.max(report.hi_count)), (6, 8));
    for p in [report.lo, report.hi] {
        let curve = sweep_R(&h, p, &o).unwrap();
        let rho = sweep_rho(&h, p, &o, RhoBranch::NearestToConjugate).unwrap();
        let beta = beta_curve(&h, p, &rho, &curve).unwrap();
        assert!(beta.min_metric < 1e-4, "{p:?}: {}", beta.min_metric);
    }
}
