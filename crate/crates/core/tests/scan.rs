mod common;

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use common::{ellipsoid, harmonic, sphere};
use conjloc::locus::{AClass, SweepOptions};
use conjloc::scan::{
    bifurcation_locate, locus_diameter, path_scan, region_map, BifurcationOutcome, BoundaryReport, CandidateSource,
    RegionMapOptions, ScanDirection, ScanPath,
};
use conjloc::{ChartPoint, IntegrateOptions};

fn opts(n_psi: usize) -> SweepOptions {
    SweepOptions {
        n_psi,
        ..SweepOptions::default()
    }
}

fn boundary(a: ChartPoint, b: ChartPoint) -> BoundaryReport {
    match bifurcation_locate(&harmonic(), a, b, &opts(128)).unwrap() {
        BifurcationOutcome::Boundary(r) => r,
        other => panic!("expected a boundary, got {other:?}"),
    }
}

fn equator(dir: ScanDirection, n: usize) -> Vec<f64> {
    let path = ScanPath::Equator { t_start: 0.0, t_end: TAU };
    path_scan(&harmonic(), path, dir, n, &IntegrateOptions::default()).unwrap().zeros
}

fn cyclic_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[test]
fn umbilic_is_the_only_sign_change_on_the_meridian() {
    let e = ellipsoid();
    let u = e.umbilics().iter().copied().find(|u| u.u1 < FRAC_PI_2 && u.u2.abs() < 1e-12).unwrap();
    let path = ScanPath::Meridian { phi: 0.0, t_start: 0.4, t_end: 1.2 };
    let scan = path_scan(&e, path, ScanDirection::Forward, 41, &IntegrateOptions::default()).unwrap();
    assert_eq!(scan.samples.len(), 41);
    assert!(!scan.degenerate && !scan.is_partial());
    assert_eq!(scan.zeros.len(), 1);
    assert!((scan.zeros[0] - u.u1).abs() < 1e-4, "{} vs {}", scan.zeros[0], u.u1);
    assert!(locus_diameter(&e, u, &opts(64)).unwrap() < 1e-3);
    assert!(locus_diameter(&e, ChartPoint::standard(0.6, 0.0), &opts(64)).unwrap() > 1e-2);
}

#[test]
fn sphere_scan_is_degenerate() {
    let path = ScanPath::Equator { t_start: 0.0, t_end: PI };
    let scan = path_scan(&sphere(), path, ScanDirection::Forward, 9, &IntegrateOptions::default()).unwrap();
    assert!(scan.degenerate);
    assert!(scan.zeros.is_empty());
}

#[test]
fn scan_off_a_symmetry_line_is_rejected() {
    let path = ScanPath::Meridian { phi: 0.2, t_start: 1.0, t_end: 2.0 };
    assert!(path_scan(&harmonic(), path, ScanDirection::Forward, 9, &IntegrateOptions::default()).is_err());
}

#[test]
fn equatorial_zeros_respect_the_surface_symmetries() {
    let fwd = equator(ScanDirection::Forward, 48);
    let bwd = equator(ScanDirection::Backward, 48);
    assert!(!fwd.is_empty() && fwd.len() % 3 == 0);
    assert_eq!(fwd.len(), bwd.len());
    for zeros in [&fwd, &bwd] {
        for &z in zeros.iter() {
            let shifted = (z + TAU / 3.0).rem_euclid(TAU);
            assert!(zeros.iter().any(|&w| cyclic_gap(w, shifted) < 1e-6), "{z} has no image");
        }
    }
    // φ → −φ swaps east and west
    for &z in &fwd {
        assert!(bwd.iter().any(|&w| cyclic_gap(w, -z) < 1e-6));
    }
    assert!(fwd.iter().all(|&z| bwd.iter().all(|&w| cyclic_gap(w, z) > 1e-3)));
}

#[test]
fn small_region_maps_have_constant_counts() {
    let small = |n_theta, n_phi| RegionMapOptions {
        n_theta,
        n_phi,
        ..RegionMapOptions::default()
    };
    let s = region_map(&sphere(), &small(2, 4)).unwrap();
    assert_eq!(s.distinct_counts(), vec![0]);
    let e = region_map(&ellipsoid(), &small(3, 6)).unwrap();
    assert_eq!(e.distinct_counts(), vec![4]);
    assert!(e.boundary_pairs().is_empty() && !e.has_unknown());
    assert!(e.periodic_phi);
}

#[test]
fn region_map_sees_both_counts() {
    let o = RegionMapOptions {
        theta_range: (1.45, 1.55),
        phi_range: (0.0, PI / 3.0),
        n_theta: 2,
        n_phi: 6,
        ..RegionMapOptions::default()
    };
    let m = region_map(&harmonic(), &o).unwrap();
    assert_eq!(m.distinct_counts(), vec![6, 8]);
    assert!(!m.boundary_pairs().is_empty());
    assert!(!m.periodic_phi);
}

#[test]
fn symmetric_crossing_has_an_a3_candidate() {
    let r = boundary(ChartPoint::standard(FRAC_PI_2, 0.25), ChartPoint::standard(FRAC_PI_2, 0.35));
    let c = r.candidate.unwrap();
    assert_eq!(c.a_class, AClass::A3);
    assert!(c.symmetric);
    assert_eq!(c.source, CandidateSource::SymmetricCusp);
    assert!((c.psi - PI).abs() < 1e-9);
    assert!(r.separation < 1e-5);
    for w in r.widths.windows(2) {
        assert!(w[1] <= 0.5 * w[0] + 1e-15);
    }
}

#[test]
fn off_symmetry_crossing_has_an_a2_candidate() {
    let r = boundary(ChartPoint::standard(1.487, 0.13), ChartPoint::standard(1.321, 0.13));
    let c = r.candidate.unwrap();
    assert_eq!(c.a_class, AClass::A2);
    assert!(!c.symmetric);
    assert_eq!(c.source, CandidateSource::Tangency);
    let (lo, hi) = (r.lo_count.min(r.hi_count), r.lo_count.max(r.hi_count));
    assert_eq!((lo, hi), (6, 8));
}

#[test]
fn same_count_segment_has_no_boundary() {
    let out = bifurcation_locate(&harmonic(), ChartPoint::standard(1.2, 0.3), ChartPoint::standard(1.25, 0.4), &opts(64))
        .unwrap();
    assert!(matches!(out, BifurcationOutcome::NoBoundary { count: 6 }), "{out:?}");
}

#[test]
fn locus_collapses_at_the_umbilic() {
    let e = ellipsoid();
    let out = bifurcation_locate(&e, ChartPoint::standard(0.7, 0.05), ChartPoint::standard(0.9, -0.05), &opts(64))
        .unwrap();
    let BifurcationOutcome::UmbilicCollapse(c) = out else {
        panic!("expected a collapse, got {out:?}");
    };
    assert!(c.diameter < 1e-3);
    assert!(c.distance_to_umbilic < 2e-3);
}

#[test]
fn located_boundary_matches_the_path_scan_zero() {
    let r = boundary(ChartPoint::standard(FRAC_PI_2, 0.25), ChartPoint::standard(FRAC_PI_2, 0.35));
    let zeros = equator(ScanDirection::Backward, 96);
    let bracket = (r.hi.u2 - r.lo.u2).abs();
    let gap = zeros.iter().map(|&z| cyclic_gap(z, r.lo.u2)).fold(f64::INFINITY, f64::min);
    assert!(gap <= bracket + 1e-6, "gap {gap}, bracket {bracket}");
}
