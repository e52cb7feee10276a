//! Cusp bifurcations along the equator of the sectoral harmonic surface.
//!
//! The symmetric geodesic along the equator has `ξ₃(R) = 0` where a cusp on
//! it splits into three. The example scans both directions, then follows
//! one zero through the classification of the symmetric cusp.
//!
//! Run with `cargo run --release --example equatorial_scan`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use conjloc::locus::{sweep_R, SweepOptions};
use conjloc::ode::IntegrateOptions;
use conjloc::scan::{bifurcation_locate, path_scan, BifurcationOutcome, ScanDirection, ScanPath};
use conjloc::{ChartPoint, SurfaceModel};

fn main() -> conjloc::Result<()> {
    let h = SurfaceModel::sectoral_harmonic(3, 0.1)?;
    let path = ScanPath::Equator { t_start: 0.0, t_end: TAU };
    for dir in [ScanDirection::Forward, ScanDirection::Backward] {
        let scan = path_scan(&h, path, dir, 96, &IntegrateOptions::default())?;
        let zeros: Vec<String> = scan.zeros.iter().map(|z| format!("{z:.6}")).collect();
        println!("{:>8}: zeros at phi = {}", dir.label(), zeros.join(", "));
    }

    // the first backward zero; the cusp at psi = pi sits on the equator
    let opts = SweepOptions::default();
    println!("symmetric cusp at psi = pi across the first backward zero:");
    for phi in [0.25, 0.2918, 0.2919, 0.35] {
        let curve = sweep_R(&h, ChartPoint::standard(FRAC_PI_2, phi), &opts)?;
        if let Some(c) = curve.cusps.iter().find(|c| c.symmetric && (c.psi_star - PI).abs() < 1e-9) {
            println!(
                "  phi {phi:.4}: {} cusps, {:?} {:?}, xi3/scale = {:+.3e}",
                curve.cusp_count(),
                c.a_class,
                c.local_type,
                c.xi3_value / c.xi3_scale
            );
        }
    }

    let opts = SweepOptions {
        n_psi: 64,
        ..SweepOptions::default()
    };
    let a = ChartPoint::standard(FRAC_PI_2, 0.25);
    let b = ChartPoint::standard(FRAC_PI_2, 0.35);
    if let BifurcationOutcome::Boundary(r) = bifurcation_locate(&h, a, b, &opts)? {
        println!(
            "boundary between phi {:.7} ({} cusps) and {:.7} ({} cusps), {} bisections",
            r.lo.u2,
            r.lo_count,
            r.hi.u2,
            r.hi_count,
            r.widths.len()
        );
        println!("candidate: {:?}", r.candidate);
    }
    Ok(())
}
