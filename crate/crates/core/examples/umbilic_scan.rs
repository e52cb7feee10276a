//! Crossing an umbilic of the ellipsoid along the `y = 0` ellipse.
//!
//! `ξ₃(R)` of the geodesic along the ellipse changes sign at the umbilic,
//! where the conjugate locus collapses to a point.
//!
//! Run with `cargo run --release --example umbilic_scan`.

use std::f64::consts::FRAC_PI_2;

use conjloc::locus::SweepOptions;
use conjloc::ode::IntegrateOptions;
use conjloc::scan::{bifurcation_locate, locus_diameter, path_scan, BifurcationOutcome, ScanDirection, ScanPath};
use conjloc::{ChartPoint, SurfaceModel};

fn main() -> conjloc::Result<()> {
    let e = SurfaceModel::ellipsoid(1.05, 1.0, 0.95)?;
    let u = e.umbilics()[0];
    println!("umbilic at theta = {:.12}, phi = {}", u.u1, u.u2);

    let path = ScanPath::Meridian {
        phi: 0.0,
        t_start: 0.4,
        t_end: 1.2,
    };
    let scan = path_scan(&e, path, ScanDirection::Forward, 41, &IntegrateOptions::default())?;
    for s in scan.samples.iter().step_by(4) {
        println!("  theta {:.3}  R {:.6}  xi3(R) {:+.4e}", s.t, s.r.unwrap_or(f64::NAN), s.xi3_at_r.unwrap_or(f64::NAN));
    }
    for z in &scan.zeros {
        println!("xi3(R) = 0 at theta = {z:.10}, offset from umbilic {:.2e}", z - u.u1);
    }

    let opts = SweepOptions {
        n_psi: 64,
        ..SweepOptions::default()
    };
    for theta in [0.6, 0.75, u.u1, 0.85, FRAC_PI_2] {
        let d = locus_diameter(&e, ChartPoint::standard(theta, 0.0), &opts)?;
        println!("locus diameter at theta = {theta:.4}: {d:.3e}");
    }

    // off the symmetry line the cusp count stays 4, the locus just shrinks
    let a = ChartPoint::standard(0.7, 0.05);
    let b = ChartPoint::standard(0.9, -0.05);
    match bifurcation_locate(&e, a, b, &opts)? {
        BifurcationOutcome::UmbilicCollapse(c) => println!(
            "collapse at ({:.5}, {:.5}): diameter {:.2e}, {:.2e} from the umbilic",
            c.point.u1, c.point.u2, c.diameter, c.distance_to_umbilic
        ),
        other => println!("{other:?}"),
    }
    Ok(())
}
