//! The `R` and `ρ` contours in the tangent plane and the β-curve.
//!
//! Cusps of the conjugate locus are the intersections of the two contours,
//! and the image of the `ρ` contour under the exponential map passes through
//! each of them.
//!
//! Run with `cargo run --release --example contours_and_beta`.

use std::f64::consts::FRAC_PI_2;

use conjloc::locus::{beta_curve, sweep_R, sweep_rho, RhoBranch, SweepOptions};
use conjloc::{ChartPoint, SurfaceModel};

fn report(name: &str, surface: &SurfaceModel, p: ChartPoint) -> conjloc::Result<()> {
    let opts = SweepOptions::default();
    let curve = sweep_R(surface, p, &opts)?;
    let rho = sweep_rho(surface, p, &opts, RhoBranch::NearestToConjugate)?;
    println!("{name}: {} cusps, {} contour intersections", curve.cusp_count(), rho.intersections.len());
    for x in &rho.intersections {
        println!(
            "  psi {:.8}  R {:.8}  rho {:.8}{}",
            x.psi,
            x.r,
            x.rho,
            if x.on_symmetry_line { "  (symmetry line)" } else { "" }
        );
    }
    let beta = beta_curve(surface, p, &rho, &curve)?;
    let d: Vec<String> = beta.passage_distances.iter().map(|d| format!("{d:.1e}")).collect();
    println!("  beta passes {} cusps; distances {}", beta.loop_count, d.join(", "));
    Ok(())
}

fn main() -> conjloc::Result<()> {
    let e = SurfaceModel::ellipsoid(1.05, 1.0, 0.95)?;
    report("ellipsoid (1.0, 0.6)", &e, ChartPoint::standard(1.0, 0.6))?;
    let h = SurfaceModel::sectoral_harmonic(3, 0.1)?;
    report("sectoral harmonic (pi/2, 0)", &h, ChartPoint::standard(FRAC_PI_2, 0.0))?;
    report("sectoral harmonic (1.3, 0.3)", &h, ChartPoint::standard(1.3, 0.3))?;
    Ok(())
}
