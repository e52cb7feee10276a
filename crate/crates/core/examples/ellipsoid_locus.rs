//! Conjugate loci of a triaxial ellipsoid: four cusps at every generic point.
//!
//! Run with `cargo run --release --example ellipsoid_locus`.

use conjloc::locus::{sweep_R, SweepOptions};
use conjloc::{ChartPoint, SurfaceModel};

fn main() -> conjloc::Result<()> {
    let e = SurfaceModel::ellipsoid(1.05, 1.0, 0.95)?;
    let points = [(1.0, 0.6), (0.5, 2.0), (1.3, 4.0), (2.2, 1.1), (1.7, 5.5)];
    for (theta, phi) in points {
        let curve = sweep_R(&e, ChartPoint::standard(theta, phi), &SweepOptions::default())?;
        let (lo, hi) = curve.r_range();
        println!(
            "p = ({theta}, {phi}): {} cusps, R in [{lo:.5}, {hi:.5}], diameter {:.4}",
            curve.cusp_count(),
            curve.diameter()
        );
        for c in &curve.cusps {
            println!(
                "  psi* = {:.8}  R* = {:.8}  {:?} {:?}  xi3 = {:+.3e}  R'' = {:+.3e}  {:?}",
                c.psi_star, c.r_star, c.a_class, c.local_type, c.xi3_value, c.r_second, c.orientation
            );
        }
    }
    Ok(())
}
