//! The unit sphere, where every geodesic refocuses at distance π.
//!
//! Run with `cargo run --release --example sphere_oracle`.

use std::f64::consts::PI;
use std::time::Instant;

use conjloc::locus::{sweep_R, SweepOptions};
use conjloc::ode::{integrate, IntegrateOptions, StopRule};
use conjloc::{ChartPoint, SurfaceModel};

fn main() -> conjloc::Result<()> {
    let sphere = SurfaceModel::sphere();
    let p = ChartPoint::standard(1.1, 0.4);

    // along one geodesic ξ₁ must follow sin s
    let opts = IntegrateOptions {
        stop: StopRule::SMax,
        s_max: 3.0,
        ..IntegrateOptions::default()
    };
    let traj = integrate(&sphere, p, 0.7, &opts)?;
    let worst = (0..=300)
        .map(|k| {
            let s = 0.01 * k as f64;
            (traj.state_at(s).xi1 - s.sin()).abs()
        })
        .fold(0.0, f64::max);
    println!("max |xi1 - sin s| on [0, 3]: {worst:.2e}");

    let t0 = Instant::now();
    let sweep = SweepOptions {
        n_psi: 256,
        parallel: false,
        ..SweepOptions::default()
    };
    let curve = sweep_R(&sphere, p, &sweep)?;
    let (lo, hi) = curve.r_range();
    println!("R in [{lo:.12}, {hi:.12}], max |R - pi| = {:.2e}", (lo - PI).abs().max((hi - PI).abs()));
    println!("locus diameter {:.2e}, cusps {}", curve.diameter(), curve.cusp_count());
    println!("256 directions in {:.2?} on one thread", t0.elapsed());
    Ok(())
}
