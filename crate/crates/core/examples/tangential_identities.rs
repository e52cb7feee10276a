//! Checks that hold along any geodesic: the exact tangential solutions,
//! gauge invariance of `ξ₂(R)`, `ξ₃(R)`, and the tensor-form cross-check.
//!
//! Run with `cargo run --release --example tangential_identities`.

use conjloc::ode::{first_conjugate, integrate, InitialData, IntegrateOptions};
use conjloc::oracle::tensor_jacobi2_oracle;
use conjloc::{ChartPoint, SurfaceModel};

fn main() -> conjloc::Result<()> {
    let h = SurfaceModel::sectoral_harmonic(3, 0.1)?;
    let p = ChartPoint::standard(1.2, 0.4);
    let psi = 0.9;

    let opts = IntegrateOptions {
        tangential: true,
        ..IntegrateOptions::default()
    };
    let traj = integrate(&h, p, psi, &opts)?;
    let r = traj.first_conjugate()?.r;
    let (mut e2, mut e3) = (0.0f64, 0.0f64);
    for k in 0..=400 {
        let st = traj.state_at(r * k as f64 / 400.0);
        let [eta2, _, eta3, _] = st.eta.unwrap();
        e2 = e2.max((eta2 + st.xi1 * st.dxi1).abs());
        e3 = e3.max((eta3 + st.xi1 * st.dxi2 + 2.0 * st.dxi1 * st.xi2).abs());
    }
    println!("R = {r:.12}");
    println!("max |eta2 + xi1 xi1'|            = {e2:.2e}");
    println!("max |eta3 + xi1 xi2' + 2 xi1' xi2| = {e3:.2e}");

    for (dxi2, dxi3) in [(0.0, -1.0), (-1.0, 0.0), (2.0, 2.0)] {
        let o = IntegrateOptions {
            initial: InitialData { dxi2, dxi3 },
            ..IntegrateOptions::default()
        };
        let c = first_conjugate(&h, p, psi, &o)?;
        println!("xi2'(0) = {dxi2:+}, xi3'(0) = {dxi3:+}: xi2(R) = {:+.15e}, xi3(R) = {:+.15e}", c.state.xi2, c.state.xi3);
    }

    let rep = tensor_jacobi2_oracle(&h, p, psi, r + 0.2, 1e-11)?;
    println!("tensor form vs scalar hierarchy: max deviation {:.2e} over {} steps", rep.max_deviation(), rep.samples);
    Ok(())
}
