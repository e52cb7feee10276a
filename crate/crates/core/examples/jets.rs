//! Truncated Taylor arithmetic and the geometry built on it.
//!
//! Run with `cargo run --release --example jets`.

use conjloc::diffgeo::{curvature_sample, local_geometry};
use conjloc::{ChartPoint, Jet2, SurfaceModel};

fn main() -> conjloc::Result<()> {
    // f(u, v) = sin(u) v² / (1 + u v) at (0.3, 0.7)
    let (u, v) = (Jet2::variable(0.3, 0), Jet2::variable(0.7, 1));
    let f = u.sin() * v * v / (u * v + 1.0);
    println!("f = {:.12}", f.value());
    println!("grad f = {:?}", f.gradient());
    println!("hessian f = {:?}", f.hessian());
    println!("d4f/du2dv2 = {:.12}", f.partial(2, 2));

    // Gauss curvature of the ellipsoid against its closed form
    let (a, b, c) = (1.05, 1.0, 0.95);
    let e = SurfaceModel::ellipsoid(a, b, c)?;
    let p = ChartPoint::standard(1.0, 0.6);
    let geom = local_geometry(&e, p)?;
    let [x, y, z] = e.embed(p)?.xyz;
    let q = x * x / a.powi(4) + y * y / b.powi(4) + z * z / c.powi(4);
    let k_exact = 1.0 / (a * a * b * b * c * c * q * q);
    println!("K = {:.15}, closed form {:.15}", geom.gauss, k_exact);
    println!("principal curvatures {:?}", geom.principal_curvatures());

    let t = [1.0 / geom.forms.norm([1.0, 0.0]), 0.0];
    let s = curvature_sample(&e, p, t)?;
    println!("along d/dtheta: K_T {:+.6e} K_N {:+.6e} K_TN {:+.6e} K_NN {:+.6e}", s.k_t, s.k_n, s.k_tn, s.k_nn);
    Ok(())
}
