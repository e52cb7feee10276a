//! Second-order variational equation in tensor form, as a cross-check.
//!
//! `J₁ = ∂x/∂ψ` and `J₂ = DJ₁/∂ψ` are integrated as chart vectors with the
//! two-dimensional curvature tensor `R^a_bcd = K (δ^a_c g_bd - δ^a_d g_bc)`
//! and its covariant derivative `R^a_bcd;e = ∂_e K (δ^a_c g_bd - δ^a_d g_bc)`:
//!
//! ```text
//! D²J₂/ds² + R(γ̇, J₂)γ̇ = (R_;e + R_e;b) γ̇ γ̇ J₁ J₁ + 4 R(DJ₁/ds, γ̇) J₁
//! ```
//!
//! Projecting `J₂` on the parallel frame `{T, N}` must reproduce the scalar
//! `η₂` and `ξ₂` of [`crate::ode`].

use crate::diffgeo::{local_geometry, ChartId, ChartPoint, LocalGeometry};
use crate::error::{Error, Result};
use crate::integrator::{dopri_step, error_norm, next_step_factor, DenseStep};
use crate::ode::{initial_velocity, integrate, IntegrateOptions, StopRule};
use crate::surfaces::{needs_switch, transfer, SurfaceModel};

const N: usize = 12;
// u, v, J₁, DJ₁/ds, J₂, DJ₂/ds, each two chart components
const U: usize = 0;
const V: usize = 2;
const J1: usize = 4;
const W1: usize = 6;
const J2: usize = 8;
const W2: usize = 10;

/// Maximum deviations between the tensor and scalar formulations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleReport {
    pub max_xi1_deviation: f64,
    pub max_xi2_deviation: f64,
    pub max_eta2_deviation: f64,
    /// `|ξ₂(R)|` from the two formulations, if a conjugate point was reached.
    pub xi2_at_r_deviation: Option<f64>,
    pub samples: usize,
}

impl OracleReport {
    pub fn max_deviation(&self) -> f64 {
        self.max_xi1_deviation
            .max(self.max_xi2_deviation)
            .max(self.max_eta2_deviation)
    }
}

fn pair(y: &[f64; N], at: usize) -> [f64; 2] {
    [y[at], y[at + 1]]
}

// R(a, X) b = K (X g(a, b) - a g(b, X)), the contraction R^i_jkl a^j X^k b^l.
fn riemann(geom: &LocalGeometry, k: f64, a: [f64; 2], x: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let g = &geom.forms;
    let (ab, bx) = (g.inner(a, b), g.inner(b, x));
    [k * (x[0] * ab - a[0] * bx), k * (x[1] * ab - a[1] * bx)]
}

fn tensor_rhs(surface: &SurfaceModel, chart: ChartId, y: &[f64; N]) -> Result<[f64; N]> {
    let geom = local_geometry(surface, ChartPoint::new(chart, y[U], y[U + 1]))?;
    let g = &geom.forms;
    let k = geom.gauss;
    let v = pair(y, V);
    let (j1, w1, j2, w2) = (pair(y, J1), pair(y, W1), pair(y, J2), pair(y, W2));
    let dk = |x: [f64; 2]| geom.grad_k[0] * x[0] + geom.grad_k[1] * x[1];
    let gamma = |x: [f64; 2], z: [f64; 2]| geom.christoffel_contract(x, z);

    let acc = gamma(v, v);
    // D²J₁/ds² = -R(γ̇, J₁)γ̇
    let jac1 = riemann(&geom, k, v, j1, v);
    // (R_;e + R_e;b) γ̇^b γ̇^c J₁^d J₁^e
    let (vj, jj, vv) = (g.inner(v, j1), g.inner(j1, j1), g.inner(v, v));
    let (dk_j, dk_v) = (dk(j1), dk(v));
    let source1 = [
        dk_j * (v[0] * vj - j1[0] * vv) + dk_v * (v[0] * jj - j1[0] * vj),
        dk_j * (v[1] * vj - j1[1] * vv) + dk_v * (v[1] * jj - j1[1] * vj),
    ];
    // 4 R^a_bcd W^b γ̇^c J₁^d = 4K (γ̇ g(W, J₁) - J₁ g(W, γ̇))
    let (wj, wv) = (g.inner(w1, j1), g.inner(w1, v));
    let source2 = [4.0 * k * (v[0] * wj - j1[0] * wv), 4.0 * k * (v[1] * wj - j1[1] * wv)];
    let jac2 = riemann(&geom, k, v, j2, v);

    // dX/ds = DX/ds - Γ(γ̇, X)
    let mut out = [0.0; N];
    let mut set = |at: usize, val: [f64; 2]| {
        out[at] = val[0];
        out[at + 1] = val[1];
    };
    set(U, v);
    set(V, [-acc[0], -acc[1]]);
    let c = gamma(v, j1);
    set(J1, [w1[0] - c[0], w1[1] - c[1]]);
    let c = gamma(v, w1);
    set(W1, [-jac1[0] - c[0], -jac1[1] - c[1]]);
    let c = gamma(v, j2);
    set(J2, [w2[0] - c[0], w2[1] - c[1]]);
    let c = gamma(v, w2);
    set(
        W2,
        [
            -jac2[0] + source1[0] + source2[0] - c[0],
            -jac2[1] + source1[1] + source2[1] - c[1],
        ],
    );
    Ok(out)
}

fn switch_chart(chart: ChartId, y: &[f64; N]) -> (ChartId, [f64; N]) {
    let p = ChartPoint::new(chart, y[U], y[U + 1]);
    let target = chart.other();
    let mut out = *y;
    for at in [V, J1, W1, J2, W2] {
        let (q, w) = transfer(p, pair(y, at), target);
        out[U] = q.u1;
        out[U + 1] = q.u2;
        out[at] = w[0];
        out[at + 1] = w[1];
    }
    (target, out)
}

/// `(ξ₁, ξ₂, η₂)` from the chart vectors of one tensor state.
fn frame_components(surface: &SurfaceModel, chart: ChartId, y: &[f64; N]) -> Result<[f64; 3]> {
    let geom = local_geometry(surface, ChartPoint::new(chart, y[U], y[U + 1]))?;
    let t = pair(y, V);
    let speed = geom.forms.norm(t);
    let t = [t[0] / speed, t[1] / speed];
    let n = geom.normal_to(t);
    let g = &geom.forms;
    Ok([g.inner(pair(y, J1), n), g.inner(pair(y, J2), n), g.inner(pair(y, J2), t)])
}

/// Integrate the tensor form alongside the scalar hierarchy from `p` in
/// direction `psi` up to `s_max` and report the largest disagreement.
pub fn tensor_jacobi2_oracle(surface: &SurfaceModel, p: ChartPoint, psi: f64, s_max: f64, tol: f64) -> Result<OracleReport> {
    let scalar_opts = IntegrateOptions {
        stop: StopRule::SMax,
        s_max,
        tangential: true,
        ..IntegrateOptions::default().with_tolerance(tol)
    };
    let scalar = integrate(surface, p, psi, &scalar_opts)?;
    let r = scalar.first_conjugate().ok().map(|c| c.r);

    let geom = local_geometry(surface, p)?;
    let v0 = initial_velocity(&geom, psi);
    let t0 = {
        let sp = geom.forms.norm(v0);
        [v0[0] / sp, v0[1] / sp]
    };
    let n0 = geom.normal_to(t0);
    let mut y = [0.0; N];
    y[U] = p.u1;
    y[U + 1] = p.u2;
    y[V] = v0[0];
    y[V + 1] = v0[1];
    y[W1] = n0[0];
    y[W1 + 1] = n0[1];
    y[W2] = -t0[0];
    y[W2 + 1] = -t0[1];

    let mut chart = p.chart;
    let mut s = 0.0;
    let mut h: f64 = 1e-2;
    let mut k = tensor_rhs(surface, chart, &y)?;
    let mut report = OracleReport {
        max_xi1_deviation: 0.0,
        max_xi2_deviation: 0.0,
        max_eta2_deviation: 0.0,
        xi2_at_r_deviation: None,
        samples: 0,
    };
    let mask = [true; N];
    let mut steps = 0usize;
    while s < s_max {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::MaxSteps(steps));
        }
        let h_try = h.min(s_max - s);
        let mut f = |_s: f64, yy: &[f64; N]| tensor_rhs(surface, chart, yy);
        let attempt = match dopri_step(&mut f, s, &y, &k, h_try) {
            Ok(a) => a,
            Err(Error::Domain { .. }) => {
                h = 0.5 * h_try;
                continue;
            }
            Err(e) => return Err(e),
        };
        let err = error_norm(&y, &attempt.y_new, &attempt.err, tol, tol, &mask);
        if !(err <= 1.0) {
            h = h_try * next_step_factor(err).min(1.0);
            if h < 1e-12 {
                return Err(Error::StepUnderflow { s, h });
            }
            continue;
        }
        let (y_new, f_new) = (attempt.y_new, attempt.f_new);
        let dense: DenseStep<N> = attempt.into_dense(s, h_try);
        if let Some(r) = r {
            if s < r && r <= s + h_try {
                let yr = dense.eval(r);
                let xi2 = frame_components(surface, chart, &yr)?[1];
                let want = scalar.state_at(r).xi2;
                report.xi2_at_r_deviation = Some((xi2 - want).abs());
            }
        }
        s += h_try;
        y = y_new;
        k = f_new;
        h = h_try * next_step_factor(err);

        let [xi1, xi2, eta2] = frame_components(surface, chart, &y)?;
        let st = scalar.state_at(s);
        let eta = st.eta.expect("tangential components requested");
        report.max_xi1_deviation = report.max_xi1_deviation.max((xi1 - st.xi1).abs());
        report.max_xi2_deviation = report.max_xi2_deviation.max((xi2 - st.xi2).abs());
        report.max_eta2_deviation = report.max_eta2_deviation.max((eta2 - eta[0]).abs());
        report.samples += 1;

        if needs_switch(ChartPoint::new(chart, y[U], y[U + 1])) {
            (chart, y) = switch_chart(chart, &y);
            k = tensor_rhs(surface, chart, &y)?;
        }
    }
    Ok(report)
}
