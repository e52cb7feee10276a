//! Surface geometry from embedding jets: metric, Christoffel symbols, Gauss
//! curvature and its first and second covariant derivatives.
//!
//! Everything here is a pure function of a [`SurfaceModel`] and a chart
//! point. Order-4 jets of the embedding are pushed through the first and
//! second fundamental forms, which leaves an order-2 jet of `K`.
//!
//! Frame convention: for a unit tangent `T`, the normal `N` is the unique
//! unit vector with `g(T, N) = 0` and `det[T N] > 0` in chart components.
//! Both built-in charts induce the outward orientation on the surface, so
//! this convention is the same in either chart.

use crate::error::{Error, Result};
use crate::jet::{cross3, dot3, Jet2};
use crate::surfaces::SurfaceModel;

/// Charts are rejected when `sin(u1)` falls below this value.
pub const POLE_THRESHOLD: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartId {
    /// Spherical angles `(θ, φ)` about the z-axis.
    Standard,
    /// Spherical angles in a frame rotated by π/2 about the x-axis; its
    /// poles sit on the y-axis.
    Rotated,
}

impl ChartId {
    pub fn other(self) -> ChartId {
        match self {
            ChartId::Standard => ChartId::Rotated,
            ChartId::Rotated => ChartId::Standard,
        }
    }
}

/// A point in one of the two angular charts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub chart: ChartId,
    pub u1: f64,
    pub u2: f64,
}

impl ChartPoint {
    pub fn new(chart: ChartId, u1: f64, u2: f64) -> Self {
        ChartPoint { chart, u1, u2 }
    }

    /// A point in the standard `(θ, φ)` chart.
    pub fn standard(theta: f64, phi: f64) -> Self {
        ChartPoint::new(ChartId::Standard, theta, phi)
    }

    /// Same point with `u2` wrapped into `[0, 2π)`.
    pub fn normalized(self) -> Self {
        ChartPoint {
            u2: wrap_angle(self.u2),
            ..self
        }
    }

    pub fn check_domain(&self) -> Result<()> {
        if !(self.u1.is_finite() && self.u2.is_finite()) || self.u1.sin() < POLE_THRESHOLD {
            return Err(Error::Domain {
                chart: self.chart,
                u1: self.u1,
                threshold: POLE_THRESHOLD,
            });
        }
        Ok(())
    }
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = x.rem_euclid(tau);
    if r >= tau {
        0.0
    } else {
        r
    }
}

/// Metric components, their partials and the Christoffel symbols.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstFundamental {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    /// `(∂E/∂u1, ∂E/∂u2)`
    pub de: [f64; 2],
    pub df: [f64; 2],
    pub dg: [f64; 2],
    /// `christoffel[c][a][b] = Γ^c_{ab}`
    pub christoffel: [[[f64; 2]; 2]; 2],
}

impl FirstFundamental {
    pub fn metric(&self) -> [[f64; 2]; 2] {
        [[self.e, self.f], [self.f, self.g]]
    }

    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }

    /// `g(a, b)` for chart-component vectors.
    pub fn inner(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        self.e * a[0] * b[0] + self.f * (a[0] * b[1] + a[1] * b[0]) + self.g * a[1] * b[1]
    }

    pub fn norm(&self, a: [f64; 2]) -> f64 {
        self.inner(a, a).sqrt()
    }
}

/// Gauss curvature and its derivatives contracted with a parallel frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureSample {
    pub k: f64,
    /// `T^a ∂_a K`
    pub k_t: f64,
    /// `N^a ∂_a K`
    pub k_n: f64,
    /// `T^a N^b ∇_a ∂_b K`
    pub k_tn: f64,
    /// `N^a N^b ∇_a ∂_b K`
    pub k_nn: f64,
}

/// All point-local geometric quantities computed from one jet evaluation.
#[derive(Clone, Copy, Debug)]
pub struct LocalGeometry {
    pub point: ChartPoint,
    pub forms: FirstFundamental,
    /// Second fundamental form `(L, M, N)` w.r.t. the outward unit normal.
    pub second: [f64; 3],
    pub gauss: f64,
    pub grad_k: [f64; 2],
    /// Plain second partials of `K`.
    pub hess_k: [[f64; 2]; 2],
    /// `∇_a ∂_b K = ∂_a ∂_b K - Γ^c_{ab} ∂_c K`
    pub cov_hess_k: [[f64; 2]; 2],
}

impl LocalGeometry {
    /// Mean curvature with respect to the outward normal.
    pub fn mean_curvature(&self) -> f64 {
        let FirstFundamental { e, f, g, .. } = self.forms;
        let [l, m, n] = self.second;
        (e * n - 2.0 * f * m + g * l) / (2.0 * self.forms.det())
    }

    /// Principal curvatures, larger first.
    pub fn principal_curvatures(&self) -> [f64; 2] {
        let h = self.mean_curvature();
        let disc = (h * h - self.gauss).max(0.0).sqrt();
        [h + disc, h - disc]
    }

    /// Unit normal to `t` in the fixed orientation.
    pub fn normal_to(&self, t: [f64; 2]) -> [f64; 2] {
        let FirstFundamental { e, f, g, .. } = self.forms;
        let lower = [e * t[0] + f * t[1], f * t[0] + g * t[1]];
        let w = self.forms.det().sqrt();
        [-lower[1] / w, lower[0] / w]
    }

    /// Contract the curvature derivatives with the frame `{t, normal_to(t)}`.
    pub fn sample(&self, t: [f64; 2]) -> CurvatureSample {
        self.sample_frame(t, self.normal_to(t))
    }

    /// Contract with an explicit frame `{t, n}`.
    pub fn sample_frame(&self, t: [f64; 2], n: [f64; 2]) -> CurvatureSample {
        let dk = |v: [f64; 2]| self.grad_k[0] * v[0] + self.grad_k[1] * v[1];
        let hk = |a: [f64; 2], b: [f64; 2]| {
            let h = &self.cov_hess_k;
            a[0] * (h[0][0] * b[0] + h[0][1] * b[1]) + a[1] * (h[1][0] * b[0] + h[1][1] * b[1])
        };
        CurvatureSample {
            k: self.gauss,
            k_t: dk(t),
            k_n: dk(n),
            k_tn: hk(t, n),
            k_nn: hk(n, n),
        }
    }

    /// `Γ^c_{ab} v^a w^b` for each `c`.
    pub fn christoffel_contract(&self, v: [f64; 2], w: [f64; 2]) -> [f64; 2] {
        let gam = &self.forms.christoffel;
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    *o += gam[c][a][b] * v[a] * w[b];
                }
            }
        }
        out
    }
}

/// Order-4 jets of the embedding coordinates at `p`.
pub fn jet_eval_embedding(surface: &SurfaceModel, p: ChartPoint) -> Result<[Jet2; 3]> {
    p.check_domain()?;
    Ok(surface.embedding_jets(p))
}

/// Evaluate metric, second fundamental form, `K` and its derivatives at `p`.
pub fn local_geometry(surface: &SurfaceModel, p: ChartPoint) -> Result<LocalGeometry> {
    let x = jet_eval_embedding(surface, p)?;
    let xu = [x[0].derivative(0), x[1].derivative(0), x[2].derivative(0)];
    let xv = [x[0].derivative(1), x[1].derivative(1), x[2].derivative(1)];
    let e = dot3(&xu, &xu);
    let f = dot3(&xu, &xv);
    let g = dot3(&xv, &xv);
    let det = e * g - f * f;
    if !(e.value() > 0.0 && g.value() > 0.0 && det.value() > 0.0) {
        return Err(Error::Geometry(format!(
            "metric not positive definite at {p:?}: E = {}, G = {}, EG - F^2 = {}",
            e.value(),
            g.value(),
            det.value()
        )));
    }
    let normal = cross3(&xu, &xv);
    let xuu = [xu[0].derivative(0), xu[1].derivative(0), xu[2].derivative(0)];
    let xuv = [xu[0].derivative(1), xu[1].derivative(1), xu[2].derivative(1)];
    let xvv = [xv[0].derivative(1), xv[1].derivative(1), xv[2].derivative(1)];
    // Second fundamental form scaled by |Xu x Xv|.
    let l = dot3(&xuu, &normal);
    let m = dot3(&xuv, &normal);
    let n = dot3(&xvv, &normal);
    let k = (l * n - m * m) / (det * det);

    let width = det.value().sqrt();
    let grad = |j: &Jet2| j.gradient();
    let (de, df, dg) = (grad(&e), grad(&f), grad(&g));
    let metric = [[e.value(), f.value()], [f.value(), g.value()]];
    let christoffel = christoffel_symbols(metric, [de, df, dg]);
    let forms = FirstFundamental {
        e: e.value(),
        f: f.value(),
        g: g.value(),
        de,
        df,
        dg,
        christoffel,
    };

    let grad_k = k.gradient();
    let hess_k = k.hessian();
    let mut cov_hess_k = hess_k;
    for a in 0..2 {
        for b in 0..2 {
            cov_hess_k[a][b] -= christoffel[0][a][b] * grad_k[0] + christoffel[1][a][b] * grad_k[1];
        }
    }
    Ok(LocalGeometry {
        point: p,
        forms,
        second: [l.value() / width, m.value() / width, n.value() / width],
        gauss: k.value(),
        grad_k,
        hess_k,
        cov_hess_k,
    })
}

/// `Γ^c_{ab} = ½ g^{cd} (∂_a g_{db} + ∂_b g_{da} - ∂_d g_{ab})`, with the metric
/// partials passed as `[dE, dF, dG]`.
pub fn christoffel_symbols(metric: [[f64; 2]; 2], partials: [[f64; 2]; 3]) -> [[[f64; 2]; 2]; 2] {
    let [de, df, dg] = partials;
    // dmetric[d][a][b] = ∂_d g_{ab}
    let dmetric = |d: usize| [[de[d], df[d]], [df[d], dg[d]]];
    let dm = [dmetric(0), dmetric(1)];
    let det = metric[0][0] * metric[1][1] - metric[0][1] * metric[1][0];
    let inv = [
        [metric[1][1] / det, -metric[0][1] / det],
        [-metric[1][0] / det, metric[0][0] / det],
    ];
    let mut out = [[[0.0; 2]; 2]; 2];
    for (c, out_c) in out.iter_mut().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                let mut acc = 0.0;
                for d in 0..2 {
                    acc += inv[c][d] * (dm[a][d][b] + dm[b][d][a] - dm[d][a][b]);
                }
                out_c[a][b] = 0.5 * acc;
            }
        }
    }
    out
}

pub fn fundamental_forms(surface: &SurfaceModel, p: ChartPoint) -> Result<FirstFundamental> {
    Ok(local_geometry(surface, p)?.forms)
}

/// Curvature invariants along the unit tangent `t` (chart components).
pub fn curvature_sample(surface: &SurfaceModel, p: ChartPoint, t: [f64; 2]) -> Result<CurvatureSample> {
    let geom = local_geometry(surface, p)?;
    let len2 = geom.forms.inner(t, t);
    if (len2 - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!(
            "tangent is not unit length: g(T, T) = {len2}"
        )));
    }
    Ok(geom.sample(t))
}

/// The unit normal completing `t` to a positively oriented orthonormal frame.
pub fn rotate_to_normal(surface: &SurfaceModel, p: ChartPoint, t: [f64; 2]) -> Result<[f64; 2]> {
    let forms = fundamental_forms(surface, p)?;
    if !(forms.inner(t, t) > 0.0) {
        return Err(Error::Precondition("zero tangent vector".into()));
    }
    let lower = [forms.e * t[0] + forms.f * t[1], forms.f * t[0] + forms.g * t[1]];
    let w = forms.det().sqrt();
    Ok([-lower[1] / w, lower[0] / w])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn sphere_metric_and_christoffel() {
        let s = SurfaceModel::sphere();
        let p = ChartPoint::standard(FRAC_PI_3, 0.4);
        let ff = fundamental_forms(&s, p).unwrap();
        assert!((ff.e - 1.0).abs() < 1e-14);
        assert!(ff.f.abs() < 1e-14);
        assert!((ff.g - FRAC_PI_3.sin().powi(2)).abs() < 1e-14);
        // Γ^φ_{θφ} = cot θ
        assert!((ff.christoffel[1][0][1] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((ff.christoffel[1][1][0] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        // Γ^θ_{φφ} = -sin θ cos θ
        assert!((ff.christoffel[0][1][1] + FRAC_PI_3.sin() * FRAC_PI_3.cos()).abs() < 1e-14);
    }

    #[test]
    fn sphere_curvature_is_constant() {
        let s = SurfaceModel::sphere();
        for &(th, ph) in &[(0.4, 0.1), (1.2, 2.0), (2.5, 5.0)] {
            let p = ChartPoint::standard(th, ph);
            let t = [0.6, 0.8 / f64::sin(th)];
            let c = curvature_sample(&s, p, t).unwrap();
            assert!((c.k - 1.0).abs() < 1e-12);
            for v in [c.k_t, c.k_n, c.k_tn, c.k_nn] {
                assert!(v.abs() < 1e-11, "{c:?}");
            }
        }
    }

    #[test]
    fn pole_is_a_domain_error() {
        let s = SurfaceModel::sphere();
        let err = local_geometry(&s, ChartPoint::standard(0.1, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn non_unit_tangent_is_rejected() {
        let s = SurfaceModel::sphere();
        let err = curvature_sample(&s, ChartPoint::standard(FRAC_PI_2, 0.0), [1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let err = rotate_to_normal(&s, ChartPoint::standard(FRAC_PI_2, 0.0), [0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn rotate_to_normal_on_sphere_equator() {
        let s = SurfaceModel::sphere();
        let p = ChartPoint::standard(FRAC_PI_2, 0.0);
        let n = rotate_to_normal(&s, p, [0.0, 1.0]).unwrap();
        assert!((n[0] + 1.0).abs() < 1e-15 && n[1].abs() < 1e-15);
        let back = rotate_to_normal(&s, p, n).unwrap();
        assert!(back[0].abs() < 1e-12 && (back[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_axis_curvature() {
        let s = SurfaceModel::ellipsoid(1.05, 1.0, 0.95).unwrap();
        let geom = local_geometry(&s, ChartPoint::standard(FRAC_PI_2, 0.0)).unwrap();
        let expected = 1.05f64.powi(2) / (1.0 * 0.95f64.powi(2));
        assert!((geom.gauss - expected).abs() < 1e-12);
        assert!((geom.gauss - 1.2216).abs() < 1e-3);
        let _ = PI;
    }

    #[test]
    fn reversing_tangent_flips_odd_invariants() {
        let s = SurfaceModel::sectoral_harmonic(3, 0.1).unwrap();
        let geom = local_geometry(&s, ChartPoint::standard(1.1, 0.3)).unwrap();
        let g = geom.forms;
        let t0 = [0.3, 0.7];
        let norm = g.norm(t0);
        let t = [t0[0] / norm, t0[1] / norm];
        let n = geom.normal_to(t);
        let a = geom.sample_frame(t, n);
        let b = geom.sample_frame([-t[0], -t[1]], n);
        assert!((a.k - b.k).abs() < 1e-15);
        assert!((a.k_t + b.k_t).abs() < 1e-14);
        assert!((a.k_tn + b.k_tn).abs() < 1e-14);
        assert!((a.k_nn - b.k_nn).abs() < 1e-14);
        assert!((a.k_n - b.k_n).abs() < 1e-14);
        // with the rotated normal, N follows T
        let c = geom.sample([-t[0], -t[1]]);
        assert!((a.k_n + c.k_n).abs() < 1e-14);
        assert!((a.k_tn - c.k_tn).abs() < 1e-14);
    }
}
