//! Built-in surfaces and the two-chart atlas.
//!
//! Every built-in surface is star-shaped about the origin and embedded as
//! `X = F(d)` where `d(u1, u2)` is a unit direction. The standard chart uses
//! the usual spherical angles; the rotated chart uses spherical angles in a
//! frame turned by π/2 about the x-axis, so its poles lie on the y-axis where
//! the standard chart is regular. Chart velocities therefore transform the
//! same way on every surface.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::diffgeo::{wrap_angle, ChartId, ChartPoint};
use crate::error::{Error, Result};
use crate::jet::Jet2;

/// Switch charts once `sin(u1)` drops below this value.
pub const SWITCH_THRESHOLD: f64 = 0.2;
/// After a switch the new chart must be at least this far from its pole.
pub const RETURN_THRESHOLD: f64 = 0.4;

const ON_LINE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Sphere,
    /// Triaxial ellipsoid `x²/a² + y²/b² + z²/c² = 1` with `a > b > c`.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Radial graph `r = 1 + ε sinⁿθ cos(nφ)`.
    SectoralHarmonic { n: u32, epsilon: f64 },
}

/// A line fixed by a reflection isometry of the surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymmetryLine {
    /// The curve `θ = π/2`, fixed by `z → -z`.
    Equator,
    /// The meridian pair `φ ∈ {phi, phi + π}`, fixed by `φ → 2 phi - φ`.
    Meridian { phi: f64 },
}

impl SymmetryLine {
    /// Whether the standard-chart point `(theta, phi)` lies on this line.
    pub fn contains(&self, theta: f64, phi: f64) -> bool {
        match *self {
            SymmetryLine::Equator => (theta - FRAC_PI_2).abs() < ON_LINE_TOL,
            SymmetryLine::Meridian { phi: m } => (phi - m).sin().abs() < ON_LINE_TOL,
        }
    }

    /// Mirror a standard-chart point across this line.
    pub fn reflect(&self, theta: f64, phi: f64) -> (f64, f64) {
        match *self {
            SymmetryLine::Equator => (PI - theta, phi),
            SymmetryLine::Meridian { phi: m } => (theta, wrap_angle(2.0 * m - phi)),
        }
    }

    /// Frame angles `ψ` of the two geodesics that stay on this line,
    /// forward first (east for the equator, north for meridians).
    pub fn directions(&self) -> [f64; 2] {
        match self {
            SymmetryLine::Equator => [0.0, PI],
            SymmetryLine::Meridian { .. } => [FRAC_PI_2, 3.0 * FRAC_PI_2],
        }
    }
}

/// An embedded point together with its chart coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    pub chart: ChartPoint,
    pub xyz: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceModel {
    family: Family,
    symmetry_lines: Vec<SymmetryLine>,
    umbilics: Vec<ChartPoint>,
}

impl SurfaceModel {
    pub fn sphere() -> Self {
        SurfaceModel {
            family: Family::Sphere,
            symmetry_lines: coordinate_mirrors(),
            umbilics: Vec::new(),
        }
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a > b && b > c && c > 0.0 && a.is_finite()) {
            return Err(Error::Surface(format!(
                "ellipsoid axes must satisfy a > b > c > 0, got ({a}, {b}, {c})"
            )));
        }
        let (a2, b2, c2) = (a * a, b * b, c * c);
        let theta = ((b2 - c2) / (a2 - c2)).sqrt().acos();
        let umbilics = vec![
            ChartPoint::standard(theta, 0.0),
            ChartPoint::standard(PI - theta, 0.0),
            ChartPoint::standard(theta, PI),
            ChartPoint::standard(PI - theta, PI),
        ];
        Ok(SurfaceModel {
            family: Family::Ellipsoid { a, b, c },
            symmetry_lines: coordinate_mirrors(),
            umbilics,
        })
    }

    pub fn sectoral_harmonic(n: u32, epsilon: f64) -> Result<Self> {
        if n == 0 || !(0.0..1.0).contains(&epsilon) {
            return Err(Error::Surface(format!(
                "sectoral harmonic needs n >= 1 and epsilon in [0, 1), got n = {n}, epsilon = {epsilon}"
            )));
        }
        let mut symmetry_lines = vec![SymmetryLine::Equator];
        symmetry_lines.extend((0..n).map(|k| SymmetryLine::Meridian {
            phi: k as f64 * PI / n as f64,
        }));
        Ok(SurfaceModel {
            family: Family::SectoralHarmonic { n, epsilon },
            symmetry_lines,
            umbilics: Vec::new(),
        })
    }

    pub fn from_family(family: Family) -> Result<Self> {
        match family {
            Family::Sphere => Ok(SurfaceModel::sphere()),
            Family::Ellipsoid { a, b, c } => SurfaceModel::ellipsoid(a, b, c),
            Family::SectoralHarmonic { n, epsilon } => SurfaceModel::sectoral_harmonic(n, epsilon),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn symmetry_lines(&self) -> &[SymmetryLine] {
        &self.symmetry_lines
    }

    /// Umbilic points in the standard chart (ellipsoid only).
    pub fn umbilics(&self) -> &[ChartPoint] {
        &self.umbilics
    }

    /// Order of the rotational symmetry about the z-axis, if any.
    pub fn rotational_order(&self) -> Option<u32> {
        match self.family {
            Family::SectoralHarmonic { n, epsilon } if epsilon > 0.0 => Some(n),
            Family::Ellipsoid { .. } => Some(2),
            _ => None,
        }
    }

    fn map_direction(&self, d: [f64; 3]) -> [f64; 3] {
        match self.family {
            Family::Sphere => d,
            Family::Ellipsoid { a, b, c } => [a * d[0], b * d[1], c * d[2]],
            Family::SectoralHarmonic { n, epsilon } => {
                let r = 1.0 + epsilon * complex_power_re(d[0], d[1], n);
                [r * d[0], r * d[1], r * d[2]]
            }
        }
    }

    /// Embedding coordinates at `p`.
    pub fn embed(&self, p: ChartPoint) -> Result<SurfacePoint> {
        p.check_domain()?;
        Ok(self.embed_unchecked(p))
    }

    /// Embedding without the pole check (the map itself is smooth everywhere).
    pub fn embed_unchecked(&self, p: ChartPoint) -> SurfacePoint {
        SurfacePoint {
            chart: p,
            xyz: self.map_direction(direction(p)),
        }
    }

    /// Order-4 jets of the embedding at `p`.
    pub fn embedding_jets(&self, p: ChartPoint) -> [Jet2; 3] {
        let d = direction_jets(p);
        match self.family {
            Family::Sphere => d,
            Family::Ellipsoid { a, b, c } => [d[0] * a, d[1] * b, d[2] * c],
            Family::SectoralHarmonic { n, epsilon } => {
                let (mut re, mut im) = (Jet2::constant(1.0), Jet2::constant(0.0));
                for _ in 0..n {
                    let next_re = re * d[0] - im * d[1];
                    im = re * d[1] + im * d[0];
                    re = next_re;
                }
                let r = re * epsilon + 1.0;
                [r * d[0], r * d[1], r * d[2]]
            }
        }
    }

    /// Parameter antipode `(π - u1, u2 + π)` in the same chart.
    pub fn antipode(&self, p: ChartPoint) -> ChartPoint {
        ChartPoint::new(p.chart, PI - p.u1, p.u2 + PI).normalized()
    }

    /// Frame angles of geodesics from `p` that remain on a symmetry line.
    pub fn symmetry_directions(&self, p: ChartPoint) -> Vec<f64> {
        let std = to_chart(p, ChartId::Standard);
        let mut out: Vec<f64> = Vec::new();
        if std.u1.sin() < crate::diffgeo::POLE_THRESHOLD {
            return out;
        }
        for line in self.lines_through(std) {
            for psi in line.directions() {
                if !out.iter().any(|&q| (q - psi).abs() < 1e-12) {
                    out.push(psi);
                }
            }
        }
        out
    }

    /// Symmetry lines passing through `p`.
    pub fn lines_through(&self, p: ChartPoint) -> Vec<SymmetryLine> {
        let std = to_chart(p, ChartId::Standard);
        self.symmetry_lines
            .iter()
            .copied()
            .filter(|l| l.contains(std.u1, std.u2))
            .collect()
    }
}

fn coordinate_mirrors() -> Vec<SymmetryLine> {
    vec![
        SymmetryLine::Equator,
        SymmetryLine::Meridian { phi: 0.0 },
        SymmetryLine::Meridian { phi: FRAC_PI_2 },
    ]
}

fn complex_power_re(x: f64, y: f64, n: u32) -> f64 {
    let (mut re, mut im) = (1.0, 0.0);
    for _ in 0..n {
        let next = re * x - im * y;
        im = re * y + im * x;
        re = next;
    }
    re
}

// Rotation taking rotated-chart frame vectors to world vectors: (x, y, z) -> (x, -z, y).
fn rotate_to_world(v: [f64; 3]) -> [f64; 3] {
    [v[0], -v[2], v[1]]
}

fn rotate_from_world(v: [f64; 3]) -> [f64; 3] {
    [v[0], v[2], -v[1]]
}

/// Unit direction `d(u1, u2)` in world coordinates.
pub fn direction(p: ChartPoint) -> [f64; 3] {
    let (s1, c1) = p.u1.sin_cos();
    let (s2, c2) = p.u2.sin_cos();
    let local = [s1 * c2, s1 * s2, c1];
    match p.chart {
        ChartId::Standard => local,
        ChartId::Rotated => rotate_to_world(local),
    }
}

fn direction_jets(p: ChartPoint) -> [Jet2; 3] {
    let sin_cos = |x: f64, var: usize| {
        let (s, c) = x.sin_cos();
        (
            Jet2::univariate(&[s, c, -s / 2.0, -c / 6.0, s / 24.0], var),
            Jet2::univariate(&[c, -s, -c / 2.0, s / 6.0, c / 24.0], var),
        )
    };
    let (s1, c1) = sin_cos(p.u1, 0);
    let (s2, c2) = sin_cos(p.u2, 1);
    let local = [s1 * c2, s1 * s2, c1];
    match p.chart {
        ChartId::Standard => local,
        ChartId::Rotated => [local[0], -local[2], local[1]],
    }
}

/// Chart coordinates of a unit direction.
pub fn chart_of_direction(d: [f64; 3], chart: ChartId) -> ChartPoint {
    let local = match chart {
        ChartId::Standard => d,
        ChartId::Rotated => rotate_from_world(d),
    };
    let u1 = local[2].clamp(-1.0, 1.0).acos();
    let u2 = local[1].atan2(local[0]);
    ChartPoint::new(chart, u1, u2)
}

/// Re-express a point in another chart.
pub fn to_chart(p: ChartPoint, target: ChartId) -> ChartPoint {
    if p.chart == target {
        return p;
    }
    chart_of_direction(direction(p), target)
}

// World-space partials of d with respect to u1, u2.
fn direction_frame(p: ChartPoint) -> [[f64; 3]; 2] {
    let (s1, c1) = p.u1.sin_cos();
    let (s2, c2) = p.u2.sin_cos();
    let d1 = [c1 * c2, c1 * s2, -s1];
    let d2 = [-s1 * s2, s1 * c2, 0.0];
    match p.chart {
        ChartId::Standard => [d1, d2],
        ChartId::Rotated => [rotate_to_world(d1), rotate_to_world(d2)],
    }
}

/// Transfer a point and a chart velocity into `target`.
///
/// Since every embedding factors through the unit direction, the velocity
/// transforms through the direction map alone.
pub fn transfer(p: ChartPoint, vel: [f64; 2], target: ChartId) -> (ChartPoint, [f64; 2]) {
    if p.chart == target {
        return (p, vel);
    }
    let [a1, a2] = direction_frame(p);
    let ddot = [
        a1[0] * vel[0] + a2[0] * vel[1],
        a1[1] * vel[0] + a2[1] * vel[1],
        a1[2] * vel[0] + a2[2] * vel[1],
    ];
    let q = to_chart(p, target);
    let [b1, b2] = direction_frame(q);
    let s = q.u1.sin();
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    // b1 is unit, b2 has length sin(u1) and they are orthogonal
    let v = [dot(ddot, b1), dot(ddot, b2) / (s * s)];
    (q, v)
}

/// Whether a point should leave its current chart.
pub fn needs_switch(p: ChartPoint) -> bool {
    p.u1.sin() < SWITCH_THRESHOLD
}

/// Re-express a geodesic state in the other chart. Frame scalars are untouched.
pub fn chart_switch(state: &crate::ode::GeodesicState) -> crate::ode::GeodesicState {
    let target = state.chart.chart.other();
    let (chart, vel) = transfer(state.chart, state.vel, target);
    assert!(
        chart.u1.sin() >= RETURN_THRESHOLD || state.chart.u1.sin() >= RETURN_THRESHOLD,
        "both charts degenerate at {:?}",
        state.chart
    );
    crate::ode::GeodesicState {
        chart,
        vel,
        ..state.clone()
    }
}

/// Euclidean distance between embedded points.
pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Largest pairwise distance in a set of embedded points.
pub fn diameter(points: &[[f64; 3]]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(distance(*a, *b));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffgeo::local_geometry;

    #[test]
    fn embed_examples() {
        let s = SurfaceModel::sphere();
        let x = s.embed(ChartPoint::standard(FRAC_PI_2, 0.0)).unwrap().xyz;
        assert!((x[0] - 1.0).abs() < 1e-15 && x[1].abs() < 1e-15 && x[2].abs() < 1e-15);
        let h = SurfaceModel::sectoral_harmonic(3, 0.1).unwrap();
        let x = h.embed(ChartPoint::standard(FRAC_PI_2, 0.0)).unwrap().xyz;
        assert!((x[0] - 1.1).abs() < 1e-15);
        let e = SurfaceModel::ellipsoid(1.05, 1.0, 0.95).unwrap();
        let x = e.embed_unchecked(ChartPoint::standard(1e-9, 0.3)).xyz;
        assert!(x[0].abs() < 1e-8 && x[1].abs() < 1e-8 && (x[2] - 0.95).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters() {
        assert!(SurfaceModel::ellipsoid(1.0, 1.0, 0.9).is_err());
        assert!(SurfaceModel::ellipsoid(1.0, 0.9, 0.0).is_err());
        assert!(SurfaceModel::sectoral_harmonic(0, 0.1).is_err());
        assert!(SurfaceModel::sectoral_harmonic(3, 1.0).is_err());
        assert!(SurfaceModel::sectoral_harmonic(3, -0.1).is_err());
    }

    #[test]
    fn antipode_examples() {
        let s = SurfaceModel::sphere();
        let p = ChartPoint::standard(FRAC_PI_2, 0.0);
        let q = s.antipode(p);
        assert!((q.u1 - FRAC_PI_2).abs() < 1e-15 && (q.u2 - PI).abs() < 1e-15);
        let p = ChartPoint::standard(0.7, 5.9);
        let back = s.antipode(s.antipode(p));
        assert!((back.u1 - p.u1).abs() < 1e-14 && (back.u2 - p.u2).abs() < 1e-14);
        let x = s.embed(p).unwrap().xyz;
        let y = s.embed(s.antipode(p)).unwrap().xyz;
        for i in 0..3 {
            assert!((x[i] + y[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn chart_round_trip() {
        for &(a, b) in &[(0.5, 0.2), (1.3, 4.0), (2.8, 6.0), (1.0, -2.0)] {
            let p = ChartPoint::standard(a, b);
            let q = to_chart(p, ChartId::Rotated);
            let r = to_chart(q, ChartId::Standard);
            let s = SurfaceModel::ellipsoid(1.05, 1.0, 0.95).unwrap();
            let d = distance(s.embed_unchecked(p).xyz, s.embed_unchecked(r).xyz);
            assert!(d < 1e-12, "{d}");
        }
    }

    #[test]
    fn switch_moves_away_from_pole() {
        // near the north pole along the x-z plane
        let p = ChartPoint::standard(0.1f64.asin(), 0.0);
        let q = to_chart(p, ChartId::Rotated);
        assert!(q.u1.sin() >= 0.9);
    }

    #[test]
    fn symmetry_directions_examples() {
        let h = SurfaceModel::sectoral_harmonic(3, 0.1).unwrap();
        let dirs = h.symmetry_directions(ChartPoint::standard(FRAC_PI_2, 0.37));
        assert_eq!(dirs, vec![0.0, PI]);
        let dirs = h.symmetry_directions(ChartPoint::standard(1.0, PI / 3.0));
        assert_eq!(dirs, vec![FRAC_PI_2, 3.0 * FRAC_PI_2]);
        assert!(h.symmetry_directions(ChartPoint::standard(1.0, 0.3)).is_empty());
        let e = SurfaceModel::ellipsoid(1.05, 1.0, 0.95).unwrap();
        assert_eq!(e.symmetry_directions(ChartPoint::standard(0.8, PI)).len(), 2);
    }

    #[test]
    fn umbilics_have_equal_principal_curvatures() {
        let e = SurfaceModel::ellipsoid(1.05, 1.0, 0.95).unwrap();
        assert_eq!(e.umbilics().len(), 4);
        for &u in e.umbilics() {
            let g = local_geometry(&e, u).unwrap();
            let [k1, k2] = g.principal_curvatures();
            assert!((k1 - k2).abs() < 1e-8, "{k1} {k2}");
        }
        // and a generic point does not
        let g = local_geometry(&e, ChartPoint::standard(1.0, 0.5)).unwrap();
        let [k1, k2] = g.principal_curvatures();
        assert!((k1 - k2).abs() > 1e-3);
    }
}
