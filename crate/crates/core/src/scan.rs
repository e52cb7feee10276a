//! Bifurcation experiments as the base point moves.
//!
//! A path scan follows a symmetry line and records `ξ₃(R)` for the geodesic
//! that stays on the line; its zeros are cusp bifurcations. A region map
//! counts cusps at the centers of a `(θ, φ)` grid, and
//! [`bifurcation_locate`] refines a count change between two base points.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use crate::diffgeo::{ChartPoint, POLE_THRESHOLD};
use crate::error::{Error, Result};
use crate::locus::{par_map, sweep_R, AClass, SweepOptions};
use crate::ode::{first_conjugate, IntegrateOptions};
use crate::roots::{bisect_predicate, brent};
use crate::surfaces::{distance, Family, SurfaceModel, SymmetryLine};

/// A base-point curve along a symmetry line, parameterized by `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScanPath {
    /// `t = θ` at fixed `φ`.
    Meridian { phi: f64, t_start: f64, t_end: f64 },
    /// `t = φ` on `θ = π/2`. A range of length `2π` is treated as periodic.
    Equator { t_start: f64, t_end: f64 },
}

impl ScanPath {
    pub fn point(&self, t: f64) -> ChartPoint {
        match *self {
            ScanPath::Meridian { phi, .. } => ChartPoint::standard(t, phi),
            ScanPath::Equator { .. } => ChartPoint::standard(FRAC_PI_2, t),
        }
    }

    pub fn line(&self) -> SymmetryLine {
        match *self {
            ScanPath::Meridian { phi, .. } => SymmetryLine::Meridian { phi },
            ScanPath::Equator { .. } => SymmetryLine::Equator,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        match *self {
            ScanPath::Meridian { t_start, t_end, .. } | ScanPath::Equator { t_start, t_end } => (t_start, t_end),
        }
    }

    pub fn is_periodic(&self) -> bool {
        let (a, b) = self.range();
        matches!(self, ScanPath::Equator { .. }) && ((b - a).abs() - TAU).abs() < 1e-12
    }

    /// `n` parameter values; periodic paths omit the duplicated endpoint.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.range();
        if self.is_periodic() {
            (0..n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
        } else {
            (0..n).map(|k| a + (b - a) * k as f64 / (n - 1).max(1) as f64).collect()
        }
    }
}

/// Which of the two symmetric geodesics to follow: forward is east on the
/// equator and north on a meridian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanDirection {
    Forward,
    Backward,
}

impl ScanDirection {
    pub fn psi(self, line: SymmetryLine) -> f64 {
        let [f, b] = line.directions();
        match self {
            ScanDirection::Forward => f,
            ScanDirection::Backward => b,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ScanDirection::Forward => "forward",
            ScanDirection::Backward => "backward",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathSample {
    pub t: f64,
    pub theta: f64,
    pub phi: f64,
    pub direction: ScanDirection,
    /// `None` when no conjugate point was found.
    pub r: Option<f64>,
    pub xi3_at_r: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathScanResult {
    pub direction: ScanDirection,
    pub samples: Vec<PathSample>,
    /// Refined parameters where `ξ₃(R)` changes sign.
    pub zeros: Vec<f64>,
    /// `ξ₃(R)` vanishes identically along the path.
    pub degenerate: bool,
}

impl PathScanResult {
    pub fn is_partial(&self) -> bool {
        self.samples.iter().any(|s| s.r.is_none())
    }
}

/// Resolution of the refined zeros of `t ↦ ξ₃(R)`.
pub const PATH_ZERO_TOL: f64 = 1e-7;
const XI3_DEGENERATE: f64 = 1e-7;

/// Record `ξ₃(R)` along `path` for the symmetric geodesic in direction `dir`.
pub fn path_scan(
    surface: &SurfaceModel,
    path: ScanPath,
    dir: ScanDirection,
    n_samples: usize,
    opts: &IntegrateOptions,
) -> Result<PathScanResult> {
    if n_samples < 2 {
        return Err(Error::Precondition("a path scan needs at least 2 samples".into()));
    }
    let line = path.line();
    if !surface.symmetry_lines().contains(&line) {
        return Err(Error::Precondition(format!("{line:?} is not a symmetry line of this surface")));
    }
    let ts = path.samples(n_samples);
    for &t in &ts {
        let p = path.point(t);
        if !line.contains(p.u1, p.u2) {
            return Err(Error::Precondition(format!("path point {p:?} is off {line:?}")));
        }
        p.check_domain()?;
    }
    let psi = dir.psi(line);
    let eval = |t: f64| -> Result<Option<(f64, f64)>> {
        match first_conjugate(surface, path.point(t), psi, opts) {
            Ok(c) => Ok(Some((c.r, c.state.xi3))),
            Err(e) if e.is_missing_conjugate() => Ok(None),
            Err(e) => Err(e),
        }
    };
    let values = par_map(ts.len(), true, |k| eval(ts[k]))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let samples: Vec<PathSample> = ts
        .iter()
        .zip(&values)
        .map(|(&t, v)| {
            let p = path.point(t);
            PathSample {
                t,
                theta: p.u1,
                phi: p.u2,
                direction: dir,
                r: v.map(|v| v.0),
                xi3_at_r: v.map(|v| v.1),
            }
        })
        .collect();
    let peak = samples.iter().filter_map(|s| s.xi3_at_r).fold(0.0f64, |m, x| m.max(x.abs()));
    let degenerate = peak < XI3_DEGENERATE;
    let mut zeros = Vec::new();
    if !degenerate {
        let n = samples.len();
        let pairs = if path.is_periodic() { n } else { n - 1 };
        for k in 0..pairs {
            let j = (k + 1) % n;
            let (Some(a), Some(b)) = (samples[k].xi3_at_r, samples[j].xi3_at_r) else { continue };
            if a * b > 0.0 || a == 0.0 {
                continue;
            }
            let lo = samples[k].t;
            let hi = if j == 0 { samples[j].t + TAU } else { samples[j].t };
            let f = |t: f64| -> Result<f64> { eval(t)?.map(|v| v.1).ok_or(Error::NoConjugatePoint { s_max: opts.s_max }) };
            let (t, _) = brent(f, lo, hi, a, b, 0.1 * PATH_ZERO_TOL, 0.0, 200)?;
            zeros.push(if path.is_periodic() { t.rem_euclid(TAU) } else { t });
        }
        zeros.sort_by(f64::total_cmp);
    }
    Ok(PathScanResult {
        direction: dir,
        samples,
        zeros,
        degenerate,
    })
}

/// Grid and sweep settings for [`region_map`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionMapOptions {
    pub theta_range: (f64, f64),
    pub phi_range: (f64, f64),
    pub n_theta: usize,
    pub n_phi: usize,
    pub sweep: SweepOptions,
}

impl Default for RegionMapOptions {
    fn default() -> Self {
        RegionMapOptions {
            theta_range: (FRAC_PI_2 - 0.5, FRAC_PI_2 + 0.5),
            phi_range: (0.0, TAU),
            n_theta: 24,
            n_phi: 96,
            sweep: SweepOptions {
                n_psi: 64,
                refine: false,
                parallel: false,
                ..SweepOptions::default()
            },
        }
    }
}

/// Cusp counts at the cell centers of a `(θ, φ)` grid, row-major in θ.
#[derive(Clone, Debug, Serialize)]
pub struct RegionMap {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// `None` marks cells whose locus was partial.
    pub counts: Vec<Option<usize>>,
    /// The count differs from a neighbour (φ wraps on a full period).
    pub boundary: Vec<bool>,
    pub periodic_phi: bool,
}

impl RegionMap {
    pub fn count(&self, i: usize, j: usize) -> Option<usize> {
        self.counts[i * self.phi.len() + j]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        self.boundary[i * self.phi.len() + j]
    }

    pub fn center(&self, i: usize, j: usize) -> ChartPoint {
        ChartPoint::standard(self.theta[i], self.phi[j])
    }

    /// Sorted distinct counts over known cells.
    pub fn distinct_counts(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.counts.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn has_unknown(&self) -> bool {
        self.counts.iter().any(Option::is_none)
    }

    /// Adjacent cell pairs with differing known counts.
    pub fn boundary_pairs(&self) -> Vec<((usize, usize), (usize, usize))> {
        let (nt, np) = (self.theta.len(), self.phi.len());
        let mut out = Vec::new();
        for i in 0..nt {
            for j in 0..np {
                let here = self.count(i, j);
                let mut neighbours = Vec::new();
                if i + 1 < nt {
                    neighbours.push((i + 1, j));
                }
                if j + 1 < np {
                    neighbours.push((i, j + 1));
                } else if self.periodic_phi {
                    neighbours.push((i, 0));
                }
                for (a, b) in neighbours {
                    let there = self.count(a, b);
                    if here.is_some() && there.is_some() && here != there {
                        out.push(((i, j), (a, b)));
                    }
                }
            }
        }
        out
    }
}

/// Count cusps of the conjugate locus at every cell center.
pub fn region_map(surface: &SurfaceModel, opts: &RegionMapOptions) -> Result<RegionMap> {
    let (nt, np) = (opts.n_theta, opts.n_phi);
    if nt == 0 || np == 0 {
        return Err(Error::Precondition("region map grid must be non-empty".into()));
    }
    let (t0, t1) = opts.theta_range;
    let (p0, p1) = opts.phi_range;
    let theta: Vec<f64> = (0..nt).map(|i| t0 + (t1 - t0) * (i as f64 + 0.5) / nt as f64).collect();
    let phi: Vec<f64> = (0..np).map(|j| p0 + (p1 - p0) * (j as f64 + 0.5) / np as f64).collect();
    if let Some(bad) = theta.iter().find(|t| t.sin() < POLE_THRESHOLD) {
        return Err(Error::Precondition(format!("grid row θ = {bad} is inside the chart pole region")));
    }
    let counts = par_map(nt * np, true, |c| -> Result<Option<usize>> {
        let p = ChartPoint::standard(theta[c / np], phi[c % np]);
        let curve = sweep_R(surface, p, &opts.sweep)?;
        Ok((!curve.is_partial()).then(|| curve.cusp_count()))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let periodic_phi = ((p1 - p0).abs() - TAU).abs() < 1e-12;
    let mut map = RegionMap {
        theta,
        phi,
        counts,
        boundary: vec![false; nt * np],
        periodic_phi,
    };
    for ((i, j), (a, b)) in map.boundary_pairs() {
        map.boundary[i * np + j] = true;
        map.boundary[a * np + b] = true;
    }
    Ok(map)
}

/// How the singularity at a located boundary was identified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    /// A cusp on a symmetry direction with `ξ₃(R)` near zero.
    SymmetricCusp,
    /// A zero of `ξ₂(R)` without a sign change.
    Tangency,
    /// The two closest cusps on the side with more cusps.
    MergedPair,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryCandidate {
    pub psi: f64,
    pub a_class: AClass,
    pub symmetric: bool,
    /// `|ξ₃(R)|` relative to the curve's largest `|ξ₃(R)|`.
    pub xi3_relative: f64,
    pub source: CandidateSource,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    #[serde(skip)]
    pub lo: ChartPoint,
    #[serde(skip)]
    pub hi: ChartPoint,
    pub lo_count: usize,
    pub hi_count: usize,
    /// Base-point separation of the final bracket.
    pub separation: f64,
    /// Bracket widths in the segment parameter, one per iteration.
    pub widths: Vec<f64>,
    pub candidate: Option<BoundaryCandidate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UmbilicCollapse {
    #[serde(skip)]
    pub point: ChartPoint,
    pub diameter: f64,
    pub distance_to_umbilic: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum BifurcationOutcome {
    /// Equal counts at both ends of the refined segment: a grid artifact.
    NoBoundary { count: usize },
    Boundary(BoundaryReport),
    /// The locus shrinks to a point instead of changing its cusp count.
    UmbilicCollapse(UmbilicCollapse),
}

/// Target base-point separation for boundary refinement.
pub const BOUNDARY_TOL: f64 = 1e-5;
/// Relative `|ξ₃|` below which a cusp at a located boundary is a candidate.
pub const CANDIDATE_TOL: f64 = 1e-3;
/// Diameter below which an ellipsoid locus counts as collapsed.
pub const COLLAPSE_DIAMETER: f64 = 1e-3;

fn lerp(a: ChartPoint, b: ChartPoint, l: f64) -> ChartPoint {
    let dphi = (b.u2 - a.u2 + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
    ChartPoint::standard(a.u1 + l * (b.u1 - a.u1), a.u2 + l * dphi)
}

/// Refine a change of cusp count on the segment between two base points
/// until the bracket is [`BOUNDARY_TOL`] wide in the embedding.
pub fn bifurcation_locate(surface: &SurfaceModel, a: ChartPoint, b: ChartPoint, opts: &SweepOptions) -> Result<BifurcationOutcome> {
    bifurcation_locate_to(surface, a, b, opts, BOUNDARY_TOL)
}

/// [`bifurcation_locate`] with an explicit bracket width `tol`.
pub fn bifurcation_locate_to(
    surface: &SurfaceModel,
    a: ChartPoint,
    b: ChartPoint,
    opts: &SweepOptions,
    tol: f64,
) -> Result<BifurcationOutcome> {
    let count_opts = SweepOptions {
        refine: false,
        ..*opts
    };
    let count = |p: ChartPoint| -> Result<usize> { Ok(sweep_R(surface, p, &count_opts)?.cusp_count()) };
    let (ca, cb) = (count(a)?, count(b)?);
    if ca == cb {
        if matches!(surface.family(), Family::Ellipsoid { .. }) {
            if let Some(c) = umbilic_collapse(surface, a, b, opts)? {
                return Ok(BifurcationOutcome::UmbilicCollapse(c));
            }
        }
        return Ok(BifurcationOutcome::NoBoundary { count: ca });
    }
    let len = distance(surface.embed(a)?.xyz, surface.embed(b)?.xyz);
    let mut widths = Vec::new();
    let (lo, hi) = bisect_predicate(
        |l| -> Result<bool> { Ok(count(lerp(a, b, l))? == ca) },
        0.0,
        1.0,
        true,
        tol / len.max(tol),
        &mut widths,
    )?;
    let (plo, phi) = (lerp(a, b, lo), lerp(a, b, hi));
    let (lo_count, hi_count) = (count(plo)?, count(phi)?);
    if lo_count == hi_count {
        return Ok(BifurcationOutcome::NoBoundary { count: lo_count });
    }
    let more = if lo_count > hi_count { plo } else { phi };
    let fewer = if lo_count > hi_count { phi } else { plo };
    let candidate = classify_boundary(surface, more, fewer, opts)?;
    Ok(BifurcationOutcome::Boundary(BoundaryReport {
        lo: plo,
        hi: phi,
        lo_count,
        hi_count,
        separation: distance(surface.embed(plo)?.xyz, surface.embed(phi)?.xyz),
        widths,
        candidate,
    }))
}

fn cyclic_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn classify_boundary(surface: &SurfaceModel, more: ChartPoint, fewer: ChartPoint, opts: &SweepOptions) -> Result<Option<BoundaryCandidate>> {
    let full = SweepOptions { refine: true, ..*opts };
    let curve = sweep_R(surface, more, &full)?;
    let scale = curve.xi3_scale().max(f64::MIN_POSITIVE);

    let symmetric = curve
        .cusps
        .iter()
        .filter(|c| c.symmetric && c.xi3_value.abs() < CANDIDATE_TOL * scale)
        .min_by(|x, y| x.xi3_value.abs().total_cmp(&y.xi3_value.abs()));
    if let Some(c) = symmetric {
        return Ok(Some(BoundaryCandidate {
            psi: c.psi_star,
            a_class: AClass::A3,
            symmetric: true,
            xi3_relative: c.xi3_value.abs() / scale,
            source: CandidateSource::SymmetricCusp,
        }));
    }

    let other = sweep_R(surface, fewer, &full)?;
    let tangency = curve.candidates.iter().chain(&other.candidates).next();
    if let Some(t) = tangency {
        return Ok(Some(BoundaryCandidate {
            psi: t.psi,
            a_class: t.a_class,
            symmetric: t.symmetric,
            xi3_relative: t.xi3_value.abs() / scale,
            source: CandidateSource::Tangency,
        }));
    }

    let n = curve.cusps.len();
    if n < 2 {
        return Ok(None);
    }
    let (i, j) = (0..n)
        .map(|i| (i, (i + 1) % n))
        .min_by(|&(i, j), &(k, l)| {
            let g1 = cyclic_gap(curve.cusps[i].psi_star, curve.cusps[j].psi_star);
            let g2 = cyclic_gap(curve.cusps[k].psi_star, curve.cusps[l].psi_star);
            g1.total_cmp(&g2)
        })
        .expect("at least two cusps");
    let (ci, cj) = (&curve.cusps[i], &curve.cusps[j]);
    let mid = ci.psi_star + 0.5 * ((cj.psi_star - ci.psi_star).rem_euclid(TAU));
    let rec = curve.evaluate(mid)?;
    let dirs = surface.symmetry_directions(more);
    let on_symmetry = dirs.iter().any(|&d| cyclic_gap(d, mid) < 1e-6);
    Ok(Some(BoundaryCandidate {
        psi: mid.rem_euclid(TAU),
        a_class: if on_symmetry { AClass::A3 } else { AClass::A2 },
        symmetric: on_symmetry,
        xi3_relative: rec.xi3_at_r.abs() / scale,
        source: CandidateSource::MergedPair,
    }))
}

/// Locus diameter at `p`, from a count-only sweep.
pub fn locus_diameter(surface: &SurfaceModel, p: ChartPoint, opts: &SweepOptions) -> Result<f64> {
    let o = SweepOptions { refine: false, ..*opts };
    Ok(sweep_R(surface, p, &o)?.diameter())
}

/// Minimize the locus diameter along the segment; report a collapse if it
/// drops below [`COLLAPSE_DIAMETER`].
pub fn umbilic_collapse(surface: &SurfaceModel, a: ChartPoint, b: ChartPoint, opts: &SweepOptions) -> Result<Option<UmbilicCollapse>> {
    let f = |l: f64| locus_diameter(surface, lerp(a, b, l), opts);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while hi - lo > 1e-7 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d)?;
        }
    }
    let (l, diameter) = if fc < fd { (c, fc) } else { (d, fd) };
    if diameter >= COLLAPSE_DIAMETER {
        return Ok(None);
    }
    let point = lerp(a, b, l);
    let xyz = surface.embed(point)?.xyz;
    let distance_to_umbilic = surface
        .umbilics()
        .iter()
        .map(|&u| distance(surface.embed_unchecked(u).xyz, xyz))
        .fold(f64::INFINITY, f64::min);
    Ok(Some(UmbilicCollapse {
        point,
        diameter,
        distance_to_umbilic,
    }))
}
