//! Conjugate loci, their cusps and the `ξ₂ = 0` contour.
//!
//! The first conjugate distance `R(ψ)` is sampled on a uniform `ψ` grid.
//! Cusps are the sign changes of `ψ ↦ ξ₂(R(ψ))`, refined by re-integration;
//! finite differences of `R` are used only as a cross-check. A cusp is then
//! classified by the size of `ξ₃(R)` there.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::diffgeo::ChartPoint;
use crate::error::{Error, Result};
use crate::jet::cross3;
use crate::ode::{first_conjugate, integrate, EventKind, IntegrateOptions, StopRule, EVENT_SKIP};
use crate::roots::brent;
use crate::surfaces::{distance, SurfaceModel, SurfacePoint};

/// Tuning for ψ-sweeps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub n_psi: usize,
    pub integrate: IntegrateOptions,
    /// Cusp directions are localized to this tolerance.
    pub psi_tol: f64,
    /// Refine and classify cusps. Counting alone only needs the grid.
    pub refine: bool,
    /// Step of the 5-point stencils for `R'` and `R''`.
    pub fd_step: f64,
    /// Relative threshold separating A1 from higher singularities.
    pub class_tol: f64,
    /// Grid minima of `|ξ₂(R)|` below this fraction of the maximum are
    /// searched for hidden zero pairs.
    pub tangency_fraction: f64,
    /// A tangency whose extremum lies below this fraction of the maximum is
    /// reported as a bifurcation candidate.
    pub candidate_fraction: f64,
    pub parallel: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            n_psi: 256,
            integrate: IntegrateOptions::default(),
            psi_tol: 1e-8,
            refine: true,
            fd_step: 1e-3,
            class_tol: 1e-5,
            tangency_fraction: 0.25,
            candidate_fraction: 1e-3,
            parallel: true,
        }
    }
}

/// Data at the first conjugate point along one direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConjugateRecord {
    pub psi: f64,
    pub r: f64,
    pub dxi1_at_r: f64,
    pub xi2_at_r: f64,
    pub xi3_at_r: f64,
    #[serde(skip)]
    pub point: SurfacePoint,
    /// Projection onto the tangent plane at the antipode of the base point.
    pub tangent_plane_uv: [f64; 2],
    /// `(R cos ψ, R sin ψ)` in the tangent plane at the base point.
    pub polar_uv: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AClass {
    A1,
    A2,
    A3,
}

impl AClass {
    pub fn index(self) -> u32 {
        match self {
            AClass::A1 => 1,
            AClass::A2 => 2,
            AClass::A3 => 3,
        }
    }

    /// Leading orders `(n, m)` of the locus along `T` and `N`.
    pub fn local_type(self) -> (u32, u32) {
        let k = self.index();
        (k + 1, k + 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    TowardP,
    AwayFromP,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CuspRecord {
    pub psi_star: f64,
    pub r_star: f64,
    pub a_class: AClass,
    pub local_type: (u32, u32),
    pub orientation: Orientation,
    /// The cusp lies on a symmetry direction of the base point.
    pub symmetric: bool,
    pub xi3_value: f64,
    /// Largest `|ξ₃(R)|` over the curve, the scale for `class_tol`.
    pub xi3_scale: f64,
    /// `|ξ₃|` is within tolerance of zero but the class could not be settled.
    pub near_bifurcation: bool,
    /// Finite-difference `R'(ψ*)` and `R''(ψ*)`.
    pub r_prime: f64,
    pub r_second: f64,
    /// `|R'(ψ*)|` is below `1e-4 · max |R'|`.
    pub prop1_consistent: bool,
    #[serde(skip)]
    pub point: SurfacePoint,
}

/// A zero of `ξ₂(R(ψ))` without a sign change: two cusps about to be
/// created or annihilated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BifurcationCandidate {
    pub psi: f64,
    pub xi2_value: f64,
    pub xi3_value: f64,
    pub symmetric: bool,
    pub a_class: AClass,
}

/// Orthonormal frame of the tangent plane at the antipode of the base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentPlane {
    pub origin: [f64; 3],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub normal: [f64; 3],
}

impl TangentPlane {
    /// First axis along `∂/∂u2`, second completing a right-handed pair with
    /// the outward normal.
    pub fn at(surface: &SurfaceModel, p: ChartPoint) -> Result<TangentPlane> {
        let x = crate::diffgeo::jet_eval_embedding(surface, p)?;
        let xu = [x[0].derivative(0), x[1].derivative(0), x[2].derivative(0)];
        let xv = [x[0].derivative(1), x[1].derivative(1), x[2].derivative(1)];
        let n = cross3(&xu, &xv);
        let unit = |v: [f64; 3]| {
            let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / l, v[1] / l, v[2] / l]
        };
        let normal = unit([n[0].value(), n[1].value(), n[2].value()]);
        let e1 = unit([xv[0].value(), xv[1].value(), xv[2].value()]);
        let e2 = [
            normal[1] * e1[2] - normal[2] * e1[1],
            normal[2] * e1[0] - normal[0] * e1[2],
            normal[0] * e1[1] - normal[1] * e1[0],
        ];
        Ok(TangentPlane {
            origin: [x[0].value(), x[1].value(), x[2].value()],
            e1,
            e2,
            normal,
        })
    }

    pub fn project(&self, xyz: [f64; 3]) -> [f64; 2] {
        let d = [xyz[0] - self.origin[0], xyz[1] - self.origin[1], xyz[2] - self.origin[2]];
        [
            d[0] * self.e1[0] + d[1] * self.e1[1] + d[2] * self.e1[2],
            d[0] * self.e2[0] + d[1] * self.e2[1] + d[2] * self.e2[2],
        ]
    }
}

/// The sampled conjugate locus of one base point.
#[derive(Clone, Debug)]
pub struct LocusCurve {
    pub surface: SurfaceModel,
    pub options: SweepOptions,
    pub base_chart: ChartPoint,
    pub base: SurfacePoint,
    pub plane: TangentPlane,
    pub psi_grid: Vec<f64>,
    /// `None` where no conjugate point was found before `s_max`.
    pub records: Vec<Option<ConjugateRecord>>,
    pub cusps: Vec<CuspRecord>,
    pub candidates: Vec<BifurcationCandidate>,
}

impl LocusCurve {
    pub fn is_partial(&self) -> bool {
        self.records.iter().any(Option::is_none)
    }

    pub fn cusp_count(&self) -> usize {
        self.cusps.len()
    }

    pub fn complete_records(&self) -> impl Iterator<Item = &ConjugateRecord> {
        self.records.iter().flatten()
    }

    /// Largest embedding distance between sampled conjugate points.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<[f64; 3]> = self.complete_records().map(|r| r.point.xyz).collect();
        crate::surfaces::diameter(&pts)
    }

    pub fn r_range(&self) -> (f64, f64) {
        self.complete_records()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.r), hi.max(r.r)))
    }

    /// Largest `|R'|` from centered differences on the grid.
    pub fn max_r_prime(&self) -> f64 {
        let n = self.records.len();
        let h = TAU / n as f64;
        let mut best: f64 = 0.0;
        for k in 0..n {
            if let (Some(a), Some(b)) = (&self.records[(k + n - 1) % n], &self.records[(k + 1) % n]) {
                best = best.max(((b.r - a.r) / (2.0 * h)).abs());
            }
        }
        best
    }

    pub fn xi3_scale(&self) -> f64 {
        self.complete_records().fold(0.0, |m, r| m.max(r.xi3_at_r.abs()))
    }

    /// Conjugate record for an arbitrary direction, using the sweep's options.
    pub fn evaluate(&self, psi: f64) -> Result<ConjugateRecord> {
        conjugate_record(&self.surface, self.base_chart, &self.plane, psi, &self.options.integrate)
    }

    fn symmetric_directions(&self) -> Vec<f64> {
        self.surface.symmetry_directions(self.base_chart)
    }
}

/// First conjugate data along direction `psi`.
pub fn conjugate_record(
    surface: &SurfaceModel,
    p: ChartPoint,
    plane: &TangentPlane,
    psi: f64,
    opts: &IntegrateOptions,
) -> Result<ConjugateRecord> {
    let c = first_conjugate(surface, p, psi, opts)?;
    Ok(ConjugateRecord {
        psi,
        r: c.r,
        dxi1_at_r: c.state.dxi1,
        xi2_at_r: c.state.xi2,
        xi3_at_r: c.state.xi3,
        point: c.point,
        tangent_plane_uv: plane.project(c.point.xyz),
        polar_uv: [c.r * psi.cos(), c.r * psi.sin()],
    })
}

pub(crate) fn par_map<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

fn optional(r: Result<ConjugateRecord>) -> Result<Option<ConjugateRecord>> {
    match r {
        Ok(rec) => Ok(Some(rec)),
        Err(e) if e.is_missing_conjugate() => Ok(None),
        Err(e) => Err(e),
    }
}

/// Sample `R(ψ)` on `n_psi` directions and find (and optionally classify) cusps.
#[allow(non_snake_case)]
pub fn sweep_R(surface: &SurfaceModel, p: ChartPoint, opts: &SweepOptions) -> Result<LocusCurve> {
    if opts.n_psi < 64 {
        return Err(Error::Precondition(format!("n_psi must be at least 64, got {}", opts.n_psi)));
    }
    let base = surface.embed(p)?;
    let plane = TangentPlane::at(surface, surface.antipode(p))?;
    let n = opts.n_psi;
    let psi_grid: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let records = par_map(n, opts.parallel, |k| {
        optional(conjugate_record(surface, p, &plane, psi_grid[k], &opts.integrate))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut curve = LocusCurve {
        surface: surface.clone(),
        options: *opts,
        base_chart: p,
        base,
        plane,
        psi_grid,
        records,
        cusps: Vec::new(),
        candidates: Vec::new(),
    };
    let (cusps, candidates) = detect_cusps(&curve)?;
    curve.cusps = cusps;
    curve.candidates = candidates;
    Ok(curve)
}

fn same_direction(a: f64, b: f64, tol: f64) -> bool {
    let d = (a - b).rem_euclid(TAU);
    d < tol || TAU - d < tol
}

// A cusp found off the grid this close to a symmetry direction is taken to
// lie on it.
const SYMMETRIC_PSI_TOL: f64 = 1e-7;

enum Bracket {
    Cusp {
        lo: (f64, f64),
        hi: (f64, f64),
        sym_lo: bool,
        sym_hi: bool,
    },
    Hidden { lo: f64, hi: f64, sign: f64 },
}

/// Cusps at sign changes of `ξ₂(R(ψ))`, plus tangency candidates.
pub fn detect_cusps(curve: &LocusCurve) -> Result<(Vec<CuspRecord>, Vec<BifurcationCandidate>)> {
    let opts = &curve.options;
    let n = curve.records.len();
    let sym = curve.symmetric_directions();
    let vals: Vec<Option<f64>> = curve.records.iter().map(|r| r.map(|r| r.xi2_at_r)).collect();
    let max_abs = vals.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    // ξ₂(R) at the noise level everywhere: R is constant and there are no cusps
    if max_abs < XI2_DEGENERATE.max(100.0 * opts.integrate.rtol) {
        return Ok((Vec::new(), Vec::new()));
    }
    // On a symmetry direction ξ₂(R) vanishes identically and its ψ-slope is
    // ξ₃(R), which gives the sign just to either side.
    let on_sym: Vec<bool> = curve
        .psi_grid
        .iter()
        .map(|&psi| sym.iter().any(|&d| same_direction(d, psi, 1e-12)))
        .collect();
    let side = |k: usize, right: bool| -> Option<f64> {
        let rec = curve.records[k]?;
        Some(if !on_sym[k] {
            rec.xi2_at_r
        } else if right {
            rec.xi3_at_r
        } else {
            -rec.xi3_at_r
        })
    };
    let mut found: Vec<(f64, bool)> = Vec::new();
    let mut brackets = Vec::new();
    for k in 0..n {
        let j = (k + 1) % n;
        if on_sym[k] && vals[k].is_some() {
            found.push((curve.psi_grid[k], true));
        }
        let (Some(a), Some(b)) = (side(k, true), side(j, false)) else { continue };
        let psi_a = curve.psi_grid[k];
        let psi_b = if j == 0 { TAU } else { curve.psi_grid[j] };
        if a * b < 0.0 || (b == 0.0 && a != 0.0 && !on_sym[j]) {
            brackets.push(Bracket::Cusp {
                lo: (psi_a, a),
                hi: (psi_b, b),
                sym_lo: on_sym[k],
                sym_hi: on_sym[j],
            });
        }
        let i = (k + n - 1) % n;
        if on_sym[k] {
            continue;
        }
        if let (Some(prev), Some(cur), Some(next)) = (side(i, true), vals[k], side(j, false)) {
            let interior_min = cur.abs() < prev.abs() && cur.abs() < next.abs();
            let no_change = prev * cur > 0.0 && cur * next > 0.0;
            if interior_min && no_change && cur.abs() < opts.tangency_fraction * max_abs {
                let lo = curve.psi_grid[k] - TAU / n as f64;
                brackets.push(Bracket::Hidden {
                    lo,
                    hi: lo + 2.0 * TAU / n as f64,
                    sign: cur.signum(),
                });
            }
        }
    }

    let scale = curve.xi3_scale();
    let max_rp = curve.max_r_prime();
    let eval_xi2 = |psi: f64| -> Result<f64> { Ok(curve.evaluate(psi)?.xi2_at_r) };

    let mut candidates = Vec::new();
    for b in brackets {
        match b {
            Bracket::Cusp { lo, hi, sym_lo, sym_hi } => {
                // divide out the known zeros on symmetric endpoints
                let g = |psi: f64| -> Result<f64> {
                    let mut v = eval_xi2(psi)?;
                    if sym_lo {
                        v /= psi - lo.0;
                    }
                    if sym_hi {
                        v /= hi.0 - psi;
                    }
                    Ok(v)
                };
                let psi = if opts.refine {
                    brent(g, lo.0, hi.0, lo.1, hi.1, opts.psi_tol, 0.0, 200)?.0
                } else {
                    lo.0 - lo.1 * (hi.0 - lo.0) / (hi.1 - lo.1)
                };
                found.push((psi, false));
            }
            Bracket::Hidden { lo, hi, sign } => {
                let (psi_min, value) = golden_min(|x| Ok(sign * eval_xi2(x)?), lo, hi, 1e-7)?;
                let value = sign * value;
                if value * sign < 0.0 {
                    let f_lo = eval_xi2(lo)?;
                    let f_hi = eval_xi2(hi)?;
                    for (a, fa, c, fc) in [(lo, f_lo, psi_min, value), (psi_min, value, hi, f_hi)] {
                        let psi = if opts.refine {
                            brent(eval_xi2, a, c, fa, fc, opts.psi_tol, 0.0, 200)?.0
                        } else {
                            a - fa * (c - a) / (fc - fa)
                        };
                        found.push((psi, false));
                    }
                } else if value.abs() < opts.candidate_fraction * max_abs {
                    let rec = curve.evaluate(psi_min)?;
                    let symmetric = sym.iter().any(|&d| same_direction(d, psi_min, SYMMETRIC_PSI_TOL));
                    candidates.push(BifurcationCandidate {
                        psi: psi_min.rem_euclid(TAU),
                        xi2_value: value,
                        xi3_value: rec.xi3_at_r,
                        symmetric,
                        a_class: if symmetric { AClass::A3 } else { AClass::A2 },
                    });
                }
            }
        }
    }

    found.sort_by(|a, b| a.0.rem_euclid(TAU).total_cmp(&b.0.rem_euclid(TAU)));
    let mut cusps = Vec::with_capacity(found.len());
    for (psi, on_grid_symmetry) in found {
        let psi = psi.rem_euclid(TAU);
        let rec = if opts.refine {
            curve.evaluate(psi)?
        } else {
            interpolate_record(curve, psi)
        };
        let symmetric = on_grid_symmetry || sym.iter().any(|&d| same_direction(d, psi, SYMMETRIC_PSI_TOL));
        let mut cusp = CuspRecord {
            psi_star: psi,
            r_star: rec.r,
            a_class: AClass::A1,
            local_type: AClass::A1.local_type(),
            orientation: Orientation::Undetermined,
            symmetric,
            xi3_value: rec.xi3_at_r,
            xi3_scale: scale,
            near_bifurcation: false,
            r_prime: f64::NAN,
            r_second: f64::NAN,
            prop1_consistent: true,
            point: rec.point,
        };
        if opts.refine {
            cusp = classify_cusp(curve, cusp, max_rp)?;
        }
        cusps.push(cusp);
    }
    Ok((cusps, candidates))
}

fn interpolate_record(curve: &LocusCurve, psi: f64) -> ConjugateRecord {
    let n = curve.records.len();
    let h = TAU / n as f64;
    let k = ((psi / h).floor() as usize) % n;
    let pick = curve.records[k].or(curve.records[(k + 1) % n]);
    let mut rec = pick.expect("cusp bracket has records");
    rec.psi = psi;
    rec
}

/// Minimize `f` on `[a, b]` by golden-section search.
fn golden_min(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
        if fc.min(fd) < 0.0 {
            break;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Assign `A_k`, local type and orientation to a localized cusp.
pub fn classify_cusp(curve: &LocusCurve, mut cusp: CuspRecord, max_r_prime: f64) -> Result<CuspRecord> {
    let h = curve.options.fd_step;
    let psi = cusp.psi_star;
    let stencil: Vec<ConjugateRecord> = [-2.0, -1.0, 1.0, 2.0]
        .iter()
        .map(|&m| curve.evaluate(psi + m * h))
        .collect::<Result<_>>()?;
    let r0 = cusp.r_star;
    let [rm2, rm1, rp1, rp2] = [stencil[0].r, stencil[1].r, stencil[2].r, stencil[3].r];
    cusp.r_prime = (rm2 - 8.0 * rm1 + 8.0 * rp1 - rp2) / (12.0 * h);
    cusp.r_second = (-rm2 + 16.0 * rm1 - 30.0 * r0 + 16.0 * rp1 - rp2) / (12.0 * h * h);
    cusp.prop1_consistent = cusp.r_prime.abs() < 1e-4 * max_r_prime.max(f64::MIN_POSITIVE);

    let tol = curve.options.class_tol * cusp.xi3_scale;
    let crossing = stencil[1].xi3_at_r * stencil[2].xi3_at_r < 0.0;
    let (class, near) = if cusp.xi3_value.abs() > tol {
        (AClass::A1, false)
    } else if cusp.symmetric {
        (AClass::A3, false)
    } else if crossing {
        (AClass::A2, false)
    } else {
        (AClass::A2, true)
    };
    cusp.a_class = class;
    cusp.local_type = class.local_type();
    cusp.near_bifurcation = near;
    cusp.orientation = if class == AClass::A1 {
        if cusp.r_second > 0.0 {
            Orientation::TowardP
        } else {
            Orientation::AwayFromP
        }
    } else {
        Orientation::Undetermined
    };
    Ok(cusp)
}

/// Which zero of `ξ₂` defines `ρ(ψ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoBranch {
    /// First zero beyond the skipped initial segment.
    First,
    /// Zero closest to the first conjugate distance.
    NearestToConjugate,
}

/// One sample of the `ξ₂ = 0` contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RhoSample {
    pub psi: f64,
    pub rho: Option<f64>,
    pub r: Option<f64>,
    pub xi1_at_rho: Option<f64>,
    pub xi2_at_r: Option<f64>,
    /// `ξ₂` vanishes identically along this geodesic.
    pub degenerate: bool,
    /// `dρ/dψ = -(ξ₃ + ξ₁ξ̇₁²)/ξ̇₂` at `s = ρ`.
    pub rho_prime: Option<f64>,
    /// `max(|ρ'|, |ξ₁(ρ)|)`, which vanishes where β is singular. On a
    /// symmetry direction it is taken on the branch of the contour that
    /// crosses the geodesic, where `ρ' = 0` by evenness.
    pub metric: Option<f64>,
    #[serde(skip)]
    pub beta: Option<[f64; 3]>,
}

#[derive(Clone, Debug)]
pub struct RhoContour {
    pub samples: Vec<RhoSample>,
    pub branch: RhoBranch,
    /// Refined crossings of the `R` and `ρ` contours.
    pub intersections: Vec<ContourIntersection>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContourIntersection {
    pub psi: f64,
    pub r: f64,
    pub rho: f64,
    /// The crossing is with the line `ψ = ψ*` on which `ξ₂ ≡ 0`.
    pub on_symmetry_line: bool,
    /// The β singularity metric at the crossing.
    pub beta_metric: Option<f64>,
}

impl RhoContour {
    pub fn is_partial(&self) -> bool {
        self.samples.iter().any(|s| s.rho.is_none())
    }
}

const XI2_DEGENERATE: f64 = 1e-9;

fn traj_step(traj: &crate::ode::Trajectory, s: f64) -> usize {
    traj.steps.partition_point(|st| st.dense.s0 <= s).saturating_sub(1)
}
const INTERSECTION_PSI_TOL: f64 = 1e-12;

fn rho_sample(surface: &SurfaceModel, p: ChartPoint, psi: f64, opts: &IntegrateOptions, branch: RhoBranch) -> Result<RhoSample> {
    let o = IntegrateOptions {
        stop: StopRule::SMax,
        ..*opts
    };
    let traj = integrate(surface, p, psi, &o)?;
    let peak = traj
        .steps
        .iter()
        .filter(|st| st.dense.s0 > EVENT_SKIP)
        .fold(0.0f64, |m, st| m.max(st.start[crate::ode::XI2].abs()));
    let r = traj.zeros(EventKind::Xi1Zero).next().map(|e| e.s);
    let mut sample = RhoSample {
        psi,
        rho: None,
        r,
        xi1_at_rho: None,
        xi2_at_r: r.map(|r| traj.state_at(r).xi2),
        degenerate: peak < XI2_DEGENERATE,
        rho_prime: None,
        metric: None,
        beta: None,
    };
    if sample.degenerate {
        // ξ₂ = (ψ - ψ_s) g with g = ∂ψξ₂ = ξ₃ + ξ₁ξ̇₁² on the line; the
        // crossing branch of the contour is the zero of g nearest R
        if let Some(r) = r {
            let g = |y: &[f64; crate::ode::DIM]| {
                y[crate::ode::XI3] + y[crate::ode::XI1] * y[crate::ode::DXI1].powi(2)
            };
            let mut best: Option<(f64, f64, f64, f64, f64)> = None;
            for st in &traj.steps {
                let (s0, s1) = (st.dense.s0, st.dense.s1());
                let (a, b) = (g(&st.start), g(&st.dense.eval(s1)));
                let dist = (0.5 * (s0 + s1) - r).abs();
                if s0 > EVENT_SKIP && a * b <= 0.0 && best.map_or(true, |bb| dist < (0.5 * (bb.0 + bb.1) - r).abs()) {
                    best = Some((s0, s1, a, b, dist));
                }
            }
            if let Some((s0, s1, a, b, _)) = best {
                let f = |s: f64| -> Result<f64> { Ok(g(&traj.steps[traj_step(&traj, s)].dense.eval(s))) };
                let (s, _) = brent(f, s0, s1, a, b, 1e-14, 0.0, 200)?;
                sample.metric = Some(traj.state_at(s).xi1.abs());
                sample.rho_prime = Some(0.0);
            }
        }
        return Ok(sample);
    }
    let zeros: Vec<f64> = traj.zeros(EventKind::Xi2Zero).map(|e| e.s).collect();
    sample.rho = match branch {
        RhoBranch::First => zeros.first().copied(),
        RhoBranch::NearestToConjugate => match r {
            Some(r) => zeros.iter().copied().min_by(|a, b| (a - r).abs().total_cmp(&(b - r).abs())),
            None => zeros.first().copied(),
        },
    };
    if let Some(s) = sample.rho {
        let st = traj.state_at(s);
        let rho_prime = -(st.xi3 + st.xi1 * st.dxi1 * st.dxi1) / st.dxi2;
        sample.rho_prime = Some(rho_prime);
        sample.metric = Some(rho_prime.abs().max(st.xi1.abs()));
        sample.xi1_at_rho = Some(st.xi1);
        sample.beta = Some(surface.embed_unchecked(st.chart).xyz);
    }
    Ok(sample)
}

/// Sample the `ξ₂ = 0` contour on a grid offset by half a cell, so exact
/// symmetry directions (where `ξ₂ ≡ 0`) are not sampled.
///
/// Intersections with the `R` contour are bracketed by sign changes of
/// `ξ₂(R)` on this grid and refined in `ψ`. A fold of the zero set can make
/// a crossing invisible to `R - ρ` alone, which is why the sign of `ξ₂(R)`
/// is used instead.
pub fn sweep_rho(surface: &SurfaceModel, p: ChartPoint, opts: &SweepOptions, branch: RhoBranch) -> Result<RhoContour> {
    let n = opts.n_psi;
    let grid: Vec<f64> = (0..n).map(|k| TAU * (k as f64 + 0.5) / n as f64).collect();
    let samples = par_map(n, opts.parallel, |k| rho_sample(surface, p, grid[k], &opts.integrate, branch))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    if samples.iter().all(|s| s.degenerate) {
        return Err(Error::ContourUndefined);
    }
    let plane = TangentPlane::at(surface, surface.antipode(p))?;
    let xi2_at_r = |psi: f64| -> Result<f64> { Ok(conjugate_record(surface, p, &plane, psi, &opts.integrate)?.xi2_at_r) };
    let h = TAU / n as f64;
    let max_abs = samples.iter().filter_map(|s| s.xi2_at_r).fold(0.0f64, |m, v| m.max(v.abs()));
    // zero branches can be steep in ψ, so refine well past psi_tol
    let refine = |lo: f64, hi: f64, a: f64, b: f64| brent(xi2_at_r, lo, hi, a, b, INTERSECTION_PSI_TOL, 0.0, 200);
    let sym = surface.symmetry_directions(p);
    // offset of a symmetry direction inside (psi, psi + h), if any
    let sym_in = |psi: f64| sym.iter().map(|&d| (d - psi).rem_euclid(TAU)).find(|&o| o > 0.0 && o < h);
    let mut found = Vec::new();
    for k in 0..n {
        let i = (k + n - 1) % n;
        let j = (k + 1) % n;
        let psi_k = samples[k].psi;
        let (Some(a), Some(b)) = (samples[k].xi2_at_r, samples[j].xi2_at_r) else { continue };
        if let Some(off) = sym_in(psi_k) {
            // ξ₂(R) is odd about the symmetry direction with slope ξ₃(R)
            // there; divide it out so crossings on either side show up
            let psi_s = psi_k + off;
            found.push(psi_s);
            let c = conjugate_record(surface, p, &plane, psi_s, &opts.integrate)?.xi3_at_r;
            let q = |x: f64| -> Result<f64> { Ok(xi2_at_r(x)? / (x - psi_s)) };
            let qa = a / (psi_k - psi_s);
            let qb = b / (psi_k + h - psi_s);
            if qa * c < 0.0 {
                found.push(brent(q, psi_k, psi_s, qa, c, INTERSECTION_PSI_TOL, 0.0, 200)?.0);
            }
            if c * qb < 0.0 {
                found.push(brent(q, psi_s, psi_k + h, c, qb, INTERSECTION_PSI_TOL, 0.0, 200)?.0);
            }
            continue;
        }
        if a * b <= 0.0 {
            found.push(refine(psi_k, psi_k + h, a, b)?.0);
            continue;
        }
        // two crossings inside one cell leave no sign change on the grid
        let Some(prev) = samples[i].xi2_at_r else { continue };
        let near_sym = sym_in(psi_k - h).is_some();
        if !near_sym && a.abs() < prev.abs() && a.abs() < b.abs() && prev * a > 0.0 && a.abs() < 0.25 * max_abs {
            let sign = a.signum();
            let (lo, hi) = (psi_k - h, psi_k + h);
            let (psi_min, v) = golden_min(|x| Ok(sign * xi2_at_r(x)?), lo, hi, 1e-9)?;
            if v < 0.0 {
                let v = sign * v;
                found.push(refine(lo, psi_min, prev, v)?.0);
                found.push(refine(psi_min, hi, v, b)?.0);
            }
        }
    }
    let mut intersections = Vec::new();
    for psi in found {
        let psi = psi.rem_euclid(TAU);
        let s = rho_sample(surface, p, psi, &opts.integrate, RhoBranch::NearestToConjugate)?;
        let Some(r) = s.r else { continue };
        intersections.push(ContourIntersection {
            psi,
            r,
            rho: s.rho.unwrap_or(r),
            on_symmetry_line: s.degenerate,
            beta_metric: s.metric,
        });
    }
    intersections.sort_by(|a, b| a.psi.total_cmp(&b.psi));
    Ok(RhoContour {
        samples,
        branch,
        intersections,
    })
}

/// The image of the `ρ` contour and its near-singular points.
#[derive(Clone, Debug, Serialize)]
pub struct BetaCurve {
    pub psi: Vec<f64>,
    #[serde(skip)]
    pub points: Vec<Option<[f64; 3]>>,
    /// `max(|ρ'|, |ξ₁(ρ)|)` per sample; small values flag a cusp of β.
    pub singularity_metric: Vec<Option<f64>>,
    pub min_metric: f64,
    pub psi_at_min_metric: f64,
    /// Cusps of the conjugate locus that β passes within the tolerance of.
    pub passages: Vec<usize>,
    pub loop_count: usize,
    pub passage_distances: Vec<f64>,
}

/// Distance below which β is taken to pass through a cusp of the locus.
pub const BETA_PASSAGE_TOL: f64 = 1e-3;

/// Map the `ρ` contour through the exponential map and count loops through
/// the cusps of `locus`.
pub fn beta_curve(surface: &SurfaceModel, p: ChartPoint, rho: &RhoContour, locus: &LocusCurve) -> Result<BetaCurve> {
    if rho.samples.iter().all(|s| s.rho.is_none()) {
        return Err(Error::ContourUndefined);
    }
    let metric: Vec<Option<f64>> = rho.samples.iter().map(|s| s.metric).collect();
    // β is sharpest where the contours cross, so include the refined crossings
    let (min_metric, psi_min) = rho
        .samples
        .iter()
        .map(|s| (s.metric, s.psi))
        .chain(rho.intersections.iter().map(|x| (x.beta_metric, x.psi)))
        .filter_map(|(m, psi)| m.map(|m| (m, psi)))
        .fold((f64::INFINITY, f64::NAN), |best, c| if c.0 < best.0 { c } else { best });

    let (mut min_metric, mut psi_min) = (min_metric, psi_min);
    // a touching pair of contours shows up only at the tangency candidates
    for c in &locus.candidates {
        let sample = rho_sample(surface, p, c.psi, &locus.options.integrate, rho.branch)?;
        if let Some(m) = sample.metric.filter(|&m| m < min_metric) {
            (min_metric, psi_min) = (m, c.psi);
        }
    }
    let mut passages = Vec::new();
    let mut passage_distances = Vec::new();
    for (i, cusp) in locus.cusps.iter().enumerate() {
        let sample = rho_sample(surface, p, cusp.psi_star, &locus.options.integrate, rho.branch)?;
        if let Some(m) = sample.metric.filter(|&m| m < min_metric) {
            (min_metric, psi_min) = (m, cusp.psi_star);
        }
        let d = match sample {
            RhoSample { beta: Some(b), .. } => distance(b, cusp.point.xyz),
            // on a symmetry line the whole geodesic belongs to the contour
            RhoSample { degenerate: true, .. } => 0.0,
            _ => f64::INFINITY,
        };
        passage_distances.push(d);
        if d < BETA_PASSAGE_TOL {
            passages.push(i);
        }
    }
    Ok(BetaCurve {
        psi: rho.samples.iter().map(|s| s.psi).collect(),
        points: rho.samples.iter().map(|s| s.beta).collect(),
        singularity_metric: metric,
        min_metric,
        psi_at_min_metric: psi_min,
        loop_count: passages.len(),
        passages,
        passage_distances,
    })
}

/// Project embedded points onto the tangent plane at the antipode of `base`.
pub fn project_tangent_plane(surface: &SurfaceModel, base: ChartPoint, points: &[[f64; 3]]) -> Result<Vec<[f64; 2]>> {
    let plane = TangentPlane::at(surface, surface.antipode(base))?;
    Ok(points.iter().map(|&x| plane.project(x)).collect())
}

/// Outward unit normal at `p`.
pub fn unit_normal(surface: &SurfaceModel, p: ChartPoint) -> Result<[f64; 3]> {
    Ok(TangentPlane::at(surface, p)?.normal)
}
