//! Geodesics with the scalar variational hierarchy.
//!
//! Along a unit-speed geodesic with parallel frame `{T, N}`, the normal
//! components of the first three `ψ`-derivatives of the exponential map obey
//!
//! ```text
//! ξ₁'' = -K ξ₁
//! ξ₂'' = -K ξ₂ - K_N ξ₁²
//! ξ₃'' = -K ξ₃ - K_NN ξ₁³ - 2K² ξ₁³ - 3K_N ξ₁ξ₂ + 3K_T ξ₁² ξ₁' + 6K ξ₁ ξ₁'²
//! ```
//!
//! and the tangential components, integrated only when requested, obey
//!
//! ```text
//! η₂'' = 4K ξ₁ξ₁' + K_T ξ₁²
//! η₃'' = 6K (ξ₁'ξ₂ + ξ₁ξ₂') + 3K_T ξ₁ξ₂ + 6K_N ξ₁²ξ₁' + K_TN ξ₁³
//! ```
//!
//! Initial data: `ξ₁ = 0, ξ₁' = 1`, `ξ₂ = ξ₂' = 0`, `ξ₃ = 0, ξ₃' = -1`,
//! `η₂ = 0, η₂' = -1`, `η₃ = 0, η₃' = -3ξ₂'(0)`. The `ξ₂'(0)` and `ξ₃'(0)`
//! values only add multiples of `ξ₁` and so do not change `ξ₂(R)`, `ξ₃(R)`.
//!
//! The direction angle `ψ` is measured from `e₁ = ∂/∂u2 / |∂/∂u2|` towards
//! `e₂ = rotate_to_normal(e₁)` at the base point, in the base point's chart.

use std::cell::Cell;

use crate::diffgeo::{local_geometry, ChartId, ChartPoint, LocalGeometry};
use crate::error::{Error, Result};
use crate::integrator::{dopri_step, error_norm, next_step_factor, DenseStep};
use crate::roots::brent;
use crate::surfaces::{needs_switch, transfer, SurfaceModel, SurfacePoint};

pub const DIM: usize = 14;

/// Events closer than this to the base point are ignored.
pub const EVENT_SKIP: f64 = 0.1;
/// Largest tolerated `|g(v, v) - 1|`.
pub const SPEED_DRIFT_LIMIT: f64 = 1e-6;

const U1: usize = 0;
const U2: usize = 1;
const V1: usize = 2;
const V2: usize = 3;
pub(crate) const XI1: usize = 4;
pub(crate) const DXI1: usize = 5;
pub(crate) const XI2: usize = 6;
const DXI2: usize = 7;
pub(crate) const XI3: usize = 8;
const DXI3: usize = 9;
const ETA2: usize = 10;
const DETA2: usize = 11;
const ETA3: usize = 12;
const DETA3: usize = 13;

/// Position, velocity and the variational stack at arclength `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicState {
    pub chart: ChartPoint,
    pub vel: [f64; 2],
    pub xi1: f64,
    pub dxi1: f64,
    pub xi2: f64,
    pub dxi2: f64,
    pub xi3: f64,
    pub dxi3: f64,
    /// `(η₂, η₂', η₃, η₃')` when tangential components are tracked.
    pub eta: Option<[f64; 4]>,
    pub s: f64,
}

impl GeodesicState {
    pub fn from_vector(chart: ChartId, y: &[f64; DIM], s: f64, tangential: bool) -> Self {
        GeodesicState {
            chart: ChartPoint::new(chart, y[U1], y[U2]),
            vel: [y[V1], y[V2]],
            xi1: y[XI1],
            dxi1: y[DXI1],
            xi2: y[XI2],
            dxi2: y[DXI2],
            xi3: y[XI3],
            dxi3: y[DXI3],
            eta: tangential.then(|| [y[ETA2], y[DETA2], y[ETA3], y[DETA3]]),
            s,
        }
    }

    pub fn to_vector(&self) -> [f64; DIM] {
        let eta = self.eta.unwrap_or([0.0; 4]);
        [
            self.chart.u1,
            self.chart.u2,
            self.vel[0],
            self.vel[1],
            self.xi1,
            self.dxi1,
            self.xi2,
            self.dxi2,
            self.xi3,
            self.dxi3,
            eta[0],
            eta[1],
            eta[2],
            eta[3],
        ]
    }
}

/// Derivative of every state component with respect to arclength.
#[derive(Clone, Debug, PartialEq)]
pub struct StateDerivative {
    pub dpos: [f64; 2],
    pub acc: [f64; 2],
    pub ddxi: [f64; 3],
    pub ddeta: Option<[f64; 2]>,
}

/// Initial values of the free derivatives `ξ₂'(0)` and `ξ₃'(0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialData {
    pub dxi2: f64,
    pub dxi3: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData {
            dxi2: 0.0,
            dxi3: -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopRule {
    /// Stop after the step containing the first zero of `ξ₁`.
    FirstConjugate,
    /// Integrate all the way to `s_max`.
    SMax,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub s_max: f64,
    pub stop: StopRule,
    /// Also integrate `η₂, η₃`.
    pub tangential: bool,
    pub initial: InitialData,
    pub max_steps: usize,
    pub initial_step: f64,
    /// Force one extra chart switch after the first step ending past this `s`.
    pub forced_switch_at: Option<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            rtol: 1e-10,
            atol: 1e-10,
            s_max: 2.0 * std::f64::consts::PI,
            stop: StopRule::FirstConjugate,
            tangential: false,
            initial: InitialData::default(),
            max_steps: 1_000_000,
            initial_step: 1e-2,
            forced_switch_at: None,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rtol = tol;
        self.atol = tol;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// Sign change of `ξ₁`.
    Xi1Zero,
    /// Sign change of `ξ₂`.
    Xi2Zero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub s: f64,
    /// Index of the accepted step containing the event.
    pub step: usize,
}

/// One accepted step: the chart it was taken in and its interpolant.
#[derive(Clone, Debug)]
pub struct TrajectoryStep {
    pub chart: ChartId,
    pub start: [f64; DIM],
    pub dense: DenseStep<DIM>,
}

/// An integrated geodesic with dense output and detected events.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub surface: SurfaceModel,
    pub options: IntegrateOptions,
    pub base: ChartPoint,
    pub psi: f64,
    pub steps: Vec<TrajectoryStep>,
    pub events: Vec<Event>,
    pub chart_switches: usize,
    pub max_speed_drift: f64,
}

/// Initial chart velocity for direction `psi` at `p`.
pub fn initial_velocity(geom: &LocalGeometry, psi: f64) -> [f64; 2] {
    let e1 = [0.0, 1.0 / geom.forms.g.sqrt()];
    let e2 = geom.normal_to(e1);
    let (s, c) = psi.sin_cos();
    [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1]]
}

/// Initial state vector for the geodesic leaving `p` in direction `psi`.
pub fn initial_state(surface: &SurfaceModel, p: ChartPoint, psi: f64, initial: InitialData) -> Result<[f64; DIM]> {
    let geom = local_geometry(surface, p)?;
    let v = initial_velocity(&geom, psi);
    let mut y = [0.0; DIM];
    y[U1] = p.u1;
    y[U2] = p.u2;
    y[V1] = v[0];
    y[V2] = v[1];
    y[DXI1] = 1.0;
    y[DXI2] = initial.dxi2;
    y[DXI3] = initial.dxi3;
    y[DETA2] = -1.0;
    y[DETA3] = -3.0 * initial.dxi2;
    Ok(y)
}

fn rhs_with_geometry(geom: &LocalGeometry, y: &[f64; DIM], tangential: bool) -> [f64; DIM] {
    let v = [y[V1], y[V2]];
    let speed = geom.forms.norm(v);
    let t = [v[0] / speed, v[1] / speed];
    let c = geom.sample(t);
    let acc = geom.christoffel_contract(v, v);
    let (x1, dx1, x2, dx2, x3) = (y[XI1], y[DXI1], y[XI2], y[DXI2], y[XI3]);
    let x1sq = x1 * x1;
    let x1cu = x1sq * x1;
    let mut out = [0.0; DIM];
    out[U1] = v[0];
    out[U2] = v[1];
    out[V1] = -acc[0];
    out[V2] = -acc[1];
    out[XI1] = dx1;
    out[DXI1] = -c.k * x1;
    out[XI2] = dx2;
    out[DXI2] = -c.k * x2 - c.k_n * x1sq;
    out[XI3] = y[DXI3];
    out[DXI3] = -c.k * x3 - c.k_nn * x1cu - 2.0 * c.k * c.k * x1cu - 3.0 * c.k_n * x1 * x2
        + 3.0 * c.k_t * x1sq * dx1
        + 6.0 * c.k * x1 * dx1 * dx1;
    if tangential {
        out[ETA2] = y[DETA2];
        out[DETA2] = 4.0 * c.k * x1 * dx1 + c.k_t * x1sq;
        out[ETA3] = y[DETA3];
        out[DETA3] = 6.0 * c.k * (dx1 * x2 + x1 * dx2)
            + 3.0 * c.k_t * x1 * x2
            + 6.0 * c.k_n * x1sq * dx1
            + c.k_tn * x1cu;
    }
    out
}

/// Right-hand side on a raw state vector; also returns `g(v, v)`.
pub fn rhs_vector(surface: &SurfaceModel, chart: ChartId, y: &[f64; DIM], tangential: bool) -> Result<([f64; DIM], f64)> {
    let geom = local_geometry(surface, ChartPoint::new(chart, y[U1], y[U2]))?;
    let speed2 = geom.forms.inner([y[V1], y[V2]], [y[V1], y[V2]]);
    Ok((rhs_with_geometry(&geom, y, tangential), speed2))
}

/// `d(state)/ds` at `state`.
pub fn rhs(state: &GeodesicState, surface: &SurfaceModel) -> Result<StateDerivative> {
    let tangential = state.eta.is_some();
    let (d, _) = rhs_vector(surface, state.chart.chart, &state.to_vector(), tangential)?;
    Ok(StateDerivative {
        dpos: [d[U1], d[U2]],
        acc: [d[V1], d[V2]],
        ddxi: [d[DXI1], d[DXI2], d[DXI3]],
        ddeta: tangential.then(|| [d[DETA2], d[DETA3]]),
    })
}

fn error_mask(tangential: bool) -> [bool; DIM] {
    let mut mask = [true; DIM];
    if !tangential {
        for m in &mut mask[ETA2..] {
            *m = false;
        }
    }
    mask
}

/// Integrate the geodesic from `p` in direction `psi`.
pub fn integrate(surface: &SurfaceModel, p: ChartPoint, psi: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    let y0 = initial_state(surface, p, psi, opts.initial)?;
    integrate_from(surface, p.chart, y0, p, psi, opts)
}

fn integrate_from(
    surface: &SurfaceModel,
    chart0: ChartId,
    y0: [f64; DIM],
    base: ChartPoint,
    psi: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let mask = error_mask(opts.tangential);
    let mut chart = chart0;
    let mut y = y0;
    let mut s = 0.0;
    let last_speed2 = Cell::new(1.0);
    let (mut k, sp) = rhs_vector(surface, chart, &y, opts.tangential)?;
    last_speed2.set(sp);
    let mut h = opts.initial_step.min(opts.s_max);
    let mut traj = Trajectory {
        surface: surface.clone(),
        options: *opts,
        base,
        psi,
        steps: Vec::new(),
        events: Vec::new(),
        chart_switches: 0,
        max_speed_drift: (sp - 1.0).abs(),
    };
    let mut forced_pending = opts.forced_switch_at;
    let mut attempts = 0usize;
    let min_step = 1e-12;

    while s < opts.s_max {
        attempts += 1;
        if attempts > opts.max_steps {
            return Err(Error::MaxSteps(opts.max_steps));
        }
        let h_try = h.min(opts.s_max - s);
        let mut f = |_s: f64, yy: &[f64; DIM]| -> Result<[f64; DIM]> {
            let (d, sp) = rhs_vector(surface, chart, yy, opts.tangential)?;
            last_speed2.set(sp);
            Ok(d)
        };
        let attempt = match dopri_step(&mut f, s, &y, &k, h_try) {
            Ok(a) => a,
            Err(Error::Domain { .. }) => {
                // a stage crossed the chart pole; shorten the step
                h = 0.5 * h_try;
                if h < min_step {
                    return Err(Error::StepUnderflow { s, h });
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let err = error_norm(&y, &attempt.y_new, &attempt.err, opts.rtol, opts.atol, &mask);
        if !(err <= 1.0) {
            h = h_try * next_step_factor(err).min(1.0);
            if !err.is_finite() {
                h = 0.25 * h_try;
            }
            if h < min_step {
                return Err(Error::StepUnderflow { s, h });
            }
            continue;
        }

        let drift = (last_speed2.get() - 1.0).abs();
        traj.max_speed_drift = traj.max_speed_drift.max(drift);
        let s_new = s + h_try;
        if drift > SPEED_DRIFT_LIMIT {
            return Err(Error::SpeedDrift { s: s_new, drift });
        }

        let step_index = traj.steps.len();
        let y_old = y;
        let y_new = attempt.y_new;
        let f_new = attempt.f_new;
        let dense = attempt.into_dense(s, h_try);
        let found_xi1 = detect_events(&mut traj.events, &dense, &y_old, &y_new, step_index);
        traj.steps.push(TrajectoryStep {
            chart,
            start: y_old,
            dense,
        });

        s = s_new;
        y = y_new;
        k = f_new;

        let force = match forced_pending {
            Some(at) if s >= at => {
                forced_pending = None;
                true
            }
            _ => false,
        };
        if force || needs_switch(ChartPoint::new(chart, y[U1], y[U2])) {
            let target = chart.other();
            let (q, v) = transfer(ChartPoint::new(chart, y[U1], y[U2]), [y[V1], y[V2]], target);
            chart = target;
            y[U1] = q.u1;
            y[U2] = q.u2;
            y[V1] = v[0];
            y[V2] = v[1];
            let (kk, _) = rhs_vector(surface, chart, &y, opts.tangential)?;
            k = kk;
            traj.chart_switches += 1;
        }

        if found_xi1 && opts.stop == StopRule::FirstConjugate {
            break;
        }
        h = h_try * next_step_factor(err);
    }
    Ok(traj)
}

fn detect_events(
    events: &mut Vec<Event>,
    dense: &DenseStep<DIM>,
    y0: &[f64; DIM],
    y1: &[f64; DIM],
    step: usize,
) -> bool {
    let s0 = dense.s0;
    let s1 = dense.s1();
    if s1 <= EVENT_SKIP {
        return false;
    }
    let a = s0.max(EVENT_SKIP);
    let mut found_xi1 = false;
    for (kind, idx) in [(EventKind::Xi1Zero, XI1), (EventKind::Xi2Zero, XI2)] {
        let fa = if a == s0 { y0[idx] } else { dense.eval_component(a, idx) };
        let fb = y1[idx];
        // a zero exactly at the left end belongs to the previous step
        if fa == 0.0 || fa * fb > 0.0 {
            continue;
        }
        let (root, _) = brent(
            |s| -> Result<f64, ()> { Ok(dense.eval_component(s, idx)) },
            a,
            s1,
            fa,
            fb,
            1e-15,
            0.0,
            100,
        )
        .unwrap_or((0.5 * (a + s1), 0.0));
        if kind == EventKind::Xi1Zero {
            found_xi1 = true;
        }
        events.push(Event { kind, s: root, step });
    }
    found_xi1
}

/// State at the first conjugate point, refined on the trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugatePoint {
    pub r: f64,
    pub state: GeodesicState,
    pub point: SurfacePoint,
}

impl Trajectory {
    pub fn s_end(&self) -> f64 {
        self.steps.last().map_or(0.0, |st| st.dense.s1())
    }

    fn step_index(&self, s: f64) -> usize {
        match self
            .steps
            .binary_search_by(|st| st.dense.s0.partial_cmp(&s).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// Dense-output state at arclength `s`.
    pub fn state_at(&self, s: f64) -> GeodesicState {
        let i = self.step_index(s);
        let st = &self.steps[i];
        GeodesicState::from_vector(st.chart, &st.dense.eval(s), s, self.options.tangential)
    }

    /// All sign changes of `kind` beyond the skipped initial segment.
    pub fn zeros(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Take one direct integrator step from the start of step `i` to `s`.
    fn direct_state(&self, i: usize, s: f64) -> Result<[f64; DIM]> {
        let st = &self.steps[i];
        let h = s - st.dense.s0;
        if h == 0.0 {
            return Ok(st.start);
        }
        let tangential = self.options.tangential;
        let mut f = |_s: f64, yy: &[f64; DIM]| -> Result<[f64; DIM]> {
            Ok(rhs_vector(&self.surface, st.chart, yy, tangential)?.0)
        };
        let (k1, _) = rhs_vector(&self.surface, st.chart, &st.start, tangential)?;
        Ok(dopri_step(&mut f, st.dense.s0, &st.start, &k1, h)?.y_new)
    }

    /// Locate `ξ₁(R) = 0` and polish it with direct steps.
    pub fn first_conjugate(&self) -> Result<ConjugatePoint> {
        let ev = self
            .zeros(EventKind::Xi1Zero)
            .next()
            .copied()
            .ok_or(Error::NoConjugatePoint {
                s_max: self.options.s_max,
            })?;
        let st = &self.steps[ev.step];
        let mut r = ev.s;
        let mut y = st.dense.eval(r);
        // Newton on ξ₁ using single steps from the start of the bracketing step
        for _ in 0..4 {
            match self.direct_state(ev.step, r) {
                Ok(yy) => {
                    y = yy;
                    if y[XI1].abs() < 1e-14 || y[DXI1] == 0.0 {
                        break;
                    }
                    r -= y[XI1] / y[DXI1];
                }
                Err(_) => break,
            }
        }
        if let Ok(yy) = self.direct_state(ev.step, r) {
            y = yy;
        }
        if y[XI1].abs() > 1e-11 {
            return Err(Error::Geometry(format!(
                "conjugate point refinement stalled: |xi1(R)| = {:e}",
                y[XI1].abs()
            )));
        }
        let state = GeodesicState::from_vector(st.chart, &y, r, self.options.tangential);
        let point = self.surface.embed_unchecked(state.chart);
        Ok(ConjugatePoint { r, state, point })
    }
}

/// Integrate to the first conjugate point and refine it.
pub fn first_conjugate(surface: &SurfaceModel, p: ChartPoint, psi: f64, opts: &IntegrateOptions) -> Result<ConjugatePoint> {
    let mut o = *opts;
    o.stop = StopRule::FirstConjugate;
    integrate(surface, p, psi, &o)?.first_conjugate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn sphere_rhs_reduces() {
        let s = SurfaceModel::sphere();
        let state = GeodesicState {
            chart: ChartPoint::standard(1.0, 0.5),
            vel: [1.0, 0.0],
            xi1: 0.3,
            dxi1: 0.7,
            xi2: -0.2,
            dxi2: 0.1,
            xi3: 0.4,
            dxi3: 0.0,
            eta: None,
            s: 0.0,
        };
        let d = rhs(&state, &s).unwrap();
        assert!((d.ddxi[0] + 0.3).abs() < 1e-12);
        assert!((d.ddxi[1] - 0.2).abs() < 1e-12);
        let expected = -0.4 - 2.0 * 0.3f64.powi(3) + 6.0 * 0.3 * 0.49;
        assert!((d.ddxi[2] - expected).abs() < 1e-12);
    }

    #[test]
    fn sources_vanish_with_xi1() {
        let s = SurfaceModel::sectoral_harmonic(3, 0.1).unwrap();
        let p = ChartPoint::standard(1.1, 0.4);
        let geom = local_geometry(&s, p).unwrap();
        let v = initial_velocity(&geom, 0.8);
        let state = GeodesicState {
            chart: p,
            vel: v,
            xi1: 0.0,
            dxi1: 0.9,
            xi2: 0.25,
            dxi2: 0.0,
            xi3: 0.0,
            dxi3: 0.0,
            eta: None,
            s: 0.0,
        };
        let d = rhs(&state, &s).unwrap();
        assert!((d.ddxi[1] + geom.gauss * 0.25).abs() < 1e-12);
    }

    #[test]
    fn sphere_xi1_is_sine() {
        let s = SurfaceModel::sphere();
        let p = ChartPoint::standard(1.2, 0.3);
        let opts = IntegrateOptions {
            stop: StopRule::SMax,
            s_max: 4.0,
            ..Default::default()
        };
        let traj = integrate(&s, p, 0.7, &opts).unwrap();
        let mut worst: f64 = 0.0;
        for st in &traj.steps {
            let x = st.start[XI1];
            worst = worst.max((x - st.dense.s0.sin()).abs());
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn sphere_first_conjugate_is_pi() {
        let s = SurfaceModel::sphere();
        for psi in [0.0, 1.0, 2.5, 4.0] {
            let c = first_conjugate(&s, ChartPoint::standard(FRAC_PI_2, 0.0), psi, &IntegrateOptions::default()).unwrap();
            assert!((c.r - PI).abs() < 1e-8, "{}", c.r);
            assert!((c.state.dxi1 + 1.0).abs() < 1e-8);
            assert!(c.state.xi2.abs() < 1e-10);
        }
    }

    #[test]
    fn missing_conjugate_point_is_reported() {
        let s = SurfaceModel::sphere();
        let opts = IntegrateOptions {
            s_max: 2.0,
            ..Default::default()
        };
        let err = first_conjugate(&s, ChartPoint::standard(1.0, 0.0), 0.3, &opts).unwrap_err();
        assert!(err.is_missing_conjugate());
    }
}
