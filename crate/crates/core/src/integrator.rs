//! Dormand–Prince 5(4) step with a fourth-order continuous extension.
//!
//! This is only the single-step kernel and the step-size controller; the
//! driver that owns charts, events and stopping rules lives in [`crate::ode`].

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Result of one attempted step.
#[derive(Clone, Debug)]
pub struct Attempt<const N: usize> {
    pub y_new: [f64; N],
    /// Derivative at the new point (first stage of the next step).
    pub f_new: [f64; N],
    pub err: [f64; N],
    dense: [[f64; N]; 5],
}

/// Fourth-order interpolant over one accepted step.
#[derive(Clone, Debug)]
pub struct DenseStep<const N: usize> {
    pub s0: f64,
    pub h: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn s1(&self) -> f64 {
        self.s0 + self.h
    }

    /// Interpolated state at `s` (meant for `s` inside the step).
    pub fn eval(&self, s: f64) -> [f64; N] {
        let t = (s - self.s0) / self.h;
        let t1 = 1.0 - t;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = r1[i] + t * (r2[i] + t1 * (r3[i] + t * (r4[i] + t1 * r5[i])));
        }
        out
    }

    /// Interpolated value of a single component.
    pub fn eval_component(&self, s: f64, i: usize) -> f64 {
        let t = (s - self.s0) / self.h;
        let t1 = 1.0 - t;
        let c = &self.coeffs;
        c[0][i] + t * (c[1][i] + t1 * (c[2][i] + t * (c[3][i] + t1 * c[4][i])))
    }
}

impl<const N: usize> Attempt<N> {
    pub fn into_dense(self, s0: f64, h: f64) -> DenseStep<N> {
        DenseStep {
            s0,
            h,
            coeffs: self.dense,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand–Prince step from `(s, y)` with `f(s, y) = k1` already known.
pub fn dopri_step<const N: usize, E, F>(
    f: &mut F,
    s: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Result<Attempt<N>, E>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
{
    let k2 = f(s + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = f(s + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(s + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(
        s + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = f(
        s + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(s + h, &y_new)?;

    let mut err = [0.0; N];
    let mut dense = [[0.0; N]; 5];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let dy = y_new[i] - y[i];
        let bspl = h * k1[i] - dy;
        dense[0][i] = y[i];
        dense[1][i] = dy;
        dense[2][i] = bspl;
        dense[3][i] = dy - h * k7[i] - bspl;
        dense[4][i] =
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Ok(Attempt {
        y_new,
        f_new: k7,
        err,
        dense,
    })
}

/// Mixed absolute/relative RMS error norm over the components selected by `mask`.
pub fn error_norm<const N: usize>(
    y0: &[f64; N],
    y1: &[f64; N],
    err: &[f64; N],
    rtol: f64,
    atol: f64,
    mask: &[bool; N],
) -> f64 {
    let mut acc = 0.0;
    let mut n = 0usize;
    for i in 0..N {
        if !mask[i] {
            continue;
        }
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
        n += 1;
    }
    (acc / n.max(1) as f64).sqrt()
}

/// Standard step-size update for a fifth-order pair.
pub fn next_step_factor(err: f64) -> f64 {
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
}
