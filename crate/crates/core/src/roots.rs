//! Bracketed scalar root finding.

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// `fa` and `fb` are the known end values. Stops when the bracket is
/// narrower than `xtol`, when `|f| <= ftol`, or after `max_iter`
/// evaluations; returns the best point and its value.
pub fn brent<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<(f64, f64), E> {
    debug_assert!(fa * fb <= 0.0, "brent needs a sign change: f({a}) = {fa}, f({b}) = {fb}");
    if fa == 0.0 {
        return Ok((a, fa));
    }
    if fb == 0.0 {
        return Ok((b, fb));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= ftol {
            return Ok((b, fb));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Ok((b, fb))
}

/// Plain bisection; each iteration at least halves the bracket.
/// Returns the final bracket `(lo, hi)` with `pred(lo) != pred(hi)`.
pub fn bisect_predicate<E>(
    mut pred: impl FnMut(f64) -> Result<bool, E>,
    mut lo: f64,
    mut hi: f64,
    lo_value: bool,
    xtol: f64,
    widths: &mut Vec<f64>,
) -> Result<(f64, f64), E> {
    widths.push((hi - lo).abs());
    while (hi - lo).abs() > xtol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? == lo_value {
            lo = mid;
        } else {
            hi = mid;
        }
        widths.push((hi - lo).abs());
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cosine_root() {
        let mut evals = 0;
        let (x, fx) = brent(
            |x: f64| -> Result<f64, ()> {
                evals += 1;
                Ok(x.cos())
            },
            1.0,
            2.0,
            1f64.cos(),
            2f64.cos(),
            1e-14,
            0.0,
            100,
        )
        .unwrap();
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        assert!(fx.abs() < 1e-13);
        assert!(evals < 15);
    }

    #[test]
    fn bisection_halves_bracket() {
        let mut widths = Vec::new();
        let (lo, hi) =
            bisect_predicate(|x: f64| -> Result<bool, ()> { Ok(x < 0.3) }, 0.0, 1.0, true, 1e-6, &mut widths)
                .unwrap();
        assert!(lo < 0.3 && hi >= 0.3 && hi - lo <= 1e-6);
        for w in widths.windows(2) {
            assert!(w[1] <= 0.5 * w[0] + 1e-18);
        }
    }
}
