//! Truncated bivariate Taylor arithmetic.
//!
//! A [`Jet2`] carries a scalar function of two chart variables together with
//! all of its partial derivatives up to total order four. Coefficients are
//! stored as normalized Taylor coefficients `f_{ij} / (i! j!)`, ordered by
//! total degree and then by decreasing power of the first variable:
//!
//! ```text
//! (0,0) | (1,0) (0,1) | (2,0) (1,1) (0,2) | (3,0) ... (0,3) | (4,0) ... (0,4)
//! ```
//!
//! Every jet also records the total order up to which its entries are
//! meaningful. Differentiation lowers that order by one and arithmetic keeps
//! the minimum of its operands, so reading a coefficient that was never
//! computed is caught in debug builds.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Maximum total order carried by a jet.
pub const MAX_ORDER: usize = 4;
/// Number of stored coefficients, `(MAX_ORDER + 1)(MAX_ORDER + 2) / 2`.
pub const LEN: usize = (MAX_ORDER + 1) * (MAX_ORDER + 2) / 2;

const fn index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const fn exponents(k: usize) -> (usize, usize) {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= k {
        d += 1;
    }
    let j = k - d * (d + 1) / 2;
    (d - j, j)
}

// (lhs slot, rhs slot, result slot) for every product term of total degree
// <= MAX_ORDER, sorted by result degree. Reference for the unrolled product.
#[cfg(test)]
const N_TERMS: usize = 70;

#[cfg(test)]
const PRODUCT_TABLE: [(u8, u8, u8); N_TERMS] = {
    let mut table = [(0u8, 0u8, 0u8); N_TERMS];
    let mut n = 0;
    let mut deg = 0;
    while deg <= MAX_ORDER {
        let mut r = 0;
        while r < LEN {
            let (ri, rj) = exponents(r);
            if ri + rj == deg {
                let mut p = 0;
                while p < LEN {
                    let (pi, pj) = exponents(p);
                    if pi <= ri && pj <= rj {
                        let q = index(ri - pi, rj - pj);
                        table[n] = (p as u8, q as u8, r as u8);
                        n += 1;
                    }
                    p += 1;
                }
            }
            r += 1;
        }
        deg += 1;
    }
    table
};

// Number of product terms whose result degree is <= k.
#[cfg(test)]
const TERMS_UP_TO: [usize; MAX_ORDER + 1] = [1, 5, 15, 35, 70];

// For each variable: source slot and multiplier of every slot of the derivative.
const DERIVATIVE_TABLE: [([u8; LEN], [f64; LEN]); 2] = {
    let mut table = [([0u8; LEN], [0.0; LEN]); 2];
    let mut k = 0;
    while k < LEN {
        let (i, j) = exponents(k);
        if i + j < MAX_ORDER {
            table[0].0[k] = index(i + 1, j) as u8;
            table[0].1[k] = (i + 1) as f64;
            table[1].0[k] = index(i, j + 1) as u8;
            table[1].1[k] = (j + 1) as f64;
        }
        k += 1;
    }
    table
};

const FACTORIAL: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Truncated Taylor expansion of a scalar in two variables, order <= 4.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    coeffs: [f64; LEN],
    order: u8,
}

impl Jet2 {
    /// The jet of a constant function.
    pub fn constant(value: f64) -> Self {
        let mut coeffs = [0.0; LEN];
        coeffs[0] = value;
        Jet2 {
            coeffs,
            order: MAX_ORDER as u8,
        }
    }

    /// The jet of the coordinate function `u_var` (0 or 1) at `value`.
    pub fn variable(value: f64, var: usize) -> Self {
        assert!(var < 2, "Jet2 has two variables");
        let mut jet = Jet2::constant(value);
        jet.coeffs[index(1 - var, var)] = 1.0;
        jet
    }

    /// Build a jet from raw normalized Taylor coefficients.
    pub fn from_taylor(coeffs: [f64; LEN], order: usize) -> Self {
        assert!(order <= MAX_ORDER);
        let mut jet = Jet2 {
            coeffs,
            order: order as u8,
        };
        jet.truncate();
        jet
    }

    /// Total order up to which the coefficients are valid.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw normalized Taylor coefficients.
    pub fn taylor(&self) -> &[f64; LEN] {
        &self.coeffs
    }

    /// Partial derivative `∂^{i+j} f / ∂u1^i ∂u2^j`.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        debug_assert!(
            i + j <= self.order(),
            "requested derivative order {} beyond jet order {}",
            i + j,
            self.order
        );
        self.coeffs[index(i, j)] * FACTORIAL[i] * FACTORIAL[j]
    }

    /// Gradient `(∂f/∂u1, ∂f/∂u2)`.
    pub fn gradient(&self) -> [f64; 2] {
        [self.partial(1, 0), self.partial(0, 1)]
    }

    /// Matrix of second partials.
    pub fn hessian(&self) -> [[f64; 2]; 2] {
        let uv = self.partial(1, 1);
        [[self.partial(2, 0), uv], [uv, self.partial(0, 2)]]
    }

    /// Partial derivative with respect to variable `var`, as a jet of one
    /// lower order.
    pub fn derivative(&self, var: usize) -> Jet2 {
        assert!(var < 2);
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let mut out = [0.0; LEN];
        let (src, factor) = &DERIVATIVE_TABLE[var];
        let n = (self.order as usize) * (self.order as usize + 1) / 2;
        for k in 0..n {
            out[k] = factor[k] * self.coeffs[src[k] as usize];
        }
        Jet2 {
            coeffs: out,
            order: self.order - 1,
        }
    }

    fn truncate(&mut self) {
        let start = (self.order() + 1) * (self.order() + 2) / 2;
        for c in &mut self.coeffs[start..] {
            *c = 0.0;
        }
    }

    /// Compose with a univariate function given its scaled derivatives
    /// `f^(k)(a) / k!` at `a = self.value()`, k = 0..=order.
    pub fn compose(&self, scaled: &[f64; MAX_ORDER + 1]) -> Jet2 {
        let order = self.order();
        let mut h = *self;
        h.coeffs[0] = 0.0;
        let mut out = Jet2::constant(scaled[0]);
        out.order = self.order;
        let mut power = h;
        for &c in scaled.iter().take(order + 1).skip(1) {
            out += power * c;
            power = power * h;
        }
        out
    }

    /// Jet of `f(u_var)` from the scaled derivatives `f^(k)(a) / k!`; cheaper
    /// than composing with [`Jet2::variable`].
    pub fn univariate(scaled: &[f64; MAX_ORDER + 1], var: usize) -> Jet2 {
        assert!(var < 2, "Jet2 has two variables");
        let mut coeffs = [0.0; LEN];
        for (k, &c) in scaled.iter().enumerate() {
            coeffs[if var == 0 { index(k, 0) } else { index(0, k) }] = c;
        }
        Jet2 {
            coeffs,
            order: MAX_ORDER as u8,
        }
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s / 2.0, -c / 6.0, s / 24.0])
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c / 2.0, s / 6.0, c / 24.0])
    }

    pub fn sqrt(&self) -> Jet2 {
        let x = self.value();
        assert!(x > 0.0, "sqrt of a jet with non-positive value {x}");
        let r = x.sqrt();
        self.compose(&[
            r,
            0.5 / r,
            -0.125 / (r * x),
            0.0625 / (r * x * x),
            -0.0390625 / (r * x * x * x),
        ])
    }

    pub fn recip(&self) -> Jet2 {
        let x = self.value();
        assert!(x != 0.0, "reciprocal of a jet with zero value");
        let r = 1.0 / x;
        self.compose(&[r, -r * r, r * r * r, -r * r * r * r, r * r * r * r * r])
    }

    pub fn powi(&self, n: u32) -> Jet2 {
        let mut out = Jet2::constant(1.0);
        out.order = self.order;
        for _ in 0..n {
            out = out * *self;
        }
        out
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: Jet2) -> Jet2 {
        self += rhs;
        self
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, rhs: Jet2) {
        self.order = self.order.min(rhs.order);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
        self.truncate();
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: Jet2) -> Jet2 {
        self -= rhs;
        self
    }
}

impl SubAssign for Jet2 {
    fn sub_assign(&mut self, rhs: Jet2) {
        self.order = self.order.min(rhs.order);
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a -= b;
        }
        self.truncate();
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(mut self) -> Jet2 {
        for c in &mut self.coeffs {
            *c = -*c;
        }
        self
    }
}

// Unrolled form of PRODUCT_TABLE, grouped by result degree.
#[inline]
fn product(a: &[f64; LEN], b: &[f64; LEN], order: u8) -> [f64; LEN] {
    let mut o = [0.0; LEN];
    o[0] = a[0] * b[0];
    if order < 1 {
        return o;
    }
    o[1] = a[0] * b[1] + a[1] * b[0];
    o[2] = a[0] * b[2] + a[2] * b[0];
    if order < 2 {
        return o;
    }
    o[3] = a[0] * b[3] + a[1] * b[1] + a[3] * b[0];
    o[4] = a[0] * b[4] + a[1] * b[2] + a[2] * b[1] + a[4] * b[0];
    o[5] = a[0] * b[5] + a[2] * b[2] + a[5] * b[0];
    if order < 3 {
        return o;
    }
    o[6] = a[0] * b[6] + a[1] * b[3] + a[3] * b[1] + a[6] * b[0];
    o[7] = a[0] * b[7] + a[1] * b[4] + a[2] * b[3] + a[3] * b[2] + a[4] * b[1] + a[7] * b[0];
    o[8] = a[0] * b[8] + a[1] * b[5] + a[2] * b[4] + a[4] * b[2] + a[5] * b[1] + a[8] * b[0];
    o[9] = a[0] * b[9] + a[2] * b[5] + a[5] * b[2] + a[9] * b[0];
    if order < 4 {
        return o;
    }
    o[10] = a[0] * b[10] + a[1] * b[6] + a[3] * b[3] + a[6] * b[1] + a[10] * b[0];
    o[11] = a[0] * b[11] + a[1] * b[7] + a[2] * b[6] + a[3] * b[4] + a[4] * b[3] + a[6] * b[2] + a[7] * b[1] + a[11] * b[0];
    o[12] = a[0] * b[12] + a[1] * b[8] + a[2] * b[7] + a[3] * b[5] + a[4] * b[4] + a[5] * b[3] + a[7] * b[2] + a[8] * b[1] + a[12] * b[0];
    o[13] = a[0] * b[13] + a[1] * b[9] + a[2] * b[8] + a[4] * b[5] + a[5] * b[4] + a[8] * b[2] + a[9] * b[1] + a[13] * b[0];
    o[14] = a[0] * b[14] + a[2] * b[9] + a[5] * b[5] + a[9] * b[2] + a[14] * b[0];
    o
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        let order = self.order.min(rhs.order);
        let coeffs = product(&self.coeffs, &rhs.coeffs, order);
        Jet2 { coeffs, order }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(mut self, rhs: f64) -> Jet2 {
        for c in &mut self.coeffs {
            *c *= rhs;
        }
        self
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: f64) -> Jet2 {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(mut self, rhs: f64) -> Jet2 {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet2) -> Jet2 {
        self * rhs.recip()
    }
}

/// Dot product of two 3-vectors of jets.
pub fn dot3(a: &[Jet2; 3], b: &[Jet2; 3]) -> Jet2 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Cross product of two 3-vectors of jets.
pub fn cross3(a: &[Jet2; 3], b: &[Jet2; 3]) -> [Jet2; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn product_table_is_complete() {
        let mut count = [0usize; MAX_ORDER + 1];
        for &(_, _, r) in PRODUCT_TABLE.iter() {
            let (i, j) = exponents(r as usize);
            count[i + j] += 1;
        }
        let mut acc = 0;
        for (d, c) in count.iter().enumerate() {
            acc += c;
            assert_eq!(acc, TERMS_UP_TO[d]);
        }
    }

    #[test]
    fn unrolled_product_matches_table() {
        let a: [f64; LEN] = std::array::from_fn(|k| 0.3 + 0.17 * k as f64);
        let b: [f64; LEN] = std::array::from_fn(|k| 1.1 - 0.09 * (k * k) as f64);
        for order in 0..=MAX_ORDER {
            let mut want = [0.0; LEN];
            for &(p, q, r) in &PRODUCT_TABLE[..TERMS_UP_TO[order]] {
                want[r as usize] += a[p as usize] * b[q as usize];
            }
            assert_eq!(product(&a, &b, order as u8), want, "order {order}");
        }
    }

    #[test]
    fn index_roundtrip() {
        for k in 0..LEN {
            let (i, j) = exponents(k);
            assert_eq!(index(i, j), k);
        }
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let c = Jet2::constant(3.5).sin() * Jet2::constant(2.0);
        assert_eq!(c.value(), 3.5f64.sin() * 2.0);
        assert!(c.taylor()[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn polynomial_partials() {
        // f = u^2 v + 3 v^3 at (2, -1)
        let u = Jet2::variable(2.0, 0);
        let v = Jet2::variable(-1.0, 1);
        let f = u * u * v + v * v * v * 3.0;
        assert_eq!(f.value(), -4.0 - 3.0);
        assert_eq!(f.partial(1, 0), 2.0 * 2.0 * -1.0);
        assert_eq!(f.partial(0, 1), 4.0 + 9.0);
        assert_eq!(f.partial(1, 1), 4.0);
        assert_eq!(f.partial(2, 1), 2.0);
        assert_eq!(f.partial(0, 3), 18.0);
        assert_eq!(f.partial(4, 0), 0.0);
    }

    #[test]
    fn derivative_lowers_order() {
        let u = Jet2::variable(0.3, 0);
        let v = Jet2::variable(0.7, 1);
        let f = (u * v).sin();
        let fu = f.derivative(0);
        assert_eq!(fu.order(), 3);
        assert!((fu.value() - 0.7 * (0.21f64).cos()).abs() < 1e-15);
        assert!((fu.partial(0, 1) - f.partial(1, 1)).abs() < 1e-14);
        assert!((fu.partial(1, 2) - f.partial(2, 2)).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn univariate_compositions_match_closed_forms(x in 0.2f64..3.0) {
            let t = Jet2::variable(x, 0);
            let s = t.sin();
            let expected_sin = [x.sin(), x.cos(), -x.sin(), -x.cos(), x.sin()];
            for (k, e) in expected_sin.iter().enumerate() {
                prop_assert!((s.partial(k, 0) - e).abs() < 1e-13);
            }
            let r = t.sqrt();
            let expected_sqrt = [
                x.sqrt(),
                0.5 * x.powf(-0.5),
                -0.25 * x.powf(-1.5),
                0.375 * x.powf(-2.5),
                -0.9375 * x.powf(-3.5),
            ];
            for (k, e) in expected_sqrt.iter().enumerate() {
                prop_assert!((r.partial(k, 0) - e).abs() < 1e-12 * (1.0 + e.abs()));
            }
            let q = Jet2::constant(1.0) / t;
            let expected_recip = [1.0 / x, -1.0 / x.powi(2), 2.0 / x.powi(3), -6.0 / x.powi(4), 24.0 / x.powi(5)];
            for (k, e) in expected_recip.iter().enumerate() {
                prop_assert!((q.partial(k, 0) - e).abs() < 1e-11 * (1.0 + e.abs()));
            }
        }

        #[test]
        fn arithmetic_is_closed_and_consistent(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let u = Jet2::variable(a, 0);
            let v = Jet2::variable(b, 1);
            let f = u.sin() * v.cos() + u * v * v;
            let g = (f * f + 2.0).sqrt();
            let back = g * g - 2.0 + Jet2::constant(0.0);
            let diff = back - f * f;
            prop_assert_eq!(back.order(), MAX_ORDER);
            for c in diff.taylor() {
                prop_assert!(c.abs() < 1e-11);
            }
        }
    }
}
