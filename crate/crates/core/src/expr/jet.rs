//! Order-4 Taylor jets stored in derivative form.
//!
//! Entry `k` of a jet is the k-th derivative of the represented function at
//! the evaluation point. Products use the Leibniz rule and every elementary
//! function is propagated through the linear ODE it satisfies (for example
//! `y' = u' y` for `y = exp(u)`), differentiated with Leibniz again. Only the
//! entries up to the jet's order are ever read or written.

use std::ops::{Add, Mul, Neg, Sub};

pub const MAX_ORDER: usize = 4;

const BINOM: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

/// Value and derivatives 1..=order of a scalar function at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet4 {
    d: [f64; 5],
    order: usize,
}

impl Jet4 {
    pub fn constant(c: f64, order: usize) -> Self {
        debug_assert!(order <= MAX_ORDER);
        let mut d = [0.0; 5];
        d[0] = c;
        Jet4 { d, order }
    }

    /// The identity function seeded at `t`.
    pub fn variable(t: f64, order: usize) -> Self {
        let mut j = Self::constant(t, order);
        if order >= 1 {
            j.d[1] = 1.0;
        }
        j
    }

    /// Builds a jet from explicit derivative values; entries beyond `order` are dropped.
    pub fn from_derivatives(values: &[f64], order: usize) -> Self {
        let mut d = [0.0; 5];
        for (k, v) in values.iter().take(order + 1).enumerate() {
            d[k] = *v;
        }
        Jet4 { d, order }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    /// The k-th derivative, or `None` when `k` exceeds the jet's order.
    pub fn get(&self, k: usize) -> Option<f64> {
        (k <= self.order).then(|| self.d[k])
    }

    /// The k-th derivative. Panics when `k` exceeds the jet's order.
    pub fn derivative(&self, k: usize) -> f64 {
        assert!(k <= self.order, "derivative {k} requested from an order-{} jet", self.order);
        self.d[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d[..=self.order]
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    fn zero_like(order: usize) -> Self {
        Jet4 { d: [0.0; 5], order }
    }

    pub fn scale(self, c: f64) -> Self {
        let mut out = self;
        for k in 0..=self.order {
            out.d[k] = c * self.d[k];
        }
        out
    }

    pub fn try_div(self, rhs: Jet4) -> Result<Jet4, &'static str> {
        let n = self.order.min(rhs.order);
        let g0 = rhs.d[0];
        if g0 == 0.0 {
            return Err("division by zero");
        }
        let mut c = Self::zero_like(n);
        for m in 0..=n {
            let mut acc = self.d[m];
            for k in 1..=m {
                acc -= BINOM[m][k] * rhs.d[k] * c.d[m - k];
            }
            c.d[m] = acc / g0;
        }
        Ok(c)
    }

    pub fn exp(self) -> Jet4 {
        let n = self.order;
        let mut e = Self::zero_like(n);
        e.d[0] = self.d[0].exp();
        for m in 1..=n {
            e.d[m] = ode_term(&self, &e, m);
        }
        e
    }

    pub fn try_ln(self) -> Result<Jet4, &'static str> {
        let a0 = self.d[0];
        if a0 <= 0.0 {
            return Err("log of a non-positive value");
        }
        let n = self.order;
        let mut l = Self::zero_like(n);
        l.d[0] = a0.ln();
        for m in 1..=n {
            let mut acc = self.d[m];
            for k in 1..m {
                acc -= BINOM[m - 1][k] * self.d[k] * l.d[m - k];
            }
            l.d[m] = acc / a0;
        }
        Ok(l)
    }

    pub fn try_sqrt(self) -> Result<Jet4, &'static str> {
        let a0 = self.d[0];
        if a0 < 0.0 {
            return Err("sqrt of a negative value");
        }
        let n = self.order;
        if a0 == 0.0 && n > 0 {
            return Err("sqrt is not differentiable at 0");
        }
        let mut r = Self::zero_like(n);
        r.d[0] = a0.sqrt();
        for m in 1..=n {
            let mut acc = self.d[m];
            for k in 1..m {
                acc -= BINOM[m][k] * r.d[k] * r.d[m - k];
            }
            r.d[m] = acc / (2.0 * r.d[0]);
        }
        Ok(r)
    }

    /// Returns `(sin u, cos u)`.
    pub fn sin_cos(self) -> (Jet4, Jet4) {
        let n = self.order;
        let mut s = Self::zero_like(n);
        let mut c = Self::zero_like(n);
        let (s0, c0) = self.d[0].sin_cos();
        s.d[0] = s0;
        c.d[0] = c0;
        for m in 1..=n {
            let sm = ode_term(&self, &c, m);
            let cm = -ode_term(&self, &s, m);
            s.d[m] = sm;
            c.d[m] = cm;
        }
        (s, c)
    }

    /// Returns `(sinh u, cosh u)`.
    pub fn sinh_cosh(self) -> (Jet4, Jet4) {
        let n = self.order;
        let mut s = Self::zero_like(n);
        let mut c = Self::zero_like(n);
        s.d[0] = self.d[0].sinh();
        c.d[0] = self.d[0].cosh();
        for m in 1..=n {
            let sm = ode_term(&self, &c, m);
            let cm = ode_term(&self, &s, m);
            s.d[m] = sm;
            c.d[m] = cm;
        }
        (s, c)
    }

    /// `u^p` for a constant exponent.
    pub fn try_powf(self, p: f64) -> Result<Jet4, &'static str> {
        let n = self.order;
        let a0 = self.d[0];
        if p == 0.0 {
            return Ok(Self::constant(1.0, n));
        }
        if p.fract() == 0.0 && p > 0.0 {
            if p <= 16.0 {
                return Ok(self.powi_by_squaring(p as u32));
            }
            if a0 == 0.0 {
                // p > 4, so every stored derivative vanishes at a root
                return Ok(Self::zero_like(n));
            }
        } else if a0 < 0.0 {
            return Err("non-integer power of a negative value");
        } else if a0 == 0.0 {
            if n == 0 {
                return Ok(Self::constant(0.0, 0));
            }
            return Err("non-integer power is not differentiable at 0");
        }
        let mut y = Self::zero_like(n);
        y.d[0] = a0.powf(p);
        for m in 1..=n {
            let mut acc = 0.0;
            for k in 0..m {
                acc += BINOM[m - 1][k] * y.d[k] * self.d[m - k];
            }
            acc *= p;
            for k in 1..m {
                acc -= BINOM[m - 1][k] * self.d[k] * y.d[m - k];
            }
            y.d[m] = acc / a0;
        }
        Ok(y)
    }

    fn powi_by_squaring(self, mut p: u32) -> Jet4 {
        let mut base = self;
        let mut acc: Option<Jet4> = None;
        while p > 0 {
            if p & 1 == 1 {
                acc = Some(match acc {
                    Some(a) => a * base,
                    None => base,
                });
            }
            p >>= 1;
            if p > 0 {
                base = base * base;
            }
        }
        acc.unwrap_or_else(|| Self::constant(1.0, self.order))
    }
}

/// m-th derivative of `y` where `y' = u' * w`, using entries `w[0..m-1]`.
fn ode_term(u: &Jet4, w: &Jet4, m: usize) -> f64 {
    let mut acc = 0.0;
    for k in 0..m {
        acc += BINOM[m - 1][k] * u.d[k + 1] * w.d[m - 1 - k];
    }
    acc
}

impl Add for Jet4 {
    type Output = Jet4;
    fn add(self, rhs: Jet4) -> Jet4 {
        let n = self.order.min(rhs.order);
        let mut out = Jet4::zero_like(n);
        for k in 0..=n {
            out.d[k] = self.d[k] + rhs.d[k];
        }
        out
    }
}

impl Sub for Jet4 {
    type Output = Jet4;
    fn sub(self, rhs: Jet4) -> Jet4 {
        let n = self.order.min(rhs.order);
        let mut out = Jet4::zero_like(n);
        for k in 0..=n {
            out.d[k] = self.d[k] - rhs.d[k];
        }
        out
    }
}

impl Neg for Jet4 {
    type Output = Jet4;
    fn neg(self) -> Jet4 {
        let mut out = self;
        for k in 0..=self.order {
            out.d[k] = -self.d[k];
        }
        out
    }
}

impl Mul for Jet4 {
    type Output = Jet4;
    fn mul(self, rhs: Jet4) -> Jet4 {
        let n = self.order.min(rhs.order);
        let mut out = Jet4::zero_like(n);
        for m in 0..=n {
            let mut acc = 0.0;
            for k in 0..=m {
                acc += BINOM[m][k] * self.d[k] * rhs.d[m - k];
            }
            out.d[m] = acc;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_by_squaring_is_exact() {
        let j = Jet4::variable(1.0, 4).try_powf(4.0).unwrap();
        assert_eq!(j.as_slice(), &[1.0, 4.0, 12.0, 24.0, 24.0]);
    }

    #[test]
    fn exp_of_linear() {
        let u = Jet4::variable(0.5, 4).scale(2.0);
        let e = u.exp();
        let v = 1f64.exp();
        for k in 0..=4 {
            let expect = v * 2f64.powi(k as i32);
            assert!((e.derivative(k) - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn reciprocal_derivatives() {
        let one = Jet4::constant(1.0, 4);
        let r = one.try_div(Jet4::variable(2.0, 4)).unwrap();
        // d^k (1/t) = (-1)^k k! / t^{k+1}
        let expect = [0.5, -0.25, 0.25, -0.375, 0.75];
        for k in 0..=4 {
            assert!((r.derivative(k) - expect[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn log_and_sqrt() {
        let t = Jet4::variable(4.0, 4);
        let l = t.try_ln().unwrap();
        let expect = [4f64.ln(), 0.25, -1.0 / 16.0, 2.0 / 64.0, -6.0 / 256.0];
        for k in 0..=4 {
            assert!((l.derivative(k) - expect[k]).abs() < 1e-15);
        }
        let s = t.try_sqrt().unwrap();
        // sqrt(t) derivatives at 4: 2, 1/4, -1/32, 3/256, -15/2048
        let expect = [2.0, 0.25, -1.0 / 32.0, 3.0 / 256.0, -15.0 / 2048.0];
        for k in 0..=4 {
            assert!((s.derivative(k) - expect[k]).abs() < 1e-15);
        }
        assert!(Jet4::variable(0.0, 1).try_sqrt().is_err());
        assert_eq!(Jet4::variable(0.0, 0).try_sqrt().unwrap().value(), 0.0);
    }

    #[test]
    fn fractional_power_matches_sqrt() {
        let t = Jet4::variable(2.5, 4);
        let a = t.try_powf(0.5).unwrap();
        let b = t.try_sqrt().unwrap();
        for k in 0..=4 {
            assert!((a.derivative(k) - b.derivative(k)).abs() < 1e-14);
        }
        assert!(Jet4::variable(-1.0, 0).try_powf(0.5).is_err());
    }

    #[test]
    fn large_integer_power_uses_recurrence() {
        let t = Jet4::variable(-1.5, 4);
        let p = t.try_powf(20.0).unwrap();
        let v = 1.5f64.powi(20);
        assert!((p.value() - v).abs() < 1e-12 * v);
        // d/dt t^20 = 20 t^19
        assert!((p.derivative(1) + 20.0 * 1.5f64.powi(19)).abs() < 1e-10 * v);
    }

    #[test]
    fn unset_entries_are_none() {
        let j = Jet4::variable(3.0, 2);
        assert_eq!(j.get(2), Some(0.0));
        assert_eq!(j.get(3), None);
    }
}
