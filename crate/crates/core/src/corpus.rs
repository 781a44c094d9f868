//! A fixed corpus of smooth test integrands whose derivative ranges are
//! known in closed form: every extremum of a derivative over an interval is
//! at an endpoint or at an explicitly solvable critical point.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::expr::{parse, Expr};
use crate::ranges::{DerivativeRange, RangeProvider};
use crate::simpson::Interval;

/// Every corpus function is smooth on this window.
pub const DOMAIN: (f64, f64) = (-1.0, 2.0);
const MIN_WIDTH: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// `exp(c t)`
    Exp(f64),
    /// `log(t + s)`
    Log(f64),
    /// `1/(t + s)`
    Recip(f64),
    /// `sqrt(t + s)`
    Sqrt(f64),
    /// `(t + 2)^p`
    Power(f64),
    /// `sin(w t + p)`
    Sin(f64, f64),
    /// `cos(w t + p)`
    Cos(f64, f64),
    /// `cosh(c t + d)`
    Cosh(f64, f64),
    /// `sinh(c t + d)`
    Sinh(f64, f64),
    /// `c0 + c1 t + ... + c4 t^4`
    Poly([f64; 5]),
}

#[derive(Clone, Debug)]
pub struct CorpusFunction {
    pub family: Family,
    pub source: String,
    pub expr: Expr,
}

fn poly_source(c: &[f64; 5]) -> String {
    let terms: Vec<String> = c
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0.0)
        .map(|(k, &v)| match k {
            0 => format!("{v}"),
            1 => format!("{v}*t"),
            _ => format!("{v}*t^{k}"),
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

impl Family {
    pub fn source(&self) -> String {
        match *self {
            Family::Exp(c) => format!("exp({c}*t)"),
            Family::Log(s) => format!("log(t + {s})"),
            Family::Recip(s) => format!("1/(t + {s})"),
            Family::Sqrt(s) => format!("sqrt(t + {s})"),
            Family::Power(p) => format!("(t + 2)^{p}"),
            Family::Sin(w, p) => format!("sin({w}*t + {p})"),
            Family::Cos(w, p) => format!("cos({w}*t + {p})"),
            Family::Cosh(c, d) => format!("cosh({c}*t + {d})"),
            Family::Sinh(c, d) => format!("sinh({c}*t + {d})"),
            Family::Poly(ref c) => poly_source(c),
        }
    }

    /// Interior points where the derivative of `order` can attain an extremum.
    fn critical_points(&self, i: Interval, order: usize) -> Vec<f64> {
        let inside = |t: f64| i.a() < t && t < i.b();
        match *self {
            Family::Exp(_) | Family::Log(_) | Family::Recip(_) | Family::Sqrt(_) | Family::Power(_) => {
                Vec::new()
            }
            Family::Sin(w, p) | Family::Cos(w, p) => {
                // derivative is w^k sin(w t + p + phase); extrema where the argument is π/2 mod π
                let phase = order as f64 * FRAC_PI_2 + if matches!(self, Family::Cos(..)) { FRAC_PI_2 } else { 0.0 };
                let (lo, hi) = {
                    let (x, y) = (w * i.a() + p + phase, w * i.b() + p + phase);
                    (x.min(y), x.max(y))
                };
                let first = ((lo - FRAC_PI_2) / PI).floor() as i64;
                let last = ((hi - FRAC_PI_2) / PI).ceil() as i64;
                (first..=last)
                    .map(|n| (FRAC_PI_2 + n as f64 * PI - p - phase) / w)
                    .filter(|&t| inside(t))
                    .collect()
            }
            Family::Cosh(c, d) | Family::Sinh(c, d) => {
                let cosh_like = matches!(self, Family::Cosh(..)) == (order % 2 == 0);
                let t = -d / c;
                if cosh_like && inside(t) {
                    vec![t]
                } else {
                    Vec::new()
                }
            }
            Family::Poly(ref c) => {
                // roots of the (order + 1)-th derivative, degree at most 2
                let mut q = c.to_vec();
                for _ in 0..=order {
                    q = q.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
                }
                q.resize(3, 0.0);
                let (c0, c1, c2) = (q[0], q[1], q[2]);
                let roots = if c2 != 0.0 {
                    let disc = c1 * c1 - 4.0 * c2 * c0;
                    if disc < 0.0 {
                        Vec::new()
                    } else {
                        let s = disc.sqrt();
                        vec![(-c1 - s) / (2.0 * c2), (-c1 + s) / (2.0 * c2)]
                    }
                } else if c1 != 0.0 {
                    vec![-c0 / c1]
                } else {
                    Vec::new()
                };
                roots.into_iter().filter(|&t| inside(t)).collect()
            }
        }
    }
}

impl CorpusFunction {
    pub fn new(family: Family) -> Self {
        let source = family.source();
        let expr = parse(&source).expect("corpus sources parse");
        CorpusFunction { family, source, expr }
    }

    /// Closed-form range of the derivative of `order` over `i`.
    pub fn analytic_range(&self, i: Interval, order: usize) -> Result<DerivativeRange> {
        let mut points = vec![i.a(), i.b()];
        points.extend(self.family.critical_points(i, order));
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in points {
            let v = self.expr.derivative(t, order)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        DerivativeRange::exact(order, i, lo, hi)
    }
}

impl RangeProvider for CorpusFunction {
    fn range(&self, _e: &Expr, i: Interval, order: usize) -> Result<DerivativeRange> {
        self.analytic_range(i, order)
    }
}

/// The 50 corpus functions, ten families of five.
pub fn corpus() -> Vec<CorpusFunction> {
    let mut fams = Vec::with_capacity(50);
    for c in [0.5, 1.0, 1.5, -1.0, 2.0] {
        fams.push(Family::Exp(c));
    }
    for s in [1.5, 2.0, 3.0, 4.0, 6.0] {
        fams.push(Family::Log(s));
    }
    for s in [1.5, 2.0, 3.0, 4.0, 6.0] {
        fams.push(Family::Recip(s));
    }
    for s in [1.5, 2.0, 3.0, 4.0, 6.0] {
        fams.push(Family::Sqrt(s));
    }
    for p in [1.5, 2.5, 3.7, 0.7, 0.3] {
        fams.push(Family::Power(p));
    }
    for (w, p) in [(1.0, 0.0), (2.0, 0.3), (3.0, -0.5), (0.5, 1.0), (1.5, 2.0)] {
        fams.push(Family::Sin(w, p));
    }
    for (w, p) in [(1.0, 0.0), (2.0, -0.7), (2.5, 0.4), (0.75, 1.2), (4.0, 0.1)] {
        fams.push(Family::Cos(w, p));
    }
    for (c, d) in [(1.0, 0.0), (0.5, -0.25), (1.5, -1.0), (-1.0, 0.5), (2.0, 0.0)] {
        fams.push(Family::Cosh(c, d));
    }
    for (c, d) in [(1.0, 0.0), (0.5, 0.25), (1.5, -1.0), (-1.0, 0.5), (2.0, -2.0)] {
        fams.push(Family::Sinh(c, d));
    }
    for c in [
        [0.0, 0.0, 0.0, 0.0, 1.0],
        [1.0, -1.0, 0.5, 0.0, 0.0],
        [0.0, 0.5, 0.0, -2.0, 1.0],
        [2.0, 0.0, -3.0, 1.0, 0.25],
        [-1.0, 2.0, 0.0, 0.0, -0.5],
    ] {
        fams.push(Family::Poly(c));
    }
    fams.into_iter().map(CorpusFunction::new).collect()
}

/// `n` seeded intervals inside [`DOMAIN`] for corpus member `index`.
pub fn corpus_intervals(seed: u64, index: usize, n: usize) -> Vec<Interval> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (lo, hi) = DOMAIN;
    (0..n)
        .map(|_| loop {
            let a: f64 = rng.gen_range(lo..hi);
            let b: f64 = rng.gen_range(lo..hi);
            let (a, b) = (a.min(b), a.max(b));
            if b - a >= MIN_WIDTH {
                break Interval::new(a, b).expect("ordered");
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranges::estimate_derivative_range;

    #[test]
    fn corpus_has_fifty_parseable_members() {
        let c = corpus();
        assert_eq!(c.len(), 50);
        for f in &c {
            assert_eq!(parse(&f.expr.to_string()).unwrap(), f.expr, "{}", f.source);
        }
    }

    #[test]
    fn intervals_are_seeded_and_in_domain() {
        let a = corpus_intervals(42, 3, 20);
        assert_eq!(a, corpus_intervals(42, 3, 20));
        assert_ne!(a, corpus_intervals(42, 4, 20));
        for i in a {
            assert!(i.a() >= DOMAIN.0 && i.b() <= DOMAIN.1 && i.width() >= MIN_WIDTH);
        }
    }

    #[test]
    fn analytic_ranges_contain_dense_samples() {
        for (k, f) in corpus().iter().enumerate() {
            for i in corpus_intervals(1, k, 3) {
                for order in 1..=4 {
                    let exact = f.analytic_range(i, order).unwrap();
                    let sampled = estimate_derivative_range(&f.expr, i, order, 513).unwrap();
                    let scale = 1.0 + exact.min.abs().max(exact.max.abs());
                    assert!(sampled.min >= exact.min - 1e-9 * scale, "{} order {order}", f.source);
                    assert!(sampled.max <= exact.max + 1e-9 * scale, "{} order {order}", f.source);
                    assert!(sampled.min - exact.min <= 1e-3 * scale, "{} order {order}", f.source);
                    assert!(exact.max - sampled.max <= 1e-3 * scale, "{} order {order}", f.source);
                }
            }
        }
    }
}
