//! Witness functions for the sharpness of the defect constants, and a
//! randomized search for the best constants of the low-order bounds.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{SmoothnessClass, Theorem};
use crate::error::{Error, Result};
use crate::simpson::{oracle_integrate, Interval, ORACLE_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Witness {
    /// `|t|³/6`, second derivative `|t|`.
    #[serde(rename = "ABS_CUBIC")]
    AbsCubic,
    /// The C³ spline with third derivative clamped to `[-1, 1]`.
    #[serde(rename = "D_FUNCTION")]
    DFunction,
    #[serde(rename = "X4")]
    X4,
    #[serde(rename = "X5")]
    X5,
}

impl Witness {
    pub const ALL: [Witness; 4] = [Witness::AbsCubic, Witness::DFunction, Witness::X4, Witness::X5];

    pub fn tag(self) -> &'static str {
        match self {
            Witness::AbsCubic => "ABS_CUBIC",
            Witness::DFunction => "D_FUNCTION",
            Witness::X4 => "X4",
            Witness::X5 => "X5",
        }
    }

    /// Highest derivative order with a closed form.
    pub fn max_order(self) -> usize {
        match self {
            Witness::AbsCubic => 2,
            Witness::DFunction => 3,
            Witness::X4 | Witness::X5 => 4,
        }
    }

    /// Derivative order whose range normalizes the sharpness ratio.
    pub fn class_order(self) -> usize {
        match self {
            Witness::AbsCubic => 2,
            Witness::DFunction => 3,
            Witness::X4 | Witness::X5 => 4,
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Witness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Witness::ALL
            .into_iter()
            .find(|w| w.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Precondition(format!("unknown witness `{s}`")))
    }
}

/// Left branch of the D function, `x <= -1`.
pub fn d_left(x: f64, order: usize) -> f64 {
    match order {
        0 => -x.powi(3) / 6.0 - x / 3.0,
        1 => -x * x / 2.0 - 1.0 / 3.0,
        2 => -x,
        3 => -1.0,
        _ => 0.0,
    }
}

/// Middle branch of the D function, `-1 <= x <= 1`.
pub fn d_middle(x: f64, order: usize) -> f64 {
    match order {
        0 => x.powi(4) / 24.0 + x * x / 4.0 - x / 6.0 + 1.0 / 24.0,
        1 => x.powi(3) / 6.0 + x / 2.0 - 1.0 / 6.0,
        2 => x * x / 2.0 + 0.5,
        3 => x,
        4 => 1.0,
        _ => 0.0,
    }
}

/// Right branch of the D function, `x >= 1`.
pub fn d_right(x: f64, order: usize) -> f64 {
    match order {
        0 => x.powi(3) / 6.0,
        1 => x * x / 2.0,
        2 => x,
        3 => 1.0,
        _ => 0.0,
    }
}

fn d_eval(x: f64, order: usize) -> f64 {
    if x <= -1.0 {
        d_left(x, order)
    } else if x >= 1.0 {
        d_right(x, order)
    } else {
        d_middle(x, order)
    }
}

/// Closed-form piecewise evaluation of a witness derivative.
pub fn witness_eval(w: Witness, x: f64, order: usize) -> Result<f64> {
    if order > w.max_order() {
        return Err(Error::OrderTooHigh(order));
    }
    if !x.is_finite() {
        return Err(Error::Domain { what: "witness argument", at: x });
    }
    Ok(match w {
        Witness::AbsCubic => match order {
            0 => x.abs().powi(3) / 6.0,
            1 => x * x.abs() / 2.0,
            _ => x.abs(),
        },
        Witness::DFunction => d_eval(x, order),
        Witness::X4 => [x.powi(4), 4.0 * x.powi(3), 12.0 * x * x, 24.0 * x, 24.0][order],
        Witness::X5 => {
            [x.powi(5), 5.0 * x.powi(4), 20.0 * x.powi(3), 60.0 * x * x, 120.0 * x][order]
        }
    })
}

/// Continuous antiderivative of the witness.
fn antiderivative(w: Witness, x: f64) -> f64 {
    match w {
        Witness::AbsCubic => x.powi(3) * x.abs() / 24.0,
        Witness::DFunction => {
            if x <= -1.0 {
                -x.powi(4) / 24.0 - x * x / 6.0 - 1.0 / 120.0
            } else if x >= 1.0 {
                x.powi(4) / 24.0 + 1.0 / 120.0
            } else {
                x.powi(5) / 120.0 + x.powi(3) / 12.0 - x * x / 12.0 + x / 24.0
            }
        }
        Witness::X4 => x.powi(5) / 5.0,
        Witness::X5 => x.powi(6) / 6.0,
    }
}

/// `T_w(a, b)` from the closed-form antiderivative.
pub fn witness_t(w: Witness, i: Interval) -> f64 {
    let (a, b) = (i.a(), i.b());
    let g = |x| value_of(w, x);
    (g(a) + g(b)) / 6.0 + 2.0 / 3.0 * g(i.midpoint())
        - (antiderivative(w, b) - antiderivative(w, a)) / i.width()
}

fn value_of(w: Witness, x: f64) -> f64 {
    witness_eval(w, x, 0).expect("order 0 exists for every witness")
}

/// `T_w(-a, a)` via the adaptive oracle, integrating branch by branch.
pub fn witness_t_oracle(w: Witness, a: f64) -> Result<f64> {
    symmetric(a)?;
    let mut cuts = vec![-a];
    match w {
        Witness::DFunction if a > 1.0 => cuts.extend([-1.0, 1.0]),
        Witness::AbsCubic => cuts.push(0.0),
        _ => {}
    }
    cuts.push(a);
    let f = |x: f64| Ok(value_of(w, x));
    let mut total = crate::sum::CompensatedSum::new();
    for pair in cuts.windows(2) {
        total.add(oracle_integrate(f, Interval::new(pair[0], pair[1])?, ORACLE_TOL)?);
    }
    Ok((value_of(w, -a) + value_of(w, a)) / 6.0 + 2.0 / 3.0 * value_of(w, 0.0) - total.value() / (2.0 * a))
}

fn symmetric(a: f64) -> Result<Interval> {
    if !(a > 0.0) {
        return Err(Error::Domain { what: "witness half-width", at: a });
    }
    Interval::new(-a, a)
}

/// `M_k - m_k` of the witness on `[-a, a]`; for the quartics the normalizer
/// is `max(|m₄|, |M₄|)`, matching the one-sided remainder form.
pub fn witness_range_width(w: Witness, a: f64) -> f64 {
    match w {
        Witness::AbsCubic => a,
        Witness::DFunction => 2.0,
        Witness::X4 => 24.0,
        Witness::X5 => 120.0 * a,
    }
}

fn check_sharpness_domain(w: Witness, a: f64) -> Result<Interval> {
    if w == Witness::DFunction && !(a > 1.0) {
        return Err(Error::Domain { what: "D_FUNCTION needs a > 1", at: a });
    }
    symmetric(a)
}

fn normalizer(w: Witness, a: f64) -> f64 {
    let k = w.class_order() as i32;
    let denom = witness_range_width(w, a) * (2.0 * a).powi(k);
    match w {
        Witness::X4 | Witness::X5 => denom / 2880.0,
        _ => denom,
    }
}

/// `|T_w(-a, a)| / ((M_k - m_k)(2a)^k)` with analytic `T` and ranges.
/// For X4 and X5 the ratio is taken against the fourth-order remainder.
pub fn sharpness_ratio(w: Witness, a: f64) -> Result<f64> {
    let i = check_sharpness_domain(w, a)?;
    Ok(witness_t(w, i).abs() / normalizer(w, a))
}

/// Same ratio with `T` from the numerical oracle.
pub fn sharpness_ratio_oracle(w: Witness, a: f64) -> Result<f64> {
    check_sharpness_domain(w, a)?;
    Ok(witness_t_oracle(w, a)?.abs() / normalizer(w, a))
}

/// `(1/1152)|1 - 2/a² + 2/a³ - 3/(5a⁴)|`.
pub fn d_ratio_closed_form(a: f64) -> f64 {
    (1.0 - 2.0 / (a * a) + 2.0 / a.powi(3) - 3.0 / (5.0 * a.powi(4))).abs() / 1152.0
}

/// Continuous piecewise-linear `k`-th derivative on `[0, 1]`,
/// integrated `k` times from zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplineCandidate {
    pub order: usize,
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

type Poly = [f64; 6];

fn poly_eval(p: &Poly, x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_integrate(p: &Poly) -> Poly {
    let mut q = [0.0; 6];
    for k in 0..5 {
        q[k + 1] = p[k] / (k + 1) as f64;
    }
    q
}

impl SplineCandidate {
    fn pieces(&self) -> Vec<Poly> {
        let mut pieces: Vec<Poly> = self
            .knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(s, y)| {
                let slope = (y[1] - y[0]) / (s[1] - s[0]);
                [y[0] - slope * s[0], slope, 0.0, 0.0, 0.0, 0.0]
            })
            .collect();
        for _ in 0..self.order {
            let mut start = 0.0;
            for (j, p) in pieces.iter_mut().enumerate() {
                let mut q = poly_integrate(p);
                let s = self.knots[j];
                q[0] += start - poly_eval(&q, s);
                start = poly_eval(&q, self.knots[j + 1]);
                *p = q;
            }
        }
        pieces
    }

    /// Exact `T` on `[0, 1]` up to rounding.
    pub fn t_functional(&self) -> f64 {
        let pieces = self.pieces();
        let eval = |x: f64| {
            let j = self.knots.windows(2).position(|s| x <= s[1]).unwrap_or(pieces.len() - 1);
            poly_eval(&pieces[j], x)
        };
        let mut mean = crate::sum::CompensatedSum::new();
        for (j, p) in pieces.iter().enumerate() {
            let q = poly_integrate(p);
            mean.add(poly_eval(&q, self.knots[j + 1]) - poly_eval(&q, self.knots[j]));
        }
        (eval(0.0) + eval(1.0)) / 6.0 + 2.0 / 3.0 * eval(0.5) - mean.value()
    }

    pub fn range_width(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        hi - lo
    }

    /// `|T| / (M_k - m_k)`, or `None` for a constant derivative.
    pub fn ratio(&self) -> Option<f64> {
        let w = self.range_width();
        (w > 1e-300).then(|| self.t_functional().abs() / w)
    }

    fn describe(&self) -> String {
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ");
        format!(
            "on [0, 1], derivative {} piecewise linear with knots [{}] and values [{}]",
            self.order,
            fmt(&self.knots),
            fmt(&self.values)
        )
    }
}

/// `|t|³/6` on `[-1, 1]` rescaled to `[0, 1]`.
pub fn abs_cubic_candidate() -> SplineCandidate {
    SplineCandidate { order: 2, knots: vec![0.0, 0.5, 1.0], values: vec![1.0, 0.0, 1.0] }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub class: &'static str,
    pub trials: usize,
    pub best_ratio: f64,
    pub paper_lower: Option<f64>,
    pub paper_upper: f64,
    pub candidate_description: String,
}

const CLIMB_STEPS: usize = 400;

fn random_candidate(order: usize, rng: &mut ChaCha8Rng) -> SplineCandidate {
    let n_inner = rng.gen_range(1..=6);
    let mut knots: Vec<f64> = (0..n_inner).map(|_| rng.gen_range(0.02..0.98)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
    knots.insert(0, 0.0);
    knots.push(1.0);
    let values = (0..knots.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
    SplineCandidate { order, knots, values }
}

fn perturb(c: &SplineCandidate, step: f64, rng: &mut ChaCha8Rng) -> SplineCandidate {
    let mut next = c.clone();
    for v in &mut next.values {
        *v = (*v + step * rng.gen_range(-1.0..1.0)).clamp(0.0, 1.0);
    }
    let n = next.knots.len();
    for j in 1..n - 1 {
        let (lo, hi) = (next.knots[j - 1], c.knots[j + 1]);
        let moved = next.knots[j] + step * 0.5 * (hi - lo) * rng.gen_range(-1.0..1.0);
        let margin = 1e-4 * (hi - lo);
        next.knots[j] = moved.clamp(lo + margin, hi - margin);
    }
    next
}

fn climb(start: SplineCandidate, rng: &mut ChaCha8Rng) -> (f64, SplineCandidate) {
    let mut best = start;
    let mut best_ratio = best.ratio().unwrap_or(0.0);
    let mut step = 0.3;
    for _ in 0..CLIMB_STEPS {
        let next = perturb(&best, step, rng);
        match next.ratio() {
            Some(r) if r > best_ratio => {
                best_ratio = r;
                best = next;
            }
            _ => step = (step * 0.97).max(1e-4),
        }
    }
    (best_ratio, best)
}

/// Empirical maximization of `|T_g| / ((M_k - m_k)(b - a)^k)` for `k = 1, 2`.
/// Trial `j` draws from its own ChaCha8 stream of `seed`, so results do not
/// depend on scheduling.
pub fn constant_search(class: SmoothnessClass, seed: u64, trials: usize) -> Result<SearchReport> {
    let (order, theorem, paper_lower) = match class {
        SmoothnessClass::C1 => (1, Theorem::Thm0, None),
        SmoothnessClass::C2 => (2, Theorem::Thm1, Some(1.0 / 288.0)),
        other => {
            return Err(Error::Precondition(format!(
                "the constant search covers c1 and c2, not {}",
                other.name()
            )))
        }
    };
    if trials == 0 {
        return Err(Error::Precondition("trials must be at least 1".into()));
    }
    let results: Vec<(f64, SplineCandidate)> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let start = if trial == 0 && order == 2 {
                abs_cubic_candidate()
            } else {
                random_candidate(order, &mut rng)
            };
            climb(start, &mut rng)
        })
        .collect();
    let mut best: Option<(f64, SplineCandidate)> = None;
    if order == 2 {
        let c = abs_cubic_candidate();
        best = c.ratio().map(|r| (r, c));
    }
    for (r, c) in results {
        if c.ratio().is_some() && best.as_ref().map_or(true, |(b, _)| r > *b) {
            best = Some((r, c));
        }
    }
    let (best_ratio, candidate_description) = match best {
        Some((r, c)) => (r, c.describe()),
        None => (0.0, "no non-degenerate candidate".to_string()),
    };
    Ok(SearchReport {
        class: class.name(),
        trials,
        best_ratio,
        paper_lower,
        paper_upper: theorem.constant(),
        candidate_description,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert!((witness_eval(Witness::DFunction, 1.0, 0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(witness_eval(Witness::DFunction, 0.0, 3).unwrap(), 0.0);
        assert_eq!(witness_eval(Witness::AbsCubic, -2.0, 2).unwrap(), 2.0);
        assert!(matches!(witness_eval(Witness::AbsCubic, 1.0, 3), Err(Error::OrderTooHigh(3))));
        assert!(witness_eval(Witness::DFunction, 0.0, 4).is_err());
    }

    #[test]
    fn d_function_is_c3_at_knots() {
        for order in 0..=3 {
            assert!((d_left(-1.0, order) - d_middle(-1.0, order)).abs() <= 1e-12, "order {order}");
            assert!((d_right(1.0, order) - d_middle(1.0, order)).abs() <= 1e-12, "order {order}");
        }
        assert_eq!(d_middle(-1.0, 3), -1.0);
        assert_eq!(d_middle(1.0, 3), 1.0);
    }

    #[test]
    fn antiderivative_differentiates_back() {
        for w in Witness::ALL {
            for x in [-2.5, -1.0, -0.3, 0.0, 0.7, 1.0, 3.0] {
                let h = 1e-5;
                let fd = (antiderivative(w, x + h) - antiderivative(w, x - h)) / (2.0 * h);
                let v = value_of(w, x);
                assert!((fd - v).abs() <= 1e-7 * (1.0 + v.abs()), "{w} at {x}");
            }
        }
    }

    #[test]
    fn abs_cubic_ratio_is_exact() {
        for a in [0.1, 1.0, 3.0, 17.5] {
            let r = sharpness_ratio(Witness::AbsCubic, a).unwrap();
            assert!((r - 1.0 / 288.0).abs() <= 1e-15, "a={a}: {r}");
        }
        assert!((abs_cubic_candidate().ratio().unwrap() - 1.0 / 288.0).abs() < 1e-16);
    }

    #[test]
    fn d_ratio() {
        let r = sharpness_ratio(Witness::DFunction, 10.0).unwrap();
        let expect = (1.0 - 2.0 / 100.0 + 2.0 / 1000.0 - 3.0 / 50000.0) / 1152.0;
        assert!((r - expect).abs() <= 1e-13 * expect);
        assert!((expect * 1152.0 - 0.98194).abs() < 1e-12);
        for a in [1.5, 2.0, 10.0, 100.0, 1000.0] {
            let closed = d_ratio_closed_form(a);
            let o = sharpness_ratio_oracle(Witness::DFunction, a).unwrap();
            assert!((o - closed).abs() <= 1e-10 * closed, "a={a}: {o} vs {closed}");
            let an = sharpness_ratio(Witness::DFunction, a).unwrap();
            assert!((an - closed).abs() <= 1e-10 * closed, "a={a}: {an} vs {closed}");
        }
        let r = sharpness_ratio(Witness::DFunction, 1e3).unwrap();
        assert!(r <= 1.0 / 1152.0 && r >= (1.0 - 3e-6) / 1152.0);
        assert!(sharpness_ratio(Witness::DFunction, 1.0).is_err());
        assert!(sharpness_ratio(Witness::AbsCubic, 0.0).is_err());
    }

    #[test]
    fn quartic_witnesses() {
        assert!((sharpness_ratio(Witness::X4, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(sharpness_ratio(Witness::X5, 2.0).unwrap(), 0.0);
        let u = Interval::new(0.0, 1.0).unwrap();
        assert!((witness_t(Witness::X4, u) - 1.0 / 120.0).abs() < 1e-16);
        let i = Interval::new(1.0, 3.0).unwrap();
        assert!((witness_t(Witness::X5, i) - 4.0 * 16.0 / 48.0).abs() < 1e-13);
    }

    #[test]
    fn spline_t_matches_closed_forms() {
        // g'' = 2 everywhere: quadratic, T = 0
        let c = SplineCandidate { order: 2, knots: vec![0.0, 0.3, 1.0], values: vec![2.0, 2.0, 2.0] };
        assert!(c.t_functional().abs() < 1e-16);
        assert_eq!(c.ratio(), None);
        // g' = s: g = s²/2, T = 0
        let c = SplineCandidate { order: 1, knots: vec![0.0, 1.0], values: vec![0.0, 1.0] };
        assert!(c.t_functional().abs() < 1e-16);
        // g'' = s: g = s³/6, T = 0
        let c = SplineCandidate { order: 2, knots: vec![0.0, 0.5, 1.0], values: vec![0.0, 0.5, 1.0] };
        assert!(c.t_functional().abs() < 1e-16);
    }

    #[test]
    fn degenerate_candidate_is_excluded() {
        let c = SplineCandidate { order: 1, knots: vec![0.0, 1.0], values: vec![0.4, 0.4] };
        assert_eq!(c.ratio(), None);
    }

    #[test]
    fn search_respects_bounds() {
        let r = constant_search(SmoothnessClass::C2, 7, 16).unwrap();
        assert!(r.best_ratio >= 1.0 / 288.0);
        assert!(r.best_ratio <= 1.0 / 162.0 + 1e-10);
        let r = constant_search(SmoothnessClass::C1, 7, 16).unwrap();
        assert!(r.best_ratio > 0.0);
        assert!(r.best_ratio <= 5.0 / 72.0 + 1e-10);
        assert!(constant_search(SmoothnessClass::C3, 7, 1).is_err());
        assert!(constant_search(SmoothnessClass::C1, 7, 0).is_err());
    }

    #[test]
    fn search_is_deterministic() {
        let a = constant_search(SmoothnessClass::C2, 11, 8).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| constant_search(SmoothnessClass::C2, 11, 8).unwrap());
        assert_eq!(a, b);
    }
}
