//! The Simpson defect, the classical and corrected three-point rules, the
//! integral representations of the defect, and the reference integrator.
//!
//! Defects are reported in normalized (mean-value) form:
//!
//! ```text
//! T_g(a, b) = [g(a) + g(b)] / 6 + (2/3) g((a + b) / 2) - (1 / (b - a)) ∫_a^b g
//! ```

use serde::Serialize;

use crate::bounds::Enclosure;
use crate::composite::Partition;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::sum::CompensatedSum;

/// Panel cap of the reference integrator.
pub const ORACLE_PANEL_CAP: usize = 1 << 20;
/// Tolerance used for the integral term of [`t_functional`].
pub const ORACLE_TOL: f64 = 1e-13;
/// Tolerance of the `[0, 1]` integrals in [`t_via_representation`].
pub const REPRESENTATION_TOL: f64 = 1e-10;

const ORACLE_INITIAL_PANELS: usize = 8;
const ORACLE_MAX_DEPTH: u32 = 60;

/// Closed interval `[a, b]` with finite `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Interval { a, b })
        } else {
            Err(Error::InvalidInterval { a, b })
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.midpoint();
        (Interval { a: self.a, b: m }, Interval { a: m, b: self.b })
    }

    /// Uniform partition into `n` panels; the outer breakpoints are exactly `a` and `b`.
    pub fn split(&self, n: usize) -> Vec<Interval> {
        assert!(n >= 1);
        let h = self.width() / n as f64;
        let mut points: Vec<f64> = (0..=n).map(|k| self.a + k as f64 * h).collect();
        points[n] = self.b;
        points.windows(2).map(|w| Interval { a: w[0], b: w[1] }).collect()
    }

    pub fn shifted(&self, c: f64) -> Result<Interval> {
        Interval::new(self.a + c, self.b + c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Classical,
    Corrected,
    Oracle,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Classical => "classical",
            Rule::Corrected => "corrected",
            Rule::Oracle => "oracle",
        }
    }
}

/// Integral estimate over an interval. The enclosure brackets the true
/// integral; it need not contain `estimate`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureResult {
    pub estimate: f64,
    pub enclosure: Option<Enclosure>,
    pub rule: Rule,
    pub panels: usize,
    /// False when an adaptive run stopped at its panel cap.
    pub tol_met: bool,
    pub partition: Option<Partition>,
}

fn simpson_mean_of(fa: f64, fm: f64, fb: f64) -> f64 {
    (fa + fb) / 6.0 + 2.0 * fm / 3.0
}

/// `[g(a) + g(b)]/6 + (2/3) g(m)`, the three-point approximation of the mean.
pub fn simpson_mean(e: &Expr, i: Interval) -> Result<f64> {
    Ok(simpson_mean_of(e.eval(i.a)?, e.eval(i.midpoint())?, e.eval(i.b)?))
}

/// Classical Simpson estimate `(b - a) [g(a) + 4 g(m) + g(b)] / 6`.
pub fn simpson_estimate(e: &Expr, i: Interval) -> Result<f64> {
    let (fa, fm, fb) = (e.eval(i.a)?, e.eval(i.midpoint())?, e.eval(i.b)?);
    Ok(i.width() * (fa + 4.0 * fm + fb) / 6.0)
}

/// `(ψ''(a) + ψ''(b))/2 - ψ''(m)`.
pub fn second_derivative_defect(e: &Expr, i: Interval) -> Result<f64> {
    let d2 = |t: f64| e.derivative(t, 2);
    Ok(0.5 * (d2(i.a)? + d2(i.b)?) - d2(i.midpoint())?)
}

/// Normalized correction `(b - a)^2 / 360 * [(ψ''(a) + ψ''(b))/2 - ψ''(m)]`.
pub fn correction_term(e: &Expr, i: Interval) -> Result<f64> {
    Ok(i.width().powi(2) / 360.0 * second_derivative_defect(e, i)?)
}

/// Corrected Simpson estimate of `∫_a^b ψ`.
pub fn corrected_simpson(e: &Expr, i: Interval) -> Result<f64> {
    let w = i.width();
    Ok(simpson_estimate(e, i)? - w * correction_term(e, i)?)
}

/// The Simpson defect `T_g(a, b)` of an arbitrary function, with the
/// integral term taken from the reference integrator.
pub fn t_functional_of<F>(f: F, i: Interval) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mean = simpson_mean_of(f(i.a)?, f(i.midpoint())?, f(i.b)?);
    let integral = oracle_integrate(&f, i, ORACLE_TOL)?;
    Ok(mean - integral / i.width())
}

pub fn t_functional(e: &Expr, i: Interval) -> Result<f64> {
    t_functional_of(|t| e.eval(t), i)
}

/// Defect of the corrected rule, `T - correction_term`.
pub fn corrected_defect(e: &Expr, i: Interval) -> Result<f64> {
    Ok(t_functional(e, i)? - correction_term(e, i)?)
}

/// Evaluates the order-matching integral representation of `T_φ(a, b)`:
///
/// * order 1: `(b-a)/12 ∫_0^1 (1 - 3s) [φ'(u) - φ'(v)] ds`
/// * order 2: `(b-a)^2/48 ∫_0^1 s(2 - 3s) [φ''(u) + φ''(v)] ds`
/// * order 3: `(b-a)^3/96 ∫_0^1 s^2(1 - s) [φ'''(u) - φ'''(v)] ds`
///
/// with `u = a s/2 + b(1 - s/2)` and `v = b s/2 + a(1 - s/2)`.
pub fn t_via_representation(e: &Expr, i: Interval, order: usize) -> Result<f64> {
    let (a, b) = (i.a, i.b);
    let w = b - a;
    let d = |t: f64| e.derivative(t, order);
    let nodes = |s: f64| (a * s / 2.0 + b * (1.0 - s / 2.0), b * s / 2.0 + a * (1.0 - s / 2.0));
    let unit = Interval { a: 0.0, b: 1.0 };
    match order {
        1 => {
            let k = oracle_integrate(
                |s| {
                    let (u, v) = nodes(s);
                    Ok((1.0 - 3.0 * s) * (d(u)? - d(v)?))
                },
                unit,
                REPRESENTATION_TOL,
            )?;
            Ok(w / 12.0 * k)
        }
        2 => {
            let k = oracle_integrate(
                |s| {
                    let (u, v) = nodes(s);
                    Ok(s * (2.0 - 3.0 * s) * (d(u)? + d(v)?))
                },
                unit,
                REPRESENTATION_TOL,
            )?;
            Ok(w * w / 48.0 * k)
        }
        3 => {
            let k = oracle_integrate(
                |s| {
                    let (u, v) = nodes(s);
                    Ok(s * s * (1.0 - s) * (d(u)? - d(v)?))
                },
                unit,
                REPRESENTATION_TOL,
            )?;
            Ok(w * w * w / 96.0 * k)
        }
        _ => Err(Error::Precondition(format!(
            "integral representations exist for orders 1, 2 and 3, got {order}"
        ))),
    }
}

/// Reference value of `∫_a^b g` for an expression.
pub fn oracle_integral(e: &Expr, i: Interval, tol: f64) -> Result<f64> {
    oracle_integrate(|t| e.eval(t), i, tol)
}

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

struct Oracle<'f, F> {
    f: &'f F,
    leaves: usize,
    acc: CompensatedSum,
}

impl<F: Fn(f64) -> Result<f64>> Oracle<'_, F> {
    fn refine(&mut self, s: Segment, tol: f64, depth: u32) -> Result<()> {
        let m = 0.5 * (s.a + s.b);
        let lm = 0.5 * (s.a + m);
        let rm = 0.5 * (m + s.b);
        let flm = (self.f)(lm)?;
        let frm = (self.f)(rm)?;
        let hl = m - s.a;
        let hr = s.b - m;
        let left = hl * (s.fa + 4.0 * flm + s.fm) / 6.0;
        let right = hr * (s.fm + 4.0 * frm + s.fb) / 6.0;
        let delta = left + right - s.whole;
        let at_roundoff = delta.abs() <= 16.0 * f64::EPSILON * (left.abs() + right.abs())
            || !(s.a < lm && lm < m && m < rm && rm < s.b);
        if delta.abs() <= 15.0 * tol || at_roundoff {
            self.leaves += 1;
            if self.leaves > ORACLE_PANEL_CAP {
                return Err(Error::NonConvergence { panels: ORACLE_PANEL_CAP });
            }
            self.acc.add(left + right + delta / 15.0);
            return Ok(());
        }
        if depth >= ORACLE_MAX_DEPTH {
            return Err(Error::NonConvergence { panels: self.leaves });
        }
        self.refine(
            Segment { a: s.a, b: m, fa: s.fa, fm: flm, fb: s.fm, whole: left },
            tol / 2.0,
            depth + 1,
        )?;
        self.refine(
            Segment { a: m, b: s.b, fa: s.fm, fm: frm, fb: s.fb, whole: right },
            tol / 2.0,
            depth + 1,
        )
    }
}

/// Adaptive Simpson quadrature with one Richardson extrapolation per
/// bisection. A panel is accepted once `|S_left + S_right - S_whole|` drops
/// below `15 tol_local`, and then contributes the extrapolated value
/// `S_left + S_right + (S_left + S_right - S_whole)/15`. `tol` is absolute
/// for integrals of magnitude below one and relative above.
pub fn oracle_integrate<F>(f: F, i: Interval, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(tol >= 1e-14) {
        return Err(Error::Precondition(format!("oracle tolerance must be >= 1e-14, got {tol}")));
    }
    let panels = i.split(ORACLE_INITIAL_PANELS);
    let mut segments = Vec::with_capacity(panels.len());
    let mut fa = f(i.a)?;
    let mut coarse = CompensatedSum::new();
    for p in &panels {
        let fm = f(p.midpoint())?;
        let fb = f(p.b)?;
        let whole = p.width() * (fa + 4.0 * fm + fb) / 6.0;
        coarse.add(whole);
        segments.push(Segment { a: p.a, b: p.b, fa, fm, fb, whole });
        fa = fb;
    }
    let scale = coarse.value().abs().max(1.0);
    let local_tol = tol * scale / ORACLE_INITIAL_PANELS as f64;
    let mut oracle = Oracle { f: &f, leaves: 0, acc: CompensatedSum::new() };
    for s in segments {
        oracle.refine(s, local_tol, 0)?;
    }
    Ok(oracle.acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn ex(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn interval_invariants() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
        let p = iv(0.0, 1.0).split(3);
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].a(), 0.0);
        assert_eq!(p[2].b(), 1.0);
        assert_eq!(p[0].b(), p[1].a());
    }

    #[test]
    fn defect_of_quartic_and_quintic() {
        let t4 = t_functional(&ex("t^4"), iv(0.0, 1.0)).unwrap();
        assert!((t4 - 1.0 / 120.0).abs() < 1e-12);
        let t5 = t_functional(&ex("t^5"), iv(0.0, 1.0)).unwrap();
        assert!((t5 - 1.0 / 48.0).abs() < 1e-12);
        let t3 = t_functional(&ex("t^3"), iv(-5.0, 7.0)).unwrap();
        assert!(t3.abs() < 1e-12 * 343.0);
    }

    #[test]
    fn simpson_estimates() {
        assert!((simpson_estimate(&ex("t^2"), iv(0.0, 1.0)).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        let s4 = simpson_estimate(&ex("t^4"), iv(0.0, 1.0)).unwrap();
        assert!((s4 - (0.2 + 1.0 / 120.0)).abs() < 1e-16);
        let c = simpson_estimate(&ex("cosh(t)"), iv(-2.0, 2.0)).unwrap();
        assert!((c - 2.0 / 3.0 * (2.0 * 2f64.cosh() + 4.0)).abs() < 1e-14);
    }

    #[test]
    fn corrected_rule_examples() {
        assert!((corrected_simpson(&ex("t^4"), iv(0.0, 1.0)).unwrap() - 0.2).abs() < 1e-15);
        assert!((corrected_simpson(&ex("t^5"), iv(0.0, 1.0)).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(corrected_simpson(&ex("t"), iv(2.0, 3.0)).unwrap(), 2.5);
        assert!(corrected_defect(&ex("t^4"), iv(0.0, 1.0)).unwrap().abs() < 1e-12);
        assert!(corrected_defect(&ex("t^5"), iv(0.0, 1.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn representation_examples() {
        let r = t_via_representation(&ex("t^4"), iv(0.0, 1.0), 2).unwrap();
        assert!((r - 1.0 / 120.0).abs() < 1e-12);
        assert!(t_via_representation(&ex("t"), iv(0.0, 1.0), 1).unwrap().abs() < 1e-15);
        let e = ex("exp(t)");
        let lhs = t_via_representation(&e, iv(0.0, 1.0), 3).unwrap();
        let rhs = t_functional(&e, iv(0.0, 1.0)).unwrap();
        assert!((lhs - rhs).abs() < 1e-9);
        assert!(t_via_representation(&e, iv(0.0, 1.0), 4).is_err());
    }

    #[test]
    fn oracle_examples() {
        let v = oracle_integral(&ex("t^2"), iv(0.0, 1.0), 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        let v = oracle_integral(&ex("cosh(t)"), iv(0.0, 1.0), 1e-12).unwrap();
        assert!((v - 1f64.sinh()).abs() < 1e-12);
        // mpmath, 40 digits: ∫_1^2 coth(t)/t dt
        let v = oracle_integral(&ex("coth(t)/t"), iv(1.0, 2.0), 1e-12).unwrap();
        assert!((v - 0.791_676_793_762_776_4).abs() < 1e-12);
    }

    #[test]
    fn oracle_errors() {
        assert!(matches!(
            oracle_integral(&ex("log(t)"), iv(-1.0, 1.0), 1e-12),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            oracle_integral(&ex("t"), iv(0.0, 1.0), 1e-15),
            Err(Error::Precondition(_))
        ));
        // integrable singularity of 1/sqrt(t) cannot meet the tolerance before the cap
        let r = oracle_integrate(
            |t| if t == 0.0 { Ok(0.0) } else { Ok(1.0 / t.sqrt()) },
            iv(0.0, 1.0),
            1e-14,
        );
        assert!(matches!(r, Err(Error::NonConvergence { .. })), "{r:?}");
    }

    #[test]
    fn oracle_handles_kinks() {
        let v = oracle_integrate(|t: f64| Ok(t.abs().powi(3) / 6.0), iv(-1.3, 2.1), 1e-13).unwrap();
        let exact = (1.3f64.powi(4) + 2.1f64.powi(4)) / 24.0;
        assert!((v - exact).abs() < 1e-12);
    }
}
