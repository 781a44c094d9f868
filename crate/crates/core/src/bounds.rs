//! Enclosures for the Simpson defect `T_g(a, b)` and for the integral mean,
//! one per smoothness class.
//!
//! | tag     | encloses | radius / bracket                                   |
//! |---------|----------|----------------------------------------------------|
//! | HH      | mean     | `[g(m), (g(a)+g(b))/2]` (convex), swapped if concave |
//! | HH-m2/M2| mean     | refined brackets using `m₂`, `M₂`                  |
//! | THM0    | T        | `5/72 (M₁-m₁)(b-a)`                                |
//! | THM1    | T        | `1/162 (M₂-m₂)(b-a)²`                              |
//! | EQ7     | T        | `1/36 (M₂-m₂)(b-a)²`                               |
//! | THM2    | T        | `1/1152 (M₃-m₃)(b-a)³`                             |
//! | EQ4     | T        | `[m₄, M₄] (b-a)⁴ / 2880`                           |
//! | THM3    | T        | `[0, (b-a)²/162 [(φ''(a)+φ''(b))/2 - φ''(m)]]`     |
//! | THM4    | T - corr | `11/57600 (M₄-m₄)(b-a)⁴`                           |

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::ranges::{chebyshev_nodes, Confidence, DerivativeRange, RangeProvider};
use crate::simpson::{correction_term, second_derivative_defect, Interval};

/// Sample count for the convexity checks.
pub const CONVEXITY_SAMPLES: usize = 257;
const CONVEXITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Theorem {
    #[serde(rename = "HH")]
    Hh,
    #[serde(rename = "HH-m2")]
    HhLowerCurvature,
    #[serde(rename = "HH-M2")]
    HhUpperCurvature,
    #[serde(rename = "EQ7")]
    Eq7,
    #[serde(rename = "THM0")]
    Thm0,
    #[serde(rename = "THM1")]
    Thm1,
    #[serde(rename = "THM2")]
    Thm2,
    #[serde(rename = "EQ4")]
    Eq4,
    #[serde(rename = "THM3")]
    Thm3,
    #[serde(rename = "THM4")]
    Thm4,
    #[serde(rename = "THM5")]
    Thm5,
    #[serde(rename = "THM6")]
    Thm6,
}

impl Theorem {
    pub fn tag(self) -> &'static str {
        match self {
            Theorem::Hh => "HH",
            Theorem::HhLowerCurvature => "HH-m2",
            Theorem::HhUpperCurvature => "HH-M2",
            Theorem::Eq7 => "EQ7",
            Theorem::Thm0 => "THM0",
            Theorem::Thm1 => "THM1",
            Theorem::Thm2 => "THM2",
            Theorem::Eq4 => "EQ4",
            Theorem::Thm3 => "THM3",
            Theorem::Thm4 => "THM4",
            Theorem::Thm5 => "THM5",
            Theorem::Thm6 => "THM6",
        }
    }

    /// The constant that scales the bound.
    pub fn constant(self) -> f64 {
        match self {
            Theorem::Hh => 0.0,
            Theorem::HhLowerCurvature | Theorem::HhUpperCurvature => 1.0 / 24.0,
            Theorem::Eq7 => 1.0 / 36.0,
            Theorem::Thm0 => 5.0 / 72.0,
            Theorem::Thm1 => 1.0 / 162.0,
            Theorem::Thm2 => 1.0 / 1152.0,
            Theorem::Eq4 => 1.0 / 2880.0,
            Theorem::Thm3 => 1.0 / 162.0,
            Theorem::Thm4 => 11.0 / 57600.0,
            Theorem::Thm5 => 16.0 / 243.0,
            Theorem::Thm6 => 22.0 / 1125.0,
        }
    }

    /// Preference among equally wide enclosures; lower wins.
    pub fn tie_rank(self) -> u8 {
        match self {
            Theorem::Thm4 => 0,
            Theorem::Thm3 => 1,
            Theorem::Eq4 => 2,
            Theorem::Thm2 => 3,
            Theorem::Thm1 => 4,
            Theorem::Eq7 => 5,
            Theorem::Thm0 => 6,
            _ => 7,
        }
    }

    pub fn from_tag(tag: &str) -> Option<Theorem> {
        use Theorem::*;
        [Hh, HhLowerCurvature, HhUpperCurvature, Eq7, Thm0, Thm1, Thm2, Eq4, Thm3, Thm4, Thm5, Thm6]
            .into_iter()
            .find(|t| t.tag() == tag)
    }
}

/// Two-sided bracket `[lower, upper]` for a scalar quantity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Enclosure {
    pub lower: f64,
    pub upper: f64,
    pub theorem: Theorem,
    pub constant: f64,
    pub confidence: Confidence,
}

impl Enclosure {
    pub fn new(lower: f64, upper: f64, theorem: Theorem, confidence: Confidence) -> Self {
        debug_assert!(lower <= upper, "enclosure [{lower}, {upper}] is inverted");
        Enclosure { lower, upper, theorem, constant: theorem.constant(), confidence }
    }

    pub fn symmetric(center: f64, radius: f64, theorem: Theorem, confidence: Confidence) -> Self {
        Enclosure::new(center - radius, center + radius, theorem, confidence)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Distance from `x` to the nearer end; negative when `x` lies outside.
    pub fn slack(&self, x: f64) -> f64 {
        (x - self.lower).min(self.upper - x)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convexity {
    Convex,
    Concave,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SmoothnessClass {
    C1,
    C2,
    C3,
    C4,
    /// C⁴ with φ'' convex (φ⁗ ≥ 0).
    C4Convex2,
}

impl SmoothnessClass {
    pub fn max_order(self) -> usize {
        match self {
            SmoothnessClass::C1 => 1,
            SmoothnessClass::C2 => 2,
            SmoothnessClass::C3 => 3,
            SmoothnessClass::C4 | SmoothnessClass::C4Convex2 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SmoothnessClass::C1 => "c1",
            SmoothnessClass::C2 => "c2",
            SmoothnessClass::C3 => "c3",
            SmoothnessClass::C4 => "c4",
            SmoothnessClass::C4Convex2 => "c4-convex2",
        }
    }
}

/// Checks `sign * φ⁽ᵒʳᵈᵉʳ⁾ >= -tol` on a sampled grid. Returns `Ok(false)`
/// when the expression has no jet of that order (the check is skipped).
fn sampled_sign_check(e: &Expr, i: Interval, order: usize, sign: f64, what: &'static str) -> Result<bool> {
    let nodes = chebyshev_nodes(i, CONVEXITY_SAMPLES);
    let mut values = Vec::with_capacity(nodes.len());
    for &t in &nodes {
        match e.derivative(t, order) {
            Ok(v) => values.push(sign * v),
            Err(Error::NonSmooth { .. }) => return Ok(false),
            Err(err) => return Err(err),
        }
    }
    let scale = values.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    for (t, v) in nodes.iter().zip(&values) {
        if *v < -CONVEXITY_TOL * scale {
            return Err(Error::ConvexityViolated { what, at: *t, value: sign * v });
        }
    }
    Ok(true)
}

/// Hermite–Hadamard bracket for the integral mean.
pub fn hh_enclosure(e: &Expr, i: Interval, convexity: Convexity) -> Result<Enclosure> {
    let (sign, what) = match convexity {
        Convexity::Convex => (1.0, "convexity"),
        Convexity::Concave => (-1.0, "concavity"),
    };
    sampled_sign_check(e, i, 2, sign, what)?;
    let mid = e.eval(i.midpoint())?;
    let ends = 0.5 * (e.eval(i.a())? + e.eval(i.b())?);
    let (lower, upper) = match convexity {
        Convexity::Convex => (mid, ends),
        Convexity::Concave => (ends, mid),
    };
    Ok(Enclosure::new(lower, upper, Theorem::Hh, Confidence::AnalyticRange))
}

/// The two curvature-corrected Hermite–Hadamard brackets, as
/// `(lower-curvature bracket, upper-curvature bracket)`.
pub fn hh_curvature_brackets(e: &Expr, i: Interval, r2: &DerivativeRange) -> Result<(Enclosure, Enclosure)> {
    r2.require(2)?;
    let w2 = i.width().powi(2);
    let mid = e.eval(i.midpoint())?;
    let ends = 0.5 * (e.eval(i.a())? + e.eval(i.b())?);
    let (m2, big_m2) = (r2.min, r2.max);
    let conf = r2.confidence;
    let with_m2 = raw(mid + m2 / 24.0 * w2, ends - m2 / 12.0 * w2, Theorem::HhLowerCurvature, conf);
    let with_big_m2 = raw(ends - big_m2 / 12.0 * w2, mid + big_m2 / 24.0 * w2, Theorem::HhUpperCurvature, conf);
    Ok((with_m2, with_big_m2))
}

fn raw(lower: f64, upper: f64, theorem: Theorem, confidence: Confidence) -> Enclosure {
    Enclosure { lower, upper, theorem, constant: theorem.constant(), confidence }
}

/// Intersection of the two curvature-corrected brackets for the integral
/// mean, tagged with whichever input bracket is narrower.
pub fn hh_refined_enclosure(e: &Expr, i: Interval, r2: &DerivativeRange) -> Result<Enclosure> {
    let (p, q) = hh_curvature_brackets(e, i, r2)?;
    let mut lower = p.lower.max(q.lower);
    let mut upper = p.upper.min(q.upper);
    if lower > upper {
        let scale = 1.0 + lower.abs().max(upper.abs());
        if lower - upper > 1e-12 * scale {
            return Err(Error::EmptyIntersection { lower, upper });
        }
        // m₂ = M₂ collapses both brackets onto the mean, up to rounding
        let c = 0.5 * (lower + upper);
        lower = c;
        upper = c;
    }
    let narrower = if q.width() < p.width() { q.theorem } else { p.theorem };
    Ok(Enclosure::new(lower, upper, narrower, r2.confidence))
}

/// `|T| <= 5/72 (M₁ - m₁)(b - a)`.
pub fn bound_c1(i: Interval, r1: &DerivativeRange) -> Result<Enclosure> {
    r1.require(1)?;
    let b = Theorem::Thm0.constant() * r1.spread() * i.width();
    Ok(Enclosure::symmetric(0.0, b, Theorem::Thm0, r1.confidence))
}

/// `|T| <= 1/162 (M₂ - m₂)(b - a)²`.
pub fn bound_c2(i: Interval, r2: &DerivativeRange) -> Result<Enclosure> {
    r2.require(2)?;
    let b = Theorem::Thm1.constant() * r2.spread() * i.width().powi(2);
    Ok(Enclosure::symmetric(0.0, b, Theorem::Thm1, r2.confidence))
}

/// `|T| <= 1/36 (M₂ - m₂)(b - a)²`, from the Hermite–Hadamard argument.
pub fn bound_c2_coarse(i: Interval, r2: &DerivativeRange) -> Result<Enclosure> {
    r2.require(2)?;
    let b = Theorem::Eq7.constant() * r2.spread() * i.width().powi(2);
    Ok(Enclosure::symmetric(0.0, b, Theorem::Eq7, r2.confidence))
}

/// `|T| <= 1/1152 (M₃ - m₃)(b - a)³`; the constant is sharp.
pub fn bound_c3(i: Interval, r3: &DerivativeRange) -> Result<Enclosure> {
    r3.require(3)?;
    let b = Theorem::Thm2.constant() * r3.spread() * i.width().powi(3);
    Ok(Enclosure::symmetric(0.0, b, Theorem::Thm2, r3.confidence))
}

/// `T ∈ [m₄, M₄] (b - a)⁴ / 2880`, the mean-value remainder of Simpson's rule.
pub fn c4_enclosure(i: Interval, r4: &DerivativeRange) -> Result<Enclosure> {
    r4.require(4)?;
    let k = i.width().powi(4) / 2880.0;
    Ok(Enclosure::new(r4.min * k, r4.max * k, Theorem::Eq4, r4.confidence))
}

/// `0 <= T <= (b - a)²/162 [(φ''(a) + φ''(b))/2 - φ''(m)]` for convex φ''.
pub fn bound_convex2(e: &Expr, i: Interval) -> Result<Enclosure> {
    sampled_sign_check(e, i, 4, 1.0, "convexity of the second derivative")?;
    let defect = second_derivative_defect(e, i)?;
    let scale = 1.0
        + [i.a(), i.midpoint(), i.b()]
            .iter()
            .map(|&t| e.derivative(t, 2).map(f64::abs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
    if defect < -1e-12 * scale {
        return Err(Error::ConvexityViolated {
            what: "convexity of the second derivative",
            at: i.midpoint(),
            value: defect,
        });
    }
    let upper = i.width().powi(2) / 162.0 * defect.max(0.0);
    Ok(Enclosure::new(0.0, upper, Theorem::Thm3, Confidence::AnalyticRange))
}

/// Radius `11/57600 (M₄ - m₄)(b - a)⁴` around zero for the corrected defect
/// `T - (b - a)²/360 [(ψ''(a) + ψ''(b))/2 - ψ''(m)]`.
pub fn bound_corrected(i: Interval, r4: &DerivativeRange) -> Result<Enclosure> {
    r4.require(4)?;
    let r = Theorem::Thm4.constant() * r4.spread() * i.width().powi(4);
    Ok(Enclosure::symmetric(0.0, r, Theorem::Thm4, r4.confidence))
}

/// The corrected-rule bound re-expressed as an enclosure of `T` itself.
pub fn thm4_t_enclosure(e: &Expr, i: Interval, r4: &DerivativeRange) -> Result<Enclosure> {
    let r = bound_corrected(i, r4)?;
    let c = correction_term(e, i)?;
    Ok(Enclosure::new(c + r.lower, c + r.upper, Theorem::Thm4, r.confidence))
}

/// Slacks of `2h(m) <= h(u) + h(v) <= h(a) + h(b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Majorization {
    pub lower_slack: f64,
    pub upper_slack: f64,
}

impl Majorization {
    pub fn holds(&self) -> bool {
        self.lower_slack >= -1e-12 && self.upper_slack >= -1e-12
    }
}

pub fn majorization(h: &Expr, i: Interval, u: f64, v: f64) -> Result<Majorization> {
    let (a, b) = (i.a(), i.b());
    if (u + v - (a + b)).abs() > 1e-12 * (1.0 + a.abs() + b.abs()) {
        return Err(Error::Precondition(format!("u + v = {} but a + b = {}", u + v, a + b)));
    }
    if !i.contains(u) || !i.contains(v) {
        return Err(Error::Precondition(format!("u = {u} and v = {v} must lie in [{a}, {b}]")));
    }
    let huv = h.eval(u)? + h.eval(v)?;
    Ok(Majorization {
        lower_slack: huv - 2.0 * h.eval(i.midpoint())?,
        upper_slack: h.eval(a)? + h.eval(b)? - huv,
    })
}

pub fn majorization_check(h: &Expr, i: Interval, u: f64, v: f64) -> Result<bool> {
    majorization(h, i, u, v).map(|m| m.holds())
}

/// Every defect enclosure applicable to a class, plus the narrowest one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BestBound {
    pub winner: Enclosure,
    pub candidates: Vec<Enclosure>,
}

/// All defect enclosures for `class`, in a fixed order.
pub fn applicable_bounds(
    e: &Expr,
    i: Interval,
    class: SmoothnessClass,
    ranges: &dyn RangeProvider,
) -> Result<Vec<Enclosure>> {
    let k = class.max_order();
    let mut out = Vec::new();
    let r1 = ranges.range(e, i, 1)?;
    out.push(bound_c1(i, &r1)?);
    if k >= 2 {
        let r2 = ranges.range(e, i, 2)?;
        out.push(bound_c2(i, &r2)?);
        out.push(bound_c2_coarse(i, &r2)?);
    }
    if k >= 3 {
        out.push(bound_c3(i, &ranges.range(e, i, 3)?)?);
    }
    if k >= 4 {
        let r4 = ranges.range(e, i, 4)?;
        if class == SmoothnessClass::C4Convex2 {
            out.push(bound_convex2(e, i)?);
            out.push(thm4_t_enclosure(e, i, &r4)?);
        } else {
            out.push(c4_enclosure(i, &r4)?);
        }
    }
    Ok(out)
}

/// Narrowest enclosure; ties go to the lower [`Theorem::tie_rank`].
pub fn narrowest(candidates: &[Enclosure]) -> Option<Enclosure> {
    candidates.iter().copied().min_by(|x, y| {
        x.width()
            .total_cmp(&y.width())
            .then(x.theorem.tie_rank().cmp(&y.theorem.tie_rank()))
    })
}

pub fn best_bound(
    e: &Expr,
    i: Interval,
    class: SmoothnessClass,
    ranges: &dyn RangeProvider,
) -> Result<BestBound> {
    let candidates = applicable_bounds(e, i, class, ranges)?;
    let winner = narrowest(&candidates).expect("at least one bound applies to every class");
    Ok(BestBound { winner, candidates })
}
