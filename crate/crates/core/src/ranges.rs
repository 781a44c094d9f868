//! Estimates of `m_n = min φ⁽ⁿ⁾` and `M_n = max φ⁽ⁿ⁾` over an interval.
//!
//! Sampled estimates come from a Chebyshev–Lobatto grid followed by one
//! parabolic refinement step at every interior grid extremum. They are
//! empirical, not rigorous; every enclosure built from them carries
//! [`Confidence::SampledRange`].

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, MAX_ORDER};
use crate::simpson::Interval;

pub const DEFAULT_SAMPLES: usize = 1025;
pub const DEFAULT_INFLATION: f64 = 1.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Confidence {
    #[serde(rename = "analytic-range")]
    AnalyticRange,
    #[serde(rename = "sampled-range")]
    SampledRange,
}

impl Confidence {
    pub fn name(self) -> &'static str {
        match self {
            Confidence::AnalyticRange => "analytic-range",
            Confidence::SampledRange => "sampled-range",
        }
    }

    /// Sampled wins: a result is only as trustworthy as its weakest input.
    pub fn combine(self, other: Confidence) -> Confidence {
        if self == Confidence::SampledRange || other == Confidence::SampledRange {
            Confidence::SampledRange
        } else {
            Confidence::AnalyticRange
        }
    }
}

/// Range `[min, max]` of the derivative of a given order over an interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeRange {
    pub order: usize,
    pub interval: Interval,
    pub min: f64,
    pub max: f64,
    /// Grid size used; zero for supplied ranges.
    pub samples: usize,
    pub refined: bool,
    pub confidence: Confidence,
}

impl DerivativeRange {
    /// A caller-supplied range that bypasses sampling.
    pub fn exact(order: usize, interval: Interval, min: f64, max: f64) -> Result<Self> {
        check_order(order)?;
        if !(min <= max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Precondition(format!(
                "derivative range needs finite min <= max, got [{min}, {max}]"
            )));
        }
        Ok(DerivativeRange {
            order,
            interval,
            min,
            max,
            samples: 0,
            refined: false,
            confidence: Confidence::AnalyticRange,
        })
    }

    pub fn spread(&self) -> f64 {
        self.max - self.min
    }

    /// Widens `max - min` by `factor` about the centre. Supplied ranges are
    /// returned unchanged.
    pub fn inflated(&self, factor: f64) -> Self {
        if self.confidence == Confidence::AnalyticRange || factor == 1.0 {
            return *self;
        }
        let pad = 0.5 * (factor - 1.0) * self.spread();
        DerivativeRange { min: self.min - pad, max: self.max + pad, ..*self }
    }

    fn expect_order(&self, order: usize) -> Result<()> {
        if self.order == order {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "expected a range of derivative order {order}, got order {}",
                self.order
            )))
        }
    }

    pub(crate) fn require(&self, order: usize) -> Result<&Self> {
        self.expect_order(order)?;
        Ok(self)
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh(order));
    }
    if order == 0 {
        return Err(Error::Precondition("derivative ranges start at order 1".into()));
    }
    Ok(())
}

/// Chebyshev–Lobatto nodes on `i`, ascending, with the endpoints exact.
pub fn chebyshev_nodes(i: Interval, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let (mid, half) = (i.midpoint(), 0.5 * i.width());
    let denom = (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n)
        .map(|k| mid - half * ((k as f64 * std::f64::consts::PI) / denom).cos())
        .collect();
    nodes[0] = i.a();
    nodes[n - 1] = i.b();
    nodes
}

/// Vertex of the parabola through three points, if it lies strictly between
/// the outer two.
fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let (d0, d2) = (x[1] - x[0], x[1] - x[2]);
    let num = d0 * d0 * (y[1] - y[2]) - d2 * d2 * (y[1] - y[0]);
    let den = d0 * (y[1] - y[2]) - d2 * (y[1] - y[0]);
    if den == 0.0 {
        return None;
    }
    let v = x[1] - 0.5 * num / den;
    (x[0] < v && v < x[2]).then_some(v)
}

/// Sampled estimate of the range of φ⁽ⁿ⁾ over `i`.
pub fn estimate_derivative_range(
    e: &Expr,
    i: Interval,
    n: usize,
    samples: usize,
) -> Result<DerivativeRange> {
    check_order(n)?;
    if samples < 3 {
        return Err(Error::Precondition(format!("need at least 3 samples, got {samples}")));
    }
    let nodes = chebyshev_nodes(i, samples);
    let evaluated: Vec<Result<f64>> = nodes.par_iter().map(|&t| e.derivative(t, n)).collect();
    let mut values = Vec::with_capacity(samples);
    for v in evaluated {
        values.push(v?);
    }

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let (grid_lo, grid_hi) = (lo, hi);

    for j in 1..samples - 1 {
        let (yl, y, yr) = (values[j - 1], values[j], values[j + 1]);
        let is_min = y < yl && y < yr;
        let is_max = y > yl && y > yr;
        if !(is_min || is_max) {
            continue;
        }
        let x = [nodes[j - 1], nodes[j], nodes[j + 1]];
        if let Some(v) = parabolic_vertex(x, [yl, y, yr]) {
            let fv = e.derivative(v, n)?;
            if is_min {
                lo = lo.min(fv);
            } else {
                hi = hi.max(fv);
            }
        }
    }

    let scale = grid_lo.abs().max(grid_hi.abs()).max(f64::MIN_POSITIVE);
    let refined = (grid_lo - lo) > 1e-12 * scale || (hi - grid_hi) > 1e-12 * scale;
    Ok(DerivativeRange {
        order: n,
        interval: i,
        min: lo,
        max: hi,
        samples,
        refined,
        confidence: Confidence::SampledRange,
    })
}

/// Source of derivative ranges for the bound and composite layers.
pub trait RangeProvider: Sync {
    fn range(&self, e: &Expr, i: Interval, order: usize) -> Result<DerivativeRange>;
}

/// Sampling with a fixed grid size and inflation factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeConfig {
    pub samples: usize,
    pub inflation: f64,
}

impl Default for RangeConfig {
    fn default() -> Self {
        RangeConfig { samples: DEFAULT_SAMPLES, inflation: DEFAULT_INFLATION }
    }
}

impl RangeProvider for RangeConfig {
    fn range(&self, e: &Expr, i: Interval, order: usize) -> Result<DerivativeRange> {
        Ok(estimate_derivative_range(e, i, order, self.samples)?.inflated(self.inflation))
    }
}

/// Caller-supplied ranges, reused for every sub-interval; orders without a
/// supplied range fall back to sampling.
#[derive(Clone, Debug, Default)]
pub struct SuppliedRanges {
    ranges: [Option<DerivativeRange>; MAX_ORDER + 1],
    fallback: Option<RangeConfig>,
}

impl SuppliedRanges {
    pub fn new(fallback: Option<RangeConfig>) -> Self {
        SuppliedRanges { ranges: Default::default(), fallback }
    }

    pub fn with(mut self, r: DerivativeRange) -> Self {
        self.ranges[r.order] = Some(r);
        self
    }

    /// Samples every order once over `i` and freezes the results, so that
    /// sub-intervals reuse the global ranges.
    pub fn global(e: &Expr, i: Interval, max_order: usize, cfg: RangeConfig) -> Result<Self> {
        let mut s = SuppliedRanges::new(None);
        for order in 1..=max_order {
            s.ranges[order] = Some(cfg.range(e, i, order)?);
        }
        Ok(s)
    }

    pub fn get(&self, order: usize) -> Option<&DerivativeRange> {
        self.ranges.get(order).and_then(|r| r.as_ref())
    }
}

impl RangeProvider for SuppliedRanges {
    fn range(&self, e: &Expr, i: Interval, order: usize) -> Result<DerivativeRange> {
        check_order(order)?;
        match (&self.ranges[order], &self.fallback) {
            (Some(r), _) => Ok(*r),
            (None, Some(cfg)) => cfg.range(e, i, order),
            (None, None) => Err(Error::Precondition(format!(
                "no range supplied for derivative order {order}"
            ))),
        }
    }
}

/// Ranges computed by a closure, typically from closed forms.
pub struct AnalyticRanges<F>(pub F);

impl<F> RangeProvider for AnalyticRanges<F>
where
    F: Fn(Interval, usize) -> Result<DerivativeRange> + Sync,
{
    fn range(&self, _e: &Expr, i: Interval, order: usize) -> Result<DerivativeRange> {
        (self.0)(i, order)
    }
}
