//! Panel-wise rules with certified enclosures of `∫_a^b g`.
//!
//! A panel's defect enclosure `T ∈ [T_lo, T_hi]` becomes an integral
//! enclosure through `∫ = h (S - T)`, with `S` the three-point mean and `h`
//! the panel width. Totals are summed left to right with compensation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{best_bound, bound_corrected, Enclosure, SmoothnessClass, Theorem};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::ranges::{Confidence, RangeProvider};
use crate::simpson::{
    corrected_simpson, simpson_estimate, simpson_mean, Interval, QuadratureResult, Rule,
};
use crate::sum::CompensatedSum;

pub const DEFAULT_PANEL_CAP: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Panel {
    pub interval: Interval,
    pub estimate: f64,
    /// Enclosure of the panel integral.
    pub enclosure: Enclosure,
    /// Enclosure width, computed as `h` times the defect-enclosure width so
    /// that it does not suffer cancellation against the estimate.
    pub width: f64,
    pub rule: Rule,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    pub breakpoints: Vec<f64>,
    pub panels: Vec<Panel>,
}

impl Partition {
    fn from_panels(panels: Vec<Panel>) -> Self {
        let mut breakpoints: Vec<f64> = panels.iter().map(|p| p.interval.a()).collect();
        if let Some(last) = panels.last() {
            breakpoints.push(last.interval.b());
        }
        Partition { breakpoints, panels }
    }

    pub fn total_estimate(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for p in &self.panels {
            s.add(p.estimate);
        }
        s.value()
    }

    /// Interval sum of the panel enclosures. The tag is the one used by the
    /// most panels (ties by tie rank).
    pub fn total_enclosure(&self) -> Option<Enclosure> {
        if self.panels.is_empty() {
            return None;
        }
        let (mut lo, mut hi) = (CompensatedSum::new(), CompensatedSum::new());
        let mut conf = Confidence::AnalyticRange;
        let mut counts: HashMap<Theorem, usize> = HashMap::new();
        for p in &self.panels {
            lo.add(p.enclosure.lower);
            hi.add(p.enclosure.upper);
            conf = conf.combine(p.enclosure.confidence);
            *counts.entry(p.enclosure.theorem).or_default() += 1;
        }
        let theorem = counts
            .into_iter()
            .max_by(|(ta, ca), (tb, cb)| ca.cmp(cb).then(tb.tie_rank().cmp(&ta.tie_rank())))
            .map(|(t, _)| t)
            .expect("non-empty");
        Some(Enclosure::new(lo.value(), hi.value().max(lo.value()), theorem, conf))
    }

    /// Sum of the panel widths, left to right.
    pub fn total_width(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for p in &self.panels {
            s.add(p.width);
        }
        s.value()
    }
}

/// Estimate and integral enclosure for one panel.
pub fn integrate_panel(
    e: &Expr,
    i: Interval,
    rule: Rule,
    class: SmoothnessClass,
    ranges: &dyn RangeProvider,
) -> Result<Panel> {
    let h = i.width();
    let own_bound = rule == Rule::Corrected && class.max_order() == 4;
    let (estimate, enclosure, width) = match rule {
        Rule::Classical | Rule::Corrected if !own_bound => {
            let est = if rule == Rule::Classical {
                simpson_estimate(e, i)?
            } else {
                corrected_simpson(e, i)?
            };
            let t = best_bound(e, i, class, ranges)?.winner;
            let s = simpson_mean(e, i)?;
            let enc = Enclosure {
                lower: h * (s - t.upper),
                upper: h * (s - t.lower),
                ..t
            };
            (est, enc, h * t.width())
        }
        Rule::Classical | Rule::Corrected => {
            let est = corrected_simpson(e, i)?;
            let r = bound_corrected(i, &ranges.range(e, i, 4)?)?;
            let enc = Enclosure::symmetric(est, h * r.upper, Theorem::Thm4, r.confidence);
            (est, enc, h * r.width())
        }
        Rule::Oracle => {
            return Err(Error::Precondition("the oracle has no certified panel rule".into()))
        }
    };
    Ok(Panel { interval: i, estimate, enclosure, width, rule })
}

fn result_from(partition: Partition, rule: Rule, tol_met: bool) -> QuadratureResult {
    QuadratureResult {
        estimate: partition.total_estimate(),
        enclosure: partition.total_enclosure(),
        rule,
        panels: partition.panels.len(),
        tol_met,
        partition: Some(partition),
    }
}

/// Uniform partition into `n_panels`.
pub fn composite_integrate(
    e: &Expr,
    i: Interval,
    n_panels: usize,
    rule: Rule,
    class: SmoothnessClass,
    ranges: &dyn RangeProvider,
) -> Result<QuadratureResult> {
    if n_panels == 0 {
        return Err(Error::Precondition("need at least one panel".into()));
    }
    let evaluated: Vec<Result<Panel>> = i
        .split(n_panels)
        .into_par_iter()
        .map(|p| integrate_panel(e, p, rule, class, ranges))
        .collect();
    let panels = evaluated.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(result_from(Partition::from_panels(panels), rule, true))
}

#[derive(Clone, Copy, Debug)]
struct Key {
    width: f64,
    left: f64,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    // widest first, then leftmost
    fn cmp(&self, other: &Self) -> Ordering {
        self.width.total_cmp(&other.width).then(other.left.total_cmp(&self.left))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Left(u64);

fn left_key(x: f64) -> Left {
    // order-preserving map of f64 to u64
    let bits = x.to_bits();
    Left(if bits >> 63 == 1 { !bits } else { bits | (1 << 63) })
}

/// Bisects the panel with the widest enclosure until the total width drops
/// to `tol`, or the panel count reaches `panel_cap` (then `tol_met` is false).
pub fn adaptive_integrate(
    e: &Expr,
    i: Interval,
    tol: f64,
    rule: Rule,
    class: SmoothnessClass,
    ranges: &dyn RangeProvider,
    panel_cap: usize,
) -> Result<QuadratureResult> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    if panel_cap == 0 {
        return Err(Error::Precondition("panel cap must be at least 1".into()));
    }
    let mut panels: BTreeMap<Left, Panel> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    let first = integrate_panel(e, i, rule, class, ranges)?;
    let mut running = first.width;
    heap.push(Key { width: first.width, left: i.a() });
    panels.insert(left_key(i.a()), first);

    let exact_width = |panels: &BTreeMap<Left, Panel>| {
        let mut s = CompensatedSum::new();
        for p in panels.values() {
            s.add(p.width);
        }
        s.value()
    };

    let mut tol_met = false;
    loop {
        if running <= tol {
            running = exact_width(&panels);
            if running <= tol {
                tol_met = true;
                break;
            }
        }
        if panels.len() >= panel_cap {
            break;
        }
        let Some(top) = heap.pop() else { break };
        let parent = panels.remove(&left_key(top.left)).expect("heap and map agree");
        let (l, r) = parent.interval.bisect();
        if !(l.a() < l.b() && r.a() < r.b()) {
            // panel cannot be split further in binary64
            panels.insert(left_key(top.left), parent);
            break;
        }
        let (pl, pr) = rayon::join(
            || integrate_panel(e, l, rule, class, ranges),
            || integrate_panel(e, r, rule, class, ranges),
        );
        let (pl, pr) = (pl?, pr?);
        running += pl.width + pr.width - parent.width;
        heap.push(Key { width: pl.width, left: l.a() });
        heap.push(Key { width: pr.width, left: r.a() });
        panels.insert(left_key(l.a()), pl);
        panels.insert(left_key(r.a()), pr);
    }
    let partition = Partition::from_panels(panels.into_values().collect());
    Ok(result_from(partition, rule, tol_met))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::ranges::{DerivativeRange, RangeConfig, SuppliedRanges};
    use std::f64::consts::E;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    fn ex(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn single_quartic_panel_is_exact() {
        let r = composite_integrate(
            &ex("t^4"),
            iv(0.0, 1.0),
            1,
            Rule::Classical,
            SmoothnessClass::C4,
            &RangeConfig::default(),
        )
        .unwrap();
        assert!((r.estimate - 0.208_333_333_333_333_3).abs() < 1e-15);
        let enc = r.enclosure.unwrap();
        assert_eq!(enc.theorem, Theorem::Eq4);
        assert_eq!(enc.width(), 0.0);
        assert!((enc.lower - 0.2).abs() < 1e-15);
    }

    #[test]
    fn linear_function_has_zero_width() {
        let r = composite_integrate(
            &ex("t"),
            iv(0.0, 1.0),
            8,
            Rule::Classical,
            SmoothnessClass::C1,
            &RangeConfig::default(),
        )
        .unwrap();
        assert_eq!(r.estimate, 0.5);
        assert_eq!(r.enclosure.unwrap().width(), 0.0);
        assert_eq!(r.panels, 8);
    }

    #[test]
    fn corrected_exp_contains_exact_value() {
        let e = ex("exp(t)");
        let i = iv(0.0, 1.0);
        let r = composite_integrate(&e, i, 4, Rule::Corrected, SmoothnessClass::C4, &RangeConfig { samples: 1025, inflation: 1.0 })
            .unwrap();
        let enc = r.enclosure.unwrap();
        assert!(enc.contains(E - 1.0));
        assert_eq!(enc.theorem, Theorem::Thm4);
        // per panel (11/57600)(M₄ - m₄)(1/4)⁴ times the panel width, on both sides
        let h = 0.25f64;
        let bound: f64 = (0..4)
            .map(|k| {
                let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
                2.0 * h * 11.0 / 57600.0 * (b.exp() - a.exp()) * h.powi(4)
            })
            .sum();
        assert!(enc.width() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn additivity_in_summation_order() {
        let e = ex("sin(t) + t^2");
        let i = iv(-1.0, 2.0);
        let r = composite_integrate(&e, i, 7, Rule::Classical, SmoothnessClass::C2, &RangeConfig { samples: 33, inflation: 1.05 })
            .unwrap();
        let mut s = CompensatedSum::new();
        for p in i.split(7) {
            s.add(simpson_estimate(&e, p).unwrap());
        }
        assert_eq!(r.estimate, s.value());
        let part = r.partition.unwrap();
        assert_eq!(part.breakpoints.first(), Some(&-1.0));
        assert_eq!(part.breakpoints.last(), Some(&2.0));
        assert!(part.breakpoints.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn global_range_decay_law() {
        // defect radius ~ h^k per panel, integral radius ~ h^(k+1), N panels: N^-k
        let e = ex("exp(t)");
        let i = iv(0.0, 1.0);
        let ranges = SuppliedRanges::new(None)
            .with(DerivativeRange::exact(1, i, 1.0, E).unwrap())
            .with(DerivativeRange::exact(2, i, 1.0, E).unwrap())
            .with(DerivativeRange::exact(3, i, 1.0, E).unwrap());
        for (class, k) in [(SmoothnessClass::C2, 2), (SmoothnessClass::C3, 3)] {
            let w1 = composite_integrate(&e, i, 1, Rule::Classical, class, &ranges)
                .unwrap()
                .partition
                .unwrap()
                .total_width();
            for n in [2usize, 4, 8, 16] {
                let wn = composite_integrate(&e, i, n, Rule::Classical, class, &ranges)
                    .unwrap()
                    .partition
                    .unwrap()
                    .total_width();
                let expect = w1 / (n as f64).powi(k);
                assert!((wn - expect).abs() <= 1e-12 * expect, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn adaptive_quadratic_is_one_panel() {
        let r = adaptive_integrate(
            &ex("t^2"),
            iv(0.0, 1.0),
            1e-10,
            Rule::Classical,
            SmoothnessClass::C2,
            &RangeConfig::default(),
            DEFAULT_PANEL_CAP,
        )
        .unwrap();
        assert_eq!(r.panels, 1);
        assert!(r.tol_met);
    }

    #[test]
    fn adaptive_cosh_corrected() {
        let r = adaptive_integrate(
            &ex("cosh(t)"),
            iv(-2.0, 2.0),
            1e-8,
            Rule::Corrected,
            SmoothnessClass::C4,
            &RangeConfig { samples: 65, inflation: 1.05 },
            DEFAULT_PANEL_CAP,
        )
        .unwrap();
        assert!(r.tol_met);
        let enc = r.enclosure.unwrap();
        assert!(enc.width() <= 1e-8);
        assert!(enc.contains(2.0 * 2f64.sinh()));
    }

    #[test]
    fn adaptive_width_is_monotone_and_cap_is_flagged() {
        let e = ex("exp(sin(3*t))");
        let i = iv(0.0, 2.0);
        let cfg = RangeConfig { samples: 33, inflation: 1.05 };
        let mut prev = f64::INFINITY;
        for cap in 1..=24 {
            let r = adaptive_integrate(&e, i, 1e-12, Rule::Classical, SmoothnessClass::C2, &cfg, cap)
                .unwrap();
            assert!(!r.tol_met);
            assert_eq!(r.panels, cap);
            let w = r.partition.unwrap().total_width();
            assert!(w <= prev, "cap {cap}: {w} > {prev}");
            prev = w;
        }
    }

    #[test]
    fn determinism_across_thread_counts() {
        let e = ex("coth(t)/t");
        let i = iv(1.0, 2.0);
        let cfg = RangeConfig { samples: 65, inflation: 1.05 };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                adaptive_integrate(&e, i, 1e-6, Rule::Classical, SmoothnessClass::C2, &cfg, 1 << 12)
                    .unwrap()
            })
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a, b);
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    }

    #[test]
    fn errors() {
        let cfg = RangeConfig::default();
        let e = ex("t");
        assert!(composite_integrate(&e, iv(0.0, 1.0), 0, Rule::Classical, SmoothnessClass::C1, &cfg).is_err());
        assert!(adaptive_integrate(&e, iv(0.0, 1.0), 0.0, Rule::Classical, SmoothnessClass::C1, &cfg, 4).is_err());
        assert!(matches!(
            composite_integrate(&ex("log(t)"), iv(-1.0, 1.0), 2, Rule::Classical, SmoothnessClass::C2, &cfg),
            Err(Error::Domain { .. })
        ));
    }
}
