//! Property suites run by `simpref verify`. Each property reports a slack:
//! the margin to its acceptance threshold, so that it passes iff `slack >= 0`.

use std::f64::consts::E;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::applications::{
    coth, coth_mean_bounds, coth_mean_corrected, eq11_pointwise, oracle_coth_mean, oracle_eq11_means,
};
use crate::bounds::{
    applicable_bounds, bound_convex2, bound_corrected, hh_enclosure, hh_refined_enclosure,
    majorization, narrowest, Convexity, SmoothnessClass, Theorem,
};
use crate::corpus::{corpus, corpus_intervals, CorpusFunction};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::extremal::{constant_search, d_ratio_closed_form, sharpness_ratio, sharpness_ratio_oracle, Witness};
use crate::ranges::{DerivativeRange, RangeProvider};
use crate::simpson::{corrected_defect, t_functional, t_via_representation, Interval};

pub const INTERVALS_PER_FUNCTION: usize = 20;
pub const SEARCH_TRIALS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Representations,
    Bounds,
    Sharpness,
    Coth,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "representations" => Suite::Representations,
            "bounds" => Suite::Bounds,
            "sharpness" => Suite::Sharpness,
            "coth" => Suite::Coth,
            "all" => Suite::All,
            _ => return Err(Error::Precondition(format!("unknown suite `{s}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Property {
    pub name: String,
    pub pass: bool,
    pub slack: f64,
}

impl Property {
    pub fn new(name: impl Into<String>, slack: f64) -> Self {
        Property { name: name.into(), pass: slack >= 0.0, slack }
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<Property>> {
    match suite {
        Suite::Representations => representations(seed),
        Suite::Bounds => bounds(seed),
        Suite::Sharpness => sharpness(seed),
        Suite::Coth => coth_suite(),
        Suite::All => {
            let mut out = representations(seed)?;
            out.extend(bounds(seed)?);
            out.extend(sharpness(seed)?);
            out.extend(coth_suite()?);
            Ok(out)
        }
    }
}

/// Magnitude of the values entering `T` on `i`.
pub fn value_scale(e: &Expr, i: Interval) -> Result<f64> {
    let mut s = 1.0f64;
    for t in [i.a(), i.midpoint(), i.b()] {
        s = s.max(e.eval(t)?.abs());
    }
    Ok(s)
}

fn cases(seed: u64) -> Vec<(CorpusFunction, Vec<Interval>)> {
    corpus()
        .into_iter()
        .enumerate()
        .map(|(k, f)| (f, corpus_intervals(seed, k, INTERVALS_PER_FUNCTION)))
        .collect()
}

pub fn conclusion_identities() -> Result<Vec<Property>> {
    let u = Interval::new(0.0, 1.0)?;
    let x4 = parse("t^4")?;
    let x5 = parse("t^5")?;
    Ok(vec![
        Property::new("conclusion-t4", 1e-12 - (t_functional(&x4, u)? - 1.0 / 120.0).abs()),
        Property::new("conclusion-t5", 1e-12 - (t_functional(&x5, u)? - 1.0 / 48.0).abs()),
        Property::new("conclusion-t4-corrected", 1e-12 - corrected_defect(&x4, u)?.abs()),
        Property::new("conclusion-t5-corrected", 1e-12 - corrected_defect(&x5, u)?.abs()),
    ])
}

/// Largest scaled gap between each representation and the oracle defect.
pub fn representation_errors(seed: u64) -> Result<[f64; 3]> {
    let per_case: Vec<Result<[f64; 3]>> = cases(seed)
        .par_iter()
        .map(|(f, intervals)| {
            let mut worst = [0.0f64; 3];
            for &i in intervals {
                let t = t_functional(&f.expr, i)?;
                let scale = value_scale(&f.expr, i)?;
                for (k, w) in worst.iter_mut().enumerate() {
                    let r = t_via_representation(&f.expr, i, k + 1)?;
                    *w = w.max((r - t).abs() / scale);
                }
            }
            Ok(worst)
        })
        .collect();
    let mut worst = [0.0f64; 3];
    for r in per_case {
        let r = r?;
        for k in 0..3 {
            worst[k] = worst[k].max(r[k]);
        }
    }
    Ok(worst)
}

fn representations(seed: u64) -> Result<Vec<Property>> {
    let mut out = conclusion_identities()?;
    let worst = representation_errors(seed)?;
    for (k, w) in worst.iter().enumerate() {
        out.push(Property::new(format!("representation-order-{}", k + 1), 1e-8 - w));
    }
    Ok(out)
}

/// Minimum scaled containment slack of the oracle defect per theorem, over
/// the corpus with analytic ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentReport {
    pub by_theorem: Vec<(Theorem, f64)>,
    pub convex2_lower: f64,
    pub convex2_upper: f64,
    pub corrected: f64,
    pub convex2_cases: usize,
    pub best_bound_excess: f64,
}

pub fn containment(seed: u64) -> Result<ContainmentReport> {
    const PLAIN: [Theorem; 5] = [Theorem::Thm0, Theorem::Thm1, Theorem::Eq7, Theorem::Thm2, Theorem::Eq4];
    type Row = ([f64; 5], f64, f64, f64, usize, f64);
    let rows: Vec<Result<Row>> = cases(seed)
        .par_iter()
        .map(|(f, intervals)| {
            let mut plain = [f64::INFINITY; 5];
            let (mut lo3, mut hi3, mut c4) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
            let mut n_convex = 0;
            let mut excess = f64::NEG_INFINITY;
            for &i in intervals {
                let t = t_functional(&f.expr, i)?;
                let scale = value_scale(&f.expr, i)?;
                let encs = applicable_bounds(&f.expr, i, SmoothnessClass::C4, f)?;
                for enc in &encs {
                    let k = PLAIN.iter().position(|&p| p == enc.theorem).expect("plain theorem");
                    plain[k] = plain[k].min(enc.slack(t) / scale);
                }
                let w = narrowest(&encs).expect("non-empty").width();
                let least = encs.iter().map(|e| e.width()).fold(f64::INFINITY, f64::min);
                excess = excess.max(w - least);
                let r4: DerivativeRange = f.range(&f.expr, i, 4)?;
                if r4.min >= 0.0 {
                    n_convex += 1;
                    let b3 = bound_convex2(&f.expr, i)?;
                    lo3 = lo3.min(t / scale);
                    hi3 = hi3.min((b3.upper - t) / scale);
                    let r = bound_corrected(i, &r4)?;
                    c4 = c4.min(r.slack(corrected_defect(&f.expr, i)?) / scale);
                }
            }
            Ok((plain, lo3, hi3, c4, n_convex, excess))
        })
        .collect();
    let mut plain = [f64::INFINITY; 5];
    let (mut lo3, mut hi3, mut c4, mut n, mut excess) =
        (f64::INFINITY, f64::INFINITY, f64::INFINITY, 0, f64::NEG_INFINITY);
    for row in rows {
        let (p, l, h, c, k, x) = row?;
        for j in 0..5 {
            plain[j] = plain[j].min(p[j]);
        }
        lo3 = lo3.min(l);
        hi3 = hi3.min(h);
        c4 = c4.min(c);
        n += k;
        excess = excess.max(x);
    }
    Ok(ContainmentReport {
        by_theorem: PLAIN.iter().copied().zip(plain).collect(),
        convex2_lower: lo3,
        convex2_upper: hi3,
        corrected: c4,
        convex2_cases: n,
        best_bound_excess: excess,
    })
}

/// Width ratio of the refined bracket to the plain one for `exp` on [0, 1],
/// and the smaller containment slack of `e - 1` in the refined bracket.
pub fn hh_refinement_exp() -> Result<(f64, f64)> {
    let u = Interval::new(0.0, 1.0)?;
    let e = parse("exp(t)")?;
    let plain = hh_enclosure(&e, u, Convexity::Convex)?;
    let refined = hh_refined_enclosure(&e, u, &DerivativeRange::exact(2, u, 1.0, E)?)?;
    Ok((refined.width() / plain.width(), refined.slack(E - 1.0)))
}

fn bounds(seed: u64) -> Result<Vec<Property>> {
    const TOL: f64 = 1e-10;
    let r = containment(seed)?;
    let mut out: Vec<Property> = r
        .by_theorem
        .iter()
        .map(|(th, s)| Property::new(format!("containment-{}", th.tag()), s + TOL))
        .collect();
    out.push(Property::new("convex2-lower", r.convex2_lower + TOL));
    out.push(Property::new("convex2-upper", r.convex2_upper + TOL));
    out.push(Property::new("corrected-containment", r.corrected + TOL));
    out.push(Property::new("convex2-cases-present", r.convex2_cases as f64 - 1.0));
    out.push(Property::new("best-bound-is-narrowest", 0.0 - r.best_bound_excess.max(0.0)));

    let (ratio, slack) = hh_refinement_exp()?;
    out.push(Property::new("hh-refined-contains", slack));
    out.push(Property::new("hh-refined-narrower", 1.0 - ratio));

    let u = Interval::new(0.0, 1.0)?;
    let sq = parse("t^2")?;
    let mut maj = f64::INFINITY;
    for (h, i, a, b) in [
        (&sq, u, 0.5, 0.5),
        (&sq, u, 0.0, 1.0),
        (&sq, u, 0.3, 0.7),
        (&parse("exp(t)")?, Interval::new(0.0, 2.0)?, 0.5, 1.5),
        (&parse("cosh(t)")?, Interval::new(-1.0, 3.0)?, -0.5, 2.5),
    ] {
        let m = majorization(h, i, a, b)?;
        maj = maj.min(m.lower_slack).min(m.upper_slack);
    }
    out.push(Property::new("majorization", maj + 1e-12));
    Ok(out)
}

fn sharpness(seed: u64) -> Result<Vec<Property>> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for a in [2.0, 10.0, 100.0] {
        let closed = d_ratio_closed_form(a);
        for r in [sharpness_ratio(Witness::DFunction, a)?, sharpness_ratio_oracle(Witness::DFunction, a)?] {
            worst = worst.max((r - closed).abs() / closed);
        }
    }
    out.push(Property::new("d-function-ratio", 1e-10 - worst));
    let r = sharpness_ratio(Witness::DFunction, 1e3)?;
    let c = 1.0 / 1152.0;
    out.push(Property::new("d-function-limit", (r - c * (1.0 - 3e-6)).min(c - r)));
    let r = sharpness_ratio(Witness::AbsCubic, 1.0)?;
    out.push(Property::new("abs-cubic-ratio", 1e-15 - (r - 1.0 / 288.0).abs()));
    let r = sharpness_ratio(Witness::X4, 0.5)?;
    out.push(Property::new("x4-remainder-tight", 1e-12 - (r - 1.0).abs()));

    let c2 = constant_search(SmoothnessClass::C2, seed, SEARCH_TRIALS)?;
    out.push(Property::new("search-c2-lower", c2.best_ratio - (1.0 / 288.0 - 1e-12)));
    out.push(Property::new("search-c2-upper", 1.0 / 162.0 + 1e-10 - c2.best_ratio));
    let c1 = constant_search(SmoothnessClass::C1, seed, SEARCH_TRIALS)?;
    out.push(Property::new("search-c1-upper", 5.0 / 72.0 + 1e-10 - c1.best_ratio));
    Ok(out)
}

/// `(y, x)` pairs with fixture means.
pub const COTH_PAIRS: [(f64, f64); 3] = [(0.5, 1.0), (1.0, 2.0), (0.1, 0.2)];

/// Smallest scaled slack of the pointwise bracket on a log grid in [1e-3, 10].
pub fn eq11_grid_slack(points: usize) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for j in 0..points {
        let t = 10f64.powf(-3.0 + 4.0 * j as f64 / (points - 1) as f64);
        let (lo, hi) = eq11_pointwise(t)?;
        let v = coth(t) / t;
        let scale = v.abs().max(1.0);
        worst = worst.min((v - lo) / scale).min((hi - v) / scale);
    }
    Ok(worst)
}

fn coth_suite() -> Result<Vec<Property>> {
    let mut out = vec![Property::new("eq11-grid", eq11_grid_slack(1000)? + 1e-12)];
    let (mut s5, mut s6, mut consistency) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for (y, x) in COTH_PAIRS {
        let m = oracle_coth_mean(y, x)?;
        let b = coth_mean_corrected(y, x)?;
        s5 = s5.min(m - b.lower).min(b.upper - m);
        s6 = s6.min(b.corrected_radius.unwrap_or(f64::NAN) - (m - b.corrected.unwrap_or(f64::NAN)).abs());
        let (lo, hi) = oracle_eq11_means(y, x)?;
        let scale = b.upper.abs().max(1.0);
        consistency = consistency.max((lo - b.lower).abs() / scale).max((hi - b.upper).abs() / scale);
    }
    out.push(Property::new("thm5-contains-mean", s5));
    out.push(Property::new("thm6-contains-mean", s6));
    out.push(Property::new("eq11-integrates-to-thm5", 1e-10 - consistency));
    let mut inside = f64::INFINITY;
    for j in 1..=20 {
        for k in 1..=20 {
            let y = 0.05 * j as f64;
            let b = coth_mean_corrected(y, y + 0.05 * k as f64)?;
            let c = b.corrected.unwrap_or(f64::NAN);
            inside = inside.min(c - b.lower).min(b.upper - c);
        }
    }
    out.push(Property::new("thm6-centre-in-thm5", inside));
    let b = coth_mean_bounds(0.999_999, 1.000_001)?;
    let (lo, hi) = eq11_pointwise(1.0)?;
    out.push(Property::new("thm5-narrow-limit", 1e-4 - (b.lower - lo).abs().max((b.upper - hi).abs())));
    Ok(out)
}
