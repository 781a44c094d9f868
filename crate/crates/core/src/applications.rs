//! Two-sided bounds and a corrected estimate for the mean of `coth t / t`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simpson::{oracle_integrate, Interval, ORACLE_TOL};

const SERIES_CUTOFF: f64 = 1e-4;

/// Lower-bound coefficient of `x² + xy + y²`.
pub const THM5_COEFFICIENT: f64 = 16.0 / 243.0;
/// Correction coefficient of `x² + xy + y²` for the mean.
pub const THM6_CENTRE_COEFFICIENT: f64 = 4.0 / 135.0;
/// Radius coefficient of `(x⁵ - y⁵)/(x - y)`.
pub const THM6_RADIUS_COEFFICIENT: f64 = 22.0 / 1125.0;

/// `coth t` for `t > 0`, with the series `1/t + t/3 - t³/45` near zero.
pub fn coth(t: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        1.0 / t + t / 3.0 - t.powi(3) / 45.0
    } else {
        1.0 / t.tanh()
    }
}

/// `(coth x - coth y)/(x - y)`, via `-sinh(x - y)/(sinh x sinh y)` where
/// that does not overflow.
fn coth_slope(y: f64, x: f64) -> f64 {
    let h = x - y;
    if x < 300.0 && y >= SERIES_CUTOFF {
        -(h.sinh() / h) / (x.sinh() * y.sinh())
    } else {
        (coth(x) - coth(y)) / h
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CothBounds {
    pub y: f64,
    pub x: f64,
    pub lower: f64,
    pub upper: f64,
    pub corrected: Option<f64>,
    pub corrected_radius: Option<f64>,
}

impl CothBounds {
    pub fn contains(&self, mean: f64) -> bool {
        self.lower <= mean && mean <= self.upper
    }

    /// Whether `mean` lies within `corrected ± corrected_radius`.
    pub fn corrected_contains(&self, mean: f64) -> Option<bool> {
        Some((mean - self.corrected?).abs() <= self.corrected_radius?)
    }
}

fn check_pair(y: f64, x: f64) -> Result<()> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::Domain { what: "lower limit must be positive", at: y });
    }
    if !(x > y) || !x.is_finite() {
        return Err(Error::Domain { what: "upper limit must exceed the lower limit", at: x });
    }
    Ok(())
}

fn quadratic_mean(y: f64, x: f64) -> f64 {
    x * x + x * y + y * y
}

/// `2/3 - (coth x - coth y)/(x - y) - (16/243)(x² + xy + y²) <= mean <= 2/3 - (coth x - coth y)/(x - y)`.
pub fn coth_mean_bounds(y: f64, x: f64) -> Result<CothBounds> {
    check_pair(y, x)?;
    let upper = 2.0 / 3.0 - coth_slope(y, x);
    Ok(CothBounds {
        y,
        x,
        lower: upper - THM5_COEFFICIENT * quadratic_mean(y, x),
        upper,
        corrected: None,
        corrected_radius: None,
    })
}

/// The bracket of [`coth_mean_bounds`] plus the corrected estimate
/// `2/3 - (coth x - coth y)/(x - y) - (4/135)(x² + xy + y²)` with radius
/// `(22/1125)(x⁵ - y⁵)/(x - y)`.
pub fn coth_mean_corrected(y: f64, x: f64) -> Result<CothBounds> {
    let mut b = coth_mean_bounds(y, x)?;
    let quintic = x.powi(4) + x.powi(3) * y + x * x * y * y + x * y.powi(3) + y.powi(4);
    b.corrected = Some(b.upper - THM6_CENTRE_COEFFICIENT * quadratic_mean(y, x));
    b.corrected_radius = Some(THM6_RADIUS_COEFFICIENT * quintic);
    Ok(b)
}

/// `coth²t - 1/3 - (16/81)t² <= coth t / t <= coth²t - 1/3`.
pub fn eq11_pointwise(t: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain { what: "pointwise bracket needs t > 0", at: t });
    }
    let c = coth(t);
    let upper = c * c - 1.0 / 3.0;
    Ok((upper - 16.0 / 81.0 * t * t, upper))
}

/// `(1/(x - y)) ∫_y^x coth t / t dt` by the adaptive oracle.
pub fn oracle_coth_mean(y: f64, x: f64) -> Result<f64> {
    check_pair(y, x)?;
    let i = Interval::new(y, x)?;
    Ok(oracle_integrate(|t| Ok(coth(t) / t), i, ORACLE_TOL)? / i.width())
}

/// Mean of either side of the pointwise bracket over `[y, x]`, by the oracle.
pub fn oracle_eq11_means(y: f64, x: f64) -> Result<(f64, f64)> {
    check_pair(y, x)?;
    let i = Interval::new(y, x)?;
    let lo = oracle_integrate(|t| eq11_pointwise(t).map(|p| p.0), i, ORACLE_TOL)?;
    let hi = oracle_integrate(|t| eq11_pointwise(t).map(|p| p.1), i, ORACLE_TOL)?;
    Ok((lo / i.width(), hi / i.width()))
}
