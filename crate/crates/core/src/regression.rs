//! Log–log least squares standing in for box-counting dimensions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimum number of usable scales for a fit.
pub const MIN_SCALES: usize = 3;

/// Fit of `log N(ρ)` against `log(1/ρ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimEstimate<T> {
    pub slope: T,
    pub intercept: T,
    /// Coefficient of determination; 1 for a perfect (or constant) fit.
    pub r2: T,
    /// Scales actually used, strictly decreasing.
    pub scales: Vec<T>,
    /// `ln N` at each scale.
    pub log_counts: Vec<T>,
}

/// Ordinary least squares of `y` on `x`; returns `(slope, intercept, r²)`.
pub fn least_squares<T: Scalar>(x: &[T], y: &[T]) -> (T, T, T) {
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > T::zero() {
        sxy / sxx
    } else {
        T::zero()
    };
    let intercept = my - slope * mx;
    let r2 = if syy > T::zero() {
        (sxy * sxy / (sxx * syy)).min(T::one())
    } else {
        T::one()
    };
    (slope, intercept, r2)
}

/// Regresses `ln count` on `ln(1/ρ)`. Zero counts are dropped; fewer than
/// [`MIN_SCALES`] survivors is an error. Scales are sorted decreasing first.
pub fn fit_box_dimension<T: Scalar>(scales: &[T], counts: &[u64]) -> Result<DimEstimate<T>> {
    if scales.len() != counts.len() {
        return Err(Error::Parameter(format!(
            "{} scales but {} counts",
            scales.len(),
            counts.len()
        )));
    }
    let mut pairs: Vec<(T, u64)> = scales
        .iter()
        .copied()
        .zip(counts.iter().copied())
        .filter(|&(_, c)| c > 0)
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite scales"));
    pairs.dedup_by(|a, b| a.0 == b.0);
    if pairs.len() < MIN_SCALES {
        return Err(Error::InsufficientData {
            usable: pairs.len(),
            needed: MIN_SCALES,
        });
    }
    let x: Vec<T> = pairs.iter().map(|&(s, _)| -s.ln()).collect();
    let y: Vec<T> = pairs.iter().map(|&(_, c)| T::lit(c as f64).ln()).collect();
    let (slope, intercept, r2) = least_squares(&x, &y);
    Ok(DimEstimate {
        slope,
        intercept,
        r2,
        scales: pairs.into_iter().map(|(s, _)| s).collect(),
        log_counts: y,
    })
}

/// Parses a ladder `base:from:to` into `base^from, …, base^to` (step ±1).
pub fn scale_ladder(base: f64, from: i32, to: i32) -> Vec<f64> {
    let step = if to >= from { 1 } else { -1 };
    let mut out = Vec::new();
    let mut e = from;
    loop {
        out.push(base.powi(e));
        if e == to {
            break;
        }
        e += step;
    }
    out
}
