//! Exponential rate fits on error curves.

use alloc::vec::Vec;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::linear_regression;
use crate::{Error, Result};

/// Replacement value for zero errors.
pub const ERROR_FLOOR: f64 = 1e-16;
/// Minimum number of points in a fit window.
pub const MIN_FIT_POINTS: usize = 4;

/// Error samples `err(x)`; entries at or below the floor are clamped to it
/// and flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    x: Vec<f64>,
    err: Vec<f64>,
    floored: Vec<bool>,
}

impl ErrorCurve {
    pub fn new(x: Vec<f64>, err: Vec<f64>) -> Result<Self> {
        if x.len() != err.len() {
            return Err(Error::invalid("x and err differ in length"));
        }
        if x.iter().chain(&err).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if err.iter().any(|&e| e < 0.0) {
            return Err(Error::invalid("errors must be non-negative"));
        }
        let floored: Vec<bool> = err.iter().map(|&e| e <= ERROR_FLOOR).collect();
        let err = err.iter().map(|&e| e.max(ERROR_FLOOR)).collect();
        Ok(ErrorCurve { x, err, floored })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn err(&self) -> &[f64] {
        &self.err
    }

    pub fn floored(&self) -> &[bool] {
        &self.floored
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowPolicy {
    /// Every point before the first floored one.
    All,
    /// Drops the first 20% and stops before the first error under
    /// `100 × ERROR_FLOOR`.
    AutoTail,
}

/// Least-squares line through `(x, ln err)` on `window`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: Range<usize>,
}

impl RateFit {
    /// Decay rate, `-slope`.
    pub fn rate(&self) -> f64 {
        -self.slope
    }
}

fn select_window(curve: &ErrorCurve, policy: WindowPolicy) -> Range<usize> {
    let n = curve.len();
    let (start, cutoff) = match policy {
        WindowPolicy::All => (0, ERROR_FLOOR),
        WindowPolicy::AutoTail => (n / 5, 100.0 * ERROR_FLOOR),
    };
    let end = (start..n)
        .find(|&i| curve.floored[i] || curve.err[i] < cutoff)
        .unwrap_or(n);
    start..end.max(start)
}

pub fn fit_rate(curve: &ErrorCurve, policy: WindowPolicy) -> Result<RateFit> {
    let window = select_window(curve, policy);
    if window.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            got: window.len(),
        });
    }
    let x = &curve.x[window.clone()];
    let y: Vec<f64> = curve.err[window.clone()].iter().map(|e| e.ln()).collect();
    let (slope, intercept, r2) = linear_regression(x, &y);
    Ok(RateFit {
        slope,
        intercept,
        r2,
        window,
    })
}

/// Outcome of comparing a measured rate with a prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateVerdict {
    pub pass: bool,
    pub measured: f64,
    pub predicted: f64,
    /// `measured / predicted`.
    pub ratio: f64,
}

/// Passes iff `|-slope - γ| ≤ tolerance_rel · γ`.
pub fn compare_rate(fit: &RateFit, predicted_gamma: f64, tolerance_rel: f64) -> RateVerdict {
    let measured = fit.rate();
    RateVerdict {
        pass: predicted_gamma > 0.0
            && (measured - predicted_gamma).abs() <= tolerance_rel * predicted_gamma,
        measured,
        predicted: predicted_gamma,
        ratio: measured / predicted_gamma,
    }
}
