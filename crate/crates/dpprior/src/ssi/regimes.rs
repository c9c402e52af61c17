//! Monotonicity and curvature regimes of the conditional weight slices, with
//! the stationary-point formulas for the non-monotone cases.

use serde::Serialize;

use crate::error::{Error, Result};

/// Shape of a one-dimensional conditional slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SliceBehavior {
    Increasing,
    Decreasing,
    Constant,
    /// Concave with an interior maximum.
    ConcaveWithMax,
    /// Convex with an interior minimum.
    ConvexWithMin,
}

/// Regime classification at a fixed precision value. Size-biased entries
/// describe `p(w1 | w2, alpha)` and `p(w2 | w1, alpha)` on the open simplex;
/// ranked entries describe the restriction to the saturated subregion where
/// the simulated-CDF factor is one. The size-biased w1 slice is classified
/// for generic `w2 > 0`; at exactly `alpha = 2` the degenerate edge `w2 = 0`
/// is constant instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub alpha: f64,
    pub size_biased_w1: SliceBehavior,
    pub size_biased_w2: SliceBehavior,
    pub ranked_w1: SliceBehavior,
    pub ranked_w2: SliceBehavior,
}

/// Classify the conditional slices at `alpha > 0` from the signs of the
/// analytic partial derivatives.
pub fn regime_derivative_signs(alpha: f64) -> Result<RegimeReport> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be > 0, got {alpha}")));
    }
    let size_biased_w1 = if alpha <= 1.0 {
        SliceBehavior::Increasing
    } else if alpha < 2.0 {
        SliceBehavior::ConcaveWithMax
    } else {
        SliceBehavior::Decreasing
    };
    let size_biased_w2 = if alpha < 1.0 {
        SliceBehavior::Increasing
    } else if alpha == 1.0 {
        SliceBehavior::Constant
    } else {
        SliceBehavior::Decreasing
    };
    let ranked = if alpha < 1.0 {
        SliceBehavior::ConvexWithMin
    } else {
        SliceBehavior::Decreasing
    };
    Ok(RegimeReport {
        alpha,
        size_biased_w1,
        size_biased_w2,
        ranked_w1: ranked,
        ranked_w2: ranked,
    })
}

/// Interior maximizer of the size-biased w1 slice, `w1 = 1 - w2/(2-alpha)`,
/// defined for `1 < alpha < 2`.
pub fn sb_w1_max_location(alpha: f64, w2: f64) -> Option<f64> {
    (alpha > 1.0 && alpha < 2.0).then(|| 1.0 - w2 / (2.0 - alpha))
}

/// Interior minimizer of the ranked w1 slice on the saturated subregion,
/// `w1 = (1 - w2)/(2 - alpha)`, defined for `0 < alpha < 1`.
pub fn ranked_w1_min_location(alpha: f64, w2: f64) -> Option<f64> {
    (alpha > 0.0 && alpha < 1.0).then(|| (1.0 - w2) / (2.0 - alpha))
}

/// Interior minimizer of the ranked w2 slice, `w2 = (1 - w1)/(2 - alpha)`,
/// defined for `0 < alpha < 1`.
pub fn ranked_w2_min_location(alpha: f64, w1: f64) -> Option<f64> {
    (alpha > 0.0 && alpha < 1.0).then(|| (1.0 - w1) / (2.0 - alpha))
}
