//! Special functions and log-space combinatorics used by every other module.
//!
//! Everything here is pure and allocation-free except [`StirlingTable`],
//! which is built once and shared immutably.

mod gamma;
mod incgamma;
mod stirling;

pub use gamma::{digamma, ln_gamma, trigamma};
pub use incgamma::reg_lower_incomplete_gamma;
pub(crate) use incgamma::{std_normal_cdf, std_normal_quantile};
pub use stirling::StirlingTable;

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Overflow-safe `log(sum(exp(values)))`.
///
/// Errors on empty input.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("log_sum_exp: empty input"));
    }
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = values.iter().map(|v| (v - m).exp()).sum();
    Ok(m + sum.ln())
}

/// Two-argument log-sum-exp, tolerant of `-inf` on either side.
#[inline]
pub(crate) fn lse2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
