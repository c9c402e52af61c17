//! Log-space triangle of unsigned Stirling numbers of the first kind.

use super::lse2;
use crate::error::{Error, Result};

/// Cached triangle of `log s_{n,k}` for `1 <= k <= n <= n_max`.
///
/// Built once per `n_max` in O(n_max^2) via the recurrence
/// `s_{n+1,k} = s_{n,k-1} + n * s_{n,k}` evaluated with log-sum-exp, so the
/// table survives `n_max = 1000` where the largest entry is around
/// `log(999!)`. Immutable after construction and safe to share.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    n_max: usize,
    // row n occupies the n entries starting at n*(n-1)/2, holding k = 1..=n
    log_entries: Vec<f64>,
}

impl StirlingTable {
    /// Build the triangle up to `n_max >= 1`.
    pub fn build(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::invalid("StirlingTable: n_max must be >= 1"));
        }
        let mut log_entries = Vec::with_capacity(n_max * (n_max + 1) / 2);
        log_entries.push(0.0); // s_{1,1} = 1
        for n in 1..n_max {
            let prev_start = n * (n - 1) / 2;
            let ln_n = (n as f64).ln();
            for k in 1..=(n + 1) {
                let from_lower = if k >= 2 {
                    log_entries[prev_start + k - 2]
                } else {
                    f64::NEG_INFINITY
                };
                let from_same = if k <= n {
                    ln_n + log_entries[prev_start + k - 1]
                } else {
                    f64::NEG_INFINITY
                };
                log_entries.push(lse2(from_lower, from_same));
            }
        }
        Ok(StirlingTable { n_max, log_entries })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `log s_{n,k}`, checked.
    pub fn lookup(&self, n: usize, k: usize) -> Result<f64> {
        if n == 0 || n > self.n_max {
            return Err(Error::invalid(format!(
                "StirlingTable::lookup: n={n} outside 1..={}",
                self.n_max
            )));
        }
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "StirlingTable::lookup: k={k} outside 1..={n}"
            )));
        }
        Ok(self.log_unchecked(n, k))
    }

    #[inline]
    pub(crate) fn log_unchecked(&self, n: usize, k: usize) -> f64 {
        debug_assert!(n >= 1 && n <= self.n_max && k >= 1 && k <= n);
        self.log_entries[n * (n - 1) / 2 + k - 1]
    }
}
