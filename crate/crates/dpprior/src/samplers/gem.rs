//! Stick-breaking draws and the simulated CDF of the largest ranked weight.

use serde::Serialize;

use super::rng::RngStream;
use crate::error::{Error, Result};

/// Truncation policy for stick-breaking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GemPolicy {
    /// Break exactly this many sticks.
    FixedLen(usize),
    /// Break sticks until the leftover mass drops below the threshold.
    LeftoverBelow(f64),
}

impl Default for GemPolicy {
    fn default() -> Self {
        // below any density-evaluation tolerance used downstream
        GemPolicy::LeftoverBelow(1e-10)
    }
}

/// Finite prefix of the size-biased stick weights plus the unbroken residual.
#[derive(Debug, Clone, PartialEq)]
pub struct GemDraw {
    pub weights: Vec<f64>,
    pub leftover: f64,
}

#[inline]
fn break_fraction(alpha: f64, rng: &mut RngStream) -> f64 {
    // Beta(1, alpha) via inverse CDF: v = 1 - u^{1/alpha} = -expm1(ln(u)/alpha);
    // the expm1 form stays accurate for large alpha, the clamp keeps v < 1.
    let u = rng.uniform();
    (-(u.ln() / alpha).exp_m1()).min(1.0 - f64::EPSILON)
}

fn check_alpha(alpha: f64, what: &str) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what}: alpha must be > 0, got {alpha}")))
    }
}

/// Stick-breaking draw: `w_h = v_h prod_{l<h}(1 - v_l)` with
/// `v_h ~ Beta(1, alpha)`.
pub fn sample_gem(alpha: f64, rng: &mut RngStream, policy: GemPolicy) -> Result<GemDraw> {
    check_alpha(alpha, "sample_gem")?;
    let mut weights = Vec::new();
    let mut leftover = 1.0f64;
    match policy {
        GemPolicy::FixedLen(h) => {
            if h == 0 {
                return Err(Error::invalid("sample_gem: fixed length must be >= 1"));
            }
            for _ in 0..h {
                let w = break_fraction(alpha, rng) * leftover;
                weights.push(w);
                leftover -= w;
            }
        }
        GemPolicy::LeftoverBelow(eps) => {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Error::invalid(format!(
                    "sample_gem: leftover threshold must lie in (0,1), got {eps}"
                )));
            }
            while leftover >= eps {
                let w = break_fraction(alpha, rng) * leftover;
                weights.push(w);
                leftover -= w;
            }
        }
    }
    Ok(GemDraw {
        weights,
        leftover: leftover.max(0.0),
    })
}

/// Exact draw of the largest ranked weight: keep breaking sticks until the
/// leftover mass is smaller than the current maximum, at which point no
/// future weight can exceed it. Terminates almost surely.
pub fn sample_ranked_max(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    check_alpha(alpha, "sample_ranked_max")?;
    let mut leftover = 1.0f64;
    let mut max_w = 0.0f64;
    while leftover > max_w {
        let w = break_fraction(alpha, rng) * leftover;
        leftover -= w;
        if w > max_w {
            max_w = w;
        }
    }
    Ok(max_w)
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Estimate `F_alpha(x) = p(largest ranked weight <= x)` by simulation.
/// Returns the exact constants at `x <= 0` and `x >= 1`.
pub fn estimate_f_alpha(alpha: f64, x: f64, draws: usize, rng: &mut RngStream) -> Result<FEstimate> {
    check_alpha(alpha, "estimate_f_alpha")?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "estimate_f_alpha: x must lie in [0,1], got {x}"
        )));
    }
    if draws == 0 {
        return Err(Error::invalid("estimate_f_alpha: draws must be >= 1"));
    }
    if x == 0.0 {
        return Ok(FEstimate { value: 0.0, std_error: 0.0 });
    }
    if x >= 1.0 {
        return Ok(FEstimate { value: 1.0, std_error: 0.0 });
    }
    let mut hits = 0usize;
    for _ in 0..draws {
        if sample_ranked_max(alpha, rng)? <= x {
            hits += 1;
        }
    }
    let p = hits as f64 / draws as f64;
    Ok(FEstimate {
        value: p,
        std_error: (p * (1.0 - p) / draws as f64).sqrt(),
    })
}

/// Configuration of the cached `F_alpha` surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FAlphaCacheConfig {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub alpha_nodes: usize,
    pub draws_per_node: usize,
    pub x_grid: usize,
}

impl Default for FAlphaCacheConfig {
    fn default() -> Self {
        FAlphaCacheConfig {
            alpha_lo: 1e-2,
            alpha_hi: 1e2,
            alpha_nodes: 33,
            draws_per_node: 100_000,
            x_grid: 513,
        }
    }
}

/// Empirical CDF of the largest ranked weight, tabulated on a log-spaced
/// alpha grid and an even x grid.
///
/// Per node the estimate is an empirical CDF from sorted draws, so it is
/// nondecreasing in x by construction; evaluation interpolates linearly in x
/// and in ln(alpha), which preserves that monotonicity. Outside the alpha
/// grid the nearest node is used. Node `i` draws from `rng.substream(i+1)`,
/// so the build is reproducible regardless of evaluation order.
#[derive(Debug, Clone)]
pub struct FAlphaCache {
    ln_alphas: Vec<f64>,
    /// values[i][j] = F_hat at (alpha_i, x_j), x_j = j/(x_grid-1)
    values: Vec<Vec<f64>>,
    x_grid: usize,
}

impl FAlphaCache {
    /// Build the cache, one substream per alpha node. With the `parallel`
    /// feature the nodes run on the rayon pool.
    pub fn build(config: FAlphaCacheConfig, rng: &RngStream) -> Result<Self> {
        let nodes = Self::node_positions(&config)?;
        let columns = crate::exec::map_indexed(&nodes, |i, &la| {
            Self::build_node(la.exp(), &config, &mut rng.substream(i as u64 + 1))
        });
        let mut values = Vec::with_capacity(columns.len());
        for c in columns {
            values.push(c?);
        }
        Ok(FAlphaCache {
            ln_alphas: nodes,
            values,
            x_grid: config.x_grid,
        })
    }

    /// Sequential build, always available; bit-identical to [`build`](Self::build).
    pub fn build_seq(config: FAlphaCacheConfig, rng: &RngStream) -> Result<Self> {
        let nodes = Self::node_positions(&config)?;
        let mut values = Vec::with_capacity(nodes.len());
        for (i, &la) in nodes.iter().enumerate() {
            values.push(Self::build_node(
                la.exp(),
                &config,
                &mut rng.substream(i as u64 + 1),
            )?);
        }
        Ok(FAlphaCache {
            ln_alphas: nodes,
            values,
            x_grid: config.x_grid,
        })
    }

    fn node_positions(config: &FAlphaCacheConfig) -> Result<Vec<f64>> {
        if config.alpha_nodes < 2 || config.x_grid < 2 || config.draws_per_node == 0 {
            return Err(Error::invalid("FAlphaCache: degenerate configuration"));
        }
        if !(config.alpha_lo > 0.0 && config.alpha_hi > config.alpha_lo) {
            return Err(Error::invalid("FAlphaCache: need 0 < alpha_lo < alpha_hi"));
        }
        let lo = config.alpha_lo.ln();
        let hi = config.alpha_hi.ln();
        Ok((0..config.alpha_nodes)
            .map(|i| lo + (hi - lo) * i as f64 / (config.alpha_nodes - 1) as f64)
            .collect())
    }

    fn build_node(alpha: f64, config: &FAlphaCacheConfig, rng: &mut RngStream) -> Result<Vec<f64>> {
        let mut draws = Vec::with_capacity(config.draws_per_node);
        for _ in 0..config.draws_per_node {
            draws.push(sample_ranked_max(alpha, rng)?);
        }
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let m = config.x_grid - 1;
        Ok((0..config.x_grid)
            .map(|j| {
                let x = j as f64 / m as f64;
                let count = draws.partition_point(|&w| w <= x);
                count as f64 / draws.len() as f64
            })
            .collect())
    }

    /// Interpolated estimate of `F_alpha(x)`.
    pub fn f(&self, alpha: f64, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let la = alpha
            .ln()
            .clamp(self.ln_alphas[0], *self.ln_alphas.last().unwrap());
        let hi = self
            .ln_alphas
            .partition_point(|&v| v < la)
            .clamp(1, self.ln_alphas.len() - 1);
        let lo = hi - 1;
        let t = (la - self.ln_alphas[lo]) / (self.ln_alphas[hi] - self.ln_alphas[lo]);
        let f_lo = self.column_value(lo, x);
        let f_hi = self.column_value(hi, x);
        (1.0 - t) * f_lo + t * f_hi
    }

    fn column_value(&self, node: usize, x: f64) -> f64 {
        let m = (self.x_grid - 1) as f64;
        let pos = x * m;
        let j = (pos.floor() as usize).min(self.x_grid - 2);
        let frac = pos - j as f64;
        let col = &self.values[node];
        (1.0 - frac) * col[j] + frac * col[j + 1]
    }
}
