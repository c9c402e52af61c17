//! Joint densities of the leading stick weights, conditional on the
//! precision parameter or mixed over a prior, in size-biased and ranked
//! order.
//!
//! Densities are defined on open domains only; boundary or out-of-domain
//! points are domain errors rather than silent zeros, since the factors can
//! vanish or blow up there depending on the precision parameter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::priors::PriorSpec;
use crate::quad::integrate_half_line;
use crate::samplers::FAlphaCache;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must be > 0, got {alpha}")))
    }
}

fn check_simplex_pair(w1: f64, w2: f64) -> Result<()> {
    if w1 > 0.0 && w2 > 0.0 && w1 + w2 < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "(w1, w2) = ({w1}, {w2}) is not interior to the simplex"
        )))
    }
}

fn check_ranked_pair(w1: f64, w2: f64) -> Result<()> {
    if w1 > 0.0 && w2 > 0.0 && w1 + w2 < 1.0 && w2 < w1 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "(w1, w2) = ({w1}, {w2}) is not interior to the ranked region"
        )))
    }
}

/// Joint density of the first two size-biased weights:
/// `alpha^2 (1-w1-w2)^(alpha-1) / (1-w1)`.
pub fn sb_joint_density(w1: f64, w2: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_simplex_pair(w1, w2)?;
    Ok(alpha * alpha * (1.0 - w1 - w2).powf(alpha - 1.0) / (1.0 - w1))
}

/// Joint density of a length-H prefix of size-biased weights:
/// `alpha^H (1-sum w)^(alpha-1) / prod_{j<H} (1 - w_1 - ... - w_j)`.
pub fn sb_joint_density_prefix(weights: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if weights.is_empty() {
        return Err(Error::invalid("sb_joint_density_prefix: empty prefix"));
    }
    let mut log_denominator = 0.0;
    let mut partial = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if !(w > 0.0) {
            return Err(Error::domain(format!("weight {i} must be positive, got {w}")));
        }
        partial += w;
        if partial >= 1.0 {
            return Err(Error::domain(format!(
                "partial sums must stay below 1; reached {partial}"
            )));
        }
        if i + 1 < weights.len() {
            log_denominator += (1.0 - partial).ln();
        }
    }
    let h = weights.len() as f64;
    let log_density = h * alpha.ln() + (alpha - 1.0) * (1.0 - partial).ln() - log_denominator;
    Ok(log_density.exp())
}

/// Closed-form mixed size-biased density under Ga(a, b):
/// `a (a+1) b^a (b - log(1-w1-w2))^(-a-2) / ((1-w1)(1-w1-w2))`.
pub fn sb_mixed_gamma_density(w1: f64, w2: f64, a: f64, b: f64) -> Result<f64> {
    check_gamma_params(a, b)?;
    check_simplex_pair(w1, w2)?;
    let rest = 1.0 - w1 - w2;
    let base = b - rest.ln();
    Ok(a * (a + 1.0) * b.powf(a) * base.powf(-a - 2.0) / ((1.0 - w1) * rest))
}

/// Closed-form marginal of the first size-biased weight under Ga(a, b).
pub fn sb_mixed_gamma_marginal_w1(w1: f64, a: f64, b: f64) -> Result<f64> {
    check_gamma_params(a, b)?;
    if !(w1 > 0.0 && w1 < 1.0) {
        return Err(Error::domain(format!("w1 must lie in (0,1), got {w1}")));
    }
    let base = b - (1.0 - w1).ln();
    Ok(a * b.powf(a) * base.powf(-a - 1.0) / (1.0 - w1))
}

/// Closed-form CDF of the first size-biased weight under Ga(a, b):
/// `1 - (b / (b - log(1-x)))^a`.
pub fn sb_mixed_gamma_cdf_w1(x: f64, a: f64, b: f64) -> Result<f64> {
    check_gamma_params(a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x must lie in [0,1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (b / (b - (1.0 - x).ln())).powf(a))
}

fn check_gamma_params(a: f64, b: f64) -> Result<()> {
    if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("gamma parameters must be positive, got ({a}, {b})")))
    }
}

/// Mixed size-biased density under any proper prior, by quadrature over the
/// precision parameter. For gamma priors this agrees with
/// [`sb_mixed_gamma_density`] to quadrature tolerance.
pub fn sb_mixed_density(w1: f64, w2: f64, prior: &PriorSpec) -> Result<f64> {
    require_proper(prior, "sb_mixed_density")?;
    check_simplex_pair(w1, w2)?;
    let log_rest = (1.0 - w1 - w2).ln();
    let log_front = (1.0 - w1).ln();
    let r = integrate_half_line(
        |ln_alpha| {
            let alpha = ln_alpha.exp();
            2.0 * ln_alpha + (alpha - 1.0) * log_rest - log_front
                + prior.log_density_ln(ln_alpha)
        },
        1e-9,
    );
    Ok(r.value)
}

/// Joint density of the two largest ranked weights given the precision
/// parameter. On the subregion where `w2 >= (1-w1)/2` the simulated-CDF
/// factor is exactly one; elsewhere it comes from the cache.
pub fn ranked_joint_density(
    w1: f64,
    w2: f64,
    alpha: f64,
    cache: &FAlphaCache,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_ranked_pair(w1, w2)?;
    let rest = 1.0 - w1 - w2;
    let base = alpha * alpha * rest.powf(alpha - 1.0) / (w1 * w2);
    let x = w2 / rest;
    let f = if x >= 1.0 { 1.0 } else { cache.f(alpha, x) };
    Ok(base * f)
}

/// Mixed ranked density under a proper prior, by quadrature against
/// [`ranked_joint_density`]. The simulated-CDF factor carries Monte-Carlo
/// error, so the quadrature tolerance is looser than for the size-biased
/// case.
pub fn ranked_mixed_density(
    w1: f64,
    w2: f64,
    prior: &PriorSpec,
    cache: &FAlphaCache,
) -> Result<f64> {
    require_proper(prior, "ranked_mixed_density")?;
    check_ranked_pair(w1, w2)?;
    let rest = 1.0 - w1 - w2;
    let log_rest = rest.ln();
    let log_front = (w1 * w2).ln();
    let x = w2 / rest;
    let r = integrate_half_line(
        |ln_alpha| {
            let alpha = ln_alpha.exp();
            let log_f = if x >= 1.0 {
                0.0
            } else {
                let f = cache.f(alpha, x);
                if f > 0.0 {
                    f.ln()
                } else {
                    f64::NEG_INFINITY
                }
            };
            2.0 * ln_alpha + (alpha - 1.0) * log_rest - log_front
                + log_f
                + prior.log_density_ln(ln_alpha)
        },
        1e-7,
    );
    Ok(r.value)
}

fn require_proper(prior: &PriorSpec, what: &str) -> Result<()> {
    if prior.is_proper() {
        Ok(())
    } else {
        Err(Error::UnsupportedPrior(format!(
            "{what}: improper priors are rejected"
        )))
    }
}

/// What a weight grid conditions on.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightsGiven {
    Alpha(f64),
    Prior(PriorSpec),
}

/// Weight ordering for grid evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightsMode {
    SizeBiased,
    Ranked,
}

/// One grid evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub w1: f64,
    pub w2: f64,
    pub density: f64,
}

/// Evaluate a density over the interior cell midpoints of an
/// `grid x grid` lattice on (0,1)^2, keeping only in-domain points, ordered
/// by w1 then w2. Ranked grids need the simulated-CDF cache.
///
/// With the `parallel` feature, rows are evaluated on the rayon pool; the
/// output order is independent of the schedule.
pub fn weights_grid(
    mode: WeightsMode,
    given: &WeightsGiven,
    grid: usize,
    cache: Option<&FAlphaCache>,
) -> Result<Vec<GridPoint>> {
    let rows = grid_rows(grid)?;
    let results = crate::exec::map_indexed(&rows, |_, &w1| grid_row(mode, given, grid, cache, w1));
    collect_rows(results)
}

/// Sequential twin of [`weights_grid`], kept for benchmarking and for use
/// without the thread pool.
pub fn weights_grid_seq(
    mode: WeightsMode,
    given: &WeightsGiven,
    grid: usize,
    cache: Option<&FAlphaCache>,
) -> Result<Vec<GridPoint>> {
    let rows = grid_rows(grid)?;
    let results: Vec<_> = rows
        .iter()
        .map(|&w1| grid_row(mode, given, grid, cache, w1))
        .collect();
    collect_rows(results)
}

fn grid_rows(grid: usize) -> Result<Vec<f64>> {
    if grid < 2 {
        return Err(Error::invalid("weights_grid: grid must be >= 2"));
    }
    Ok((0..grid).map(|i| (i as f64 + 0.5) / grid as f64).collect())
}

fn grid_row(
    mode: WeightsMode,
    given: &WeightsGiven,
    grid: usize,
    cache: Option<&FAlphaCache>,
    w1: f64,
) -> Result<Vec<GridPoint>> {
    let mut row = Vec::new();
    for j in 0..grid {
        let w2 = (j as f64 + 0.5) / grid as f64;
        let in_domain = match mode {
            WeightsMode::SizeBiased => w1 + w2 < 1.0,
            WeightsMode::Ranked => w1 + w2 < 1.0 && w2 < w1,
        };
        if !in_domain {
            continue;
        }
        let density = match (mode, given) {
            (WeightsMode::SizeBiased, WeightsGiven::Alpha(alpha)) => {
                sb_joint_density(w1, w2, *alpha)?
            }
            (WeightsMode::SizeBiased, WeightsGiven::Prior(prior)) => {
                sb_mixed_density(w1, w2, prior)?
            }
            (WeightsMode::Ranked, WeightsGiven::Alpha(alpha)) => {
                let cache = cache.ok_or_else(|| {
                    Error::invalid("weights_grid: ranked mode needs an F-cache")
                })?;
                ranked_joint_density(w1, w2, *alpha, cache)?
            }
            (WeightsMode::Ranked, WeightsGiven::Prior(prior)) => {
                let cache = cache.ok_or_else(|| {
                    Error::invalid("weights_grid: ranked mode needs an F-cache")
                })?;
                ranked_mixed_density(w1, w2, prior, cache)?
            }
        };
        row.push(GridPoint { w1, w2, density });
    }
    Ok(row)
}

fn collect_rows(results: Vec<Result<Vec<GridPoint>>>) -> Result<Vec<GridPoint>> {
    let mut out = Vec::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

/// The H-prefix mixed density under Ga(a, b) has the closed form
/// `Gamma(a+H)/Gamma(a) b^a [b - log(1-sum)]^(-a-H) / prod_(j<=H) (1-partial_j)`
/// with the last denominator factor being (1 - full sum); cross-checks the
/// bivariate specialization.
#[cfg(test)]
pub(crate) fn sb_mixed_gamma_prefix_density(weights: &[f64], a: f64, b: f64) -> Result<f64> {
    check_gamma_params(a, b)?;
    let h = weights.len();
    if h == 0 {
        return Err(Error::invalid("empty prefix"));
    }
    let mut partial = 0.0;
    let mut log_denominator = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if !(w > 0.0) {
            return Err(Error::domain("weights must be positive".to_string()));
        }
        partial += w;
        if partial >= 1.0 {
            return Err(Error::domain("partial sums must stay below 1".to_string()));
        }
        if i + 1 < h {
            log_denominator += (1.0 - partial).ln();
        }
    }
    let rest = 1.0 - partial;
    log_denominator += rest.ln();
    let hf = h as f64;
    let log_density = crate::special::ln_gamma(a + hf)? - crate::special::ln_gamma(a)? + a * b.ln()
        - (a + hf) * (b - rest.ln()).ln()
        - log_denominator;
    Ok(log_density.exp())
}
