//! Samplers for the Jeffreys prior: accept-reject against the closed-form
//! n = 2 member, a two-variable slice sampler, and Metropolis-Hastings
//! variants, with acceptance-rate and autocorrelation diagnostics.

use serde::Serialize;

use super::diagnostics::integrated_autocorr_time;
use super::rng::RngStream;
use crate::error::{Error, Result};
use crate::priors::fisher_root_ln;

fn check_n(n: usize, what: &str) -> Result<()> {
    if n < 2 {
        Err(Error::UnsupportedPrior(format!(
            "{what}: Jeffreys sampling requires n >= 2, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Draw from the Jeffreys(2) proposal by inverse CDF: alpha = tan^2(pi U / 2).
#[inline]
fn draw_jeffreys2(rng: &mut RngStream) -> f64 {
    let t = (std::f64::consts::FRAC_PI_2 * rng.uniform()).tan();
    t * t
}

/// Log of the unnormalized Jeffreys kernel.
#[inline]
fn log_kernel(n: usize, alpha: f64) -> f64 {
    fisher_root_ln(n, alpha.ln())
}

/// Envelope constant for the accept-reject ratio against the Jeffreys(2)
/// kernel: sqrt(n(n-1)/2).
pub(crate) fn ar_bound(n: usize) -> f64 {
    let nf = n as f64;
    (nf * (nf - 1.0) / 2.0).sqrt()
}

/// One exact draw from the normalized Jeffreys(n) prior by accept-reject
/// with a Jeffreys(2) proposal.
pub fn sample_jeffreys_ar(n: usize, rng: &mut RngStream) -> Result<f64> {
    check_n(n, "sample_jeffreys_ar")?;
    let ln_m = ar_bound(n).ln();
    loop {
        let x = draw_jeffreys2(rng);
        let log_ratio = log_kernel(n, x) - log_kernel(2, x);
        debug_assert!(
            log_ratio <= ln_m + 1e-9,
            "accept-reject bound violated at alpha={x}: ratio {} > M {}",
            log_ratio.exp(),
            ln_m.exp()
        );
        if rng.uniform().ln() <= log_ratio - ln_m {
            return Ok(x);
        }
    }
}

/// A sampled chain with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Chain {
    pub draws: Vec<f64>,
    /// Accepted moves over proposed moves; 1 for the slice and AR samplers.
    pub acceptance_rate: f64,
    /// Integrated autocorrelation time of ln(alpha) (the Jeffreys prior has
    /// no finite moments, so the raw chain has no usable autocovariance).
    pub autocorr_time: f64,
}

/// Independent accept-reject draws packaged as a chain; the acceptance rate
/// reported is proposals-to-draws.
pub fn sample_jeffreys_ar_chain(n: usize, draws: usize, rng: &mut RngStream) -> Result<Chain> {
    check_n(n, "sample_jeffreys_ar_chain")?;
    if draws == 0 {
        return Err(Error::invalid("sample_jeffreys_ar_chain: draws must be >= 1"));
    }
    let ln_m = ar_bound(n).ln();
    let mut out = Vec::with_capacity(draws);
    let mut proposals = 0usize;
    while out.len() < draws {
        let x = draw_jeffreys2(rng);
        proposals += 1;
        let log_ratio = log_kernel(n, x) - log_kernel(2, x);
        debug_assert!(log_ratio <= ln_m + 1e-9);
        if rng.uniform().ln() <= log_ratio - ln_m {
            out.push(x);
        }
    }
    let acceptance_rate = draws as f64 / proposals as f64;
    let autocorr_time = iact_of_log(&out);
    Ok(Chain {
        draws: out,
        acceptance_rate,
        autocorr_time,
    })
}

/// Slice sampler over (alpha, height): each step draws the auxiliary height
/// uniformly under the graph and then a point of the slice by stepping out
/// and shrinking (Neal 2003), run on ln(alpha) where the target has light
/// exponential tails on both sides.
pub fn sample_jeffreys_slice(n: usize, rng: &mut RngStream, iterations: usize) -> Result<Chain> {
    check_n(n, "sample_jeffreys_slice")?;
    if iterations == 0 {
        return Err(Error::invalid("sample_jeffreys_slice: iterations must be >= 1"));
    }
    // log target of z = ln(alpha): kernel times the Jacobian e^z
    let g = |z: f64| fisher_root_ln(n, z) + z;
    const W: f64 = 4.0;
    let mut z = sample_jeffreys_ar(n, rng)?.ln(); // stationary start
    let mut g_z = g(z);
    let mut draws = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let log_height = g_z + rng.uniform().ln();
        let mut lo = z - W * rng.uniform();
        let mut hi = lo + W;
        let mut steps = 0;
        while g(lo) > log_height && steps < 1_000 {
            lo -= W;
            steps += 1;
        }
        steps = 0;
        while g(hi) > log_height && steps < 1_000 {
            hi += W;
            steps += 1;
        }
        loop {
            let cand = lo + rng.uniform() * (hi - lo);
            let g_cand = g(cand);
            if g_cand > log_height {
                z = cand;
                g_z = g_cand;
                break;
            }
            if cand < z {
                lo = cand;
            } else {
                hi = cand;
            }
        }
        draws.push(z.exp());
    }
    let autocorr_time = iact_of_log(&draws);
    Ok(Chain {
        draws,
        acceptance_rate: 1.0,
        autocorr_time,
    })
}

/// Proposal used by [`sample_jeffreys_mh`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MhProposal {
    /// Independence proposals from the closed-form Jeffreys(2) prior.
    IndependenceJeffreys2,
    /// Random walk with Cauchy increments folded at zero.
    RwHalfCauchy { scale: f64 },
    /// Random walk with normal increments folded at zero.
    RwNormal { scale: f64 },
}

/// Metropolis-Hastings chain targeting the Jeffreys(n) prior.
pub fn sample_jeffreys_mh(
    n: usize,
    rng: &mut RngStream,
    proposal: MhProposal,
    iterations: usize,
) -> Result<Chain> {
    check_n(n, "sample_jeffreys_mh")?;
    if iterations == 0 {
        return Err(Error::invalid("sample_jeffreys_mh: iterations must be >= 1"));
    }
    match proposal {
        MhProposal::RwHalfCauchy { scale } | MhProposal::RwNormal { scale } => {
            if !(scale > 0.0) {
                return Err(Error::invalid("sample_jeffreys_mh: proposal scale must be > 0"));
            }
        }
        MhProposal::IndependenceJeffreys2 => {}
    }
    let mut x = sample_jeffreys_ar(n, rng)?; // stationary start
    let mut log_f_x = log_kernel(n, x);
    let mut draws = Vec::with_capacity(iterations);
    let mut accepted = 0usize;
    for _ in 0..iterations {
        let (y, log_hastings) = match proposal {
            MhProposal::IndependenceJeffreys2 => {
                let y = draw_jeffreys2(rng);
                // q = Jeffreys(2): Hastings term log q(x) - log q(y)
                (y, log_kernel(2, x) - log_kernel(2, y))
            }
            MhProposal::RwHalfCauchy { scale } => {
                let step = scale * (std::f64::consts::PI * (rng.uniform() - 0.5)).tan();
                ((x + step).abs(), 0.0) // folded proposal is symmetric
            }
            MhProposal::RwNormal { scale } => {
                let step = scale * rng.standard_normal();
                ((x + step).abs(), 0.0)
            }
        };
        if y > 0.0 {
            let log_f_y = log_kernel(n, y);
            let log_accept = log_f_y - log_f_x + log_hastings;
            if log_accept >= 0.0 || rng.uniform().ln() < log_accept {
                x = y;
                log_f_x = log_f_y;
                accepted += 1;
            }
        }
        draws.push(x);
    }
    let autocorr_time = iact_of_log(&draws);
    Ok(Chain {
        draws,
        acceptance_rate: accepted as f64 / iterations as f64,
        autocorr_time,
    })
}

fn iact_of_log(draws: &[f64]) -> f64 {
    let logs: Vec<f64> = draws.iter().map(|&x| x.ln()).collect();
    integrated_autocorr_time(&logs)
}
