//! Exact and limiting distributions of the cluster count, conditional on the
//! precision parameter or marginalized over a prior.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::priors::PriorSpec;
use crate::quad::integrate_half_line_vec;
use crate::special::{
    digamma, ln_gamma, log_sum_exp, StirlingTable, EULER_GAMMA,
};

/// Probability vector over the cluster count `k = 1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnPmf {
    n: usize,
    probs: Vec<f64>,
}

impl KnPmf {
    fn from_probs(n: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), n);
        KnPmf { n, probs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p(K_n = k)`, 1-based. Panics if `k` is out of `1..=n`.
    pub fn prob(&self, k: usize) -> f64 {
        self.probs[k - 1]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) as f64 - m).powi(2) * p)
            .sum()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// Smallest k with CDF >= q.
    pub fn quantile(&self, q: f64) -> usize {
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if acc >= q {
                return i + 1;
            }
        }
        self.n
    }

    /// Total variation distance to another pmf on the same support.
    pub fn tv_distance(&self, other: &KnPmf) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "tv_distance: supports differ ({} vs {})",
                self.n, other.n
            )));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(other.probs.iter())
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }
}

/// Marginal pmf together with its quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct MixedKnPmf {
    pub pmf: KnPmf,
    /// Pre-normalization mass minus one; residual quadrature error.
    pub deficit: f64,
    /// Normalized log probabilities, for divergence computations on tiny tails.
    pub log_probs: Vec<f64>,
    pub converged: bool,
}

/// Log of the cluster-count kernel `alpha^k Gamma(alpha)/Gamma(alpha+n)` as a
/// function of `ln(alpha)`, with series branches at both extremes so callers
/// can probe mass far outside the representable range of `alpha`.
pub(crate) fn log_kn_kernel_ln(n: usize, k: usize, ln_alpha: f64) -> f64 {
    debug_assert!(k >= 1 && k <= n);
    if n == 1 {
        return 0.0; // alpha * Gamma(alpha)/Gamma(alpha+1) = 1 identically
    }
    let nf = n as f64;
    let kf = k as f64;
    if ln_alpha < -37.0 {
        // ln Gamma(alpha) = -ln(alpha) - gamma*alpha + O(alpha^2)
        let alpha = ln_alpha.exp(); // may underflow; fine
        let ln_gamma_n = ln_gamma(nf).expect("n >= 1");
        let slope = EULER_GAMMA + digamma(nf).expect("n >= 1");
        (kf - 1.0) * ln_alpha - ln_gamma_n - slope * alpha
    } else if ln_alpha > 4.4 + nf.ln() * 7.0 / 6.0 {
        // Differencing two huge Lanczos values loses absolute precision, so
        // expand ln Gamma(alpha) - ln Gamma(alpha+n) = -n ln(alpha)
        //   - (S1/a - S2/(2a^2) + S3/(3a^3) - S4/(4a^4) + S5/(5a^5)) directly.
        let [s1, s2, s3, s4, s5] = crate::priors::power_sums(n);
        let inv = (-ln_alpha).exp();
        let series = inv
            * (s1 - inv * (s2 / 2.0 - inv * (s3 / 3.0 - inv * (s4 / 4.0 - inv * s5 / 5.0))));
        (kf - nf) * ln_alpha - series
    } else {
        let alpha = ln_alpha.exp();
        kf * ln_alpha + ln_gamma(alpha).expect("alpha > 0") - ln_gamma(alpha + nf).expect("> 0")
    }
}

/// `ln p(K_n = k | alpha)`.
pub fn log_pmf_kn_given_alpha(
    n: usize,
    k: usize,
    alpha: f64,
    table: &StirlingTable,
) -> Result<f64> {
    if n == 0 || n > table.n_max() {
        return Err(Error::invalid(format!(
            "log_pmf_kn_given_alpha: n={n} outside table range 1..={}",
            table.n_max()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "log_pmf_kn_given_alpha: k={k} outside 1..={n}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "log_pmf_kn_given_alpha: alpha must be > 0, got {alpha}"
        )));
    }
    Ok(table.log_unchecked(n, k) + log_kn_kernel_ln(n, k, alpha.ln()))
}

/// Mean and variance of `K_n | alpha` via the Bernoulli-sum identities.
///
/// Always the exact sums; both moments grow like `alpha log n`, but the
/// asymptotic forms are never substituted for the sums here.
pub fn kn_moments_given_alpha(n: usize, alpha: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("kn_moments_given_alpha: n must be >= 1"));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "kn_moments_given_alpha: alpha must be > 0, got {alpha}"
        )));
    }
    let mut mean = 0.0;
    let mut var = 0.0;
    for i in 1..=n {
        let d = alpha + (i - 1) as f64;
        mean += alpha / d;
        var += alpha * (i - 1) as f64 / (d * d);
    }
    Ok((mean, var))
}

/// Full pmf of `K_n | alpha`.
pub fn kn_pmf_given_alpha(n: usize, alpha: f64, table: &StirlingTable) -> Result<KnPmf> {
    if n == 0 || n > table.n_max() {
        return Err(Error::invalid(format!(
            "kn_pmf_given_alpha: n={n} outside table range 1..={}",
            table.n_max()
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "kn_pmf_given_alpha: alpha must be > 0, got {alpha}"
        )));
    }
    let la = alpha.ln();
    let logs: Vec<f64> = (1..=n)
        .map(|k| table.log_unchecked(n, k) + log_kn_kernel_ln(n, k, la))
        .collect();
    let log_total = log_sum_exp(&logs)?;
    let probs: Vec<f64> = logs.iter().map(|&l| (l - log_total).exp()).collect();
    Ok(KnPmf::from_probs(n, probs))
}

/// Marginal pmf of `K_n` under a proper prior: each component is
/// `int p(K_n=k|alpha) dP(alpha)`, all components sharing quadrature nodes.
/// The result is renormalized; the pre-normalization deficit is reported.
pub fn kn_pmf_mixed(n: usize, prior: &PriorSpec, table: &StirlingTable) -> Result<MixedKnPmf> {
    if !prior.is_proper() {
        return Err(Error::UnsupportedPrior(
            "improper prior: the induced p(K_n) cannot be normalised and is improper".to_string(),
        ));
    }
    if n == 0 || n > table.n_max() {
        return Err(Error::invalid(format!(
            "kn_pmf_mixed: n={n} outside table range 1..={}",
            table.n_max()
        )));
    }
    let log_stir: Vec<f64> = (1..=n).map(|k| table.log_unchecked(n, k)).collect();
    let result = integrate_half_line_vec(
        n,
        |ln_alpha, buf| {
            let lp = prior.log_density_ln(ln_alpha);
            for (k0, slot) in buf.iter_mut().enumerate() {
                *slot = log_stir[k0] + log_kn_kernel_ln(n, k0 + 1, ln_alpha) + lp;
            }
        },
        1e-9,
    );
    let log_total = log_sum_exp(&result.log_values)?;
    let deficit = log_total.exp() - 1.0;
    let log_probs: Vec<f64> = result.log_values.iter().map(|&l| l - log_total).collect();
    let probs: Vec<f64> = log_probs.iter().map(|&l| l.exp()).collect();
    Ok(MixedKnPmf {
        pmf: KnPmf::from_probs(n, probs),
        deficit,
        log_probs,
        converged: result.converged,
    })
}

/// Total variation distance between `p(K_n | alpha)` and the Poisson law
/// matched to its mean, the Poisson summed over all of `k >= 0` and truncated
/// where its tail mass drops below 1e-12.
pub fn tv_to_poisson(n: usize, alpha: f64, table: &StirlingTable) -> Result<f64> {
    let pmf = kn_pmf_given_alpha(n, alpha, table)?;
    let (lambda, _) = kn_moments_given_alpha(n, alpha)?;
    let ln_lambda = lambda.ln();
    let k_hi = (lambda + 40.0 * lambda.sqrt() + 50.0).ceil() as usize;
    let k_max = k_hi.max(n);
    let mut acc = 0.0;
    let mut poisson_mass = 0.0;
    for k in 0..=k_max {
        let lp = -lambda + k as f64 * ln_lambda - ln_gamma(k as f64 + 1.0)?;
        let po = lp.exp();
        poisson_mass += po;
        let p = if k >= 1 && k <= n { pmf.prob(k) } else { 0.0 };
        acc += (p - po).abs();
    }
    // remaining Poisson tail (< 1e-12) counts fully toward the distance
    acc += (1.0 - poisson_mass).max(0.0);
    Ok(0.5 * acc)
}

/// Negative-binomial limit of the marginal cluster count under Ga(a, b):
/// `NB(a, b/(b + log n))`, truncated to `k = 1..=n` and renormalized.
pub fn nb_limit_pmf(n: usize, a: f64, b: f64) -> Result<KnPmf> {
    if n < 2 {
        return Err(Error::invalid("nb_limit_pmf: n must be >= 2"));
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain(format!(
            "nb_limit_pmf: a and b must be > 0, got ({a}, {b})"
        )));
    }
    let p = b / (b + (n as f64).ln());
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let ln_gamma_a = ln_gamma(a)?;
    let logs: Vec<f64> = (1..=n)
        .map(|k| {
            let kf = k as f64;
            ln_gamma(kf + a).expect("positive") - ln_gamma_a
                - ln_gamma(kf + 1.0).expect("positive")
                + a * ln_p
                + kf * ln_q
        })
        .collect();
    let log_total = log_sum_exp(&logs)?;
    let probs = logs.iter().map(|&l| (l - log_total).exp()).collect();
    Ok(KnPmf::from_probs(n, probs))
}
