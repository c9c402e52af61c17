//! Prior families for the precision parameter, with densities, CDFs,
//! quantiles and propriety diagnostics.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_finite, integrate_half_line};
use crate::special::{
    digamma, reg_lower_incomplete_gamma, std_normal_cdf, std_normal_quantile, trigamma,
    StirlingTable,
};

/// A prior for the precision parameter, over (0, inf).
///
/// The parametric families are normalized; the two improper variants carry
/// density kernels only and every operation that needs propriety rejects
/// them. The Jeffreys prior is indexed by the sample size it was derived
/// for and requires `n >= 2` (its density vanishes identically for n = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PriorSpecRepr", into = "PriorSpecRepr")]
pub enum PriorSpec {
    Gamma { shape: f64, rate: f64 },
    Exponential { rate: f64 },
    Lognormal { log_mean: f64, log_sd: f64 },
    HalfCauchy { scale: f64 },
    Jeffreys { n: usize },
    ImproperReciprocal,
    ImproperFlat,
}

/// Wire form `{"family": ..., "params": [...]}` used by the CLI.
#[derive(Serialize, Deserialize)]
struct PriorSpecRepr {
    family: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<f64>,
}

impl TryFrom<PriorSpecRepr> for PriorSpec {
    type Error = Error;

    fn try_from(r: PriorSpecRepr) -> Result<Self> {
        let need = |n: usize| -> Result<()> {
            if r.params.len() != n {
                Err(Error::invalid(format!(
                    "prior family '{}' takes {n} parameter(s), got {}",
                    r.family,
                    r.params.len()
                )))
            } else {
                Ok(())
            }
        };
        match r.family.as_str() {
            "gamma" => {
                need(2)?;
                PriorSpec::gamma(r.params[0], r.params[1])
            }
            "exponential" => {
                need(1)?;
                PriorSpec::exponential(r.params[0])
            }
            "lognormal" => {
                need(2)?;
                PriorSpec::lognormal(r.params[0], r.params[1])
            }
            "half_cauchy" => {
                need(1)?;
                PriorSpec::half_cauchy(r.params[0])
            }
            "jeffreys" => {
                need(1)?;
                let n = r.params[0];
                if n.fract() != 0.0 || n < 0.0 {
                    return Err(Error::invalid("jeffreys prior: n must be a nonnegative integer"));
                }
                PriorSpec::jeffreys(n as usize)
            }
            "improper_reciprocal" => {
                need(0)?;
                Ok(PriorSpec::ImproperReciprocal)
            }
            "improper_flat" => {
                need(0)?;
                Ok(PriorSpec::ImproperFlat)
            }
            other => Err(Error::invalid(format!("unknown prior family '{other}'"))),
        }
    }
}

impl From<PriorSpec> for PriorSpecRepr {
    fn from(p: PriorSpec) -> Self {
        let (family, params) = match p {
            PriorSpec::Gamma { shape, rate } => ("gamma", vec![shape, rate]),
            PriorSpec::Exponential { rate } => ("exponential", vec![rate]),
            PriorSpec::Lognormal { log_mean, log_sd } => ("lognormal", vec![log_mean, log_sd]),
            PriorSpec::HalfCauchy { scale } => ("half_cauchy", vec![scale]),
            PriorSpec::Jeffreys { n } => ("jeffreys", vec![n as f64]),
            PriorSpec::ImproperReciprocal => ("improper_reciprocal", vec![]),
            PriorSpec::ImproperFlat => ("improper_flat", vec![]),
        };
        PriorSpecRepr {
            family: family.to_string(),
            params,
        }
    }
}

fn positive(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::invalid(format!("{what} must be positive and finite, got {value}")))
    }
}

impl PriorSpec {
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Ok(PriorSpec::Gamma {
            shape: positive(shape, "gamma shape")?,
            rate: positive(rate, "gamma rate")?,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(PriorSpec::Exponential {
            rate: positive(rate, "exponential rate")?,
        })
    }

    pub fn lognormal(log_mean: f64, log_sd: f64) -> Result<Self> {
        if !log_mean.is_finite() {
            return Err(Error::invalid("lognormal log-mean must be finite"));
        }
        Ok(PriorSpec::Lognormal {
            log_mean,
            log_sd: positive(log_sd, "lognormal log-sd")?,
        })
    }

    pub fn half_cauchy(scale: f64) -> Result<Self> {
        Ok(PriorSpec::HalfCauchy {
            scale: positive(scale, "half-Cauchy scale")?,
        })
    }

    /// Jeffreys prior for sample size `n >= 2`.
    pub fn jeffreys(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedPrior(format!(
                "Jeffreys prior carries no meaning for n={n}; its density is identically 0 for n=1"
            )));
        }
        Ok(PriorSpec::Jeffreys { n })
    }

    /// False exactly for the two improper variants.
    pub fn is_proper(&self) -> bool {
        !matches!(self, PriorSpec::ImproperReciprocal | PriorSpec::ImproperFlat)
    }

    /// Log density at `alpha > 0`. Normalized for every proper family
    /// (including Jeffreys, whose normalizer comes from quadrature and is
    /// cached per n); an unnormalized kernel for the improper variants.
    pub fn log_density(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0) {
            return Err(Error::domain(format!("log_density: alpha must be > 0, got {alpha}")));
        }
        Ok(self.log_density_ln(alpha.ln()))
    }

    /// Same as [`log_density`](Self::log_density) but parameterized by
    /// `ln(alpha)`, so integrators can reach mass far outside the
    /// representable range of `alpha` itself.
    pub(crate) fn log_density_ln(&self, ln_alpha: f64) -> f64 {
        match *self {
            PriorSpec::Gamma { shape, rate } => {
                let alpha = ln_alpha.exp(); // 0 or inf far out is fine
                shape * rate.ln() - ln_gamma_unwrap(shape) + (shape - 1.0) * ln_alpha
                    - rate * alpha
            }
            PriorSpec::Exponential { rate } => rate.ln() - rate * ln_alpha.exp(),
            PriorSpec::Lognormal { log_mean, log_sd } => {
                let z = (ln_alpha - log_mean) / log_sd;
                -ln_alpha - log_sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
            }
            PriorSpec::HalfCauchy { scale } => {
                let r = 2.0 * (ln_alpha - scale.ln());
                let softplus = if r > 36.0 { r } else { r.exp().ln_1p() };
                (2.0 / (std::f64::consts::PI * scale)).ln() - softplus
            }
            PriorSpec::Jeffreys { n } => {
                fisher_root_ln(n, ln_alpha) - jeffreys_log_normalizer(n)
            }
            PriorSpec::ImproperReciprocal => -ln_alpha,
            PriorSpec::ImproperFlat => 0.0,
        }
    }

    /// CDF at `x > 0`; proper priors only.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("cdf: x must be > 0, got {x}")));
        }
        match *self {
            PriorSpec::Gamma { shape, rate } => reg_lower_incomplete_gamma(shape, rate * x),
            PriorSpec::Exponential { rate } => Ok(-(-rate * x).exp_m1()),
            PriorSpec::Lognormal { log_mean, log_sd } => {
                Ok(std_normal_cdf((x.ln() - log_mean) / log_sd))
            }
            PriorSpec::HalfCauchy { scale } => {
                Ok(2.0 / std::f64::consts::PI * (x / scale).atan())
            }
            PriorSpec::Jeffreys { n } => {
                // substitute alpha = y^2 to remove the alpha^{-1/2} spike
                let z = jeffreys_normalizer(n)?;
                let integral = integrate_finite(
                    |y| 2.0 * y * fisher_root_ln(n, 2.0 * y.ln()).exp(),
                    0.0,
                    x.sqrt(),
                    1e-11,
                );
                Ok((integral / z).min(1.0))
            }
            PriorSpec::ImproperReciprocal | PriorSpec::ImproperFlat => Err(
                Error::UnsupportedPrior("improper priors have no CDF".to_string()),
            ),
        }
    }

    /// Quantile for `q` in (0,1); inverse of [`cdf`](Self::cdf) within 1e-9.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("quantile: q must be in (0,1), got {q}")));
        }
        match *self {
            PriorSpec::Exponential { rate } => Ok(-(-q).ln_1p() / rate),
            PriorSpec::Lognormal { log_mean, log_sd } => {
                Ok((log_mean + log_sd * std_normal_quantile(q)).exp())
            }
            PriorSpec::HalfCauchy { scale } => {
                Ok(scale * (std::f64::consts::FRAC_PI_2 * q).tan())
            }
            PriorSpec::Gamma { .. } | PriorSpec::Jeffreys { .. } => self.quantile_numeric(q),
            PriorSpec::ImproperReciprocal | PriorSpec::ImproperFlat => Err(
                Error::UnsupportedPrior("improper priors have no quantile".to_string()),
            ),
        }
    }

    fn quantile_numeric(&self, q: f64) -> Result<f64> {
        // bracket in ln(alpha), then bisect; 90 halvings reach ~1e-13 relative
        let mut lo = -45.0f64;
        let mut hi = 45.0f64;
        if self.cdf(lo.exp())? > q {
            lo = -700.0;
        }
        if self.cdf(hi.exp())? < q {
            hi = 700.0;
        }
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid.exp())? < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }
}

fn ln_gamma_unwrap(x: f64) -> f64 {
    crate::special::ln_gamma(x).expect("positive argument enforced by constructor")
}

/// Square root of the Fisher information of the cluster-count law:
/// `sqrt((1/alpha) sum_{i=1}^n (i-1)/(alpha+i-1)^2)`.
///
/// Evaluated through the digamma/trigamma form; returns 0 for n = 1.
pub fn jeffreys_fisher_root(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("jeffreys_fisher_root: n must be >= 1"));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "jeffreys_fisher_root: alpha must be > 0, got {alpha}"
        )));
    }
    Ok(fisher_root_ln(n, alpha.ln()).exp())
}

/// Same quantity via the direct sum, kept for cross-validation.
pub fn jeffreys_fisher_root_sum(n: usize, alpha: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("jeffreys_fisher_root_sum: n must be >= 1"));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "jeffreys_fisher_root_sum: alpha must be > 0, got {alpha}"
        )));
    }
    let sum: f64 = (2..=n)
        .map(|i| {
            let j = (i - 1) as f64;
            j / ((alpha + j) * (alpha + j))
        })
        .sum();
    Ok((sum / alpha).sqrt())
}

/// Log of the Fisher-root kernel as a function of `ln(alpha)`.
///
/// The psi-difference form cancels twice for alpha >> n (the bracket is
/// S1/alpha^2 built from terms of size (n-1)/alpha), so beyond
/// `alpha > (n-1) * e^6.1` we switch to the power-sum expansion
/// `sum_j j/(alpha+j)^2 = (S1 - 2 S2/a + 3 S3/a^2 - 4 S4/a^3 + 5 S5/a^4)/a^2`
/// whose truncation error is below 1e-13 there.
pub(crate) fn fisher_root_ln(n: usize, ln_alpha: f64) -> f64 {
    if n <= 1 {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    if ln_alpha < -30.0 {
        // (1/alpha) sum -> H_{n-1}/alpha
        let h: f64 = (1..n).map(|j| 1.0 / j as f64).sum();
        return 0.5 * (h.ln() - ln_alpha);
    }
    if ln_alpha > 6.1 + (nf - 1.0).ln() {
        let [s1, s2, s3, s4, s5] = power_sums(n);
        let inv = (-ln_alpha).exp();
        let corr = s1 - inv * (2.0 * s2 - inv * (3.0 * s3 - inv * (4.0 * s4 - inv * 5.0 * s5)));
        return 0.5 * corr.ln() - 1.5 * ln_alpha;
    }
    let alpha = ln_alpha.exp();
    let inner = digamma_unwrap(alpha + nf) - digamma_unwrap(alpha + 1.0)
        + alpha * (trigamma_unwrap(alpha + nf) - trigamma_unwrap(alpha + 1.0));
    0.5 * (inner.ln() - ln_alpha)
}

/// Faulhaber sums S_p = sum_{j=1}^{n-1} j^p for p = 1..=5.
pub(crate) fn power_sums(n: usize) -> [f64; 5] {
    let m = (n - 1) as f64;
    let s1 = m * (m + 1.0) / 2.0;
    let s2 = m * (m + 1.0) * (2.0 * m + 1.0) / 6.0;
    let s3 = s1 * s1;
    let s4 = m * (m + 1.0) * (2.0 * m + 1.0) * (3.0 * m * m + 3.0 * m - 1.0) / 30.0;
    let s5 = s3 * (2.0 * m * m + 2.0 * m - 1.0) / 3.0;
    [s1, s2, s3, s4, s5]
}

fn digamma_unwrap(x: f64) -> f64 {
    digamma(x).expect("argument > 1 by construction")
}

fn trigamma_unwrap(x: f64) -> f64 {
    trigamma(x).expect("argument > 1 by construction")
}

static JEFFREYS_NORMALIZERS: OnceLock<Mutex<HashMap<usize, f64>>> = OnceLock::new();

/// Normalizing constant of the Jeffreys prior: the integral of the
/// Fisher-root kernel over (0, inf). Finite for every `n >= 2`; cached.
pub fn jeffreys_normalizer(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::UnsupportedPrior(format!(
            "Jeffreys normalizer requires n >= 2, got {n}"
        )));
    }
    let cache = JEFFREYS_NORMALIZERS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&z) = cache.lock().unwrap().get(&n) {
        return Ok(z);
    }
    let r = integrate_half_line(|la| fisher_root_ln(n, la), 1e-10);
    if !r.converged {
        return Err(Error::NoConvergence {
            context: format!("jeffreys_normalizer(n={n})"),
            last: vec![r.value],
        });
    }
    cache.lock().unwrap().insert(n, r.value);
    Ok(r.value)
}

fn jeffreys_log_normalizer(n: usize) -> f64 {
    jeffreys_normalizer(n)
        .expect("n >= 2 enforced by PriorSpec::jeffreys")
        .ln()
}

/// Local log-log slopes of the posterior kernel
/// `alpha^k Gamma(alpha)/Gamma(alpha+n) * prior(alpha)` near 0 and infinity,
/// with an integrability verdict per end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProprietyReport {
    pub slope_at_zero: f64,
    pub slope_at_infinity: f64,
    pub integrable_at_zero: bool,
    pub integrable_at_infinity: bool,
}

impl ProprietyReport {
    pub fn integrable(&self) -> bool {
        self.integrable_at_zero && self.integrable_at_infinity
    }
}

/// Tail-exponent diagnostic for the posterior kernel induced by `prior`
/// after observing `K_n = k`.
pub fn propriety_diagnostic(prior: &PriorSpec, n: usize, k: usize) -> Result<ProprietyReport> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::invalid(format!(
            "propriety_diagnostic: need 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let log_kernel = |ln_alpha: f64| -> f64 {
        crate::kn::log_kn_kernel_ln(n, k, ln_alpha) + prior.log_density_ln(ln_alpha)
    };
    let slope = |a: f64, b: f64| (log_kernel(b) - log_kernel(a)) / (b - a);
    let slope_at_zero = slope(-14.0, -13.0);
    let slope_at_infinity = slope(31.0, 32.0);
    Ok(ProprietyReport {
        slope_at_zero,
        slope_at_infinity,
        integrable_at_zero: slope_at_zero > -1.0 + 1e-6,
        integrable_at_infinity: slope_at_infinity < -1.0 - 1e-6,
    })
}

/// `p(K_n = 1)` under Ga(a, b) along a path of hyperparameters shrinking to
/// zero; quantifies how quasi-degenerate gammas pin the partition to a
/// single cluster.
pub fn quasi_degenerate_probe(
    n: usize,
    path: &[(f64, f64)],
    table: &StirlingTable,
) -> Result<Vec<f64>> {
    path.iter()
        .map(|&(a, b)| {
            let prior = PriorSpec::gamma(a, b)?;
            let mixed = crate::kn::kn_pmf_mixed(n, &prior, table)?;
            Ok(mixed.pmf.prob(1))
        })
        .collect()
}
