//! Hyperparameters from partition probabilities: choose eta so that the
//! prior puts the requested mass on each cell of a partition of (0, inf).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opt::damped_newton;
use crate::priors::PriorSpec;

/// Families available to the elicitation solver, with their free-parameter
/// counts. The half-Cauchy location is fixed at zero, leaving one free
/// probability; the scale is then determined in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElicitFamily {
    Gamma,
    Lognormal,
    Exponential,
    HalfCauchy,
}

impl ElicitFamily {
    pub fn free_params(self) -> usize {
        match self {
            ElicitFamily::Gamma | ElicitFamily::Lognormal => 2,
            ElicitFamily::Exponential | ElicitFamily::HalfCauchy => 1,
        }
    }
}

/// Partition thresholds of (0, inf) with their target probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitationProblem {
    pub family: ElicitFamily,
    /// `t_1 < ... < t_d`, all positive.
    pub thresholds: Vec<f64>,
    /// `d + 1` strictly positive cell probabilities summing to one:
    /// p(0 < alpha <= t_1), ..., p(alpha > t_d).
    pub probabilities: Vec<f64>,
}

impl ElicitationProblem {
    pub fn new(family: ElicitFamily, thresholds: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        let p = ElicitationProblem {
            family,
            thresholds,
            probabilities,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thresholds.is_empty() {
            return Err(Error::invalid("elicitation: need at least one threshold"));
        }
        if !self
            .thresholds
            .windows(2)
            .all(|w| w[0] < w[1])
            || self.thresholds[0] <= 0.0
        {
            return Err(Error::invalid(
                "elicitation: thresholds must be positive and strictly increasing",
            ));
        }
        if self.probabilities.len() != self.thresholds.len() + 1 {
            return Err(Error::invalid(format!(
                "elicitation: {} thresholds need {} probabilities, got {}",
                self.thresholds.len(),
                self.thresholds.len() + 1,
                self.probabilities.len()
            )));
        }
        if self.probabilities.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::invalid("elicitation: probabilities must be strictly positive"));
        }
        let total: f64 = self.probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "elicitation: probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        // number of independent constraints must match the free parameters
        let d = self.family.free_params();
        if self.thresholds.len() != d {
            return Err(Error::InfeasibleTargets(format!(
                "family {:?} has {d} free parameter(s) but {} threshold constraint(s) were given",
                self.family,
                self.thresholds.len()
            )));
        }
        Ok(())
    }
}

/// A fitted parameter vector with solver metadata.
#[derive(Debug, Clone, Serialize)]
pub struct ElicitResult {
    pub family: ElicitFamily,
    pub eta: Vec<f64>,
    /// Per-cell residuals `p(cell) - target` at the solution.
    pub residuals: Vec<f64>,
    pub solver_iters: usize,
}

impl ElicitResult {
    /// The fitted prior.
    pub fn prior(&self) -> Result<PriorSpec> {
        match self.family {
            ElicitFamily::Gamma => PriorSpec::gamma(self.eta[0], self.eta[1]),
            ElicitFamily::Lognormal => PriorSpec::lognormal(self.eta[0], self.eta[1]),
            ElicitFamily::Exponential => PriorSpec::exponential(self.eta[0]),
            ElicitFamily::HalfCauchy => PriorSpec::half_cauchy(self.eta[0]),
        }
    }
}

fn cell_probabilities(prior: &PriorSpec, thresholds: &[f64]) -> Result<Vec<f64>> {
    let mut cells = Vec::with_capacity(thresholds.len() + 1);
    let mut prev = 0.0;
    for &t in thresholds {
        let f = prior.cdf(t)?;
        cells.push(f - prev);
        prev = f;
    }
    cells.push(1.0 - prev);
    Ok(cells)
}

/// Solve the partition system for the requested family.
///
/// Gamma and lognormal run a damped Newton iteration on an unconstrained
/// reparameterization (logs of positive parameters, the lognormal log-mean
/// kept as is); the exponential and half-Cauchy have closed forms.
pub fn elicit(problem: &ElicitationProblem) -> Result<ElicitResult> {
    problem.validate()?;
    let t = &problem.thresholds;
    let p = &problem.probabilities;
    let (eta, iters) = match problem.family {
        ElicitFamily::Exponential => (vec![elicit_exponential_closed_form(t[0], p[0])?], 0),
        ElicitFamily::HalfCauchy => {
            // (2/pi) atan(t1/s) = p1
            let s = t[0] / (std::f64::consts::FRAC_PI_2 * p[0]).tan();
            (vec![s], 0)
        }
        ElicitFamily::Gamma | ElicitFamily::Lognormal => {
            let family = problem.family;
            let to_prior = move |x: &[f64]| -> Result<PriorSpec> {
                match family {
                    ElicitFamily::Gamma => PriorSpec::gamma(x[0].exp(), x[1].exp()),
                    ElicitFamily::Lognormal => PriorSpec::lognormal(x[0], x[1].exp()),
                    _ => unreachable!(),
                }
            };
            let residuals = |x: &[f64]| -> Vec<f64> {
                let prior = match to_prior(x) {
                    Ok(pr) => pr,
                    Err(_) => return vec![f64::MAX; 2],
                };
                match cell_probabilities(&prior, t) {
                    Ok(cells) => (0..2).map(|i| cells[i] - p[i]).collect(),
                    Err(_) => vec![f64::MAX; 2],
                }
            };
            let start = [0.0, 0.0];
            let r = damped_newton(&residuals, &start, 1e-10, 80);
            if !r.converged {
                return Err(Error::InfeasibleTargets(format!(
                    "{family:?} cannot reach the requested cell probabilities \
                     (residual norm {:.2e} after {} iterations)",
                    r.residual_norm, r.iterations
                )));
            }
            let eta = match family {
                ElicitFamily::Gamma => vec![r.x[0].exp(), r.x[1].exp()],
                ElicitFamily::Lognormal => vec![r.x[0], r.x[1].exp()],
                _ => unreachable!(),
            };
            (eta, r.iterations)
        }
    };
    let result = ElicitResult {
        family: problem.family,
        eta,
        residuals: Vec::new(),
        solver_iters: iters,
    };
    let cells = cell_probabilities(&result.prior()?, t)?;
    let residuals: Vec<f64> = cells.iter().zip(p.iter()).map(|(c, q)| c - q).collect();
    if residuals.iter().any(|r| r.abs() > 1e-8) {
        return Err(Error::InfeasibleTargets(format!(
            "fitted {:?} misses a cell probability by {:.2e}",
            problem.family,
            residuals.iter().map(|r| r.abs()).fold(0.0f64, f64::max)
        )));
    }
    Ok(ElicitResult { residuals, ..result })
}

/// Closed form for the exponential family: `eta = log((1-p)^(-1/t1))`.
pub fn elicit_exponential_closed_form(t1: f64, p_below: f64) -> Result<f64> {
    if !(t1 > 0.0) {
        return Err(Error::domain(format!("t1 must be > 0, got {t1}")));
    }
    if !(p_below > 0.0 && p_below < 1.0) {
        return Err(Error::domain(format!("p must lie in (0,1), got {p_below}")));
    }
    Ok(-(-p_below).ln_1p() / t1)
}
