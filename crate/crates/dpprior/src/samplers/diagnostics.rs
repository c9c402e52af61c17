//! Chain diagnostics.

/// Integrated autocorrelation time with the self-consistent window rule
/// (sum lags until the window exceeds six current estimates).
///
/// Returns 1 for effectively independent chains; larger values mean fewer
/// effective samples per iteration.
pub fn integrated_autocorr_time(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 10 {
        return 1.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let c0: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if c0 <= 0.0 {
        return 1.0;
    }
    let max_lag = n / 3;
    let mut tau = 1.0f64;
    let mut lag = 1usize;
    while lag < max_lag {
        let mut c = 0.0;
        for i in 0..n - lag {
            c += (xs[i] - mean) * (xs[i + lag] - mean);
        }
        let rho = c / (n - lag) as f64 / c0;
        tau += 2.0 * rho;
        if (lag as f64) >= 6.0 * tau {
            break;
        }
        lag += 1;
    }
    tau.max(1.0)
}
