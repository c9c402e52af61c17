//! Cluster counts by direct sequential simulation.

use super::rng::RngStream;
use crate::error::{Error, Result};

/// Draw the number of clusters among `n` observations: the i-th observation
/// opens a new cluster with probability `alpha / (alpha + i - 1)`.
pub fn sample_crp_kn(n: usize, alpha: f64, rng: &mut RngStream) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("sample_crp_kn: n must be >= 1"));
    }
    if !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "sample_crp_kn: alpha must be > 0, got {alpha}"
        )));
    }
    let mut k = 1usize;
    for i in 2..=n {
        if rng.bernoulli(alpha / (alpha + (i - 1) as f64)) {
            k += 1;
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kn::{kn_moments_given_alpha, kn_pmf_given_alpha};
    use crate::special::StirlingTable;

    #[test]
    fn single_observation_always_one() {
        let mut rng = RngStream::new(31);
        for _ in 0..100 {
            assert_eq!(sample_crp_kn(1, 3.7, &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn mean_matches_harmonic_sum() {
        let mut rng = RngStream::new(32);
        let n = 100_000;
        let mut acc = 0usize;
        for _ in 0..n {
            acc += sample_crp_kn(10, 1.0, &mut rng).unwrap();
        }
        let mean = acc as f64 / n as f64;
        let (want, var) = kn_moments_given_alpha(10, 1.0).unwrap();
        let se = (var / n as f64).sqrt();
        assert!((mean - want).abs() < 3.0 * se, "mean {mean}, want {want}");
        assert!((want - 2.928_968_3).abs() < 1e-6);
    }

    #[test]
    fn frequencies_match_exact_pmf() {
        // brute-force equivalence of the pmf for small n
        let table = StirlingTable::build(8).unwrap();
        let draws = 100_000usize;
        for &(n, alpha) in &[(3usize, 0.7f64), (6, 2.0), (8, 1.0)] {
            let pmf = kn_pmf_given_alpha(n, alpha, &table).unwrap();
            let mut rng = RngStream::new(33 + n as u64);
            let mut counts = vec![0usize; n];
            for _ in 0..draws {
                counts[sample_crp_kn(n, alpha, &mut rng).unwrap() - 1] += 1;
            }
            for k in 1..=n {
                let p = pmf.prob(k);
                let freq = counts[k - 1] as f64 / draws as f64;
                let se = (p * (1.0 - p) / draws as f64).sqrt();
                assert!(
                    (freq - p).abs() < 3.0 * se.max(1e-5),
                    "(n,alpha)=({n},{alpha}), k={k}: freq {freq}, exact {p}"
                );
            }
        }
    }

    #[test]
    fn bad_arguments() {
        let mut rng = RngStream::new(34);
        assert!(sample_crp_kn(0, 1.0, &mut rng).is_err());
        assert!(sample_crp_kn(5, 0.0, &mut rng).is_err());
    }
}
