use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded deterministic random stream, handed explicitly to every stochastic
/// operation.
///
/// Backed by ChaCha8, whose output is fixed by specification, so identical
/// seeds reproduce identical draw sequences across runs. Substreams use the
/// cipher's 64-bit stream counter: `substream(i)` and `substream(j)` are
/// independent for `i != j`, which lets grid jobs run concurrently and still
/// produce schedule-independent results.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fresh independent stream derived from the same seed.
    pub fn substream(&self, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(index);
        RngStream {
            seed: self.seed,
            inner,
        }
    }

    /// Uniform draw on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        loop {
            let u: f64 = self.inner.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// Bernoulli draw.
    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.inner.random::<f64>() < p
    }

    /// Standard normal via the quantile transform (one uniform per draw).
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        crate::special::std_normal_quantile(self.uniform())
    }
}
