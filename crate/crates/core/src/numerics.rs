//! Numerical settings, deterministic random streams and the worker pool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Profile of the bump μ on [2ε/3, ε].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    #[default]
    Cubic,
    Quintic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub grid_h: f64,
    pub bbox: f64,
    pub newton_tol: f64,
    pub zero_thresh: f64,
    pub seed: u64,
    pub max_halvings: usize,
    pub bump: BumpKind,
    pub refine_check: bool,
    /// Samples per validation in tube selection.
    pub samples: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            grid_h: 0.05,
            bbox: 2.5,
            newton_tol: 1e-10,
            zero_thresh: 1e-8,
            seed: 0,
            max_halvings: 20,
            bump: BumpKind::Cubic,
            refine_check: true,
            samples: 500,
        }
    }
}

impl Numerics {
    /// Width of the strip along user-given domain boundaries that is kept out
    /// of degree regions.
    pub fn pad(&self) -> f64 {
        0.5 * self.grid_h
    }
}

/// Independent ChaCha stream for a (seed, purpose) pair.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Point `i` of the Halton sequence in `[0,1)^d` (bases 2, 3, 5, 7, ...).
pub fn halton(i: u64, d: usize) -> Vec<f64> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    (0..d)
        .map(|k| {
            let b = PRIMES[k % PRIMES.len()];
            let (mut f, mut r, mut n) = (1.0, 0.0, i + 1);
            while n > 0 {
                f /= b as f64;
                r += f * (n % b) as f64;
                n /= b;
            }
            r
        })
        .collect()
}

/// Worker count from `EGDEG_WORKERS`, default 1.
pub fn workers() -> usize {
    std::env::var("EGDEG_WORKERS").ok().and_then(|s| s.parse().ok()).filter(|&n| n > 0).unwrap_or(1)
}

/// Runs `f` inside a rayon pool sized by `EGDEG_WORKERS`.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    with_pool_size(workers(), f)
}

pub fn with_pool_size<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().expect("thread pool");
    pool.install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_first_points() {
        assert_eq!(halton(0, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(1, 1), vec![0.25]);
    }

    #[test]
    fn streams_differ() {
        use rand::Rng;
        let a: u64 = stream_rng(1, 0).gen();
        let b: u64 = stream_rng(1, 1).gen();
        let c: u64 = stream_rng(1, 0).gen();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
