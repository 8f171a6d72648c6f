//! Seeded hit-or-miss Monte Carlo over the unit cube.
//!
//! Samples are drawn in fixed-size chunks, each chunk from its own ChaCha
//! stream whose seed depends only on the base seed and the chunk index. The
//! result is therefore the same for any number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Seed used whenever a caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5EED_CA1D_0000_0001;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
const CHUNK: usize = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

/// A measured quantity with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub stderr: f64,
}

impl Measured {
    pub fn exact(value: f64) -> Self {
        Measured { value, stderr: 0.0 }
    }
}

/// splitmix64 finalizer, used to derive per-chunk subseeds.
pub fn subseed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(subseed(seed, stream))
}

/// Counts uniform points `u ∈ [0,1)^dim` for which `hit(u)` holds.
/// Returns `(hits, samples)`.
pub fn count_hits<F>(dim: usize, cfg: &McConfig, hit: F) -> (u64, u64)
where
    F: Fn(&[f64]) -> bool + Sync,
{
    let n = cfg.samples.max(1);
    let chunks = n.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng(cfg.seed, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut u = vec![0.0; dim];
            let mut h = 0u64;
            for _ in 0..len {
                for x in u.iter_mut() {
                    *x = r.random::<f64>();
                }
                if hit(&u) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    (hits, n as u64)
}

/// Turns a hit count into a measure estimate for a region of total volume
/// `volume`.
pub fn fraction_estimate(hits: u64, n: u64, volume: f64) -> Measured {
    let p = hits as f64 / n as f64;
    Measured {
        value: volume * p,
        stderr: volume * (p * (1.0 - p) / n as f64).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_disc() {
        let cfg = McConfig {
            samples: 200_000,
            seed: 7,
        };
        let (h, n) = count_hits(2, &cfg, |u| u[0] * u[0] + u[1] * u[1] < 1.0);
        let e = fraction_estimate(h, n, 4.0);
        assert!((e.value - std::f64::consts::PI).abs() < 4.0 * e.stderr);
    }

    #[test]
    fn independent_of_thread_count() {
        let cfg = McConfig {
            samples: 50_000,
            seed: 11,
        };
        let f = |u: &[f64]| u[0] < 0.37;
        let a = count_hits(1, &cfg, f);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| count_hits(1, &cfg, f));
        assert_eq!(a, b);
    }
}
