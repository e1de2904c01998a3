//! Seeded, parallel Bernoulli experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Trials are split across this many substreams regardless of the thread
/// count, so results depend only on the seed.
pub const WORKERS: u64 = 8;

/// Sampled success rate with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: usize,
    pub trials: usize,
    pub p_hat: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn new(successes: usize, trials: usize) -> Self {
        let p_hat = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        let stderr = if trials == 0 { 0.0 } else { (p_hat * (1.0 - p_hat) / trials as f64).sqrt() };
        Estimate { successes, trials, p_hat, stderr }
    }

    /// |p̂ − p| ≤ k·σ with σ the standard error under the exact p; when p is 0
    /// or 1 this demands exact agreement.
    pub fn within_sigma(&self, p: f64, k: f64) -> bool {
        let sigma = (p * (1.0 - p) / self.trials.max(1) as f64).sqrt();
        (self.p_hat - p).abs() <= k * sigma + 1e-12
    }
}

/// The RNG for substream `worker` of `seed`.
pub fn substream(seed: u64, worker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker);
    rng
}

/// Runs `trials` independent calls of `trial` and returns their outcomes in a
/// seed-determined order.
pub fn run_trials<T: Send>(trials: usize, seed: u64, trial: impl Fn(&mut ChaCha8Rng) -> T + Sync) -> Vec<T> {
    let w = WORKERS as usize;
    (0..w)
        .into_par_iter()
        .map(|i| {
            let n = trials / w + usize::from(i < trials % w);
            let mut rng = substream(seed, i as u64);
            (0..n).map(|_| trial(&mut rng)).collect::<Vec<T>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn bernoulli(trials: usize, seed: u64, trial: impl Fn(&mut ChaCha8Rng) -> bool + Sync) -> Estimate {
    let hits = run_trials(trials, seed, trial).into_iter().filter(|&b| b).count();
    Estimate::new(hits, trials)
}
