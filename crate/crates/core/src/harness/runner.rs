use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Experiment;

/// Independent stream for one trial, keyed by seed and experiment and
/// selected by trial index, so results do not depend on scheduling.
pub fn trial_rng(seed: u64, experiment: Experiment, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&experiment.stream_id().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials and returns their results in trial order.
pub fn run_trials<T, F>(seed: u64, experiment: Experiment, trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync + Send,
{
    let body = |t: usize| {
        let mut rng = trial_rng(seed, experiment, t as u64);
        f(t as u64, &mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(body).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(body).collect()
    }
}

/// Order-preserving map over independent work items.
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                stderr: f64::NAN,
                count: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Summary {
            mean,
            stderr,
            count: n,
        }
    }

    /// Binomial proportion with `sqrt(p(1-p)/n)`.
    pub fn proportion(hits: usize, n: usize) -> Summary {
        let p = hits as f64 / n as f64;
        Summary {
            mean: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            count: n,
        }
    }
}
