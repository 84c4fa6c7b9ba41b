use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::LearnError;

/// Component-wise adaptive random-walk Metropolis settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    /// Sweeps per chain, burn-in included.
    pub steps: usize,
    pub burn_in: usize,
    /// Initial proposal sd per coordinate; empty means 1.0 each (or a
    /// problem-specific default where one exists).
    pub scales: Vec<f64>,
    pub seed: u64,
    pub chains: usize,
    /// Tune scales toward 25-40% acceptance during burn-in.
    pub adapt: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            steps: 20_000,
            burn_in: 5_000,
            scales: Vec::new(),
            seed: 0,
            chains: 4,
            adapt: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    /// Post-burn-in states, one per sweep.
    pub samples: Vec<Vec<f64>>,
    /// Accepted fraction of post-burn-in proposals.
    pub acceptance: f64,
    /// Proposal sd after adaptation.
    pub scales: Vec<f64>,
}

const ADAPT_WINDOW: usize = 50;

fn run_chain<F: Fn(&[f64]) -> f64>(target: &F, init: &[f64], scales: &[f64], config: &McmcConfig, seed: u64) -> Chain {
    let d = init.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = init.to_vec();
    let mut lp = target(&x);
    let mut scales = scales.to_vec();
    let mut window = vec![0usize; d];
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    let mut samples = Vec::with_capacity(config.steps - config.burn_in);
    for step in 0..config.steps {
        let burning = step < config.burn_in;
        for c in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            let old = x[c];
            x[c] = old + scales[c] * z;
            let lp_new = target(&x);
            let u: f64 = rng.random();
            let ok = u.ln() < lp_new - lp || lp_new == lp;
            if ok {
                lp = lp_new;
            } else {
                x[c] = old;
            }
            if burning {
                window[c] += ok as usize;
            } else {
                proposed += 1;
                accepted += ok as usize;
            }
        }
        if burning && config.adapt && (step + 1) % ADAPT_WINDOW == 0 {
            for c in 0..d {
                let rate = window[c] as f64 / ADAPT_WINDOW as f64;
                if rate < 0.25 {
                    scales[c] *= 0.75;
                } else if rate > 0.40 {
                    scales[c] *= 1.3;
                }
                window[c] = 0;
            }
        }
        if !burning {
            samples.push(x.clone());
        }
    }
    Chain {
        samples,
        acceptance: if proposed == 0 { 1.0 } else { accepted as f64 / proposed as f64 },
        scales,
    }
}

/// Runs `config.chains` independent chains from `init`; chain `c` is seeded
/// with `config.seed + c`. `target` returns a log density, `-inf` outside
/// the support.
pub fn mcmc_sample<F>(target: &F, init: &[f64], config: &McmcConfig) -> Result<Vec<Chain>, LearnError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if config.steps <= config.burn_in {
        return Err(LearnError::Config("steps must exceed burn_in".into()));
    }
    if config.chains == 0 {
        return Err(LearnError::Config("need at least one chain".into()));
    }
    let scales = if config.scales.is_empty() {
        vec![1.0; init.len()]
    } else {
        config.scales.clone()
    };
    if scales.len() != init.len() || scales.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
        return Err(LearnError::Config("one non-negative proposal scale per coordinate".into()));
    }
    if !target(init).is_finite() {
        return Err(LearnError::NoValidInit);
    }
    let chains = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.chains)
            .map(|c| {
                let scales = &scales;
                scope.spawn(move || run_chain(target, init, scales, config, config.seed.wrapping_add(c as u64)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread")).collect()
    });
    Ok(chains)
}

/// Effective sample size from the initial positive sequence of
/// autocorrelation pairs.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return n as f64;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return n as f64;
    }
    let rho = |lag: usize| -> f64 {
        (0..n - lag).map(|t| (x[t] - mean) * (x[t + lag] - mean)).sum::<f64>() / (n as f64 * var)
    };
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    n as f64 / tau.max(1.0 / n as f64)
}
