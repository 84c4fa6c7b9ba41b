//! Observations drawn from the duration model with known parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use synplan_core::learn::{Observation, OverlapTerm};
use synplan_core::process::SynergyKey;

/// `n` observations; observation `o` belongs to the human task of pair
/// `o mod truth.len()` and overlaps every true pair of that human task for
/// 1 to 4 s. Idle time is uniform on [0, 2) s.
pub fn observations(truth: &[(SynergyKey, f64)], n: usize, sigma_m: f64, seed: u64) -> Vec<Observation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|o| {
            let k = truth[o % truth.len()].0.human_task;
            let idle = rng.random_range(0.0..2.0);
            let mut mean = idle;
            let mut overlaps = Vec::new();
            for &(key, s) in truth.iter().filter(|(key, _)| key.human_task == k) {
                let ov: f64 = rng.random_range(1.0..4.0);
                mean += s * ov;
                overlaps.push(OverlapTerm {
                    robot: key.robot,
                    robot_task: key.robot_task,
                    planned: ov,
                    measured: s * ov,
                });
            }
            let z: f64 = rng.sample(StandardNormal);
            Observation {
                human_task: k,
                duration: mean + sigma_m * z,
                idle,
                overlaps,
            }
        })
        .collect()
}
