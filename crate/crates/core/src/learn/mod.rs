//! Bayesian estimation of synergy coefficients from execution traces.
//!
//! Each human task `k` yields one observation of its measured duration,
//! modelled as
//!
//! ```text
//! d_k ~ N(IT_k + sum_i s_{r,i,k} * OV_{i,k},  sigma_m^2)
//! ```
//!
//! where `OV` is the planned overlap with robot task `i` and `IT_k` the
//! measured part of the human task not covered by robot work. Synergies get
//! log-normal priors and `sigma_m` a uniform one; the posterior is sampled
//! with adaptive random-walk Metropolis in `(log s, logit sigma_m)`.

mod mcmc;
mod posterior;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::process::{overlap, Plan, ProcessSpec, SynergyEntry, SynergyKey, SynergyMatrix};
use crate::sim::ExecutionTrace;

pub use mcmc::{effective_sample_size, mcmc_sample, Chain, McmcConfig};
pub use posterior::{log_posterior, Posterior};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("trace does not match plan: {0}")]
    TaskMismatch(String),
    #[error("parameters outside the prior support: {0}")]
    OutOfSupport(String),
    #[error("initial point has zero posterior density")]
    NoValidInit,
    #[error("dataset has no human-task observations")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Planned and measured overlap of one robot task with the observed human task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapTerm {
    pub robot: usize,
    pub robot_task: usize,
    pub planned: f64,
    pub measured: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub human_task: usize,
    pub duration: f64,
    pub idle: f64,
    pub overlaps: Vec<OverlapTerm>,
}

impl Observation {
    pub fn key(&self, t: &OverlapTerm) -> SynergyKey {
        SynergyKey::new(t.robot, t.robot_task, self.human_task)
    }
}

/// Where the nominal overlap `OV` is measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapBasis {
    /// Planned intervals as scheduled.
    #[default]
    Planned,
    /// Planned durations placed at the measured start times, so delays
    /// accumulated earlier in the run do not shift the nominal overlap.
    Realigned,
}

/// One observation per human task of `trace`, nominal overlaps from the
/// planned intervals.
pub fn extract_observations(
    trace: &ExecutionTrace,
    plan: &Plan,
    spec: &ProcessSpec,
) -> Result<Vec<Observation>, LearnError> {
    extract_observations_with(trace, plan, spec, OverlapBasis::Planned)
}

pub fn extract_observations_with(
    trace: &ExecutionTrace,
    plan: &Plan,
    spec: &ProcessSpec,
    basis: OverlapBasis,
) -> Result<Vec<Observation>, LearnError> {
    let m = spec.num_tasks();
    if trace.tasks.len() != m || plan.tasks.len() != m {
        return Err(LearnError::TaskMismatch(format!(
            "{} traced and {} planned tasks for a {m}-task process",
            trace.tasks.len(),
            plan.tasks.len()
        )));
    }
    for (i, (t, p)) in trace.tasks.iter().zip(&plan.tasks).enumerate() {
        if t.agent != p.agent {
            return Err(LearnError::TaskMismatch(format!(
                "task `{}` ran on a different agent than planned",
                spec.task_id(i)
            )));
        }
    }
    let human = spec.human();
    let nominal = |i: usize| {
        let p = plan.tasks[i];
        match basis {
            OverlapBasis::Planned => (p.start, p.end),
            OverlapBasis::Realigned => (trace.tasks[i].start, trace.tasks[i].start + p.end - p.start),
        }
    };
    let mut out = Vec::new();
    for (k, hk) in trace.tasks.iter().enumerate().filter(|(_, t)| t.agent == human) {
        let pk = nominal(k);
        let overlaps = trace
            .tasks
            .iter()
            .enumerate()
            .filter(|&(i, t)| i != k && t.agent != human)
            .map(|(i, t)| OverlapTerm {
                robot: t.agent,
                robot_task: i,
                planned: {
                    let pi = nominal(i);
                    overlap(pi.0, pi.1, pk.0, pk.1)
                },
                measured: overlap(t.start, t.end, hk.start, hk.end),
            })
            .filter(|o| o.planned > 0.0 || o.measured > 0.0)
            .collect();
        let idle = trace.idle(k).ok_or_else(|| {
            LearnError::TaskMismatch(format!("no idle record for human task `{}`", spec.task_id(k)))
        })?;
        out.push(Observation {
            human_task: k,
            duration: hk.end - hk.start,
            idle,
            overlaps,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairPrior {
    pub key: SynergyKey,
    pub mu_s: f64,
    pub sigma_s: f64,
}

/// Log-normal synergy priors and a uniform prior on the measurement sd.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub mu_s: f64,
    pub sigma_s: f64,
    pub lb: f64,
    pub ub: f64,
    /// Overrides of `(mu_s, sigma_s)` for individual pairs.
    #[serde(default)]
    pub pairs: Vec<PairPrior>,
}

impl Default for Priors {
    fn default() -> Self {
        Self {
            mu_s: 0.0,
            sigma_s: 0.5,
            lb: 0.01,
            ub: 10.0,
            pairs: Vec::new(),
        }
    }
}

impl Priors {
    pub fn validate(&self) -> Result<(), LearnError> {
        let pairs_ok = self.pairs.iter().all(|p| p.sigma_s > 0.0 && p.mu_s.is_finite());
        if !(self.lb >= 0.0 && self.ub > self.lb && self.sigma_s > 0.0 && self.mu_s.is_finite() && pairs_ok) {
            return Err(LearnError::Config(
                "priors need lb >= 0, ub > lb and positive sigma_s".into(),
            ));
        }
        Ok(())
    }

    /// `(mu_s, sigma_s)` for one pair.
    pub fn for_pair(&self, key: SynergyKey) -> (f64, f64) {
        self.pairs
            .iter()
            .find(|p| p.key == key)
            .map_or((self.mu_s, self.sigma_s), |p| (p.mu_s, p.sigma_s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub median: f64,
    pub mean: f64,
    pub lo90: f64,
    pub hi90: f64,
    /// Standard deviation of the log of the samples.
    pub log_sd: f64,
}

impl Interval {
    /// Summary of positive samples.
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let logs: Vec<f64> = v.iter().map(|x| x.ln()).collect();
        let lmean = logs.iter().sum::<f64>() / n;
        let lvar = logs.iter().map(|l| (l - lmean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self {
            median: quantile(&v, 0.5),
            mean,
            lo90: quantile(&v, 0.05),
            hi90: quantile(&v, 0.95),
            log_sd: lvar.sqrt(),
        }
    }

    /// Summary of a log-normal distribution.
    pub fn log_normal(mu: f64, sigma: f64) -> Self {
        const Z95: f64 = 1.644_853_626_951_472_2;
        Self {
            median: mu.exp(),
            mean: (mu + sigma * sigma / 2.0).exp(),
            lo90: (mu - Z95 * sigma).exp(),
            hi90: (mu + Z95 * sigma).exp(),
            log_sd: sigma,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo90 <= x && x <= self.hi90
    }
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynergySummary {
    pub key: SynergyKey,
    pub stats: Interval,
    pub n_obs: usize,
    /// Too little overlap to inform the pair; stats are the prior's.
    pub frozen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub synergies: Vec<SynergySummary>,
    pub sigma_m: Interval,
    pub acceptance: Vec<f64>,
    /// Smallest effective sample size over parameters, chains pooled.
    pub effective_length: f64,
    pub chains: usize,
}

impl PosteriorSummary {
    pub fn get(&self, key: SynergyKey) -> Option<&SynergySummary> {
        self.synergies.iter().find(|s| s.key == key)
    }

    /// Posterior medians as a synergy table. Pairs that could co-occur but
    /// were never observed get their prior median when it is not neutral.
    pub fn to_matrix(&self, spec: &ProcessSpec, priors: &Priors) -> SynergyMatrix {
        let mut m = SynergyMatrix::new();
        let human = spec.human();
        for r in spec.robots() {
            for i in (0..spec.num_tasks()).filter(|&i| spec.capable(i, r)) {
                for k in (0..spec.num_tasks()).filter(|&k| k != i && spec.capable(k, human)) {
                    let key = SynergyKey::new(r, i, k);
                    let (mu, _) = priors.for_pair(key);
                    if self.get(key).is_none() && mu != 0.0 {
                        m.insert(
                            key,
                            SynergyEntry {
                                value: mu.exp(),
                                interval: None,
                                n_obs: 0,
                            },
                        )
                        .expect("exp is positive");
                    }
                }
            }
        }
        for s in &self.synergies {
            m.insert(
                s.key,
                SynergyEntry {
                    value: s.stats.median,
                    interval: Some((s.stats.lo90, s.stats.hi90)),
                    n_obs: s.n_obs,
                },
            )
            .expect("medians are positive");
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub mcmc: McmcConfig,
    /// Pairs with less total planned overlap (seconds) stay at the prior median.
    pub freeze_below: f64,
    #[serde(default)]
    pub basis: OverlapBasis,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            mcmc: McmcConfig::default(),
            freeze_below: 0.1,
            basis: OverlapBasis::Planned,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Estimate {
    pub matrix: SynergyMatrix,
    pub summary: PosteriorSummary,
    pub chains: Vec<Chain>,
    /// Column names of the chain samples.
    pub names: Vec<String>,
}

/// Samples the posterior of all synergies that appear in `observations`.
pub fn estimate_from_observations(
    observations: &[Observation],
    priors: &Priors,
    config: &EstimateConfig,
) -> Result<(PosteriorSummary, Vec<Chain>, Vec<String>), LearnError> {
    if observations.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    priors.validate()?;
    let post = Posterior::new(observations, priors, config.freeze_below);
    let init = post.initial_point();
    let target = |theta: &[f64]| post.log_density_unconstrained(theta);
    let mut mcmc = config.mcmc.clone();
    if mcmc.scales.is_empty() {
        mcmc.scales = post.default_scales();
    }
    let chains = mcmc_sample(&target, &init, &mcmc)?;

    let np = post.free_keys().len();
    let column = |c: usize| -> Vec<f64> {
        chains
            .iter()
            .flat_map(|ch| ch.samples.iter().map(move |s| s[c]))
            .collect()
    };
    let mut synergies = Vec::new();
    for (c, &key) in post.free_keys().iter().enumerate() {
        let s: Vec<f64> = column(c).into_iter().map(f64::exp).collect();
        synergies.push(SynergySummary {
            key,
            stats: Interval::from_samples(&s),
            n_obs: post.n_obs(key),
            frozen: false,
        });
    }
    for &key in post.frozen_keys() {
        let (mu, sigma) = priors.for_pair(key);
        synergies.push(SynergySummary {
            key,
            stats: Interval::log_normal(mu, sigma),
            n_obs: post.n_obs(key),
            frozen: true,
        });
    }
    synergies.sort_by_key(|s| s.key);
    let sig: Vec<f64> = column(np).into_iter().map(|z| post.sigma_from_logit(z)).collect();
    let effective_length = (0..=np)
        .map(|c| {
            chains
                .iter()
                .map(|ch| effective_sample_size(&ch.samples.iter().map(|s| s[c]).collect::<Vec<_>>()))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    let summary = PosteriorSummary {
        synergies,
        sigma_m: Interval::from_samples(&sig),
        acceptance: chains.iter().map(|c| c.acceptance).collect(),
        effective_length,
        chains: chains.len(),
    };
    let mut names: Vec<String> = post
        .free_keys()
        .iter()
        .map(|k| format!("log_s_{}_{}_{}", k.robot, k.robot_task, k.human_task))
        .collect();
    names.push("logit_sigma_m".into());
    Ok((summary, chains, names))
}

/// Learns a synergy table from executed plans.
pub fn estimate_synergies(
    dataset: &[(ExecutionTrace, Plan)],
    spec: &ProcessSpec,
    priors: &Priors,
    config: &EstimateConfig,
) -> Result<Estimate, LearnError> {
    let mut obs = Vec::new();
    for (trace, plan) in dataset {
        obs.extend(extract_observations_with(trace, plan, spec, config.basis)?);
    }
    let (summary, chains, names) = estimate_from_observations(&obs, priors, config)?;
    Ok(Estimate {
        matrix: summary.to_matrix(spec, priors),
        summary,
        chains,
        names,
    })
}

/// Moment-matched log-normal of each learned pair, as the next prior.
pub fn update_priors(previous: &PosteriorSummary, priors: &Priors) -> Priors {
    const SIGMA_FLOOR: f64 = 0.05;
    let mut next = priors.clone();
    for s in previous.synergies.iter().filter(|s| !s.frozen) {
        let p = PairPrior {
            key: s.key,
            mu_s: s.stats.median.ln(),
            sigma_s: s.stats.log_sd.max(SIGMA_FLOOR),
        };
        match next.pairs.iter_mut().find(|q| q.key == s.key) {
            Some(q) => *q = p,
            None => next.pairs.push(p),
        }
    }
    next.pairs.sort_by_key(|p| p.key);
    next
}

/// One CSV row per sample: `chain,step,<names...>`.
pub fn chains_to_csv(chains: &[Chain], names: &[String]) -> String {
    let mut out = String::from("chain,step");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for (c, ch) in chains.iter().enumerate() {
        for (t, s) in ch.samples.iter().enumerate() {
            out.push_str(&format!("{c},{t}"));
            for v in s {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
    }
    out
}
