use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{LearnError, Observation, Priors};
use crate::process::SynergyKey;

struct Row {
    /// Measured duration minus idle time and frozen contributions.
    y: f64,
    /// `(parameter, planned overlap)` pairs.
    terms: Vec<(usize, f64)>,
}

/// Posterior over the log synergies of the informative pairs and `sigma_m`.
pub struct Posterior {
    free: Vec<SynergyKey>,
    frozen: Vec<SynergyKey>,
    n_obs: BTreeMap<SynergyKey, usize>,
    prior: Vec<(f64, f64)>,
    rows: Vec<Row>,
    lb: f64,
    ub: f64,
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Posterior {
    /// Pairs whose total planned overlap is below `freeze_below` are held at
    /// their prior median.
    pub fn new(observations: &[Observation], priors: &Priors, freeze_below: f64) -> Self {
        let mut total: BTreeMap<SynergyKey, f64> = BTreeMap::new();
        let mut n_obs: BTreeMap<SynergyKey, usize> = BTreeMap::new();
        for o in observations {
            for t in &o.overlaps {
                let key = o.key(t);
                *total.entry(key).or_default() += t.planned;
                if t.planned > 0.0 {
                    *n_obs.entry(key).or_default() += 1;
                }
            }
        }
        let (free, frozen): (Vec<SynergyKey>, Vec<SynergyKey>) =
            total.keys().copied().partition(|k| total[k] >= freeze_below && total[k] > 0.0);
        let index: BTreeMap<SynergyKey, usize> = free.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let rows = observations
            .iter()
            .map(|o| {
                let mut y = o.duration - o.idle;
                let mut terms = Vec::new();
                for t in o.overlaps.iter().filter(|t| t.planned > 0.0) {
                    let key = o.key(t);
                    match index.get(&key) {
                        Some(&p) => terms.push((p, t.planned)),
                        None => y -= priors.for_pair(key).0.exp() * t.planned,
                    }
                }
                Row { y, terms }
            })
            .collect();
        Self {
            prior: free.iter().map(|&k| priors.for_pair(k)).collect(),
            free,
            frozen,
            n_obs,
            rows,
            lb: priors.lb,
            ub: priors.ub,
        }
    }

    pub fn free_keys(&self) -> &[SynergyKey] {
        &self.free
    }

    pub fn frozen_keys(&self) -> &[SynergyKey] {
        &self.frozen
    }

    /// Observations with positive planned overlap for `key`.
    pub fn n_obs(&self, key: SynergyKey) -> usize {
        self.n_obs.get(&key).copied().unwrap_or(0)
    }

    fn check(&self, log_s: &[f64], sigma_m: f64) -> Result<(), LearnError> {
        if log_s.len() != self.free.len() {
            return Err(LearnError::Config(format!(
                "expected {} log synergies, got {}",
                self.free.len(),
                log_s.len()
            )));
        }
        if !(sigma_m > self.lb && sigma_m < self.ub) {
            return Err(LearnError::OutOfSupport(format!(
                "sigma_m = {sigma_m} outside ({}, {})",
                self.lb, self.ub
            )));
        }
        if let Some(u) = log_s.iter().find(|u| !u.is_finite()) {
            return Err(LearnError::OutOfSupport(format!("log s = {u}")));
        }
        Ok(())
    }

    fn residual(row: &Row, s: &[f64]) -> f64 {
        row.y - row.terms.iter().map(|&(p, ov)| s[p] * ov).sum::<f64>()
    }

    /// Log density in `(s, sigma_m)`, up to the evidence.
    pub fn log_posterior(&self, log_s: &[f64], sigma_m: f64) -> Result<f64, LearnError> {
        self.check(log_s, sigma_m)?;
        let s: Vec<f64> = log_s.iter().map(|u| u.exp()).collect();
        let norm = -sigma_m.ln() - 0.5 * (2.0 * PI).ln();
        let ll: f64 = self
            .rows
            .iter()
            .map(|r| norm - Self::residual(r, &s).powi(2) / (2.0 * sigma_m * sigma_m))
            .sum();
        let lp: f64 = log_s
            .iter()
            .zip(&self.prior)
            .map(|(&u, &(mu, sd))| -u - sd.ln() - 0.5 * (2.0 * PI).ln() - (u - mu).powi(2) / (2.0 * sd * sd))
            .sum();
        Ok(ll + lp - (self.ub - self.lb).ln())
    }

    /// Gradient of [`Posterior::log_posterior`] with respect to `log_s`.
    pub fn grad_log_s(&self, log_s: &[f64], sigma_m: f64) -> Result<Vec<f64>, LearnError> {
        self.check(log_s, sigma_m)?;
        let s: Vec<f64> = log_s.iter().map(|u| u.exp()).collect();
        let mut g: Vec<f64> = log_s
            .iter()
            .zip(&self.prior)
            .map(|(&u, &(mu, sd))| -1.0 - (u - mu) / (sd * sd))
            .collect();
        let inv_var = 1.0 / (sigma_m * sigma_m);
        for r in &self.rows {
            let e = Self::residual(r, &s);
            for &(p, ov) in &r.terms {
                g[p] += e * inv_var * ov * s[p];
            }
        }
        Ok(g)
    }

    pub fn sigma_from_logit(&self, z: f64) -> f64 {
        self.lb + (self.ub - self.lb) * sigmoid(z)
    }

    pub fn logit_from_sigma(&self, sigma: f64) -> f64 {
        let f = (sigma - self.lb) / (self.ub - self.lb);
        (f / (1.0 - f)).ln()
    }

    /// Density of `theta = (log s..., logit sigma_m)` including the Jacobian
    /// of both transforms; `-inf` outside the support.
    pub fn log_density_unconstrained(&self, theta: &[f64]) -> f64 {
        let n = self.free.len();
        if theta.len() != n + 1 {
            return f64::NEG_INFINITY;
        }
        let z = theta[n];
        let sigma = self.sigma_from_logit(z);
        match self.log_posterior(&theta[..n], sigma) {
            Ok(lp) => {
                let jac_s: f64 = theta[..n].iter().sum();
                let jac_sigma = (self.ub - self.lb).ln() - softplus(-z) - softplus(z);
                lp + jac_s + jac_sigma
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// Prior medians for the synergies and the residual rms for `sigma_m`.
    pub fn initial_point(&self) -> Vec<f64> {
        let mut theta: Vec<f64> = self.prior.iter().map(|p| p.0).collect();
        let s: Vec<f64> = theta.iter().map(|u| u.exp()).collect();
        let rms = if self.rows.is_empty() {
            1.0
        } else {
            (self.rows.iter().map(|r| Self::residual(r, &s).powi(2)).sum::<f64>() / self.rows.len() as f64).sqrt()
        };
        let pad = 1e-3 * (self.ub - self.lb);
        let sigma = rms.clamp(self.lb + pad, self.ub - pad);
        theta.push(self.logit_from_sigma(sigma));
        theta
    }

    /// Per-coordinate proposal sd from the curvature at the initial point.
    pub fn default_scales(&self) -> Vec<f64> {
        let init = self.initial_point();
        let n = self.free.len();
        let sigma = self.sigma_from_logit(init[n]);
        let mut h: Vec<f64> = self.prior.iter().map(|p| 1.0 / (p.1 * p.1)).collect();
        for r in &self.rows {
            for &(p, ov) in &r.terms {
                h[p] += (ov * init[p].exp() / sigma).powi(2);
            }
        }
        let mut scales: Vec<f64> = h.iter().map(|v| 2.4 / v.sqrt()).collect();
        scales.push(0.5);
        scales
    }
}

/// Log posterior of `(log s, sigma_m)` for every pair in `observations`,
/// none frozen. Pairs are ordered by key.
pub fn log_posterior(
    log_s: &[f64],
    sigma_m: f64,
    observations: &[Observation],
    priors: &Priors,
) -> Result<f64, LearnError> {
    Posterior::new(observations, priors, 0.0).log_posterior(log_s, sigma_m)
}
