//! Task allocation and scheduling models.
//!
//! Four models share one linear skeleton (assignment, precedence, same-agent
//! non-overlap, makespan auxiliary):
//!
//! * `Baseline`: nominal durations only.
//! * `NotNeighboring`: listed task pairs may not run in parallel when split
//!   between the human and a robot.
//! * `Stp`: robot end times stretch by `(s - 1)` times the planned overlap
//!   with each concurrent human task.
//! * `Rstp`: nominal end times, with the same stretch added to the objective.

mod heuristic;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{
    solve_milp, MilpError, MilpProblem, MilpSolution, Relation, SolveStatus, SolverConfig, VarId,
};
use crate::process::{overlap, Plan, PlanError, ProcessError, ProcessSpec, ScheduledTask, SynergyMatrix};

pub use heuristic::greedy_plan;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlannerError {
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error("not-neighboring pair ({0}, {1}) does not name two distinct tasks")]
    UnknownTaskInPair(usize, usize),
    #[error("solution does not yield a valid plan: {0}")]
    InfeasibleSolution(String),
    #[error("variable `{0}` is not integral")]
    IntegralityViolation(String),
    #[error("solver returned no solution ({0:?})")]
    NoSolution(SolveStatus),
    #[error(transparent)]
    Solver(#[from] MilpError),
}

impl From<PlanError> for PlannerError {
    fn from(e: PlanError) -> Self {
        PlannerError::InfeasibleSolution(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "pairs", rename_all = "snake_case")]
pub enum PlannerKind {
    Baseline,
    NotNeighboring(Vec<(usize, usize)>),
    Rstp,
    Stp,
}

impl PlannerKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::Baseline => "baseline",
            PlannerKind::NotNeighboring(_) => "not_neighboring",
            PlannerKind::Rstp => "rstp",
            PlannerKind::Stp => "stp",
        }
    }

    /// Gap and time limit defaults for each model.
    pub fn default_solver_config(&self) -> SolverConfig {
        let (gap, secs) = match self {
            PlannerKind::Stp => (0.10, 240.0),
            PlannerKind::Rstp => (0.02, 60.0),
            PlannerKind::Baseline | PlannerKind::NotNeighboring(_) => (0.0, 60.0),
        };
        SolverConfig {
            gap_target: gap,
            time_limit_secs: secs,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Baseline,
    NotNeighboring,
    Stp,
    Rstp,
}

/// Overlap machinery of one unordered task pair `(i, k)`, `i < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairVars {
    pub tsmax: VarId,
    pub temin: VarId,
    pub ov: VarId,
    pub sig1: VarId,
    pub sig2: VarId,
    pub sig3: VarId,
}

/// A built model plus the maps from schedule symbols to solver variables.
#[derive(Debug, Clone)]
pub struct ModelArtifacts {
    pub kind: ModelKind,
    pub problem: MilpProblem,
    pub ts: Vec<VarId>,
    pub te: Vec<VarId>,
    /// `alloc[i][j]`: task `i` runs on agent `j`.
    pub alloc: Vec<Vec<VarId>>,
    pub temax: VarId,
    /// Ordering binary per unordered pair that may share an agent.
    pub delta: BTreeMap<(usize, usize), VarId>,
    pub pairs: BTreeMap<(usize, usize), PairVars>,
    /// Adaptation term keyed by `(robot, robot_task, human_task)`.
    pub alpha: BTreeMap<(usize, usize, usize), VarId>,
    /// `s - 1` for each adaptation term.
    pub alpha_coef: BTreeMap<(usize, usize, usize), f64>,
    pub big_m: f64,
    pub horizon: f64,
}

impl ModelArtifacts {
    pub fn ov(&self, i: usize, k: usize) -> Option<VarId> {
        self.pairs.get(&(i.min(k), i.max(k))).map(|p| p.ov)
    }
}

/// `reach[i][k]`: task `k` must finish before task `i` starts, directly or
/// through a chain.
fn precedence_closure(spec: &ProcessSpec) -> Vec<Vec<bool>> {
    let m = spec.num_tasks();
    let mut reach = vec![vec![false; m]; m];
    for &i in &spec.topological_order() {
        for k in spec.predecessors(i).collect::<Vec<_>>() {
            reach[i][k] = true;
            let via: Vec<usize> = (0..m).filter(|&q| reach[k][q]).collect();
            for q in via {
                reach[i][q] = true;
            }
        }
    }
    reach
}

pub fn horizon(spec: &ProcessSpec, synergies: Option<&SynergyMatrix>) -> f64 {
    let total: f64 = (0..spec.num_tasks()).map(|i| spec.max_duration(i)).sum();
    1.5 * total * synergies.map_or(1.0, |s| s.max_value().max(1.0))
}

struct Builder<'a> {
    spec: &'a ProcessSpec,
    p: MilpProblem,
    m_big: f64,
    reach: Vec<Vec<bool>>,
    ts: Vec<VarId>,
    te: Vec<VarId>,
    alloc: Vec<Vec<VarId>>,
    temax: VarId,
    delta: BTreeMap<(usize, usize), VarId>,
    pairs: BTreeMap<(usize, usize), PairVars>,
    alpha: BTreeMap<(usize, usize, usize), VarId>,
    alpha_coef: BTreeMap<(usize, usize, usize), f64>,
    /// Upper bound on each task's duration under the model being built.
    max_dur: Vec<f64>,
}

impl<'a> Builder<'a> {
    fn new(spec: &'a ProcessSpec, h: f64) -> Self {
        let m = spec.num_tasks();
        let mut p = MilpProblem::new();
        let ts: Vec<VarId> = (0..m).map(|i| p.add_continuous(format!("ts_{i}"), 0.0, h)).collect();
        let te: Vec<VarId> = (0..m).map(|i| p.add_continuous(format!("te_{i}"), 0.0, h)).collect();
        let alloc: Vec<Vec<VarId>> = (0..m)
            .map(|i| {
                (0..spec.num_agents())
                    .map(|j| {
                        let a = p.add_binary(format!("a_{j}_{i}"));
                        p.set_priority(a, 3);
                        a
                    })
                    .collect()
            })
            .collect();
        let temax = p.add_continuous("temax", 0.0, h);
        Self {
            spec,
            p,
            m_big: h,
            reach: precedence_closure(spec),
            ts,
            te,
            alloc,
            temax,
            delta: BTreeMap::new(),
            pairs: BTreeMap::new(),
            alpha: BTreeMap::new(),
            alpha_coef: BTreeMap::new(),
            max_dur: (0..m).map(|i| spec.max_duration(i).min(h)).collect(),
        }
    }

    /// Robot tasks in STP stretch up to `d / (2 - s_max)` (unbounded, so the
    /// horizon, once `s_max >= 2`).
    fn stretch_max_durations(&mut self, synergies: &SynergyMatrix) {
        let spec = self.spec;
        let m = spec.num_tasks();
        let hum = spec.human();
        for i in 0..m {
            let mut ub: f64 = 0.0;
            for j in spec.capable_agents(i) {
                let d = spec.duration(i, j).unwrap_or(0.0);
                if j == hum {
                    ub = ub.max(d);
                    continue;
                }
                let s_max = (0..m)
                    .filter(|&k| k != i && spec.capable(k, hum) && !self.ordered(i, k))
                    .map(|k| synergies.get(j, i, k))
                    .fold(1.0, f64::max);
                ub = ub.max(if s_max < 2.0 { d / (2.0 - s_max) } else { f64::INFINITY });
            }
            self.max_dur[i] = ub.min(self.m_big);
        }
    }

    fn ov_bound(&self, i: usize, k: usize) -> f64 {
        self.max_dur[i].min(self.max_dur[k])
    }

    fn ordered(&self, i: usize, k: usize) -> bool {
        self.reach[i][k] || self.reach[k][i]
    }

    fn skeleton(&mut self) {
        let spec = self.spec;
        let m = spec.num_tasks();
        let big = self.m_big;
        for i in 0..m {
            let terms = self.alloc[i].iter().map(|&a| (a, 1.0)).collect();
            self.p.add_constraint(format!("goal_{i}"), terms, Relation::Eq, 1.0);
            for j in 0..spec.num_agents() {
                if !spec.capable(i, j) {
                    self.p
                        .add_constraint(format!("cap_{j}_{i}"), vec![(self.alloc[i][j], 1.0)], Relation::Le, 0.0);
                }
            }
            for k in spec.predecessors(i).collect::<Vec<_>>() {
                self.p.add_constraint(
                    format!("prec_{i}_{k}"),
                    vec![(self.ts[i], 1.0), (self.te[k], -1.0)],
                    Relation::Ge,
                    0.0,
                );
            }
            self.p.add_constraint(
                format!("makespan_{i}"),
                vec![(self.temax, 1.0), (self.te[i], -1.0)],
                Relation::Ge,
                0.0,
            );
        }
        for i in 0..m {
            for k in i + 1..m {
                if self.ordered(i, k) {
                    continue;
                }
                let shared: Vec<usize> = (0..spec.num_agents())
                    .filter(|&j| spec.capable(i, j) && spec.capable(k, j))
                    .collect();
                if shared.is_empty() {
                    continue;
                }
                let d = self.p.add_binary(format!("d_{i}_{k}"));
                self.p.set_priority(d, 2);
                self.delta.insert((i, k), d);
                for j in shared {
                    let (ai, ak) = (self.alloc[i][j], self.alloc[k][j]);
                    // d = 1: i after k
                    self.p.add_constraint(
                        format!("noov_a_{j}_{i}_{k}"),
                        vec![(self.ts[i], 1.0), (self.te[k], -1.0), (d, -big), (ai, -big), (ak, -big)],
                        Relation::Ge,
                        -3.0 * big,
                    );
                    // d = 0: k after i
                    self.p.add_constraint(
                        format!("noov_b_{j}_{i}_{k}"),
                        vec![(self.ts[k], 1.0), (self.te[i], -1.0), (d, big), (ai, -big), (ak, -big)],
                        Relation::Ge,
                        -2.0 * big,
                    );
                }
            }
        }
    }

    fn pair_machinery(&mut self, i: usize, k: usize) -> PairVars {
        let key = (i.min(k), i.max(k));
        if let Some(v) = self.pairs.get(&key) {
            return *v;
        }
        let (i, k) = key;
        let h = self.m_big;
        let big = self.m_big;
        let ov_ub = self.ov_bound(i, k);
        let p = &mut self.p;
        let v = PairVars {
            tsmax: p.add_continuous(format!("tsmax_{i}_{k}"), 0.0, h),
            temin: p.add_continuous(format!("temin_{i}_{k}"), 0.0, h),
            ov: p.add_continuous(format!("ov_{i}_{k}"), 0.0, ov_ub),
            sig1: p.add_binary(format!("sig1_{i}_{k}")),
            sig2: p.add_binary(format!("sig2_{i}_{k}")),
            sig3: p.add_binary(format!("sig3_{i}_{k}")),
        };
        p.set_priority(v.sig3, 1);
        let (tsi, tsk, tei, tek) = (self.ts[i], self.ts[k], self.te[i], self.te[k]);
        // overlap never exceeds either duration (valid, tightens the relaxation)
        p.add_constraint(format!("ov_dur_i_{i}_{k}"), vec![(v.ov, 1.0), (tei, -1.0), (tsi, 1.0)], Relation::Le, 0.0);
        p.add_constraint(format!("ov_dur_k_{i}_{k}"), vec![(v.ov, 1.0), (tek, -1.0), (tsk, 1.0)], Relation::Le, 0.0);
        p.add_constraint(format!("tsmax1_{i}_{k}"), vec![(v.tsmax, 1.0), (tsi, -1.0)], Relation::Ge, 0.0);
        p.add_constraint(format!("tsmax2_{i}_{k}"), vec![(v.tsmax, 1.0), (tsk, -1.0)], Relation::Ge, 0.0);
        p.add_constraint(
            format!("tsmax3_{i}_{k}"),
            vec![(v.tsmax, 1.0), (tsi, -1.0), (v.sig1, big)],
            Relation::Le,
            big,
        );
        p.add_constraint(
            format!("tsmax4_{i}_{k}"),
            vec![(v.tsmax, 1.0), (tsk, -1.0), (v.sig1, -big)],
            Relation::Le,
            0.0,
        );
        p.add_constraint(format!("temin1_{i}_{k}"), vec![(v.temin, 1.0), (tei, -1.0)], Relation::Le, 0.0);
        p.add_constraint(format!("temin2_{i}_{k}"), vec![(v.temin, 1.0), (tek, -1.0)], Relation::Le, 0.0);
        p.add_constraint(
            format!("temin3_{i}_{k}"),
            vec![(v.temin, 1.0), (tei, -1.0), (v.sig2, -big)],
            Relation::Ge,
            -big,
        );
        p.add_constraint(
            format!("temin4_{i}_{k}"),
            vec![(v.temin, 1.0), (tek, -1.0), (v.sig2, big)],
            Relation::Ge,
            0.0,
        );
        p.add_constraint(
            format!("ov1_{i}_{k}"),
            vec![(v.ov, 1.0), (v.temin, -1.0), (v.tsmax, 1.0), (v.sig3, -big)],
            Relation::Le,
            0.0,
        );
        p.add_constraint(format!("ov2_{i}_{k}"), vec![(v.ov, 1.0), (v.sig3, ov_ub)], Relation::Le, ov_ub);
        p.add_constraint(
            format!("ov_lb_{i}_{k}"),
            vec![(v.ov, 1.0), (v.temin, -1.0), (v.tsmax, 1.0)],
            Relation::Ge,
            0.0,
        );
        self.pairs.insert(key, v);
        v
    }

    /// α for robot task `i` on robot `r` against human task `k`.
    fn alpha_terms(&mut self, synergies: &SynergyMatrix) {
        let spec = self.spec;
        let m = spec.num_tasks();
        let hum = spec.human();
        let robots: Vec<usize> = spec.robots().collect();
        for i in 0..m {
            for k in 0..m {
                if i == k || self.ordered(i, k) || !spec.capable(k, hum) {
                    continue;
                }
                for &r in &robots {
                    // neutral pairs add nothing to end times or objective
                    if !spec.capable(i, r) || synergies.get(r, i, k) == 1.0 {
                        continue;
                    }
                    let pv = self.pair_machinery(i, k);
                    let ub = self.ov_bound(i, k);
                    let a = self.p.add_continuous(format!("alpha_{r}_{i}_{k}"), 0.0, ub);
                    let (ar, ah) = (self.alloc[i][r], self.alloc[k][hum]);
                    // α = OV when a_r_i = a_H_k = 1
                    self.p.add_constraint(
                        format!("alpha1_{r}_{i}_{k}"),
                        vec![(a, 1.0), (pv.ov, -1.0), (ah, ub), (ar, ub)],
                        Relation::Le,
                        2.0 * ub,
                    );
                    self.p.add_constraint(
                        format!("alpha2_{r}_{i}_{k}"),
                        vec![(a, 1.0), (pv.ov, -1.0), (ah, -ub), (ar, -ub)],
                        Relation::Ge,
                        -2.0 * ub,
                    );
                    // α = 0 otherwise; α >= 0 is the variable bound
                    self.p
                        .add_constraint(format!("alpha3_{r}_{i}_{k}"), vec![(a, 1.0), (ar, -ub)], Relation::Le, 0.0);
                    self.p
                        .add_constraint(format!("alpha5_{r}_{i}_{k}"), vec![(a, 1.0), (ah, -ub)], Relation::Le, 0.0);
                    self.alpha.insert((r, i, k), a);
                    self.alpha_coef.insert((r, i, k), synergies.get(r, i, k) - 1.0);
                }
            }
        }
    }

    /// Redundant cuts on the makespan: per-agent load, and heads/tails along
    /// precedence chains. `min_dur[i][j]` must bound task `i`'s duration on
    /// agent `j` from below in every feasible schedule.
    fn strengthen(&mut self, min_dur: &[Vec<Option<f64>>]) {
        let spec = self.spec;
        let m = spec.num_tasks();
        for j in 0..spec.num_agents() {
            let mut terms = vec![(self.temax, 1.0)];
            for i in 0..m {
                if let Some(d) = min_dur[i][j] {
                    terms.push((self.alloc[i][j], -d));
                }
            }
            self.p.add_constraint(format!("load_{j}"), terms, Relation::Ge, 0.0);
        }
        let lb: Vec<f64> = (0..m)
            .map(|i| min_dur[i].iter().flatten().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let order = spec.topological_order();
        let mut head = vec![0.0f64; m];
        for &i in &order {
            for k in spec.predecessors(i) {
                head[i] = head[i].max(head[k] + lb[k]);
            }
        }
        let mut tail = vec![0.0f64; m];
        for &i in order.iter().rev() {
            for k in spec.predecessors(i) {
                tail[k] = tail[k].max(tail[i] + lb[i]);
            }
        }
        for i in 0..m {
            if head[i] > 0.0 {
                self.p.add_constraint(format!("head_{i}"), vec![(self.ts[i], 1.0)], Relation::Ge, head[i]);
            }
            if tail[i] > 0.0 {
                self.p.add_constraint(
                    format!("tail_{i}"),
                    vec![(self.temax, 1.0), (self.te[i], -1.0)],
                    Relation::Ge,
                    tail[i],
                );
            }
        }
    }

    fn nominal_durations(&self) -> Vec<Vec<Option<f64>>> {
        let spec = self.spec;
        (0..spec.num_tasks())
            .map(|i| (0..spec.num_agents()).map(|j| spec.duration(i, j)).collect())
            .collect()
    }

    /// Shortest possible stretched durations: a robot task overlapped by human
    /// tasks with synergy `s < 1` lasts at least `d / (2 - s_min)`.
    fn stretched_durations(&self, synergies: &SynergyMatrix) -> Vec<Vec<Option<f64>>> {
        let spec = self.spec;
        let m = spec.num_tasks();
        let hum = spec.human();
        (0..m)
            .map(|i| {
                (0..spec.num_agents())
                    .map(|j| {
                        let d = spec.duration(i, j)?;
                        if j == hum {
                            return Some(d);
                        }
                        let s_min = (0..m)
                            .filter(|&k| k != i && spec.capable(k, hum) && !self.ordered(i, k))
                            .map(|k| synergies.get(j, i, k))
                            .fold(1.0, f64::min);
                        Some(d / (2.0 - s_min))
                    })
                    .collect()
            })
            .collect()
    }

    fn nominal_performance(&mut self) {
        for i in 0..self.spec.num_tasks() {
            let terms = self.performance_terms(i);
            self.p.add_constraint(format!("perf_{i}"), terms, Relation::Eq, 0.0);
        }
    }

    /// `te_i - ts_i - Σ_j d_ij a_ij` (incapable agents contribute nothing).
    fn performance_terms(&self, i: usize) -> Vec<(VarId, f64)> {
        let mut terms = vec![(self.te[i], 1.0), (self.ts[i], -1.0)];
        for j in 0..self.spec.num_agents() {
            if let Some(d) = self.spec.duration(i, j) {
                terms.push((self.alloc[i][j], -d));
            }
        }
        terms
    }

    fn finish(mut self, kind: ModelKind, objective: Vec<(VarId, f64)>) -> ModelArtifacts {
        self.p.set_objective(objective, 0.0);
        ModelArtifacts {
            kind,
            problem: self.p,
            ts: self.ts,
            te: self.te,
            alloc: self.alloc,
            temax: self.temax,
            delta: self.delta,
            pairs: self.pairs,
            alpha: self.alpha,
            alpha_coef: self.alpha_coef,
            big_m: self.m_big,
            horizon: self.m_big,
        }
    }
}

pub fn build_baseline(spec: &ProcessSpec) -> Result<ModelArtifacts, PlannerError> {
    spec.validate()?;
    let mut b = Builder::new(spec, horizon(spec, None));
    b.skeleton();
    b.nominal_performance();
    let dur = b.nominal_durations();
    b.strengthen(&dur);
    let obj = vec![(b.temax, 1.0)];
    Ok(b.finish(ModelKind::Baseline, obj))
}

pub fn build_not_neighboring(
    spec: &ProcessSpec,
    pairs: &[(usize, usize)],
) -> Result<ModelArtifacts, PlannerError> {
    spec.validate()?;
    let m = spec.num_tasks();
    let mut set = BTreeSet::new();
    for &(i, k) in pairs {
        if i >= m || k >= m || i == k {
            return Err(PlannerError::UnknownTaskInPair(i, k));
        }
        set.insert((i.min(k), i.max(k)));
    }
    let mut b = Builder::new(spec, horizon(spec, None));
    b.skeleton();
    b.nominal_performance();
    let dur = b.nominal_durations();
    b.strengthen(&dur);
    let hum = spec.human();
    let robots: Vec<usize> = spec.robots().collect();
    let big = b.m_big;
    for (i, k) in set {
        if b.ordered(i, k) {
            continue;
        }
        // a split is possible in either direction
        for (h_task, r_task) in [(i, k), (k, i)] {
            let r_capable: Vec<usize> = robots.iter().copied().filter(|&r| spec.capable(r_task, r)).collect();
            if !spec.capable(h_task, hum) || r_capable.is_empty() {
                continue;
            }
            let pv = b.pair_machinery(i, k);
            let mut terms = vec![(pv.ov, 1.0), (b.alloc[h_task][hum], big)];
            for r in r_capable {
                terms.push((b.alloc[r_task][r], big));
            }
            b.p.add_constraint(format!("nn_{h_task}_{r_task}"), terms, Relation::Le, 2.0 * big);
        }
    }
    let obj = vec![(b.temax, 1.0)];
    Ok(b.finish(ModelKind::NotNeighboring, obj))
}

pub fn build_stp(spec: &ProcessSpec, synergies: &SynergyMatrix) -> Result<ModelArtifacts, PlannerError> {
    spec.validate()?;
    let mut b = Builder::new(spec, horizon(spec, Some(synergies)));
    b.skeleton();
    b.stretch_max_durations(synergies);
    let dur = b.stretched_durations(synergies);
    b.strengthen(&dur);
    b.alpha_terms(synergies);
    for i in 0..spec.num_tasks() {
        let mut terms = b.performance_terms(i);
        for (key, &a) in &b.alpha {
            if key.1 == i {
                let c = b.alpha_coef[key];
                if c != 0.0 {
                    terms.push((a, -c));
                }
            }
        }
        b.p.add_constraint(format!("perf_{i}"), terms, Relation::Eq, 0.0);
    }
    let obj = vec![(b.temax, 1.0)];
    Ok(b.finish(ModelKind::Stp, obj))
}

pub fn build_rstp(spec: &ProcessSpec, synergies: &SynergyMatrix) -> Result<ModelArtifacts, PlannerError> {
    spec.validate()?;
    let mut b = Builder::new(spec, horizon(spec, Some(synergies)));
    b.skeleton();
    b.nominal_performance();
    let dur = b.nominal_durations();
    b.strengthen(&dur);
    b.alpha_terms(synergies);
    let mut obj = vec![(b.temax, 1.0)];
    for (key, &a) in &b.alpha {
        let c = b.alpha_coef[key];
        if c != 0.0 {
            obj.push((a, c));
        }
    }
    Ok(b.finish(ModelKind::Rstp, obj))
}

pub fn build_model(
    spec: &ProcessSpec,
    kind: &PlannerKind,
    synergies: &SynergyMatrix,
) -> Result<ModelArtifacts, PlannerError> {
    match kind {
        PlannerKind::Baseline => build_baseline(spec),
        PlannerKind::NotNeighboring(pairs) => build_not_neighboring(spec, pairs),
        PlannerKind::Stp => build_stp(spec, synergies),
        PlannerKind::Rstp => build_rstp(spec, synergies),
    }
}

/// Reads a plan out of a solver assignment.
pub fn extract_plan(
    artifacts: &ModelArtifacts,
    solution: &MilpSolution,
    spec: &ProcessSpec,
    int_tol: f64,
) -> Result<Plan, PlannerError> {
    if !solution.status.has_solution() {
        return Err(PlannerError::NoSolution(solution.status));
    }
    let x = &solution.values;
    let mut tasks = Vec::with_capacity(spec.num_tasks());
    for i in 0..spec.num_tasks() {
        let mut agent = None;
        for (j, &a) in artifacts.alloc[i].iter().enumerate() {
            let v = x[a.0];
            if (v - v.round()).abs() > int_tol {
                return Err(PlannerError::IntegralityViolation(artifacts.problem.var(a).name.clone()));
            }
            if v.round() == 1.0 {
                if agent.is_some() {
                    return Err(PlannerError::InfeasibleSolution(format!(
                        "task {} allocated twice",
                        spec.task_id(i)
                    )));
                }
                agent = Some(j);
            }
        }
        let agent = agent.ok_or_else(|| {
            PlannerError::InfeasibleSolution(format!("task {} not allocated", spec.task_id(i)))
        })?;
        tasks.push(ScheduledTask {
            agent,
            start: x[artifacts.ts[i].0].max(0.0),
            end: x[artifacts.te[i].0],
        });
    }
    let plan = Plan { tasks };
    plan.check(spec, 1e-6)?;
    Ok(plan)
}

/// Total lengthening of the plan induced by human-robot overlap:
/// `Σ overlap(i, k) (s - 1)` over robot task `i`, human task `k`.
pub fn delta_s(plan: &Plan, spec: &ProcessSpec, synergies: &SynergyMatrix) -> f64 {
    let hum = spec.human();
    let mut total = 0.0;
    for (i, ti) in plan.tasks.iter().enumerate() {
        if ti.agent == hum {
            continue;
        }
        for (k, tk) in plan.tasks.iter().enumerate() {
            if k == i || tk.agent != hum {
                continue;
            }
            let s = synergies.get(ti.agent, i, k);
            if s != 1.0 {
                total += overlap(ti.start, ti.end, tk.start, tk.end) * (s - 1.0);
            }
        }
    }
    total
}

/// Full solver assignment reproducing `plan` in the given model. Whether it
/// is feasible depends on the plan honouring the model's end-time semantics.
pub fn assignment_from_plan(artifacts: &ModelArtifacts, plan: &Plan, spec: &ProcessSpec) -> Vec<f64> {
    let p = &artifacts.problem;
    let mut x = vec![0.0; p.num_vars()];
    let t = &plan.tasks;
    for (i, st) in t.iter().enumerate() {
        x[artifacts.ts[i].0] = st.start;
        x[artifacts.te[i].0] = st.end;
        for j in 0..spec.num_agents() {
            x[artifacts.alloc[i][j].0] = if st.agent == j { 1.0 } else { 0.0 };
        }
    }
    x[artifacts.temax.0] = plan.makespan();
    for (&(i, k), &d) in &artifacts.delta {
        // same-agent tasks are disjoint, so start order decides
        let after = (t[i].start, t[i].end) > (t[k].start, t[k].end);
        x[d.0] = if t[i].agent == t[k].agent && after { 1.0 } else { 0.0 };
    }
    for (&(i, k), pv) in &artifacts.pairs {
        let (tsi, tsk, tei, tek) = (t[i].start, t[k].start, t[i].end, t[k].end);
        x[pv.tsmax.0] = tsi.max(tsk);
        x[pv.sig1.0] = if tsi >= tsk { 1.0 } else { 0.0 };
        x[pv.temin.0] = tei.min(tek);
        x[pv.sig2.0] = if tei <= tek { 1.0 } else { 0.0 };
        let dt = tei.min(tek) - tsi.max(tsk);
        x[pv.ov.0] = dt.max(0.0);
        x[pv.sig3.0] = if dt < 0.0 { 1.0 } else { 0.0 };
    }
    let hum = spec.human();
    for (&(r, i, k), &a) in &artifacts.alpha {
        let active = t[i].agent == r && t[k].agent == hum;
        x[a.0] = if active {
            artifacts.ov(i, k).map_or(0.0, |ov| x[ov.0])
        } else {
            0.0
        };
    }
    x
}

/// Objective of `plan` as the given model would score it.
pub fn model_objective(kind: ModelKind, plan: &Plan, spec: &ProcessSpec, synergies: &SynergyMatrix) -> f64 {
    match kind {
        ModelKind::Rstp => plan.makespan() + delta_s(plan, spec, synergies),
        _ => plan.makespan(),
    }
}

#[derive(Debug, Clone)]
pub struct PlannerOutput {
    pub plan: Plan,
    pub solution: MilpSolution,
    pub artifacts: ModelArtifacts,
}

/// Builds the model, seeds the solver with a greedy schedule and extracts the
/// resulting plan.
pub fn plan_with(
    spec: &ProcessSpec,
    kind: &PlannerKind,
    synergies: &SynergyMatrix,
    config: &SolverConfig,
) -> Result<PlannerOutput, PlannerError> {
    let artifacts = build_model(spec, kind, synergies)?;
    let mut cfg = config.clone();
    if cfg.initial_solution.is_none() {
        if let Some(start) = greedy_plan(spec, kind, synergies, cfg.seed) {
            cfg.initial_solution = Some(assignment_from_plan(&artifacts, &start, spec));
        }
    }
    let solution = solve_milp(&artifacts.problem, &cfg)?;
    let plan = extract_plan(&artifacts, &solution, spec, cfg.int_tol)?;
    Ok(PlannerOutput {
        plan,
        solution,
        artifacts,
    })
}
