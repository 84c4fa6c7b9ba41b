//! Domain vocabulary shared by the planner, the learner and the simulator:
//! tasks, agents, capabilities, precedences, nominal durations, synergy
//! coefficients and plans, plus the pure overlap arithmetic they rely on.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Schema version written into every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProcessError {
    #[error("cyclic precedence: {}", cycle.join(" -> "))]
    CyclicPrecedence { cycle: Vec<String> },
    #[error("task `{0}` has no capable agent")]
    NoCapableAgent(String),
    #[error("task `{task}` has a non-positive duration for agent `{agent}`")]
    NonPositiveDuration { task: String, agent: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("a process needs exactly one human and at least one robot (found {humans} humans, {robots} robots)")]
    AgentCount { humans: usize, robots: usize },
    #[error("malformed process: {0}")]
    Malformed(String),
    #[error("synergy must be positive, got {0}")]
    NonPositiveSynergy(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Human,
    Robot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agent {
    pub id: String,
    pub kind: AgentKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
}

/// Tasks, agents and the MINLP input data.
///
/// Matrices are indexed `[task][agent]` for capability and durations, and
/// `[i][k]` for precedence where `true` means task `k` must finish before
/// task `i` starts (`k` is a predecessor of `i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProcessDoc", into = "ProcessDoc")]
pub struct ProcessSpec {
    tasks: Vec<Task>,
    agents: Vec<Agent>,
    capability: Vec<Vec<bool>>,
    precedence: Vec<Vec<bool>>,
    nominal: Vec<Vec<Option<f64>>>,
}

impl ProcessSpec {
    /// Assembles a spec from raw matrices. Only shapes are checked here; call
    /// [`validate_process`] for the semantic invariants.
    pub fn from_parts(
        tasks: Vec<Task>,
        agents: Vec<Agent>,
        precedence: Vec<Vec<bool>>,
        nominal: Vec<Vec<Option<f64>>>,
    ) -> Result<Self, ProcessError> {
        let m = tasks.len();
        let n = agents.len();
        if precedence.len() != m || precedence.iter().any(|row| row.len() != m) {
            return Err(ProcessError::Malformed(format!(
                "precedence matrix must be {m}x{m}"
            )));
        }
        if nominal.len() != m || nominal.iter().any(|row| row.len() != n) {
            return Err(ProcessError::Malformed(format!(
                "duration matrix must be {m}x{n}"
            )));
        }
        let capability = nominal
            .iter()
            .map(|row| row.iter().map(Option::is_some).collect())
            .collect();
        Ok(Self {
            tasks,
            agents,
            capability,
            precedence,
            nominal,
        })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn task_id(&self, i: usize) -> &str {
        &self.tasks[i].id
    }

    pub fn agent_id(&self, j: usize) -> &str {
        &self.agents[j].id
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.id == id)
    }

    pub fn agent_kind(&self, j: usize) -> AgentKind {
        self.agents[j].kind
    }

    /// Index of the (single) human agent. Panics on a spec without one, which
    /// validation rules out.
    pub fn human(&self) -> usize {
        self.agents
            .iter()
            .position(|a| a.kind == AgentKind::Human)
            .expect("process has no human agent")
    }

    pub fn robots(&self) -> impl Iterator<Item = usize> + '_ {
        self.agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.kind == AgentKind::Robot)
            .map(|(j, _)| j)
    }

    pub fn capable(&self, task: usize, agent: usize) -> bool {
        self.capability[task][agent]
    }

    pub fn capable_agents(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.agents.len()).filter(move |&j| self.capability[task][j])
    }

    pub fn duration(&self, task: usize, agent: usize) -> Option<f64> {
        self.nominal[task][agent]
    }

    /// Longest nominal duration of a task over its capable agents.
    pub fn max_duration(&self, task: usize) -> f64 {
        self.nominal[task]
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }

    /// `true` when task `k` must finish before task `i` starts.
    pub fn precedes(&self, k: usize, i: usize) -> bool {
        self.precedence[i][k]
    }

    pub fn predecessors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.tasks.len()).filter(move |&k| self.precedence[i][k])
    }

    /// Whether some robot can take `robot_task` while the human takes `human_task`.
    pub fn can_split(&self, robot_task: usize, human_task: usize) -> bool {
        robot_task != human_task
            && self.capable(human_task, self.human())
            && self.robots().any(|r| self.capable(robot_task, r))
    }

    pub fn validate(&self) -> Result<(), ProcessError> {
        let mut seen = BTreeSet::new();
        for id in self.tasks.iter().map(|t| &t.id).chain(self.agents.iter().map(|a| &a.id)) {
            if !seen.insert(id.as_str()) {
                return Err(ProcessError::DuplicateId(id.clone()));
            }
        }
        let humans = self.agents.iter().filter(|a| a.kind == AgentKind::Human).count();
        let robots = self.agents.len() - humans;
        if humans != 1 || robots == 0 {
            return Err(ProcessError::AgentCount { humans, robots });
        }
        for (i, task) in self.tasks.iter().enumerate() {
            if !self.capability[i].iter().any(|&c| c) {
                return Err(ProcessError::NoCapableAgent(task.id.clone()));
            }
            for (j, d) in self.nominal[i].iter().enumerate() {
                if let Some(d) = d {
                    if !(d.is_finite() && *d > 0.0) {
                        return Err(ProcessError::NonPositiveDuration {
                            task: task.id.clone(),
                            agent: self.agents[j].id.clone(),
                        });
                    }
                }
            }
        }
        if let Some(cycle) = self.find_cycle() {
            return Err(ProcessError::CyclicPrecedence {
                cycle: cycle.into_iter().map(|i| self.tasks[i].id.clone()).collect(),
            });
        }
        Ok(())
    }

    fn find_cycle(&self) -> Option<Vec<usize>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let m = self.tasks.len();
        let mut mark = vec![Mark::New; m];
        let mut stack: Vec<usize> = Vec::new();

        fn visit(
            spec: &ProcessSpec,
            v: usize,
            mark: &mut [Mark],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            mark[v] = Mark::Open;
            stack.push(v);
            for w in spec.predecessors(v) {
                match mark[w] {
                    Mark::Open => {
                        let pos = stack.iter().position(|&x| x == w).unwrap();
                        let mut cycle = stack[pos..].to_vec();
                        cycle.push(w);
                        return Some(cycle);
                    }
                    Mark::New => {
                        if let Some(c) = visit(spec, w, mark, stack) {
                            return Some(c);
                        }
                    }
                    Mark::Done => {}
                }
            }
            stack.pop();
            mark[v] = Mark::Done;
            None
        }

        for v in 0..m {
            if mark[v] == Mark::New {
                if let Some(c) = visit(self, v, &mut mark, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// A topological order of the tasks (predecessors first). Requires an
    /// acyclic precedence relation.
    pub fn topological_order(&self) -> Vec<usize> {
        let m = self.tasks.len();
        let mut indeg: Vec<usize> = (0..m).map(|i| self.predecessors(i).count()).collect();
        let mut ready: Vec<usize> = (0..m).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(m);
        while let Some(k) = ready.first().copied() {
            ready.remove(0);
            order.push(k);
            for i in 0..m {
                if self.precedence[i][k] {
                    indeg[i] -= 1;
                    if indeg[i] == 0 {
                        ready.push(i);
                    }
                }
            }
        }
        order
    }
}

/// Returns the process unchanged when every invariant holds.
pub fn validate_process(spec: ProcessSpec) -> Result<ProcessSpec, ProcessError> {
    spec.validate()?;
    Ok(spec)
}

/// Length of the intersection of `[s1, e1]` and `[s2, e2]`, zero when disjoint.
pub fn overlap(s1: f64, e1: f64, s2: f64, e2: f64) -> f64 {
    (e1.min(e2) - s1.max(s2)).max(0.0)
}

/// Overlap stretched by a synergy coefficient.
pub fn scaled_overlap(ov: f64, s: f64) -> f64 {
    s * ov
}

/// Synergy as the ratio of the conditional to the unconditioned duration.
pub fn synergy_from_durations(conditional: f64, nominal: f64) -> Result<f64, ProcessError> {
    if !(conditional > 0.0 && nominal > 0.0) {
        return Err(ProcessError::NonPositiveDuration {
            task: format!("{conditional}"),
            agent: format!("{nominal}"),
        });
    }
    Ok(conditional / nominal)
}

/// Convenience builder for specs assembled in code.
#[derive(Debug, Default, Clone)]
pub struct ProcessBuilder {
    agents: Vec<Agent>,
    tasks: Vec<(String, Vec<(String, f64)>, Vec<String>)>,
}

impl ProcessBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn human(mut self, id: &str) -> Self {
        self.agents.push(Agent {
            id: id.to_string(),
            kind: AgentKind::Human,
        });
        self
    }

    pub fn robot(mut self, id: &str) -> Self {
        self.agents.push(Agent {
            id: id.to_string(),
            kind: AgentKind::Robot,
        });
        self
    }

    /// Adds a task with `(agent id, nominal duration)` pairs and predecessor ids.
    pub fn task(mut self, id: &str, durations: &[(&str, f64)], after: &[&str]) -> Self {
        self.tasks.push((
            id.to_string(),
            durations.iter().map(|(a, d)| (a.to_string(), *d)).collect(),
            after.iter().map(|s| s.to_string()).collect(),
        ));
        self
    }

    pub fn build(self) -> Result<ProcessSpec, ProcessError> {
        ProcessDoc {
            schema: SCHEMA_VERSION,
            agents: self.agents,
            tasks: self
                .tasks
                .into_iter()
                .map(|(id, durations, predecessors)| TaskDoc {
                    id,
                    durations: durations.into_iter().collect(),
                    predecessors,
                })
                .collect(),
        }
        .try_into()
    }
}

/// On-disk form of a process: capability is implied by the duration map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessDoc {
    pub schema: u32,
    pub agents: Vec<Agent>,
    pub tasks: Vec<TaskDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskDoc {
    pub id: String,
    /// Nominal duration (seconds) per capable agent id.
    pub durations: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predecessors: Vec<String>,
}

impl TryFrom<ProcessDoc> for ProcessSpec {
    type Error = ProcessError;

    fn try_from(doc: ProcessDoc) -> Result<Self, Self::Error> {
        let agents = doc.agents;
        let tasks: Vec<Task> = doc.tasks.iter().map(|t| Task { id: t.id.clone() }).collect();
        let agent_idx = |id: &str| {
            agents
                .iter()
                .position(|a| a.id == id)
                .ok_or_else(|| ProcessError::UnknownId(id.to_string()))
        };
        let task_idx = |id: &str| {
            tasks
                .iter()
                .position(|t| t.id == id)
                .ok_or_else(|| ProcessError::UnknownId(id.to_string()))
        };
        let m = tasks.len();
        let mut precedence = vec![vec![false; m]; m];
        let mut nominal = vec![vec![None; agents.len()]; m];
        for (i, t) in doc.tasks.iter().enumerate() {
            for (agent, d) in &t.durations {
                nominal[i][agent_idx(agent)?] = Some(*d);
            }
            for p in &t.predecessors {
                precedence[i][task_idx(p)?] = true;
            }
        }
        ProcessSpec::from_parts(tasks, agents, precedence, nominal)
    }
}

impl From<ProcessSpec> for ProcessDoc {
    fn from(spec: ProcessSpec) -> Self {
        let tasks = (0..spec.num_tasks())
            .map(|i| TaskDoc {
                id: spec.tasks[i].id.clone(),
                durations: spec
                    .capable_agents(i)
                    .map(|j| (spec.agents[j].id.clone(), spec.nominal[i][j].unwrap()))
                    .collect(),
                predecessors: spec.predecessors(i).map(|k| spec.tasks[k].id.clone()).collect(),
            })
            .collect();
        ProcessDoc {
            schema: SCHEMA_VERSION,
            agents: spec.agents,
            tasks,
        }
    }
}

/// Key of one synergy coefficient: `robot_task` on `robot` while the human
/// performs `human_task`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SynergyKey {
    pub robot: usize,
    pub robot_task: usize,
    pub human_task: usize,
}

impl SynergyKey {
    pub fn new(robot: usize, robot_task: usize, human_task: usize) -> Self {
        Self {
            robot,
            robot_task,
            human_task,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynergyEntry {
    pub value: f64,
    /// Central 90% credible interval, when the value was learned.
    pub interval: Option<(f64, f64)>,
    pub n_obs: usize,
}

/// Sparse synergy coefficients; absent entries are neutral (exactly 1.0).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynergyMatrix {
    entries: BTreeMap<SynergyKey, SynergyEntry>,
}

impl SynergyMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, robot: usize, robot_task: usize, human_task: usize) -> f64 {
        self.entries
            .get(&SynergyKey::new(robot, robot_task, human_task))
            .map_or(1.0, |e| e.value)
    }

    pub fn entry(&self, key: SynergyKey) -> Option<&SynergyEntry> {
        self.entries.get(&key)
    }

    pub fn set(
        &mut self,
        robot: usize,
        robot_task: usize,
        human_task: usize,
        value: f64,
    ) -> Result<(), ProcessError> {
        self.insert(
            SynergyKey::new(robot, robot_task, human_task),
            SynergyEntry {
                value,
                interval: None,
                n_obs: 0,
            },
        )
    }

    pub fn insert(&mut self, key: SynergyKey, entry: SynergyEntry) -> Result<(), ProcessError> {
        if !(entry.value.is_finite() && entry.value > 0.0) {
            return Err(ProcessError::NonPositiveSynergy(entry.value));
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SynergyKey, &SynergyEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest coefficient, at least 1.
    pub fn max_value(&self) -> f64 {
        self.entries.values().map(|e| e.value).fold(1.0, f64::max)
    }

    pub fn to_doc(&self, spec: &ProcessSpec) -> SynergyDoc {
        SynergyDoc {
            schema: SCHEMA_VERSION,
            entries: self
                .entries
                .iter()
                .map(|(k, e)| SynergyEntryDoc {
                    robot: spec.agent_id(k.robot).to_string(),
                    robot_task: spec.task_id(k.robot_task).to_string(),
                    human_task: spec.task_id(k.human_task).to_string(),
                    median: e.value,
                    lo90: e.interval.map(|i| i.0),
                    hi90: e.interval.map(|i| i.1),
                    n_obs: e.n_obs,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &SynergyDoc, spec: &ProcessSpec) -> Result<Self, ProcessError> {
        let mut m = Self::new();
        for e in &doc.entries {
            let lookup_task = |id: &str| {
                spec.task_index(id)
                    .ok_or_else(|| ProcessError::UnknownId(id.to_string()))
            };
            let robot = spec
                .agent_index(&e.robot)
                .ok_or_else(|| ProcessError::UnknownId(e.robot.clone()))?;
            let interval = match (e.lo90, e.hi90) {
                (Some(lo), Some(hi)) => Some((lo, hi)),
                _ => None,
            };
            m.insert(
                SynergyKey::new(robot, lookup_task(&e.robot_task)?, lookup_task(&e.human_task)?),
                SynergyEntry {
                    value: e.median,
                    interval,
                    n_obs: e.n_obs,
                },
            )?;
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynergyDoc {
    pub schema: u32,
    pub entries: Vec<SynergyEntryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynergyEntryDoc {
    pub robot: String,
    pub robot_task: String,
    pub human_task: String,
    pub median: f64,
    pub lo90: Option<f64>,
    pub hi90: Option<f64>,
    pub n_obs: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("plan has {got} tasks, process has {expected}")]
    TaskCount { expected: usize, got: usize },
    #[error("task `{0}` assigned to an agent that cannot perform it")]
    Incapable(String),
    #[error("task `{0}` does not end after it starts")]
    EmptyInterval(String),
    #[error("task `{0}` starts before time zero")]
    NegativeStart(String),
    #[error("tasks `{0}` and `{1}` overlap on the same agent")]
    AgentOverlap(String, String),
    #[error("task `{task}` starts before its predecessor `{pred}` ends")]
    Precedence { task: String, pred: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTask {
    pub agent: usize,
    pub start: f64,
    pub end: f64,
}

/// Allocation plus start/end time of every task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub tasks: Vec<ScheduledTask>,
}

impl Plan {
    pub fn makespan(&self) -> f64 {
        self.tasks.iter().map(|t| t.end).fold(0.0, f64::max)
    }

    /// Task indices of one agent, ordered by planned start.
    pub fn agent_sequence(&self, agent: usize) -> Vec<usize> {
        let mut seq: Vec<usize> = (0..self.tasks.len())
            .filter(|&i| self.tasks[i].agent == agent)
            .collect();
        seq.sort_by(|&a, &b| {
            self.tasks[a]
                .start
                .total_cmp(&self.tasks[b].start)
                .then(a.cmp(&b))
        });
        seq
    }

    /// Checks the plan invariants against a spec, with absolute time tolerance `tol`.
    pub fn check(&self, spec: &ProcessSpec, tol: f64) -> Result<(), PlanError> {
        let m = spec.num_tasks();
        if self.tasks.len() != m {
            return Err(PlanError::TaskCount {
                expected: m,
                got: self.tasks.len(),
            });
        }
        for (i, t) in self.tasks.iter().enumerate() {
            let id = || spec.task_id(i).to_string();
            if t.agent >= spec.num_agents() || !spec.capable(i, t.agent) {
                return Err(PlanError::Incapable(id()));
            }
            if t.start < -tol {
                return Err(PlanError::NegativeStart(id()));
            }
            if t.end <= t.start {
                return Err(PlanError::EmptyInterval(id()));
            }
            for k in spec.predecessors(i) {
                if t.start < self.tasks[k].end - tol {
                    return Err(PlanError::Precedence {
                        task: id(),
                        pred: spec.task_id(k).to_string(),
                    });
                }
            }
        }
        for j in 0..spec.num_agents() {
            let seq = self.agent_sequence(j);
            for w in seq.windows(2) {
                if self.tasks[w[1]].start < self.tasks[w[0]].end - tol {
                    return Err(PlanError::AgentOverlap(
                        spec.task_id(w[0]).to_string(),
                        spec.task_id(w[1]).to_string(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn to_doc(&self, spec: &ProcessSpec) -> PlanDoc {
        PlanDoc {
            schema: SCHEMA_VERSION,
            tasks: self
                .tasks
                .iter()
                .enumerate()
                .map(|(i, t)| PlanTaskDoc {
                    task: spec.task_id(i).to_string(),
                    agent: spec.agent_id(t.agent).to_string(),
                    start: t.start,
                    end: t.end,
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &PlanDoc, spec: &ProcessSpec) -> Result<Self, ProcessError> {
        let mut tasks = vec![None; spec.num_tasks()];
        for t in &doc.tasks {
            let i = spec
                .task_index(&t.task)
                .ok_or_else(|| ProcessError::UnknownId(t.task.clone()))?;
            let agent = spec
                .agent_index(&t.agent)
                .ok_or_else(|| ProcessError::UnknownId(t.agent.clone()))?;
            if tasks[i].is_some() {
                return Err(ProcessError::DuplicateId(t.task.clone()));
            }
            tasks[i] = Some(ScheduledTask {
                agent,
                start: t.start,
                end: t.end,
            });
        }
        let tasks = tasks
            .into_iter()
            .enumerate()
            .map(|(i, t)| t.ok_or_else(|| ProcessError::Malformed(format!("plan misses task `{}`", spec.task_id(i)))))
            .collect::<Result<_, _>>()?;
        Ok(Plan { tasks })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanDoc {
    pub schema: u32,
    pub tasks: Vec<PlanTaskDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanTaskDoc {
    pub task: String,
    pub agent: String,
    pub start: f64,
    pub end: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_tasks() -> ProcessSpec {
        ProcessBuilder::new()
            .human("h")
            .robot("r")
            .task("a", &[("h", 2.0), ("r", 3.0)], &[])
            .task("b", &[("r", 1.0)], &["a"])
            .task("c", &[("h", 4.0)], &["a"])
            .build()
            .unwrap()
    }

    #[test]
    fn two_cycle_is_rejected() {
        let spec = ProcessBuilder::new()
            .human("h")
            .robot("r")
            .task("a", &[("h", 1.0)], &["b"])
            .task("b", &[("r", 1.0)], &["a"])
            .build()
            .unwrap();
        match validate_process(spec) {
            Err(ProcessError::CyclicPrecedence { cycle }) => {
                assert_eq!(cycle.first(), cycle.last());
                assert_eq!(cycle.len(), 3);
            }
            other => panic!("expected a cycle, got {other:?}"),
        }
    }

    #[test]
    fn task_without_capable_agent() {
        let spec = ProcessBuilder::new()
            .human("h")
            .robot("r")
            .task("a", &[("h", 1.0)], &[])
            .task("lonely", &[], &[])
            .build()
            .unwrap();
        assert_eq!(
            validate_process(spec),
            Err(ProcessError::NoCapableAgent("lonely".into()))
        );
    }

    #[test]
    fn non_positive_duration() {
        let spec = ProcessBuilder::new()
            .human("h")
            .robot("r")
            .task("a", &[("r", 0.0)], &[])
            .build()
            .unwrap();
        assert!(matches!(
            validate_process(spec),
            Err(ProcessError::NonPositiveDuration { .. })
        ));
    }

    #[test]
    fn agent_count_is_checked() {
        let spec = ProcessBuilder::new()
            .robot("r")
            .task("a", &[("r", 1.0)], &[])
            .build()
            .unwrap();
        assert_eq!(
            validate_process(spec),
            Err(ProcessError::AgentCount { humans: 0, robots: 1 })
        );
    }

    #[test]
    fn well_formed_spec_is_returned_unchanged() {
        let spec = three_tasks();
        assert_eq!(validate_process(spec.clone()).unwrap(), spec);
        assert_eq!(spec.topological_order()[0], 0);
        assert!(spec.precedes(0, 1));
        assert!(!spec.precedes(1, 0));
    }

    #[test]
    fn json_round_trip() {
        let spec = three_tasks();
        let text = serde_json::to_string(&spec).unwrap();
        let back: ProcessSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(overlap(0.0, 5.0, 3.0, 8.0), 2.0);
        assert_eq!(overlap(0.0, 2.0, 3.0, 4.0), 0.0);
        assert_eq!(overlap(0.0, 10.0, 2.0, 4.0), 2.0);
    }

    #[test]
    fn scaled_overlap_examples() {
        assert_eq!(scaled_overlap(2.0, 1.5), 3.0);
        assert_eq!(scaled_overlap(2.0, 1.0), 2.0);
        assert_eq!(scaled_overlap(0.0, 7.3), 0.0);
    }

    #[test]
    fn synergy_ratio_examples() {
        assert_eq!(synergy_from_durations(6.0, 4.0).unwrap(), 1.5);
        assert_eq!(synergy_from_durations(4.0, 4.0).unwrap(), 1.0);
        assert_eq!(synergy_from_durations(2.0, 4.0).unwrap(), 0.5);
        assert!(synergy_from_durations(0.0, 4.0).is_err());
    }

    #[test]
    fn absent_synergy_is_neutral() {
        let mut s = SynergyMatrix::new();
        s.set(1, 0, 2, 1.7).unwrap();
        assert_eq!(s.get(1, 0, 2), 1.7);
        assert_eq!(s.get(1, 2, 0), 1.0);
        assert!(s.set(1, 0, 1, -0.2).is_err());
    }

    #[test]
    fn plan_checks() {
        let spec = three_tasks();
        let good = Plan {
            tasks: vec![
                ScheduledTask { agent: 0, start: 0.0, end: 2.0 },
                ScheduledTask { agent: 1, start: 2.0, end: 3.0 },
                ScheduledTask { agent: 0, start: 2.0, end: 6.0 },
            ],
        };
        good.check(&spec, 1e-9).unwrap();
        assert_eq!(good.makespan(), 6.0);

        let mut bad = good.clone();
        bad.tasks[2].start = 1.0;
        assert!(matches!(bad.check(&spec, 1e-9), Err(PlanError::Precedence { .. })));

        let mut bad = good.clone();
        bad.tasks[1].agent = 0;
        assert!(matches!(bad.check(&spec, 1e-9), Err(PlanError::Incapable(_))));
    }

    proptest! {
        #[test]
        fn overlap_properties(a in 0.0..10.0f64, la in 0.01..5.0f64, b in 0.0..10.0f64, lb in 0.01..5.0f64) {
            let ov = overlap(a, a + la, b, b + lb);
            prop_assert_eq!(ov, overlap(b, b + lb, a, a + la));
            prop_assert!(ov >= 0.0);
            prop_assert!(ov <= la.min(lb) + 1e-12);
            prop_assert!((overlap(a, a + la, a, a + la) - la).abs() < 1e-12);
        }
    }
}
