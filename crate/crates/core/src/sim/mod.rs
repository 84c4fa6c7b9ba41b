//! Discrete-time execution of plans in a shared human-robot cell.
//!
//! A run dispatches tasks per [`dispatch`], teleports the human to the anchor
//! of each human task, moves every robot tool along its task polyline at
//! `v_nom` times the speed scale of the active [`SafetyModel`], and records
//! an [`ExecutionTrace`].

mod dispatch;
mod run;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::process::{Plan, PlanError, ProcessSpec, ScheduledTask, SCHEMA_VERSION};

pub use dispatch::{dispatch, Command, Dispatcher, START_TOL};
pub use run::simulate;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("no geometry for task `{task}` on agent `{agent}`")]
    MissingGeometry { task: String, agent: String },
    #[error("execution stalled at t = {time:.2} s (watchdog {horizon:.2} s)")]
    StalledExecution { time: f64, horizon: f64 },
    #[error("trace has no tick records")]
    EmptyTrace,
    #[error("invalid plan: {0}")]
    Plan(#[from] PlanError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed trace: {0}")]
    Trace(String),
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Where the human stands while performing a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanAnchor {
    pub task: String,
    pub position: Point,
}

/// Tool path of a robot task; the task is done once the whole polyline has
/// been travelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotPath {
    pub task: String,
    pub robot: String,
    pub waypoints: Vec<Point>,
    pub v_nom: f64,
}

impl RobotPath {
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| distance(w[0], w[1])).sum()
    }

    /// Duration at full speed.
    pub fn nominal_duration(&self) -> f64 {
        self.length() / self.v_nom
    }

    /// Smallest distance from `p` to the polyline.
    pub fn distance_to(&self, p: Point) -> f64 {
        if self.waypoints.len() == 1 {
            return distance(self.waypoints[0], p);
        }
        self.waypoints
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let ab = [b[0] - a[0], b[1] - a[1]];
                let len2 = ab[0] * ab[0] + ab[1] * ab[1];
                let t = if len2 > 0.0 {
                    (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                distance([a[0] + t * ab[0], a[1] + t * ab[1]], p)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Point at arc length `s` from the first waypoint.
    pub fn point_at(&self, s: f64) -> Point {
        let mut left = s.max(0.0);
        for w in self.waypoints.windows(2) {
            let seg = distance(w[0], w[1]);
            if left <= seg && seg > 0.0 {
                let f = left / seg;
                return [w[0][0] + f * (w[1][0] - w[0][0]), w[0][1] + f * (w[1][1] - w[0][1])];
            }
            left -= seg;
        }
        *self.waypoints.last().expect("non-empty polyline")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub robot_base: Point,
    /// Human position before the first and after the last human task.
    pub human_home: Point,
    pub anchors: Vec<HumanAnchor>,
    pub paths: Vec<RobotPath>,
}

impl CellGeometry {
    pub fn validate(&self) -> Result<(), SimError> {
        for p in &self.paths {
            if p.waypoints.is_empty() {
                return Err(SimError::Config(format!("empty path for task `{}`", p.task)));
            }
            if !(p.v_nom > 0.0 && p.v_nom.is_finite()) {
                return Err(SimError::Config(format!("v_nom must be positive for task `{}`", p.task)));
            }
        }
        Ok(())
    }

    pub fn anchor(&self, task: &str) -> Option<Point> {
        self.anchors.iter().find(|a| a.task == task).map(|a| a.position)
    }

    pub fn path(&self, task: &str, robot: &str) -> Option<&RobotPath> {
        self.paths.iter().find(|p| p.task == task && p.robot == robot)
    }

    /// Checks that every (task, capable agent) pair of `spec` has geometry.
    pub fn covers(&self, spec: &ProcessSpec) -> Result<(), SimError> {
        let human = spec.human();
        for i in 0..spec.num_tasks() {
            for j in spec.capable_agents(i) {
                let ok = if j == human {
                    self.anchor(spec.task_id(i)).is_some()
                } else {
                    self.path(spec.task_id(i), spec.agent_id(j)).is_some()
                };
                if !ok {
                    return Err(SimError::MissingGeometry {
                        task: spec.task_id(i).to_string(),
                        agent: spec.agent_id(j).to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SafetyModel {
    /// Concentric zones around the robot tool.
    StaticZones {
        red_radius: f64,
        orange_radius: f64,
        #[serde(default = "default_orange_scale")]
        orange_scale: f64,
    },
    /// Speed and separation monitoring.
    Ssm { v_h: f64, a_s: f64, t_r: f64, c: f64 },
}

fn default_orange_scale() -> f64 {
    0.5
}

impl SafetyModel {
    pub fn static_zones(red_radius: f64, orange_radius: f64) -> Self {
        Self::StaticZones {
            red_radius,
            orange_radius,
            orange_scale: 0.5,
        }
    }

    /// SSM with v_h = 1.6 m/s, a_s = 1 m/s², T_r = 0.3 s, C = 0.2 m.
    pub fn ssm_default() -> Self {
        Self::Ssm {
            v_h: 1.6,
            a_s: 1.0,
            t_r: 0.3,
            c: 0.2,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        match *self {
            Self::StaticZones {
                red_radius,
                orange_radius,
                orange_scale,
            } => {
                if !(red_radius >= 0.0 && red_radius < orange_radius) {
                    return Err(SimError::Config("need 0 <= red radius < orange radius".into()));
                }
                if !(0.0..=1.0).contains(&orange_scale) {
                    return Err(SimError::Config("orange scale must lie in [0, 1]".into()));
                }
            }
            Self::Ssm { v_h, a_s, t_r, c } => {
                if [v_h, a_s, t_r, c].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err(SimError::Config("SSM parameters must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Largest admissible robot speed toward the human at separation `s_d`
/// under SSM, or 0 when the bound is negative or undefined.
pub fn ssm_max_speed(s_d: f64, v_h: f64, a_s: f64, t_r: f64, c: f64) -> f64 {
    let rad = v_h * v_h + (a_s * t_r).powi(2) - 2.0 * a_s * (c - s_d);
    if rad < 0.0 {
        return 0.0;
    }
    (rad.sqrt() - a_s * t_r - v_h).max(0.0)
}

/// Fraction of nominal speed the robot may use at separation `s_d`.
pub fn safety_scale(s_d: f64, model: &SafetyModel, v_nom: f64) -> f64 {
    match *model {
        SafetyModel::StaticZones {
            red_radius,
            orange_radius,
            orange_scale,
        } => {
            if s_d < red_radius {
                0.0
            } else if s_d < orange_radius {
                orange_scale
            } else {
                1.0
            }
        }
        SafetyModel::Ssm { v_h, a_s, t_r, c } => (ssm_max_speed(s_d, v_h, a_s, t_r, c) / v_nom).clamp(0.0, 1.0),
    }
}

/// Log-normal per-task multiplier on human durations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanVariability {
    pub sigma_h: f64,
}

impl Default for HumanVariability {
    fn default() -> Self {
        Self { sigma_h: 0.1 }
    }
}

impl HumanVariability {
    /// One multiplier per task, median 1.
    pub fn multipliers(&self, m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let normal = rand_distr::StandardNormal;
        (0..m)
            .map(|_| {
                let z: f64 = rng.sample(normal);
                (self.sigma_h * z).exp()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub seed: u64,
    /// Disables human duration noise.
    pub deterministic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            seed: 0,
            deterministic: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredTask {
    pub agent: usize,
    pub start: f64,
    pub end: f64,
}

/// Per human task: the part of its measured interval during which no robot
/// task was running.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanIdle {
    pub task: usize,
    pub idle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub time: f64,
    pub human: Point,
    /// Tool position of each robot, in [`ExecutionTrace::robots`] order.
    pub tools: Vec<Point>,
    /// Distance between the human and the nearest tool.
    pub separation: f64,
    pub scales: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub seed: u64,
    pub dt: f64,
    pub robots: Vec<usize>,
    pub tasks: Vec<MeasuredTask>,
    pub human_idle: Vec<HumanIdle>,
    pub ticks: Vec<TickRecord>,
}

#[derive(Serialize, Deserialize)]
struct TraceHeader {
    schema: u32,
    seed: u64,
    dt: f64,
    robots: Vec<usize>,
    tasks: Vec<MeasuredTask>,
    human_idle: Vec<HumanIdle>,
}

impl ExecutionTrace {
    pub fn makespan(&self) -> Option<f64> {
        self.tasks.iter().map(|t| t.end).reduce(f64::max)
    }

    pub fn idle(&self, task: usize) -> Option<f64> {
        self.human_idle.iter().find(|h| h.task == task).map(|h| h.idle)
    }

    /// Measured times as a plan, for checks and charts.
    pub fn as_plan(&self) -> Plan {
        Plan {
            tasks: self
                .tasks
                .iter()
                .map(|t| ScheduledTask {
                    agent: t.agent,
                    start: t.start,
                    end: t.end,
                })
                .collect(),
        }
    }

    /// Header object on the first line, then one tick per line.
    pub fn to_jsonl(&self) -> String {
        let header = TraceHeader {
            schema: SCHEMA_VERSION,
            seed: self.seed,
            dt: self.dt,
            robots: self.robots.clone(),
            tasks: self.tasks.clone(),
            human_idle: self.human_idle.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("trace header serializes");
        out.push('\n');
        for t in &self.ticks {
            out.push_str(&serde_json::to_string(t).expect("tick serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, SimError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let first = lines.next().ok_or_else(|| SimError::Trace("empty input".into()))?;
        let h: TraceHeader = serde_json::from_str(first).map_err(|e| SimError::Trace(e.to_string()))?;
        if h.schema != SCHEMA_VERSION {
            return Err(SimError::Trace(format!("unsupported schema {}", h.schema)));
        }
        let ticks = lines
            .map(|l| serde_json::from_str(l).map_err(|e| SimError::Trace(e.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            seed: h.seed,
            dt: h.dt,
            robots: h.robots,
            tasks: h.tasks,
            human_idle: h.human_idle,
            ticks,
        })
    }
}

/// Per-tick separation distance.
pub fn min_distance_series(trace: &ExecutionTrace) -> Result<Vec<(f64, f64)>, SimError> {
    if trace.ticks.is_empty() {
        return Err(SimError::EmptyTrace);
    }
    Ok(trace.ticks.iter().map(|t| (t.time, t.separation)).collect())
}

/// Smallest separation over a run.
pub fn min_distance(trace: &ExecutionTrace) -> Result<f64, SimError> {
    Ok(min_distance_series(trace)?.iter().map(|p| p.1).fold(f64::INFINITY, f64::min))
}

/// Random capable allocation and random precedence-respecting order,
/// scheduled at the earliest start with nominal durations.
pub fn random_plan(spec: &ProcessSpec, seed: u64) -> Result<Plan, crate::process::ProcessError> {
    spec.validate()?;
    let m = spec.num_tasks();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents: Vec<usize> = (0..m)
        .map(|i| {
            let cap: Vec<usize> = spec.capable_agents(i).collect();
            cap[rng.random_range(0..cap.len())]
        })
        .collect();
    let mut free = vec![0.0f64; spec.num_agents()];
    let mut done: Vec<Option<ScheduledTask>> = vec![None; m];
    for _ in 0..m {
        let ready: Vec<usize> = (0..m)
            .filter(|&i| done[i].is_none() && spec.predecessors(i).all(|k| done[k].is_some()))
            .collect();
        let i = ready[rng.random_range(0..ready.len())];
        let j = agents[i];
        let start = spec
            .predecessors(i)
            .map(|k| done[k].map_or(0.0, |t| t.end))
            .fold(free[j], f64::max);
        let end = start + spec.duration(i, j).expect("capable agent has a duration");
        free[j] = end;
        done[i] = Some(ScheduledTask { agent: j, start, end });
    }
    Ok(Plan {
        tasks: done.into_iter().map(|t| t.expect("every task scheduled")).collect(),
    })
}

/// Task-id keyed lookups resolved once per run.
pub(crate) struct ResolvedGeometry<'a> {
    anchors: BTreeMap<usize, Point>,
    paths: BTreeMap<(usize, usize), &'a RobotPath>,
}

impl<'a> ResolvedGeometry<'a> {
    pub(crate) fn new(geometry: &'a CellGeometry, spec: &ProcessSpec, plan: &Plan) -> Result<Self, SimError> {
        let human = spec.human();
        let mut anchors = BTreeMap::new();
        let mut paths = BTreeMap::new();
        for (i, t) in plan.tasks.iter().enumerate() {
            let missing = || SimError::MissingGeometry {
                task: spec.task_id(i).to_string(),
                agent: spec.agent_id(t.agent).to_string(),
            };
            if t.agent == human {
                anchors.insert(i, geometry.anchor(spec.task_id(i)).ok_or_else(missing)?);
            } else {
                let p = geometry
                    .path(spec.task_id(i), spec.agent_id(t.agent))
                    .ok_or_else(missing)?;
                paths.insert((i, t.agent), p);
            }
        }
        Ok(Self { anchors, paths })
    }
}
