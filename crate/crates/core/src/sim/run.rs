use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    distance, safety_scale, CellGeometry, Dispatcher, ExecutionTrace, HumanIdle, HumanVariability, MeasuredTask,
    Point, ResolvedGeometry, SafetyModel, SimConfig, SimError, TickRecord,
};
use crate::process::{Plan, ProcessSpec};

/// Length covered by the union of `intervals` inside `[s, e]`.
fn covered(s: f64, e: f64, intervals: &mut [(f64, f64)]) -> f64 {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut reach = s;
    for &(a, b) in intervals.iter() {
        let a = a.max(reach);
        let b = b.min(e);
        if b > a {
            total += b - a;
            reach = b;
        }
    }
    total
}

struct RobotState<'a> {
    agent: usize,
    task: Option<(usize, &'a super::RobotPath, f64)>,
    tool: Point,
    v_nom: f64,
}

/// Runs `plan` tick by tick and records what happened.
///
/// Fails with [`SimError::StalledExecution`] once simulated time passes ten
/// times the planned makespan.
pub fn simulate(
    plan: &Plan,
    spec: &ProcessSpec,
    geometry: &CellGeometry,
    safety: &SafetyModel,
    variability: &HumanVariability,
    config: &SimConfig,
) -> Result<ExecutionTrace, SimError> {
    if !(config.dt > 0.0 && config.dt.is_finite()) {
        return Err(SimError::Config("tick length must be positive".into()));
    }
    plan.check(spec, 1e-6)?;
    geometry.validate()?;
    safety.validate()?;
    let geo = ResolvedGeometry::new(geometry, spec, plan)?;

    let m = spec.num_tasks();
    let human = spec.human();
    let dt = config.dt;
    let horizon = 10.0 * plan.makespan().max(dt);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mult = if config.deterministic {
        vec![1.0; m]
    } else {
        variability.multipliers(m, &mut rng)
    };

    let mut dispatcher = Dispatcher::new(plan, spec);
    let mut free = vec![true; spec.num_agents()];
    let mut completed = vec![false; m];
    let mut measured: Vec<Option<MeasuredTask>> = vec![None; m];
    let mut human_task: Option<(usize, f64)> = None;
    let mut human_pos = geometry.human_home;
    let mut robots: Vec<RobotState> = spec
        .robots()
        .map(|agent| RobotState {
            agent,
            task: None,
            tool: geometry.robot_base,
            v_nom: 1.0,
        })
        .collect();
    let mut ticks = Vec::new();

    let mut k: u64 = 0;
    loop {
        let time = k as f64 * dt;
        if let Some((i, end)) = human_task {
            if end <= time + 1e-9 {
                completed[i] = true;
                free[human] = true;
                human_task = None;
            }
        }
        if human_task.is_none() && dispatcher.pending(human) == 0 {
            human_pos = geometry.human_home;
        }

        for cmd in dispatcher.step(time, &mut free, &completed) {
            let i = cmd.task;
            if cmd.agent == human {
                let d = spec.duration(i, human).expect("plan checked") * mult[i];
                human_pos = geo.anchors[&i];
                human_task = Some((i, time + d));
                measured[i] = Some(MeasuredTask {
                    agent: human,
                    start: time,
                    end: time + d,
                });
            } else {
                let r = robots.iter_mut().find(|r| r.agent == cmd.agent).expect("robot agent");
                let path = geo.paths[&(i, cmd.agent)];
                r.task = Some((i, path, 0.0));
                r.tool = path.point_at(0.0);
                r.v_nom = path.v_nom;
                measured[i] = Some(MeasuredTask {
                    agent: cmd.agent,
                    start: time,
                    end: f64::NAN,
                });
            }
        }

        let dists: Vec<f64> = robots.iter().map(|r| distance(human_pos, r.tool)).collect();
        let scales: Vec<f64> = robots
            .iter()
            .zip(&dists)
            .map(|(r, &d)| safety_scale(d, safety, r.v_nom))
            .collect();
        ticks.push(TickRecord {
            time,
            human: human_pos,
            tools: robots.iter().map(|r| r.tool).collect(),
            separation: dists.iter().copied().fold(f64::INFINITY, f64::min),
            scales: scales.clone(),
        });
        if completed.iter().all(|&c| c) {
            break;
        }

        for (r, &scale) in robots.iter_mut().zip(&scales) {
            let Some((i, path, s)) = r.task else { continue };
            let v = path.v_nom * scale;
            let left = path.length() - s;
            if v > 0.0 && v * dt >= left - 1e-9 {
                let end = time + left.max(0.0) / v;
                measured[i].as_mut().expect("started").end = end;
                completed[i] = true;
                free[r.agent] = true;
                r.tool = path.point_at(path.length());
                r.task = None;
            } else {
                let s = s + v * dt;
                r.tool = path.point_at(s);
                r.task = Some((i, path, s));
            }
        }

        k += 1;
        if k as f64 * dt > horizon {
            return Err(SimError::StalledExecution {
                time: k as f64 * dt,
                horizon,
            });
        }
    }

    let tasks: Vec<MeasuredTask> = measured.into_iter().map(|t| t.expect("all tasks ran")).collect();
    let robot_intervals: Vec<(f64, f64)> = tasks
        .iter()
        .filter(|t| t.agent != human)
        .map(|t| (t.start, t.end))
        .collect();
    let human_idle = tasks
        .iter()
        .enumerate()
        .filter(|(_, t)| t.agent == human)
        .map(|(i, t)| HumanIdle {
            task: i,
            idle: (t.end - t.start) - covered(t.start, t.end, &mut robot_intervals.clone()),
        })
        .collect();
    Ok(ExecutionTrace {
        seed: config.seed,
        dt,
        robots: robots.iter().map(|r| r.agent).collect(),
        tasks,
        human_idle,
        ticks,
    })
}
