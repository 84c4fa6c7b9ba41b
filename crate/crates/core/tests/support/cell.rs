//! Random cells for closed-loop checks and the half-speed reference world.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synplan_core::process::{Plan, ProcessBuilder, ProcessSpec, ScheduledTask};
use synplan_core::sim::{CellGeometry, ExecutionTrace, HumanAnchor, RobotPath, START_TOL};

/// One human, one or two robots, up to eight tasks with random precedences
/// and random positions in a 3 m square.
pub fn random_cell(seed: u64) -> (ProcessSpec, CellGeometry) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let robots: Vec<String> = (0..rng.random_range(1..=2)).map(|r| format!("R{r}")).collect();
    let m = rng.random_range(2..=8);
    let ids: Vec<String> = (0..m).map(|i| format!("t{i}")).collect();
    let mut b = ProcessBuilder::new().human("H");
    for r in &robots {
        b = b.robot(r);
    }
    let mut geo = CellGeometry {
        robot_base: [0.0, 0.0],
        human_home: [3.0, 3.0],
        anchors: vec![],
        paths: vec![],
    };
    let pos = |rng: &mut ChaCha8Rng| [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
    for i in 0..m {
        let mut durs: Vec<(&str, f64)> = Vec::new();
        if rng.random_bool(0.5) {
            durs.push(("H", rng.random_range(1.0..6.0)));
            geo.anchors.push(HumanAnchor {
                task: ids[i].clone(),
                position: pos(&mut rng),
            });
        }
        for r in &robots {
            if durs.is_empty() || rng.random_bool(0.4) {
                let d = rng.random_range(1.0..6.0);
                let p = pos(&mut rng);
                let len = 2.0 * (p[0].hypot(p[1])).max(0.1);
                let station = if p[0].hypot(p[1]) < 0.1 { [0.1, 0.0] } else { p };
                durs.push((r, d));
                geo.paths.push(RobotPath {
                    task: ids[i].clone(),
                    robot: r.clone(),
                    waypoints: vec![[0.0, 0.0], station, [0.0, 0.0]],
                    v_nom: len / d,
                });
            }
        }
        let after: Vec<&str> = (0..i).filter(|_| rng.random_bool(0.25)).map(|k| ids[k].as_str()).collect();
        b = b.task(&ids[i], &durs, &after);
    }
    (b.build().expect("valid random cell"), geo)
}

/// Dispatcher contract violations of a measured run against its plan: early
/// starts, overlapping tasks on one agent, and starts before a predecessor
/// has finished.
pub fn dispatcher_violations(plan: &Plan, spec: &ProcessSpec, trace: &ExecutionTrace) -> Vec<String> {
    let mut out = Vec::new();
    let tol = START_TOL + 1e-9;
    for (i, (p, t)) in plan.tasks.iter().zip(&trace.tasks).enumerate() {
        if t.agent != p.agent {
            out.push(format!("{} ran on agent {} not {}", spec.task_id(i), t.agent, p.agent));
        }
        if t.start + tol < p.start {
            out.push(format!("{} started at {} before {}", spec.task_id(i), t.start, p.start));
        }
        if t.end < t.start {
            out.push(format!("{} ends before it starts", spec.task_id(i)));
        }
        for k in spec.predecessors(i) {
            if t.start + 1e-9 < trace.tasks[k].end {
                out.push(format!("{} started before predecessor {}", spec.task_id(i), spec.task_id(k)));
            }
        }
        for (k, u) in trace.tasks.iter().enumerate().skip(i + 1) {
            if u.agent == t.agent && t.start < u.end - 1e-9 && u.start < t.end - 1e-9 {
                out.push(format!("{} and {} overlap on one agent", spec.task_id(i), spec.task_id(k)));
            }
        }
    }
    if trace.tasks.len() != plan.tasks.len() {
        out.push("task count differs".into());
    }
    out
}

/// A 20 s human task whose anchor sits 0.75 m beside a straight 4 s robot
/// move, so the whole move runs at the orange scale. A second robot task
/// follows the human task and never overlaps it.
pub fn orange_world() -> (ProcessSpec, CellGeometry, Plan) {
    let spec = ProcessBuilder::new()
        .human("H")
        .robot("R")
        .task("h", &[("H", 20.0)], &[])
        .task("r", &[("R", 4.0)], &[])
        .task("q", &[("R", 3.0)], &["h"])
        .build()
        .expect("valid");
    let path = |task: &str, len: f64| RobotPath {
        task: task.into(),
        robot: "R".into(),
        waypoints: vec![[0.0, 0.0], [len, 0.0]],
        v_nom: 0.5,
    };
    let geo = CellGeometry {
        robot_base: [0.0, 0.0],
        human_home: [50.0, 50.0],
        anchors: vec![HumanAnchor {
            task: "h".into(),
            position: [1.0, 0.75],
        }],
        paths: vec![path("r", 2.0), path("q", 1.5)],
    };
    let st = |agent, start, end| ScheduledTask { agent, start, end };
    let plan = Plan {
        tasks: vec![st(0, 0.0, 20.0), st(1, 2.0, 6.0), st(1, 20.0, 23.0)],
    };
    (spec, geo, plan)
}
