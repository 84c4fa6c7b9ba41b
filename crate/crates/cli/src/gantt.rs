use std::fmt::Write;

use synplan_core::process::{Plan, ProcessSpec};
use synplan_core::sim::ExecutionTrace;

pub const GANTT_HEADER: &str = "task,agent,planned_start,planned_end,measured_start,measured_end";

/// One row per task in process order; measured columns stay blank without a
/// trace.
pub fn render_gantt_csv(plan: &Plan, spec: &ProcessSpec, trace: Option<&ExecutionTrace>) -> String {
    let mut out = String::from(GANTT_HEADER);
    out.push('\n');
    for (i, t) in plan.tasks.iter().enumerate() {
        let _ = write!(out, "{},{},{},{},", spec.task_id(i), spec.agent_id(t.agent), t.start, t.end);
        if let Some(m) = trace.and_then(|tr| tr.tasks.get(i)) {
            let _ = write!(out, "{},{}", m.start, m.end);
        } else {
            out.push(',');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use synplan_core::process::{ProcessBuilder, ScheduledTask};
    use synplan_core::sim::{simulate, CellGeometry, HumanAnchor, HumanVariability, RobotPath, SafetyModel, SimConfig};

    fn spec() -> ProcessSpec {
        ProcessBuilder::new()
            .human("h")
            .robot("r")
            .task("a", &[("h", 2.0)], &[])
            .task("b", &[("r", 3.0)], &["a"])
            .build()
            .unwrap()
    }

    #[test]
    fn one_task_plan() {
        let spec = ProcessBuilder::new().human("h").task("a", &[("h", 1.5)], &[]).build().unwrap();
        let plan = Plan {
            tasks: vec![ScheduledTask {
                agent: 0,
                start: 0.0,
                end: 1.5,
            }],
        };
        assert_eq!(render_gantt_csv(&plan, &spec, None), format!("{GANTT_HEADER}\na,h,0,1.5,,\n"));
    }

    #[test]
    fn neutral_trace_matches_plan() {
        let spec = spec();
        let plan = Plan {
            tasks: vec![
                ScheduledTask {
                    agent: 0,
                    start: 0.0,
                    end: 2.0,
                },
                ScheduledTask {
                    agent: 1,
                    start: 2.0,
                    end: 5.0,
                },
            ],
        };
        let geometry = CellGeometry {
            robot_base: [0.0, 0.0],
            human_home: [10.0, 10.0],
            anchors: vec![HumanAnchor {
                task: "a".into(),
                position: [10.0, 0.0],
            }],
            paths: vec![RobotPath {
                task: "b".into(),
                robot: "r".into(),
                waypoints: vec![[0.0, 0.0], [1.5, 0.0]],
                v_nom: 0.5,
            }],
        };
        let cfg = SimConfig {
            deterministic: true,
            ..SimConfig::default()
        };
        let trace = simulate(
            &plan,
            &spec,
            &geometry,
            &SafetyModel::static_zones(0.5, 1.0),
            &HumanVariability::default(),
            &cfg,
        )
        .unwrap();
        let csv = render_gantt_csv(&plan, &spec, Some(&trace));
        let rows: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(rows.len(), spec.num_tasks());
        for row in rows {
            let f: Vec<f64> = row.split(',').skip(2).map(|x| x.parse().unwrap()).collect();
            assert!((f[0] - f[2]).abs() < 1e-9 && (f[1] - f[3]).abs() < 1e-9, "{row}");
        }
    }
}
