use serde::{Deserialize, Serialize};

use crate::process::{Plan, ProcessSpec};

/// Slack on planned start times, absorbing tick-time round-off.
pub const START_TOL: f64 = 1e-9;

/// Start request for one task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Command {
    pub task: usize,
    pub agent: usize,
}

/// Per-agent queues of pending tasks, sorted by planned start.
///
/// Besides the planned start and the free-agent check, a task is held back
/// until all of its predecessors have completed.
#[derive(Debug, Clone)]
pub struct Dispatcher {
    queues: Vec<Vec<usize>>,
    starts: Vec<f64>,
    preds: Vec<Vec<usize>>,
}

impl Dispatcher {
    pub fn new(plan: &Plan, spec: &ProcessSpec) -> Self {
        let mut queues: Vec<Vec<usize>> = (0..spec.num_agents()).map(|j| plan.agent_sequence(j)).collect();
        // pop from the back
        for q in &mut queues {
            q.reverse();
        }
        Self {
            queues,
            starts: plan.tasks.iter().map(|t| t.start).collect(),
            preds: (0..spec.num_tasks()).map(|i| spec.predecessors(i).collect()).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.queues.iter().all(Vec::is_empty)
    }

    /// Tasks still waiting on `agent`.
    pub fn pending(&self, agent: usize) -> usize {
        self.queues[agent].len()
    }

    /// One pass of the dispatch loop at time `now`. Issued tasks leave the
    /// queues and their agents are marked busy in `free`.
    pub fn step(&mut self, now: f64, free: &mut [bool], completed: &[bool]) -> Vec<Command> {
        let mut out = Vec::new();
        for (agent, q) in self.queues.iter_mut().enumerate() {
            let Some(&task) = q.last() else { continue };
            if now + START_TOL >= self.starts[task] && free[agent] && self.preds[task].iter().all(|&k| completed[k]) {
                q.pop();
                free[agent] = false;
                out.push(Command { task, agent });
            }
        }
        out
    }
}

/// Stateless form of [`Dispatcher::step`] over the tasks in `pending`.
pub fn dispatch(
    plan: &Plan,
    spec: &ProcessSpec,
    now: f64,
    pending: &mut Vec<usize>,
    free: &mut [bool],
    completed: &[bool],
) -> Vec<Command> {
    let mut out = Vec::new();
    for (agent, slot) in free.iter_mut().enumerate() {
        let first = pending
            .iter()
            .copied()
            .filter(|&i| plan.tasks[i].agent == agent)
            .min_by(|&a, &b| plan.tasks[a].start.total_cmp(&plan.tasks[b].start).then(a.cmp(&b)));
        let Some(task) = first else { continue };
        if now + START_TOL >= plan.tasks[task].start && *slot && spec.predecessors(task).all(|k| completed[k]) {
            pending.retain(|&i| i != task);
            *slot = false;
            out.push(Command { task, agent });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{ProcessBuilder, ScheduledTask};

    fn setup() -> (ProcessSpec, Plan) {
        let spec = ProcessBuilder::new()
            .human("H")
            .robot("R")
            .task("a", &[("H", 2.0)], &[])
            .task("b", &[("R", 2.0)], &[])
            .task("c", &[("R", 1.0)], &["a"])
            .build()
            .unwrap();
        let st = |agent, start, end| ScheduledTask { agent, start, end };
        let plan = Plan {
            tasks: vec![st(0, 1.0, 3.0), st(1, 1.0, 3.0), st(1, 3.0, 4.0)],
        };
        (spec, plan)
    }

    #[test]
    fn nothing_before_planned_start() {
        let (spec, plan) = setup();
        let mut d = Dispatcher::new(&plan, &spec);
        let mut free = vec![true; 2];
        assert!(d.step(0.5, &mut free, &[false; 3]).is_empty());
        assert_eq!(free, vec![true, true]);
    }

    #[test]
    fn both_agents_in_one_step() {
        let (spec, plan) = setup();
        let mut d = Dispatcher::new(&plan, &spec);
        let mut free = vec![true; 2];
        let cmds = d.step(1.0, &mut free, &[false; 3]);
        assert_eq!(cmds, vec![Command { task: 0, agent: 0 }, Command { task: 1, agent: 1 }]);
        assert_eq!(free, vec![false, false]);
    }

    #[test]
    fn busy_agent_is_skipped() {
        let (spec, plan) = setup();
        let mut d = Dispatcher::new(&plan, &spec);
        let mut free = vec![true, false];
        let cmds = d.step(1.0, &mut free, &[false; 3]);
        assert_eq!(cmds, vec![Command { task: 0, agent: 0 }]);
        assert_eq!(d.pending(1), 2);
    }

    #[test]
    fn unfinished_predecessor_blocks() {
        let (spec, plan) = setup();
        let mut d = Dispatcher::new(&plan, &spec);
        let mut free = vec![true; 2];
        d.step(1.0, &mut free, &[false; 3]);
        free[1] = true;
        assert!(d.step(3.5, &mut free, &[false, true, false]).is_empty());
        assert_eq!(
            d.step(3.5, &mut free, &[true, true, false]),
            vec![Command { task: 2, agent: 1 }]
        );
        assert!(d.is_empty());
    }

    #[test]
    fn stateless_form_agrees() {
        let (spec, plan) = setup();
        let mut d = Dispatcher::new(&plan, &spec);
        let mut pending = vec![0, 1, 2];
        let mut free_a = vec![true; 2];
        let mut free_b = vec![true; 2];
        let done = [true, true, false];
        for now in [0.0, 1.0, 3.0] {
            let a = d.step(now, &mut free_a, &done);
            let b = dispatch(&plan, &spec, now, &mut pending, &mut free_b, &done);
            assert_eq!(a, b);
        }
    }
}
