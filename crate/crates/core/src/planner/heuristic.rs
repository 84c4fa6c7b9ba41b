//! Seeded list scheduling and local search used as a MIP start.
//!
//! Every schedule it returns satisfies the target model exactly: for STP,
//! robot end times are fixed points of the stretch equation against all
//! human tasks, checked before a schedule is accepted.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{model_objective, ModelKind, PlannerKind};
use crate::process::{overlap, Plan, ProcessSpec, ScheduledTask, SynergyMatrix};

const RESTARTS: usize = 48;
const SEARCH_STARTS: usize = 8;
const SEARCH_BUDGET: usize = 40_000;
const FIXED_POINT_PASSES: usize = 60;

/// Allocation, priority order and, per task, whether it waits out conflicting
/// work of the other agents.
#[derive(Debug, Clone, PartialEq)]
struct Genome {
    alloc: Vec<usize>,
    order: Vec<usize>,
    wait: Vec<bool>,
}

struct Ctx<'a> {
    spec: &'a ProcessSpec,
    kind: ModelKind,
    synergies: &'a SynergyMatrix,
    nn: BTreeSet<(usize, usize)>,
    human: usize,
}

impl Ctx<'_> {
    fn not_neighbors(&self, i: usize, k: usize) -> bool {
        self.nn.contains(&(i.min(k), i.max(k)))
    }

    /// End of robot task `i` on `r` started at `t`, stretched by the placed
    /// human tasks. `None` when no fixed point exists.
    fn robot_end(&self, i: usize, r: usize, t: f64, d: f64, placed: &[Option<ScheduledTask>]) -> Option<f64> {
        let humans: Vec<(f64, f64, f64)> = placed
            .iter()
            .enumerate()
            .filter_map(|(k, p)| p.filter(|p| p.agent == self.human).map(|p| (k, p)))
            .map(|(k, p)| (p.start, p.end, self.synergies.get(r, i, k) - 1.0))
            .filter(|h| h.2 != 0.0)
            .collect();
        stretch_fixed_point(t, d, &humans)
    }

    /// Earliest admissible placement of task `i` on agent `j` no earlier than
    /// `t0`, with its objective penalty.
    fn place(&self, i: usize, j: usize, t0: f64, placed: &[Option<ScheduledTask>]) -> Option<(f64, f64, f64)> {
        let d = self.spec.duration(i, j)?;
        let mut t = t0;
        for _ in 0..4 * placed.len() + 4 {
            let mut push = None::<f64>;
            let mut bump = |e: f64| push = Some(push.map_or(e, |p: f64| p.max(e)));
            if j == self.human {
                for (q, p) in placed.iter().enumerate() {
                    let Some(p) = p else { continue };
                    if p.agent == self.human || overlap(t, t + d, p.start, p.end) <= 0.0 {
                        continue;
                    }
                    let blocked = match self.kind {
                        ModelKind::Stp => self.synergies.get(p.agent, q, i) != 1.0,
                        ModelKind::NotNeighboring => self.not_neighbors(i, q),
                        _ => false,
                    };
                    if blocked {
                        bump(p.end);
                    }
                }
                if let Some(p) = push {
                    t = p;
                    continue;
                }
                let penalty = if self.kind == ModelKind::Rstp {
                    placed
                        .iter()
                        .enumerate()
                        .filter_map(|(q, p)| p.map(|p| (q, p)))
                        .filter(|(_, p)| p.agent != self.human)
                        .map(|(q, p)| {
                            overlap(t, t + d, p.start, p.end) * (self.synergies.get(p.agent, q, i) - 1.0)
                        })
                        .sum()
                } else {
                    0.0
                };
                return Some((t, t + d, penalty));
            }

            if self.kind == ModelKind::NotNeighboring {
                for (q, p) in placed.iter().enumerate() {
                    let Some(p) = p else { continue };
                    if p.agent == self.human && self.not_neighbors(i, q) && overlap(t, t + d, p.start, p.end) > 0.0 {
                        bump(p.end);
                    }
                }
                if let Some(p) = push {
                    t = p;
                    continue;
                }
            }
            let end = if self.kind == ModelKind::Stp {
                match self.robot_end(i, j, t, d, placed) {
                    Some(e) => e,
                    None => {
                        // step past the first human task that overlaps
                        let next = placed
                            .iter()
                            .flatten()
                            .filter(|p| p.agent == self.human && p.end > t)
                            .map(|p| p.end)
                            .fold(f64::INFINITY, f64::min);
                        if !next.is_finite() {
                            return None;
                        }
                        t = next;
                        continue;
                    }
                }
            } else {
                t + d
            };
            let penalty = if self.kind == ModelKind::Rstp {
                placed
                    .iter()
                    .enumerate()
                    .filter_map(|(k, p)| p.map(|p| (k, p)))
                    .filter(|(_, p)| p.agent == self.human)
                    .map(|(k, p)| overlap(t, end, p.start, p.end) * (self.synergies.get(j, i, k) - 1.0))
                    .sum()
            } else {
                0.0
            };
            return Some((t, end, penalty));
        }
        None
    }

    fn pass(&self, rng: Option<&mut ChaCha8Rng>) -> Option<Plan> {
        let spec = self.spec;
        let m = spec.num_tasks();
        let mut placed: Vec<Option<ScheduledTask>> = vec![None; m];
        let mut free = vec![0.0f64; spec.num_agents()];
        let mut noise = vec![vec![0.0; spec.num_agents()]; m];
        if let Some(rng) = rng {
            for row in &mut noise {
                for v in row.iter_mut() {
                    *v = rng.random::<f64>() * 0.3;
                }
            }
        }
        for _ in 0..m {
            let mut best: Option<(f64, usize, usize, (f64, f64))> = None;
            for i in 0..m {
                if placed[i].is_some() || spec.predecessors(i).any(|k| placed[k].is_none()) {
                    continue;
                }
                let ready = spec
                    .predecessors(i)
                    .map(|k| placed[k].map_or(0.0, |p| p.end))
                    .fold(0.0, f64::max);
                for j in spec.capable_agents(i) {
                    let Some((s, e, pen)) = self.place(i, j, ready.max(free[j]), &placed) else {
                        continue;
                    };
                    let key = (e + pen) * (1.0 + noise[i][j]);
                    if best.is_none_or(|b| key < b.0) {
                        best = Some((key, i, j, (s, e)));
                    }
                }
            }
            let (_, i, j, (s, e)) = best?;
            placed[i] = Some(ScheduledTask {
                agent: j,
                start: s,
                end: e,
            });
            free[j] = e;
        }
        Some(Plan {
            tasks: placed.into_iter().map(|p| p.expect("all tasks placed")).collect(),
        })
    }
}

/// End time `te` with `te = t + d + sum c * overlap(t, te, s, e)` over
/// `humans = (s, e, c)`, by iteration from `t + d`.
fn stretch_fixed_point(t: f64, d: f64, humans: &[(f64, f64, f64)]) -> Option<f64> {
    let g = |te: f64| t + d + humans.iter().map(|&(s, e, c)| c * overlap(t, te, s, e)).sum::<f64>();
    let mut te = t + d;
    for _ in 0..2000 {
        let next = g(te);
        if (next - te).abs() < 1e-12 {
            break;
        }
        te = next;
    }
    ((g(te) - te).abs() < 1e-9 && te > t).then_some(te)
}

impl Ctx<'_> {
    fn is_pair(&self, a: usize, b: usize) -> bool {
        (a == self.human) != (b == self.human)
    }

    /// Whether task `i` on `ai` must not overlap task `k` on `ak`.
    fn conflict(&self, i: usize, ai: usize, k: usize, ak: usize, wait: bool) -> bool {
        if !self.is_pair(ai, ak) {
            return false;
        }
        match self.kind {
            ModelKind::NotNeighboring => self.not_neighbors(i, k),
            ModelKind::Stp | ModelKind::Rstp if wait => {
                let (r, ri, hk) = if ai == self.human { (ak, k, i) } else { (ai, i, k) };
                self.synergies.get(r, ri, hk) > 1.0
            }
            _ => false,
        }
    }

    /// Schedule induced by a genome; STP end times are iterated to a fixed
    /// point and verified.
    fn decode(&self, g: &Genome) -> Option<Plan> {
        let spec = self.spec;
        let m = spec.num_tasks();
        let stp = self.kind == ModelKind::Stp;
        let mut prev: Option<Vec<(f64, f64)>> = None;
        for _ in 0..if stp { FIXED_POINT_PASSES } else { 1 } {
            let mut cur: Vec<Option<(f64, f64)>> = vec![None; m];
            let mut free = vec![0.0f64; spec.num_agents()];
            let mut remaining = g.order.clone();
            while !remaining.is_empty() {
                let pos = remaining
                    .iter()
                    .position(|&i| spec.predecessors(i).all(|k| cur[k].is_some()))?;
                let i = remaining.remove(pos);
                let j = g.alloc[i];
                let d = spec.duration(i, j)?;
                let mut t = spec
                    .predecessors(i)
                    .map(|k| cur[k].map_or(0.0, |c| c.1))
                    .fold(free[j], f64::max);
                for _ in 0..4 * m + 4 {
                    let push = (0..m)
                        .filter_map(|k| cur[k].map(|c| (k, c)))
                        .filter(|&(k, c)| {
                            self.conflict(i, j, k, g.alloc[k], g.wait[i]) && overlap(t, t + d, c.0, c.1) > 0.0
                        })
                        .map(|(_, c)| c.1)
                        .fold(f64::NEG_INFINITY, f64::max);
                    if push > t {
                        t = push;
                    } else {
                        break;
                    }
                }
                let end = if stp && j != self.human {
                    let humans: Vec<(f64, f64, f64)> = (0..m)
                        .filter(|&k| g.alloc[k] == self.human)
                        .filter_map(|k| {
                            let iv = cur[k].or_else(|| prev.as_ref().map(|p| p[k]))?;
                            let c = self.synergies.get(j, i, k) - 1.0;
                            (c != 0.0).then_some((iv.0, iv.1, c))
                        })
                        .collect();
                    stretch_fixed_point(t, d, &humans)?
                } else {
                    t + d
                };
                cur[i] = Some((t, end));
                free[j] = end;
            }
            let cur: Vec<(f64, f64)> = cur.into_iter().map(|c| c.expect("all placed")).collect();
            let settled = prev.as_ref().is_some_and(|p| {
                p.iter().zip(&cur).all(|(a, b)| (a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10)
            });
            prev = Some(cur);
            if settled {
                break;
            }
        }
        let times = prev?;
        let plan = Plan {
            tasks: times
                .iter()
                .enumerate()
                .map(|(i, &(start, end))| ScheduledTask {
                    agent: g.alloc[i],
                    start,
                    end,
                })
                .collect(),
        };
        if stp && !self.stp_consistent(&plan) {
            return None;
        }
        plan.check(spec, 1e-9).ok()?;
        Some(plan)
    }

    fn stp_consistent(&self, plan: &Plan) -> bool {
        let t = &plan.tasks;
        (0..t.len()).filter(|&i| t[i].agent != self.human).all(|i| {
            let d = self.spec.duration(i, t[i].agent).unwrap_or(f64::NAN);
            let stretch: f64 = (0..t.len())
                .filter(|&k| t[k].agent == self.human)
                .map(|k| (self.synergies.get(t[i].agent, i, k) - 1.0) * overlap(t[i].start, t[i].end, t[k].start, t[k].end))
                .sum();
            (t[i].end - (t[i].start + d + stretch)).abs() < 1e-7
        })
    }

    fn genome_from_plan(&self, plan: &Plan, wait: bool) -> Genome {
        let mut order: Vec<usize> = (0..plan.tasks.len()).collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (plan.tasks[a], plan.tasks[b]);
            pa.start.total_cmp(&pb.start).then(pa.end.total_cmp(&pb.end)).then(a.cmp(&b))
        });
        Genome {
            alloc: plan.tasks.iter().map(|t| t.agent).collect(),
            order,
            wait: vec![wait; plan.tasks.len()],
        }
    }

    fn random_genome(&self, rng: &mut ChaCha8Rng) -> Genome {
        let m = self.spec.num_tasks();
        let alloc = (0..m)
            .map(|i| {
                let agents: Vec<usize> = self.spec.capable_agents(i).collect();
                agents[rng.random_range(0..agents.len())]
            })
            .collect();
        let mut order: Vec<usize> = (0..m).collect();
        for k in (1..m).rev() {
            order.swap(k, rng.random_range(0..=k));
        }
        Genome {
            alloc,
            order,
            wait: (0..m).map(|_| rng.random::<bool>()).collect(),
        }
    }

    fn score(&self, g: &Genome) -> Option<(f64, Plan)> {
        let plan = self.decode(g)?;
        Some((model_objective(self.kind, &plan, self.spec, self.synergies), plan))
    }

    /// First-improvement descent over order swaps, reallocations and wait
    /// flips; stops at a local optimum or when `budget` decodes are spent.
    fn descend(&self, mut g: Genome, rng: &mut ChaCha8Rng, budget: &mut usize) -> Option<(f64, Plan)> {
        let m = self.spec.num_tasks();
        let mut best = self.score(&g)?;
        *budget = budget.saturating_sub(1);
        'outer: while *budget > 0 {
            let mut moves: Vec<(u8, usize, usize)> = Vec::new();
            for a in 0..m {
                for b in a + 1..m {
                    moves.push((0, a, b));
                }
                for j in self.spec.capable_agents(a) {
                    if j != g.alloc[a] {
                        moves.push((1, a, j));
                    }
                }
                moves.push((2, a, 0));
            }
            for k in (1..moves.len()).rev() {
                moves.swap(k, rng.random_range(0..=k));
            }
            for (kind, a, b) in moves {
                if *budget == 0 {
                    break 'outer;
                }
                *budget -= 1;
                let mut next = g.clone();
                match kind {
                    0 => next.order.swap(a, b),
                    1 => next.alloc[a] = b,
                    _ => next.wait[a] = !next.wait[a],
                }
                if let Some(cand) = self.score(&next) {
                    if cand.0 < best.0 - 1e-9 {
                        best = cand;
                        g = next;
                        continue 'outer;
                    }
                }
            }
            break;
        }
        Some(best)
    }
}

/// Best of several seeded greedy schedules under `kind`'s own semantics.
pub fn greedy_plan(spec: &ProcessSpec, kind: &PlannerKind, synergies: &SynergyMatrix, seed: u64) -> Option<Plan> {
    let (model, nn) = match kind {
        PlannerKind::Baseline => (ModelKind::Baseline, BTreeSet::new()),
        PlannerKind::NotNeighboring(pairs) => (
            ModelKind::NotNeighboring,
            pairs.iter().map(|&(i, k)| (i.min(k), i.max(k))).collect(),
        ),
        PlannerKind::Stp => (ModelKind::Stp, BTreeSet::new()),
        PlannerKind::Rstp => (ModelKind::Rstp, BTreeSet::new()),
    };
    let neutral = SynergyMatrix::new();
    let syn = if matches!(model, ModelKind::Stp | ModelKind::Rstp) { synergies } else { &neutral };
    let ctx = Ctx {
        spec,
        kind: model,
        synergies: syn,
        nn,
        human: spec.human(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1157);
    let mut best: Option<(f64, Plan)> = None;
    let offer = |cand: Option<(f64, Plan)>, best: &mut Option<(f64, Plan)>| {
        if let Some((obj, plan)) = cand {
            if best.as_ref().is_none_or(|b| obj < b.0 - 1e-12) {
                *best = Some((obj, plan));
            }
        }
    };
    for pass in 0..=RESTARTS {
        let plan = if pass == 0 { ctx.pass(None) } else { ctx.pass(Some(&mut rng)) };
        offer(plan.map(|p| (model_objective(model, &p, spec, syn), p)), &mut best);
    }
    let mut budget = SEARCH_BUDGET;
    let mut starts = Vec::new();
    if let Some((_, p)) = &best {
        starts.push(ctx.genome_from_plan(p, true));
        starts.push(ctx.genome_from_plan(p, false));
    }
    while starts.len() < SEARCH_STARTS {
        starts.push(ctx.random_genome(&mut rng));
    }
    let share = budget / starts.len();
    for g in starts {
        let mut b = share.min(budget);
        let spent_from = b;
        let found = ctx.descend(g, &mut rng, &mut b);
        budget -= spent_from - b;
        offer(found, &mut best);
    }
    best.map(|b| b.1)
}
