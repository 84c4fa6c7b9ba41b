//! Exact STP optimum for tiny one-robot instances.
//!
//! Every allocation, every per-agent order and every interleaving of the
//! agents' start/end events is tried. Once the order of all events is fixed,
//! each `min`/`max` in the overlap and the sign of the overlap are known, so
//! the stretched end times are linear and one LP finds the best schedule for
//! that order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synplan_core::process::{overlap, Plan, ProcessBuilder, ProcessSpec, ScheduledTask, SynergyMatrix};

use super::dense_lp::{minimize, LpResult, Rel};

/// One human, one robot, up to four tasks, synergies in [0.5, 2].
pub fn random_instance(seed: u64) -> (ProcessSpec, SynergyMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = [1, 2, 3, 3, 4, 4, 4][rng.random_range(0..7)];
    let ids: Vec<String> = (0..m).map(|i| format!("t{i}")).collect();
    let mut b = ProcessBuilder::new().human("H").robot("R");
    for i in 0..m {
        let dh = rng.random_range(2..=12) as f64 * 0.5;
        let dr = rng.random_range(2..=12) as f64 * 0.5;
        let durs: Vec<(&str, f64)> = match rng.random_range(0..4) {
            0 => vec![("H", dh)],
            1 => vec![("R", dr)],
            _ => vec![("H", dh), ("R", dr)],
        };
        let after: Vec<&str> = (0..i).filter(|_| rng.random_bool(0.2)).map(|k| ids[k].as_str()).collect();
        b = b.task(&ids[i], &durs, &after);
    }
    let spec = b.build().expect("valid random spec");
    let mut syn = SynergyMatrix::new();
    let (h, r) = (spec.human(), 1 - spec.human());
    for i in 0..m {
        for k in 0..m {
            if i != k && spec.capable(i, r) && spec.capable(k, h) {
                syn.set(r, i, k, rng.random_range(0.5..=2.0)).unwrap();
            }
        }
    }
    (spec, syn)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (p, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(p);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

fn interleavings(a: &[usize], b: &[usize]) -> Vec<Vec<usize>> {
    if a.is_empty() {
        return vec![b.to_vec()];
    }
    if b.is_empty() {
        return vec![a.to_vec()];
    }
    let mut out = Vec::new();
    for mut t in interleavings(&a[1..], b) {
        t.insert(0, a[0]);
        out.push(t);
    }
    for mut t in interleavings(a, &b[1..]) {
        t.insert(0, b[0]);
        out.push(t);
    }
    out
}

fn events(seq: &[usize]) -> Vec<usize> {
    seq.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect()
}

/// Robot end-time equation residual of `plan`, the largest over robot tasks.
pub fn fixed_point_residual(plan: &Plan, spec: &ProcessSpec, syn: &SynergyMatrix) -> f64 {
    let h = spec.human();
    let mut worst = 0.0f64;
    for (i, t) in plan.tasks.iter().enumerate().filter(|(_, t)| t.agent != h) {
        let mut rhs = t.start + spec.duration(i, t.agent).unwrap();
        for (k, u) in plan.tasks.iter().enumerate().filter(|(_, u)| u.agent == h) {
            rhs += (syn.get(t.agent, i, k) - 1.0) * overlap(t.start, t.end, u.start, u.end);
        }
        worst = worst.max((t.end - rhs).abs());
    }
    worst
}

/// Minimum makespan under the stretched end-time semantics.
pub fn stp_optimum(spec: &ProcessSpec, syn: &SynergyMatrix) -> Option<(f64, Plan)> {
    let m = spec.num_tasks();
    let h = spec.human();
    let r = 1 - h;
    let n = 2 * m + 1;
    let caps: Vec<Vec<usize>> = (0..m).map(|i| spec.capable_agents(i).collect()).collect();
    let mut best: Option<(f64, Plan)> = None;
    let total: usize = caps.iter().map(Vec::len).product();
    for code in 0..total {
        let mut c = code;
        let alloc: Vec<usize> = caps
            .iter()
            .map(|cs| {
                let a = cs[c % cs.len()];
                c /= cs.len();
                a
            })
            .collect();
        let hum: Vec<usize> = (0..m).filter(|&i| alloc[i] == h).collect();
        let rob: Vec<usize> = (0..m).filter(|&i| alloc[i] == r).collect();
        for hs in permutations(&hum) {
            for rs in permutations(&rob) {
                for order in interleavings(&events(&hs), &events(&rs)) {
                    let mut pos = vec![0; 2 * m];
                    for (p, &e) in order.iter().enumerate() {
                        pos[e] = p;
                    }
                    let prec_ok = (0..m).all(|i| spec.predecessors(i).all(|k| pos[2 * k + 1] < pos[2 * i]));
                    if !prec_ok {
                        continue;
                    }
                    let mut rows: Vec<(Vec<f64>, Rel, f64)> = Vec::new();
                    for w in order.windows(2) {
                        let mut a = vec![0.0; n];
                        a[w[0]] = 1.0;
                        a[w[1]] = -1.0;
                        rows.push((a, Rel::Le, 0.0));
                    }
                    for i in 0..m {
                        let mut a = vec![0.0; n];
                        a[2 * i + 1] = 1.0;
                        a[2 * i] = -1.0;
                        if alloc[i] == r {
                            for &k in &hum {
                                let s = syn.get(r, i, k);
                                let min_end = if pos[2 * i + 1] < pos[2 * k + 1] { 2 * i + 1 } else { 2 * k + 1 };
                                let max_start = if pos[2 * i] > pos[2 * k] { 2 * i } else { 2 * k };
                                if s != 1.0 && pos[min_end] > pos[max_start] {
                                    a[min_end] -= s - 1.0;
                                    a[max_start] += s - 1.0;
                                }
                            }
                        }
                        rows.push((a, Rel::Eq, spec.duration(i, alloc[i]).unwrap()));
                        let mut mk = vec![0.0; n];
                        mk[2 * m] = 1.0;
                        mk[2 * i + 1] = -1.0;
                        rows.push((mk, Rel::Ge, 0.0));
                    }
                    let mut cost = vec![0.0; n];
                    cost[2 * m] = 1.0;
                    if let LpResult::Optimal { objective, x } = minimize(&cost, &rows) {
                        if best.as_ref().is_none_or(|b| objective < b.0 - 1e-12) {
                            let plan = Plan {
                                tasks: (0..m)
                                    .map(|i| ScheduledTask {
                                        agent: alloc[i],
                                        start: x[2 * i],
                                        end: x[2 * i + 1],
                                    })
                                    .collect(),
                            };
                            best = Some((objective, plan));
                        }
                    }
                }
            }
        }
    }
    best
}
