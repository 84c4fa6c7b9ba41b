use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::simplex::{dense_cost, Outcome, Tableau};
use super::{
    check_feasible, relative_gap, BranchingRule, MilpError, MilpProblem, MilpSolution,
    ProgressPoint, SolveStatus, SolverConfig, VarKind,
};

const PRUNE_TOL: f64 = 1e-9;

#[derive(Debug)]
struct Node {
    bound: f64,
    depth: u32,
    id: u64,
    /// (variable, fixed value) pairs along the path from the root.
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: the "greatest" node is the lowest bound, then deepest, then newest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(self.id.cmp(&other.id))
    }
}

struct Incumbent {
    values: Vec<f64>,
    objective: f64,
}

struct Search<'a> {
    problem: &'a MilpProblem,
    config: &'a SolverConfig,
    tableau: Tableau,
    base_lo: Vec<f64>,
    base_hi: Vec<f64>,
    binaries: Vec<usize>,
    rng: ChaCha8Rng,
    incumbent: Option<Incumbent>,
    progress: Vec<ProgressPoint>,
    nodes: u64,
}

impl Search<'_> {
    /// Dual re-solve from the current basis; on numerical trouble the node
    /// LP is rebuilt and solved from scratch.
    fn resolve(&mut self, lo: &[f64], hi: &[f64], cutoff: f64) -> Result<Outcome, MilpError> {
        match self.tableau.resolve_with_bounds(lo, hi, cutoff) {
            Err(MilpError::NumericalFailure(_)) => {}
            other => return other,
        }
        let Some(mut fresh) = Tableau::with_bounds(self.problem, lo, hi) else {
            return Ok(Outcome::Infeasible);
        };
        let out = fresh.solve_from_scratch(&dense_cost(self.problem))?;
        self.tableau = fresh;
        Ok(match out {
            Outcome::Optimal if self.tableau.objective() > cutoff => Outcome::Cutoff,
            other => other,
        })
    }

    fn node_bounds(&self, fixings: &[(usize, f64)]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.base_lo.clone();
        let mut hi = self.base_hi.clone();
        for &(j, v) in fixings {
            lo[j] = v;
            hi[j] = v;
        }
        (lo, hi)
    }

    fn cutoff(&self) -> f64 {
        self.incumbent
            .as_ref()
            .map_or(f64::INFINITY, |inc| inc.objective - self.problem.objective_constant() - PRUNE_TOL)
    }

    fn branch_var(&mut self, x: &[f64]) -> Option<usize> {
        let tol = self.config.int_tol;
        let vars = self.problem.vars();
        let class = self
            .binaries
            .iter()
            .filter(|&&j| (x[j] - x[j].round()).abs() > tol)
            .map(|&j| vars[j].priority)
            .max()?;
        let mut best = tol;
        let mut ties: Vec<usize> = Vec::new();
        for &j in self.binaries.iter().filter(|&&j| vars[j].priority == class) {
            let f = (x[j] - x[j].round()).abs();
            if f > best + 1e-12 {
                best = f;
                ties.clear();
                ties.push(j);
            } else if f >= best - 1e-12 {
                ties.push(j);
            }
        }
        match self.config.branching {
            BranchingRule::MostFractional => Some(ties[0]),
            BranchingRule::MostFractionalRandomTies => Some(ties[self.rng.random_range(0..ties.len())]),
        }
    }

    /// Re-solves the LP with all binaries fixed at their rounded values so the
    /// stored incumbent has exact integer entries and consistent continuous values.
    fn polish(&mut self, x: &[f64], fixings: &[(usize, f64)]) -> Result<Vec<f64>, MilpError> {
        let mut fx = fixings.to_vec();
        for &j in &self.binaries {
            fx.push((j, x[j].round()));
        }
        let (lo, hi) = self.node_bounds(&fx);
        let out = self.resolve(&lo, &hi, f64::INFINITY)?;
        let mut v = if out == Outcome::Optimal { self.tableau.values() } else { x.to_vec() };
        for &j in &self.binaries {
            v[j] = v[j].round();
        }
        Ok(v)
    }

    fn offer(&mut self, values: Vec<f64>) -> bool {
        let obj = self.problem.objective_value(&values);
        if self.incumbent.as_ref().is_some_and(|inc| obj >= inc.objective - PRUNE_TOL) {
            return false;
        }
        let ok = check_feasible(self.problem, &values, self.config.feas_tol, self.config.int_tol)
            .map(|r| r.feasible)
            .unwrap_or(false);
        if ok {
            self.incumbent = Some(Incumbent {
                values,
                objective: obj,
            });
        }
        ok
    }

    fn record(&mut self, best_bound: f64) {
        let incumbent = self.incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
        let changed = self
            .progress
            .last()
            .is_none_or(|p| p.incumbent != incumbent || p.best_bound != best_bound);
        if changed {
            self.progress.push(ProgressPoint {
                nodes: self.nodes,
                incumbent,
                best_bound,
            });
        }
    }
}

/// Branch-and-bound over the binary variables of `problem`.
///
/// The search is best-bound first with deterministic tie-breaking, so two
/// runs with the same config and a node limit visit the same nodes.
pub fn solve_milp(problem: &MilpProblem, config: &SolverConfig) -> Result<MilpSolution, MilpError> {
    problem.validate()?;
    config.validate()?;
    let start = Instant::now();
    let constant = problem.objective_constant();

    let no_solution = |status, nodes, bound| MilpSolution {
        status,
        values: vec![f64::NAN; problem.num_vars()],
        objective: f64::INFINITY,
        best_bound: bound,
        gap: f64::INFINITY,
        nodes,
        progress: Vec::new(),
    };

    let Some(mut tableau) = Tableau::new(problem) else {
        return Ok(no_solution(SolveStatus::Infeasible, 0, f64::INFINITY));
    };
    let cost = dense_cost(problem);
    match tableau.solve_from_scratch(&cost)? {
        Outcome::Optimal => {}
        Outcome::Infeasible => return Ok(no_solution(SolveStatus::Infeasible, 1, f64::INFINITY)),
        Outcome::Unbounded => return Err(MilpError::Unbounded),
        other => return Err(MilpError::NumericalFailure(format!("root LP ended {other:?}"))),
    }
    let (base_lo, base_hi) = tableau.struct_bounds();
    let binaries: Vec<usize> = problem
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(i, _)| i)
        .collect();

    let mut s = Search {
        problem,
        config,
        tableau,
        base_lo,
        base_hi,
        binaries,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        incumbent: None,
        progress: Vec::new(),
        nodes: 0,
    };
    if let Some(start_x) = &config.initial_solution {
        if start_x.len() == problem.num_vars() {
            s.offer(start_x.clone());
        }
    }

    let root_x = s.tableau.values();
    let root_obj = s.tableau.objective() + constant;
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    // the root LP is already solved; push it with its values pending
    let mut pending: Option<(Node, Vec<f64>, f64)> = Some((
        Node {
            bound: root_obj,
            depth: 0,
            id: next_id,
            fixings: Vec::new(),
        },
        root_x,
        root_obj,
    ));
    next_id += 1;

    let mut limit_hit = false;
    let mut best_bound = root_obj;
    loop {
        let (node, x, obj) = match pending.take() {
            Some(p) => p,
            None => {
                let Some(node) = heap.pop() else { break };
                let node: Node = node;
                best_bound = best_bound.max(node.bound);
                if let Some(inc) = &s.incumbent {
                    if node.bound >= inc.objective - PRUNE_TOL {
                        // everything left is at least as bad
                        heap.clear();
                        break;
                    }
                    if relative_gap(inc.objective, node.bound) <= config.gap_target {
                        heap.push(node);
                        break;
                    }
                }
                if start.elapsed().as_secs_f64() >= config.time_limit_secs
                    || config.node_limit.is_some_and(|l| s.nodes >= l)
                {
                    heap.push(node);
                    limit_hit = true;
                    break;
                }
                let (lo, hi) = s.node_bounds(&node.fixings);
                let cutoff = s.cutoff();
                let out = s.resolve(&lo, &hi, cutoff)?;
                s.nodes += 1;
                match out {
                    Outcome::Optimal => {}
                    Outcome::Infeasible | Outcome::Cutoff => {
                        s.record(best_bound);
                        continue;
                    }
                    Outcome::Unbounded => return Err(MilpError::Unbounded),
                    Outcome::IterationLimit => {
                        return Err(MilpError::NumericalFailure("node LP iteration limit".into()))
                    }
                }
                let x = s.tableau.values();
                let obj = s.tableau.objective() + constant;
                (node, x, obj)
            }
        };
        if node.depth == 0 {
            s.nodes += 1;
        }
        if s.incumbent.as_ref().is_some_and(|inc| obj >= inc.objective - PRUNE_TOL) {
            s.record(best_bound);
            continue;
        }
        match s.branch_var(&x) {
            None => {
                let v = s.polish(&x, &node.fixings)?;
                if !s.offer(v) {
                    // polishing can only lose feasibility through round-off
                    s.offer(x);
                }
            }
            Some(j) => {
                let up_first = x[j] - x[j].floor() >= 0.5;
                let order = if up_first { [0.0, 1.0] } else { [1.0, 0.0] };
                for val in order {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, val));
                    heap.push(Node {
                        bound: obj,
                        depth: node.depth + 1,
                        id: next_id,
                        fixings,
                    });
                    next_id += 1;
                }
            }
        }
        let open_min = heap.peek().map_or(f64::INFINITY, |n: &Node| n.bound);
        let inc_obj = s.incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
        best_bound = best_bound.max(open_min.min(inc_obj));
        s.record(best_bound);
    }

    let open_min = heap.peek().map_or(f64::INFINITY, |n| n.bound);
    let nodes = s.nodes;
    if let Some(inc) = &s.incumbent {
        let bound = open_min.min(inc.objective).max(root_obj.min(inc.objective));
        s.record(bound);
    }
    match s.incumbent.take() {
        None => {
            let status = if limit_hit || !heap.is_empty() {
                SolveStatus::TimedOutNoIncumbent
            } else {
                SolveStatus::Infeasible
            };
            let mut sol = no_solution(status, nodes, open_min.min(best_bound.max(root_obj)));
            sol.progress = s.progress;
            Ok(sol)
        }
        Some(inc) => {
            let bound = open_min.min(inc.objective).max(root_obj.min(inc.objective));
            let gap = relative_gap(inc.objective, bound);
            let status = if heap.is_empty() || gap <= config.gap_target {
                SolveStatus::Optimal
            } else {
                SolveStatus::FeasibleWithinGap
            };
            Ok(MilpSolution {
                status,
                values: inc.values,
                objective: inc.objective,
                best_bound: bound,
                gap: if heap.is_empty() { 0.0 } else { gap },
                nodes,
                progress: s.progress,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_lp, LpStatus, Relation, VarId};
    use proptest::prelude::*;

    fn knapsack(values: &[f64], weights: &[f64], cap: f64) -> (MilpProblem, Vec<VarId>) {
        let mut p = MilpProblem::new();
        let xs: Vec<VarId> = (0..values.len()).map(|i| p.add_binary(format!("x{i}"))).collect();
        p.add_constraint(
            "cap",
            xs.iter().zip(weights).map(|(&x, &w)| (x, w)).collect(),
            Relation::Le,
            cap,
        );
        p.set_objective(xs.iter().zip(values).map(|(&x, &v)| (x, -v)).collect(), 0.0);
        (p, xs)
    }

    fn brute_force(values: &[f64], weights: &[f64], cap: f64) -> f64 {
        let n = values.len();
        (0u32..1 << n)
            .filter_map(|mask| {
                let (mut v, mut w) = (0.0, 0.0);
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        v += values[i];
                        w += weights[i];
                    }
                }
                (w <= cap + 1e-9).then_some(-v)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn small_binary_example() {
        // min -x - y, x + y <= 1.5 => objective -1
        let mut p = MilpProblem::new();
        let x = p.add_binary("x");
        let y = p.add_binary("y");
        p.add_constraint("c", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.5);
        p.set_objective(vec![(x, -1.0), (y, -1.0)], 0.0);
        let s = solve_milp(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-9);
        assert_eq!(s.value(x) + s.value(y), 1.0);
    }

    #[test]
    fn integer_infeasible_but_lp_feasible() {
        // 2x = 1 has the LP solution 0.5 but no binary solution
        let mut p = MilpProblem::new();
        let x = p.add_binary("x");
        p.add_constraint("c", vec![(x, 2.0)], Relation::Eq, 1.0);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Optimal);
        let s = solve_milp(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn knapsack_matches_brute_force() {
        let values = [10.0, 13.0, 7.0, 8.0, 4.0, 9.0, 11.0, 3.0];
        let weights = [5.0, 7.0, 4.0, 4.5, 2.0, 5.5, 6.0, 1.5];
        let (p, _) = knapsack(&values, &weights, 17.0);
        let s = solve_milp(&p, &SolverConfig::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - brute_force(&values, &weights, 17.0)).abs() < 1e-9);
    }

    #[test]
    fn node_limited_runs_are_identical() {
        let values = [10.0, 13.0, 7.0, 8.0, 4.0, 9.0, 11.0, 3.0, 6.0, 5.0];
        let weights = [5.0, 7.0, 4.0, 4.5, 2.0, 5.5, 6.0, 1.5, 3.3, 2.7];
        let (p, _) = knapsack(&values, &weights, 19.0);
        let cfg = SolverConfig {
            node_limit: Some(7),
            ..SolverConfig::default()
        };
        let a = solve_milp(&p, &cfg).unwrap();
        let b = solve_milp(&p, &cfg).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.values), bits(&b.values));
        assert_eq!(a.status, b.status);
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.nodes, b.nodes);
    }

    #[test]
    fn mip_start_is_kept_when_no_better() {
        let (p, _) = knapsack(&[1.0, 1.0], &[1.0, 1.0], 2.0);
        let cfg = SolverConfig {
            initial_solution: Some(vec![1.0, 1.0]),
            ..SolverConfig::default()
        };
        let s = solve_milp(&p, &cfg).unwrap();
        assert_eq!(s.values, vec![1.0, 1.0]);
    }

    #[test]
    fn continuous_and_binary_mix() {
        // facility-style: y open costs 5, serving x <= 10 y, x >= 3, cost 1 per x
        let mut p = MilpProblem::new();
        let y1 = p.add_binary("y1");
        let y2 = p.add_binary("y2");
        let x1 = p.add_continuous("x1", 0.0, 10.0);
        let x2 = p.add_continuous("x2", 0.0, 10.0);
        p.add_constraint("link1", vec![(x1, 1.0), (y1, -10.0)], Relation::Le, 0.0);
        p.add_constraint("link2", vec![(x2, 1.0), (y2, -4.0)], Relation::Le, 0.0);
        p.add_constraint("demand", vec![(x1, 1.0), (x2, 1.0)], Relation::Ge, 3.0);
        p.set_objective(vec![(y1, 5.0), (y2, 2.0), (x1, 1.0), (x2, 1.5)], 1.0);
        let s = solve_milp(&p, &SolverConfig::default()).unwrap();
        // y2 alone: 2 + 4.5 + 1 = 7.5 beats y1 alone: 5 + 3 + 1 = 9
        assert!((s.objective - 7.5).abs() < 1e-9);
        assert_eq!(s.value(y2), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn random_knapsacks_are_optimal(
            items in proptest::collection::vec((1.0f64..20.0, 0.5f64..10.0), 1..9),
            frac in 0.1f64..0.9,
        ) {
            let values: Vec<f64> = items.iter().map(|i| i.0).collect();
            let weights: Vec<f64> = items.iter().map(|i| i.1).collect();
            let cap = frac * weights.iter().sum::<f64>();
            let (p, _) = knapsack(&values, &weights, cap);
            let s = solve_milp(&p, &SolverConfig::default()).unwrap();
            prop_assert!((s.objective - brute_force(&values, &weights, cap)).abs() < 1e-7);
            prop_assert!(s.best_bound <= s.objective + 1e-9);
            for w in s.progress.windows(2) {
                prop_assert!(w[1].incumbent <= w[0].incumbent);
                prop_assert!(w[1].best_bound >= w[0].best_bound - 1e-9);
            }
        }

        #[test]
        fn gap_target_is_respected(
            items in proptest::collection::vec((1.0f64..20.0, 0.5f64..10.0), 4..10),
            gap in 0.0f64..0.2,
        ) {
            let values: Vec<f64> = items.iter().map(|i| i.0).collect();
            let weights: Vec<f64> = items.iter().map(|i| i.1).collect();
            let cap = 0.5 * weights.iter().sum::<f64>();
            let (p, _) = knapsack(&values, &weights, cap);
            let cfg = SolverConfig { gap_target: gap, ..SolverConfig::default() };
            let s = solve_milp(&p, &cfg).unwrap();
            prop_assert_eq!(s.status, SolveStatus::Optimal);
            prop_assert!(s.gap <= gap + 1e-12);
            let opt = brute_force(&values, &weights, cap);
            prop_assert!(relative_gap(s.objective, opt) <= gap + 1e-9);
        }
    }
}
