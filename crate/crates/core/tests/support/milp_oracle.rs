//! Random small MILPs and an exhaustive reference solver: every binary
//! assignment, then one LP over the continuous variables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use synplan_core::milp::{MilpProblem, Relation, VarKind};

use super::dense_lp::{minimize, LpResult, Rel};

/// At most 8 binaries, 6 continuous variables and 10 constraints.
pub fn random_milp(seed: u64) -> MilpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = rng.random_range(1..=8);
    let nc = rng.random_range(0..=6);
    let ncons = rng.random_range(1..=10);
    let mut p = MilpProblem::new();
    let mut point = Vec::new();
    for b in 0..nb {
        p.add_binary(format!("b{b}"));
        point.push(rng.random_range(0..=1) as f64);
    }
    for c in 0..nc {
        let lo = rng.random_range(-3..=0) as f64;
        let hi = lo + rng.random_range(1..=6) as f64;
        p.add_continuous(format!("x{c}"), lo, hi);
        point.push(rng.random_range(lo..=hi));
    }
    let n = nb + nc;
    let infeasible_ok = rng.random_bool(0.1);
    for r in 0..ncons {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.6) {
                let mut a = rng.random_range(-5..=5) as f64;
                if a == 0.0 {
                    a = 1.0;
                }
                if rng.random_bool(0.2) {
                    a *= 0.5;
                }
                terms.push((synplan_core::milp::VarId(j), a));
            }
        }
        if terms.is_empty() {
            terms.push((synplan_core::milp::VarId(rng.random_range(0..n)), 1.0));
        }
        let act: f64 = terms.iter().map(|&(v, a)| a * point[v.0]).sum();
        let slack = rng.random_range(0.0..3.0);
        let (rel, rhs) = match rng.random_range(0..10) {
            0 => (Relation::Eq, act),
            1..=5 => (Relation::Le, act + slack),
            _ => (Relation::Ge, act - slack),
        };
        let rhs = if infeasible_ok { rhs + rng.random_range(-6.0..6.0) } else { rhs };
        p.add_constraint(format!("c{r}"), terms, rel, rhs);
    }
    let obj = (0..n)
        .map(|j| (synplan_core::milp::VarId(j), rng.random_range(-5..=5) as f64))
        .collect();
    p.set_objective(obj, 0.0);
    p
}

/// Optimal objective by enumeration, `None` when infeasible.
pub fn brute_force(p: &MilpProblem) -> Option<f64> {
    let vars = p.vars();
    let bins: Vec<usize> = (0..vars.len()).filter(|&j| vars[j].kind == VarKind::Binary).collect();
    let conts: Vec<usize> = (0..vars.len()).filter(|&j| vars[j].kind == VarKind::Continuous).collect();
    let pos = |j: usize| conts.iter().position(|&c| c == j);
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut fixed = vec![0.0; vars.len()];
        for (b, &j) in bins.iter().enumerate() {
            fixed[j] = ((mask >> b) & 1) as f64;
        }
        // shift continuous variables to y = x - lo >= 0
        for &j in &conts {
            fixed[j] = vars[j].lower;
        }
        let mut rows = Vec::new();
        for (k, &j) in conts.iter().enumerate() {
            let mut a = vec![0.0; conts.len()];
            a[k] = 1.0;
            rows.push((a, Rel::Le, vars[j].upper - vars[j].lower));
        }
        for c in p.constraints() {
            let mut a = vec![0.0; conts.len()];
            let mut rhs = c.rhs;
            for &(v, coef) in &c.terms {
                rhs -= coef * fixed[v.0];
                if let Some(k) = pos(v.0) {
                    a[k] += coef;
                }
            }
            let rel = match c.relation {
                Relation::Le => Rel::Le,
                Relation::Ge => Rel::Ge,
                Relation::Eq => Rel::Eq,
            };
            rows.push((a, rel, rhs));
        }
        let mut cost = vec![0.0; conts.len()];
        let mut base = p.objective_constant();
        for &(v, coef) in p.objective() {
            base += coef * fixed[v.0];
            if let Some(k) = pos(v.0) {
                cost[k] += coef;
            }
        }
        let value = if conts.is_empty() {
            let ok = rows.iter().all(|(_, rel, rhs)| match rel {
                Rel::Le => 0.0 <= rhs + 1e-9,
                Rel::Ge => 0.0 >= rhs - 1e-9,
                Rel::Eq => rhs.abs() <= 1e-9,
            });
            ok.then_some(base)
        } else {
            match minimize(&cost, &rows) {
                LpResult::Optimal { objective, .. } => Some(base + objective),
                LpResult::Infeasible => None,
                LpResult::Unbounded => unreachable!("continuous variables are boxed"),
            }
        };
        if let Some(v) = value {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    }
    best
}
