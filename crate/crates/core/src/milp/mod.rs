//! A small, self-contained mixed-binary linear programming solver.
//!
//! LP relaxations are solved with a dense bounded-variable simplex tableau
//! (two-phase primal from scratch, dual re-optimization inside the tree);
//! integrality is enforced by best-bound branch-and-bound over the binary
//! variables. Termination is controlled by a relative MIP gap, a wall-clock
//! limit and an optional deterministic node budget.

mod bnb;
mod simplex;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bnb::solve_milp;
pub use simplex::solve_lp;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MilpError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` has invalid bounds")]
    InvalidBounds(String),
    #[error("assignment has {got} values, problem has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("LP relaxation is unbounded (missing variable bound?)")]
    Unbounded,
    #[error("numerical failure in simplex: {0}")]
    NumericalFailure(String),
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    /// Branching priority; fractional binaries of the highest class are
    /// branched on first.
    #[serde(default)]
    pub priority: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Amount by which `x` violates the constraint (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Linear model with continuous and binary variables; the sense is always
/// minimization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpProblem {
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    objective_constant: f64,
    #[serde(skip)]
    names: BTreeMap<String, VarId>,
}

impl MilpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64) -> VarId {
        let id = VarId(self.vars.len());
        let name = name.into();
        self.names.insert(name.clone(), id);
        self.vars.push(Variable {
            name,
            kind,
            lower,
            upper,
            priority: 0,
        });
        id
    }

    pub fn set_priority(&mut self, id: VarId, priority: u32) {
        self.vars[id.0].priority = priority;
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, terms: Vec<(VarId, f64)>, constant: f64) {
        self.objective = terms;
        self.objective_constant = constant;
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn objective_constant(&self) -> f64 {
        self.objective_constant
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        if let Some(&v) = self.names.get(name) {
            return Some(v);
        }
        // names are not serialized; fall back to a scan after deserialization
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_constant + self.objective.iter().map(|&(v, c)| c * x[v.0]).sum::<f64>()
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| VarId(i))
    }

    /// The same model with every binary relaxed to a continuous `[0, 1]` variable.
    pub fn relaxed(&self) -> MilpProblem {
        let mut p = self.clone();
        for v in &mut p.vars {
            v.kind = VarKind::Continuous;
        }
        p
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        for v in &self.vars {
            let ok = match v.kind {
                VarKind::Binary => v.lower == 0.0 && v.upper == 1.0,
                VarKind::Continuous => !v.lower.is_nan() && !v.upper.is_nan() && v.lower <= v.upper,
            };
            if !ok {
                return Err(MilpError::InvalidBounds(v.name.clone()));
            }
        }
        let n = self.vars.len();
        let check = |terms: &[(VarId, f64)]| -> Result<(), MilpError> {
            for (v, c) in terms {
                if v.0 >= n {
                    return Err(MilpError::UnknownVariable(format!("#{}", v.0)));
                }
                if !c.is_finite() {
                    return Err(MilpError::NumericalFailure(format!("non-finite coefficient on #{}", v.0)));
                }
            }
            Ok(())
        };
        check(&self.objective)?;
        for c in &self.constraints {
            check(&c.terms)?;
            if !c.rhs.is_finite() {
                return Err(MilpError::NumericalFailure(format!("non-finite rhs in `{}`", c.name)));
            }
        }
        Ok(())
    }

    /// Plain-text dump in an LP-file flavour, one constraint per line.
    /// Meant for eyeballing and cross-checking, not a stable format.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let fmt_terms = |terms: &[(VarId, f64)]| -> String {
            if terms.is_empty() {
                return "0".to_string();
            }
            terms
                .iter()
                .enumerate()
                .map(|(k, (v, c))| {
                    let name = &self.vars[v.0].name;
                    if k == 0 {
                        format!("{c} {name}")
                    } else if *c < 0.0 {
                        format!("- {} {name}", -c)
                    } else {
                        format!("+ {c} {name}")
                    }
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "Minimize");
        let _ = writeln!(
            out,
            " obj: {} + {}",
            fmt_terms(&self.objective),
            self.objective_constant
        );
        let _ = writeln!(out, "Subject To");
        for c in &self.constraints {
            let _ = writeln!(
                out,
                " {}: {} {} {}",
                c.name,
                fmt_terms(&c.terms),
                c.relation.symbol(),
                c.rhs
            );
        }
        let _ = writeln!(out, "Bounds");
        for v in self.vars.iter().filter(|v| v.kind == VarKind::Continuous) {
            let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
        }
        let _ = writeln!(out, "Binaries");
        for v in self.vars.iter().filter(|v| v.kind == VarKind::Binary) {
            let _ = writeln!(out, " {}", v.name);
        }
        let _ = writeln!(out, "End");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Gap closed to within `gap_target` (or the tree was exhausted).
    Optimal,
    /// An incumbent exists but a limit stopped the search above `gap_target`.
    FeasibleWithinGap,
    Infeasible,
    TimedOutNoIncumbent,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleWithinGap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgressPoint {
    pub nodes: u64,
    pub incumbent: f64,
    pub best_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: u64,
    /// Incumbent/bound pairs recorded whenever either changes.
    pub progress: Vec<ProgressPoint>,
}

impl MilpSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }
}

/// Relative gap between an incumbent objective and a bound.
pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    (objective - bound).abs() / objective.abs().max(1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchingRule {
    /// Most fractional binary of the highest priority class, ties to the
    /// lowest index.
    #[default]
    MostFractional,
    /// As above, ties broken by a seeded RNG.
    MostFractionalRandomTies,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub gap_target: f64,
    pub time_limit_secs: f64,
    /// Deterministic work budget; `None` means unlimited.
    pub node_limit: Option<u64>,
    pub feas_tol: f64,
    pub int_tol: f64,
    pub branching: BranchingRule,
    pub seed: u64,
    /// MIP start, used as the first incumbent when feasible.
    #[serde(skip)]
    pub initial_solution: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gap_target: 0.0,
            time_limit_secs: 60.0,
            node_limit: None,
            feas_tol: 1e-6,
            int_tol: 1e-6,
            branching: BranchingRule::MostFractional,
            seed: 0,
            initial_solution: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), MilpError> {
        if !(self.gap_target >= 0.0) {
            return Err(MilpError::Config("gap_target must be >= 0".into()));
        }
        if !(self.time_limit_secs > 0.0) {
            return Err(MilpError::Config("time limit must be positive".into()));
        }
        if !(self.feas_tol > 0.0 && self.int_tol > 0.0) {
            return Err(MilpError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Constraint(usize),
    Bound(VarId),
    Integrality(VarId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub worst_violation: f64,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn violated_constraints(&self) -> impl Iterator<Item = usize> + '_ {
        self.violations.iter().filter_map(|v| match v {
            Violation::Constraint(c) => Some(*c),
            _ => None,
        })
    }
}

/// Checks bounds and constraints within `feas_tol` and binaries within
/// `int_tol` of {0, 1}.
pub fn check_feasible(
    problem: &MilpProblem,
    x: &[f64],
    feas_tol: f64,
    int_tol: f64,
) -> Result<FeasibilityReport, MilpError> {
    if x.len() != problem.num_vars() {
        return Err(MilpError::DimensionMismatch {
            expected: problem.num_vars(),
            got: x.len(),
        });
    }
    let mut worst: f64 = 0.0;
    let mut violations = Vec::new();
    for (i, v) in problem.vars().iter().enumerate() {
        let b = (v.lower - x[i]).max(x[i] - v.upper).max(0.0);
        if b > feas_tol {
            violations.push(Violation::Bound(VarId(i)));
        }
        worst = worst.max(b);
        if v.kind == VarKind::Binary {
            let f = (x[i] - x[i].round()).abs();
            if f > int_tol {
                violations.push(Violation::Integrality(VarId(i)));
            }
            worst = worst.max(f);
        }
    }
    for (ci, c) in problem.constraints().iter().enumerate() {
        let viol = c.violation(x);
        if viol > feas_tol {
            violations.push(Violation::Constraint(ci));
        }
        worst = worst.max(viol);
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        worst_violation: worst,
        violations,
    })
}

/// Like [`check_feasible`] but with an assignment keyed by variable name.
pub fn check_feasible_named(
    problem: &MilpProblem,
    assignment: &BTreeMap<String, f64>,
    feas_tol: f64,
    int_tol: f64,
) -> Result<FeasibilityReport, MilpError> {
    let mut x = vec![f64::NAN; problem.num_vars()];
    for (name, &val) in assignment {
        let id = problem
            .var_by_name(name)
            .ok_or_else(|| MilpError::UnknownVariable(name.clone()))?;
        x[id.0] = val;
    }
    if let Some(missing) = x.iter().position(|v| v.is_nan()) {
        return Err(MilpError::UnknownVariable(format!(
            "no value for `{}`",
            problem.vars()[missing].name
        )));
    }
    check_feasible(problem, &x, feas_tol, int_tol)
}
