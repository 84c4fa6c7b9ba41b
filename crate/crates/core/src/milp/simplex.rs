//! Dense bounded-variable simplex tableau.
//!
//! Columns are the structural variables, one slack per row and one
//! artificial per row that started infeasible. The tableau stores `B^-1 A`
//! and `B^-1 b` explicitly; every nonbasic column sits at one of its bounds.

use super::{LpSolution, LpStatus, MilpError, MilpProblem, Relation};

/// Stand-in for an infinite variable bound. A solution resting on it means
/// the relaxation is unbounded in that direction.
const SOFT_INF: f64 = 1e9;
const PIV_TOL: f64 = 1e-8;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    /// Dual objective crossed the supplied cutoff.
    Cutoff,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub(crate) struct Tableau {
    m: usize,
    n: usize,
    n_struct: usize,
    a: Vec<f64>,
    beta: Vec<f64>,
    orig_a: Vec<f64>,
    orig_b: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    soft: Vec<bool>,
    x: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    since_refactor: usize,
    pub(crate) pivots: u64,
}

impl Tableau {
    /// Builds the tableau for the LP relaxation of `problem`. Returns `None`
    /// when some empty constraint is violated on its own.
    pub(crate) fn new(problem: &MilpProblem) -> Option<Self> {
        Self::build(problem, None)
    }

    /// Like [`Tableau::new`] with the structural bounds replaced.
    pub(crate) fn with_bounds(problem: &MilpProblem, lo: &[f64], hi: &[f64]) -> Option<Self> {
        Self::build(problem, Some((lo, hi)))
    }

    fn build(problem: &MilpProblem, bounds: Option<(&[f64], &[f64])>) -> Option<Self> {
        let n_struct = problem.num_vars();
        let rows: Vec<_> = problem
            .constraints()
            .iter()
            .filter(|c| c.terms.iter().any(|&(_, a)| a != 0.0))
            .collect();
        for c in problem.constraints().iter().filter(|c| c.terms.iter().all(|&(_, a)| a == 0.0)) {
            let ok = match c.relation {
                Relation::Le => 0.0 <= c.rhs + PRIMAL_TOL,
                Relation::Ge => 0.0 >= c.rhs - PRIMAL_TOL,
                Relation::Eq => c.rhs.abs() <= PRIMAL_TOL,
            };
            if !ok {
                return None;
            }
        }
        let m = rows.len();

        let mut lo = Vec::with_capacity(n_struct + 2 * m);
        let mut hi = Vec::with_capacity(n_struct + 2 * m);
        let mut soft = Vec::with_capacity(n_struct + 2 * m);
        for v in problem.vars() {
            let (l, sl) = if v.lower.is_finite() { (v.lower, false) } else { (-SOFT_INF, true) };
            let (h, sh) = if v.upper.is_finite() { (v.upper, false) } else { (SOFT_INF, true) };
            lo.push(l);
            hi.push(h);
            soft.push(sl || sh);
        }
        if let Some((l, h)) = bounds {
            lo[..n_struct].copy_from_slice(l);
            hi[..n_struct].copy_from_slice(h);
        }
        for c in &rows {
            // row: sum a x + s = rhs
            let (l, h) = match c.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(h);
            soft.push(false);
        }

        // initial nonbasic point for structurals
        let mut x = vec![0.0; n_struct + m];
        let mut state = vec![State::Lower; n_struct + m];
        for j in 0..n_struct {
            let lower_ok = if bounds.is_some() { lo[j] > -SOFT_INF } else { problem.vars()[j].lower.is_finite() };
            if lower_ok || !problem.vars()[j].upper.is_finite() {
                x[j] = lo[j];
                state[j] = State::Lower;
            } else {
                x[j] = hi[j];
                state[j] = State::Upper;
            }
        }

        let mut row_a = vec![vec![0.0; n_struct]; m];
        let mut rhs = vec![0.0; m];
        for (r, c) in rows.iter().enumerate() {
            for &(v, a) in &c.terms {
                row_a[r][v.0] += a;
            }
            rhs[r] = c.rhs;
        }

        // decide which rows need an artificial
        let mut art_rows = Vec::new();
        let mut sign = vec![1.0; m];
        for r in 0..m {
            let act: f64 = (0..n_struct).map(|j| row_a[r][j] * x[j]).sum();
            let s = rhs[r] - act;
            let si = n_struct + r;
            if s < lo[si] - PRIMAL_TOL || s > hi[si] + PRIMAL_TOL {
                // slack parked at the violated bound; artificial absorbs the rest
                let bound = if s < lo[si] { lo[si] } else { hi[si] };
                x[si] = bound;
                state[si] = if bound == lo[si] { State::Lower } else { State::Upper };
                sign[r] = if s - bound >= 0.0 { 1.0 } else { -1.0 };
                art_rows.push(r);
            } else {
                x[si] = s;
                state[si] = State::Basic(r);
            }
        }
        let n = n_struct + m + art_rows.len();
        let mut orig_a = vec![0.0; m * n];
        for r in 0..m {
            orig_a[r * n..r * n + n_struct].copy_from_slice(&row_a[r]);
            orig_a[r * n + n_struct + r] = 1.0;
        }
        let mut basis = vec![0; m];
        for r in 0..m {
            if let State::Basic(_) = state[n_struct + r] {
                basis[r] = n_struct + r;
            }
        }
        for (k, &r) in art_rows.iter().enumerate() {
            let col = n_struct + m + k;
            orig_a[r * n + col] = sign[r];
            basis[r] = col;
            lo.push(0.0);
            hi.push(f64::INFINITY);
            soft.push(false);
            let act: f64 = (0..n_struct + m).map(|j| orig_a[r * n + j] * x[j]).sum();
            x.push((rhs[r] - act) * sign[r]);
            state.push(State::Basic(r));
        }

        // B is diagonal with entries sign[r], so B^-1 A is a row scaling.
        let mut a = orig_a.clone();
        let mut beta = rhs.clone();
        for &r in &art_rows {
            if sign[r] < 0.0 {
                for v in &mut a[r * n..(r + 1) * n] {
                    *v = -*v;
                }
                beta[r] = -beta[r];
            }
        }

        Some(Self {
            m,
            n,
            n_struct,
            a,
            beta,
            orig_a,
            orig_b: rhs,
            cost: vec![0.0; n],
            d: vec![0.0; n],
            lo,
            hi,
            soft,
            x,
            basis,
            state,
            since_refactor: 0,
            pivots: 0,
        })
    }

    fn n_art(&self) -> usize {
        self.n - self.n_struct - self.m
    }

    pub(crate) fn values(&self) -> Vec<f64> {
        self.x[..self.n_struct].to_vec()
    }

    pub(crate) fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    fn set_cost(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.recompute_reduced_costs();
    }

    fn recompute_reduced_costs(&mut self) {
        let n = self.n;
        self.d.copy_from_slice(&self.cost);
        for r in 0..self.m {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.a[r * n..(r + 1) * n];
                for (dj, arj) in self.d.iter_mut().zip(row) {
                    *dj -= cb * arj;
                }
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    fn recompute_basics(&mut self) {
        let n = self.n;
        let nonbasic: Vec<(usize, f64)> = (0..n)
            .filter(|&j| !matches!(self.state[j], State::Basic(_)) && self.x[j] != 0.0)
            .map(|j| (j, self.x[j]))
            .collect();
        for r in 0..self.m {
            let row = &self.a[r * n..(r + 1) * n];
            let mut v = self.beta[r];
            for &(j, xj) in &nonbasic {
                v -= row[j] * xj;
            }
            self.x[self.basis[r]] = v;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let p = self.a[r * n + q];
        let inv = 1.0 / p;
        for v in &mut self.a[r * n..(r + 1) * n] {
            *v *= inv;
        }
        self.beta[r] *= inv;
        self.a[r * n + q] = 1.0;
        let nz: Vec<(usize, f64)> = self.a[r * n..(r + 1) * n]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        let br = self.beta[r];
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * n + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * n..(i + 1) * n];
            for &(j, v) in &nz {
                row[j] -= f * v;
            }
            row[q] = 0.0;
            self.beta[i] -= f * br;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(j, v) in &nz {
                self.d[j] -= f * v;
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.state[q] = State::Basic(r);
        // caller fixes the leaving column's bound state
        self.state[leaving] = State::Lower;
        self.pivots += 1;
        self.since_refactor += 1;
    }

    /// Rebuilds `B^-1 A` from the original rows for the current basis.
    fn refactor(&mut self) -> Result<(), MilpError> {
        let n = self.n;
        let m = self.m;
        self.a.copy_from_slice(&self.orig_a);
        self.beta.copy_from_slice(&self.orig_b);
        let mut cols: Vec<usize> = self.basis.clone();
        // unit slack columns first keeps fill-in low
        cols.sort_by_key(|&c| if c >= self.n_struct && c < self.n_struct + m { 0 } else { 1 });
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &c in &cols {
            let mut best = None;
            let mut best_val = 1e-11;
            for r in 0..m {
                if !assigned[r] {
                    let v = self.a[r * n + c].abs();
                    if v > best_val {
                        best_val = v;
                        best = Some(r);
                    }
                }
            }
            let r = best.ok_or_else(|| MilpError::NumericalFailure("singular basis".into()))?;
            assigned[r] = true;
            new_basis[r] = c;
            // Gauss-Jordan step without touching reduced costs
            let inv = 1.0 / self.a[r * n + c];
            for v in &mut self.a[r * n..(r + 1) * n] {
                *v *= inv;
            }
            self.beta[r] *= inv;
            let nz: Vec<(usize, f64)> = self.a[r * n..(r + 1) * n]
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, v)| (j, *v))
                .collect();
            let br = self.beta[r];
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = self.a[i * n + c];
                if f == 0.0 {
                    continue;
                }
                let row = &mut self.a[i * n..(i + 1) * n];
                for &(j, v) in &nz {
                    row[j] -= f * v;
                }
                row[c] = 0.0;
                self.beta[i] -= f * br;
            }
        }
        self.basis = new_basis;
        for (r, &c) in self.basis.iter().enumerate() {
            self.state[c] = State::Basic(r);
        }
        self.since_refactor = 0;
        self.recompute_basics();
        self.recompute_reduced_costs();
        Ok(())
    }

    fn maybe_refactor(&mut self) -> Result<(), MilpError> {
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.hi[j] - self.lo[j] <= 0.0
    }

    /// Primal simplex from a primal-feasible basis.
    pub(crate) fn primal(&mut self, max_iter: usize) -> Result<Outcome, MilpError> {
        let n = self.n;
        let mut stall = 0usize;
        let mut bland = false;
        for _ in 0..max_iter {
            self.maybe_refactor()?;
            // entering column
            let mut q = None;
            let mut best = DUAL_TOL;
            for j in 0..n {
                let dir = match self.state[j] {
                    State::Basic(_) => continue,
                    State::Lower if self.d[j] < -DUAL_TOL => 1.0,
                    State::Upper if self.d[j] > DUAL_TOL => -1.0,
                    _ => continue,
                };
                if self.is_fixed(j) {
                    continue;
                }
                if bland {
                    q = Some((j, dir));
                    break;
                }
                if self.d[j].abs() > best {
                    best = self.d[j].abs();
                    q = Some((j, dir));
                }
            }
            let Some((q, dir)) = q else {
                return Ok(Outcome::Optimal);
            };

            // Harris two-pass ratio test: find the largest step allowed with a
            // small bound tolerance, then the largest pivot within that step.
            let flip = self.hi[q] - self.lo[q];
            let mut rows: Vec<(usize, f64, bool, f64)> = Vec::new();
            let mut theta_max = f64::INFINITY;
            for r in 0..self.m {
                let alpha = self.a[r * n + q];
                if alpha.abs() < PIV_TOL {
                    continue;
                }
                let b = self.basis[r];
                let rate = -alpha * dir;
                let (room, to_lower) = if rate < 0.0 {
                    if self.lo[b] == f64::NEG_INFINITY {
                        continue;
                    }
                    (self.x[b] - self.lo[b], true)
                } else {
                    if self.hi[b] == f64::INFINITY {
                        continue;
                    }
                    (self.hi[b] - self.x[b], false)
                };
                let t = room.max(0.0) / rate.abs();
                theta_max = theta_max.min((room.max(0.0) + PRIMAL_TOL) / rate.abs());
                rows.push((r, t, to_lower, alpha.abs()));
            }
            let mut leave: Option<(usize, bool)> = None;
            let mut theta = f64::INFINITY;
            if bland {
                for &(r, t, to_lower, _) in &rows {
                    let better = match leave {
                        None => t < theta,
                        Some((lr, _)) => {
                            t < theta - 1e-12 || (t <= theta + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        theta = t;
                        leave = Some((r, to_lower));
                    }
                }
            } else {
                let mut piv = 0.0;
                for &(r, t, to_lower, a) in &rows {
                    if t <= theta_max && a > piv {
                        piv = a;
                        theta = t;
                        leave = Some((r, to_lower));
                    }
                }
            }
            if flip <= theta || (leave.is_none() && flip.is_finite()) {
                theta = flip;
                leave = None;
            }
            if !theta.is_finite() {
                return Ok(Outcome::Unbounded);
            }

            let improvement = theta * self.d[q].abs();
            if improvement < 1e-12 {
                stall += 1;
                if stall >= 3 * self.m.max(1) {
                    bland = true;
                }
            } else {
                stall = 0;
                bland = false;
            }

            self.x[q] += dir * theta;
            for r in 0..self.m {
                let alpha = self.a[r * n + q];
                if alpha != 0.0 {
                    let b = self.basis[r];
                    self.x[b] -= alpha * dir * theta;
                }
            }
            match leave {
                None => {
                    self.state[q] = if dir > 0.0 { State::Upper } else { State::Lower };
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some((r, to_lower)) => {
                    let b = self.basis[r];
                    self.pivot(r, q);
                    if to_lower {
                        self.state[b] = State::Lower;
                        self.x[b] = self.lo[b];
                    } else {
                        self.state[b] = State::Upper;
                        self.x[b] = self.hi[b];
                    }
                }
            }
        }
        Ok(Outcome::IterationLimit)
    }

    /// Dual simplex from a dual-feasible basis. Stops early with
    /// [`Outcome::Cutoff`] once the objective exceeds `cutoff`.
    pub(crate) fn dual(&mut self, max_iter: usize, cutoff: f64) -> Result<Outcome, MilpError> {
        let n = self.n;
        let mut stall = 0usize;
        let mut bland = false;
        for _ in 0..max_iter {
            self.maybe_refactor()?;
            // leaving row: largest primal infeasibility
            let mut leave = None;
            let mut worst = PRIMAL_TOL;
            for r in 0..self.m {
                let b = self.basis[r];
                let v = (self.lo[b] - self.x[b]).max(self.x[b] - self.hi[b]);
                if v > worst || (bland && v > PRIMAL_TOL) {
                    if bland {
                        if leave.map_or(true, |lr: usize| b < self.basis[lr]) {
                            leave = Some(r);
                        }
                    } else {
                        worst = v;
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(Outcome::Optimal);
            };
            let b = self.basis[r];
            let increase = self.x[b] < self.lo[b];
            let target = if increase { self.lo[b] } else { self.hi[b] };

            // entering column: Harris ratio test on |d_j| / |a_rj|
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            let mut theta_max = f64::INFINITY;
            for j in 0..n {
                let st = self.state[j];
                if matches!(st, State::Basic(_)) || self.is_fixed(j) {
                    continue;
                }
                let arj = self.a[r * n + j];
                if arj.abs() < PIV_TOL {
                    continue;
                }
                let ok = match (st, increase) {
                    (State::Lower, true) => arj < 0.0,
                    (State::Upper, true) => arj > 0.0,
                    (State::Lower, false) => arj > 0.0,
                    (State::Upper, false) => arj < 0.0,
                    _ => false,
                };
                if !ok {
                    continue;
                }
                let dj = if st == State::Lower { self.d[j].max(0.0) } else { (-self.d[j]).max(0.0) };
                let ratio = dj / arj.abs();
                theta_max = theta_max.min((dj + DUAL_TOL) / arj.abs());
                cands.push((j, ratio, arj.abs()));
            }
            let mut q = None;
            let mut best_ratio = f64::INFINITY;
            if bland {
                for &(j, ratio, _) in &cands {
                    if ratio < best_ratio - 1e-12 {
                        best_ratio = ratio;
                        q = Some(j);
                    }
                }
            } else {
                let mut piv = 0.0;
                for &(j, ratio, a) in &cands {
                    if ratio <= theta_max && a > piv {
                        piv = a;
                        best_ratio = ratio;
                        q = Some(j);
                    }
                }
            }
            let Some(q) = q else {
                return Ok(Outcome::Infeasible);
            };

            let viol = (self.x[b] - target).abs();
            if best_ratio * viol < 1e-12 {
                stall += 1;
                if stall >= 3 * self.m.max(1) {
                    bland = true;
                }
            } else {
                stall = 0;
                bland = false;
            }

            let delta = (self.x[b] - target) / self.a[r * n + q];
            self.x[q] += delta;
            for i in 0..self.m {
                let aiq = self.a[i * n + q];
                if aiq != 0.0 {
                    let bi = self.basis[i];
                    self.x[bi] -= aiq * delta;
                }
            }
            self.pivot(r, q);
            self.state[b] = if increase { State::Lower } else { State::Upper };
            self.x[b] = target;

            if self.objective() > cutoff {
                return Ok(Outcome::Cutoff);
            }
        }
        Ok(Outcome::IterationLimit)
    }

    fn max_iter(&self) -> usize {
        50 * (self.m + self.n) + 1000
    }

    /// Two-phase primal solve from the construction basis.
    pub(crate) fn solve_from_scratch(&mut self, cost: &[f64]) -> Result<Outcome, MilpError> {
        let n_art = self.n_art();
        if n_art > 0 {
            let mut c1 = vec![0.0; self.n];
            for c in &mut c1[self.n_struct + self.m..] {
                *c = 1.0;
            }
            self.set_cost(c1);
            match self.primal(self.max_iter())? {
                Outcome::Optimal => {}
                Outcome::IterationLimit => {
                    return Err(MilpError::NumericalFailure("phase 1 iteration limit".into()))
                }
                other => return Err(MilpError::NumericalFailure(format!("phase 1 ended {other:?}"))),
            }
            let scale = 1.0 + self.orig_b.iter().fold(0.0f64, |m, b| m.max(b.abs()));
            if self.objective() > 1e-7 * scale {
                return Ok(Outcome::Infeasible);
            }
            for j in self.n_struct + self.m..self.n {
                self.hi[j] = 0.0;
                if !matches!(self.state[j], State::Basic(_)) {
                    self.x[j] = 0.0;
                    self.state[j] = State::Lower;
                }
            }
        }
        let mut c2 = vec![0.0; self.n];
        c2[..self.n_struct].copy_from_slice(cost);
        self.set_cost(c2);
        self.refactor()?;
        self.finish_primal()
    }

    fn finish_primal(&mut self) -> Result<Outcome, MilpError> {
        let out = self.primal(self.max_iter())?;
        match out {
            Outcome::Optimal => {
                if self.on_soft_bound() {
                    Ok(Outcome::Unbounded)
                } else {
                    Ok(Outcome::Optimal)
                }
            }
            Outcome::IterationLimit => Err(MilpError::NumericalFailure("iteration limit".into())),
            other => Ok(other),
        }
    }

    fn on_soft_bound(&self) -> bool {
        (0..self.n_struct).any(|j| self.soft[j] && self.x[j].abs() >= SOFT_INF * (1.0 - 1e-9))
    }

    /// Replaces structural bounds and re-optimizes with the dual simplex,
    /// falling back to a primal clean-up if the basis drifted.
    pub(crate) fn resolve_with_bounds(
        &mut self,
        lo: &[f64],
        hi: &[f64],
        cutoff: f64,
    ) -> Result<Outcome, MilpError> {
        for j in 0..self.n_struct {
            self.lo[j] = lo[j];
            self.hi[j] = hi[j];
            match self.state[j] {
                State::Basic(_) => {}
                _ => {
                    // pick the bound that keeps the column dual feasible
                    let st = if self.lo[j] == self.hi[j] {
                        self.state[j]
                    } else if self.d[j] > 0.0 {
                        State::Lower
                    } else if self.d[j] < 0.0 {
                        State::Upper
                    } else {
                        self.state[j]
                    };
                    self.state[j] = st;
                    self.x[j] = if st == State::Upper { self.hi[j] } else { self.lo[j] };
                }
            }
        }
        if self.since_refactor >= REFACTOR_EVERY / 2 {
            self.refactor()?;
        } else {
            self.recompute_basics();
        }
        let out = self.dual(self.max_iter(), cutoff)?;
        match out {
            Outcome::Optimal => {
                // tidy up tiny dual infeasibilities left by round-off
                self.finish_primal()
            }
            Outcome::IterationLimit => {
                Err(MilpError::NumericalFailure("dual simplex iteration limit".into()))
            }
            other => Ok(other),
        }
    }

    pub(crate) fn struct_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.lo[..self.n_struct].to_vec(), self.hi[..self.n_struct].to_vec())
    }
}

pub(crate) fn dense_cost(problem: &MilpProblem) -> Vec<f64> {
    let mut c = vec![0.0; problem.num_vars()];
    for &(v, coef) in problem.objective() {
        c[v.0] += coef;
    }
    c
}

/// Solves the LP relaxation of `problem` (binaries relaxed to `[0, 1]`).
pub fn solve_lp(problem: &MilpProblem) -> Result<LpSolution, MilpError> {
    problem.validate()?;
    let Some(mut t) = Tableau::new(problem) else {
        return Ok(infeasible(problem));
    };
    let cost = dense_cost(problem);
    match t.solve_from_scratch(&cost)? {
        Outcome::Optimal => {
            let values = t.values();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: problem.objective_value(&values),
                values,
            })
        }
        Outcome::Infeasible => Ok(infeasible(problem)),
        Outcome::Unbounded => Err(MilpError::Unbounded),
        other => Err(MilpError::NumericalFailure(format!("unexpected outcome {other:?}"))),
    }
}

fn infeasible(problem: &MilpProblem) -> LpSolution {
    LpSolution {
        status: LpStatus::Infeasible,
        values: vec![f64::NAN; problem.num_vars()],
        objective: f64::INFINITY,
    }
}
