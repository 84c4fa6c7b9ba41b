//! Textbook two-phase tableau simplex with Bland's rule over `x >= 0`.
//! Slow and simple; only meant as a reference.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { objective: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-9;

struct Tab {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tab {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let row = self.t[r].clone();
        for (i, line) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = line[c];
                if f != 0.0 {
                    for (v, w) in line.iter_mut().zip(&row) {
                        *v -= f * w;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the objective held in the last row; columns with
    /// `allowed[c] == false` never enter.
    fn run(&mut self, allowed: &[bool]) -> bool {
        let m = self.basis.len();
        let rhs = self.cols;
        loop {
            let obj = &self.t[m];
            let Some(c) = (0..self.cols).find(|&c| allowed[c] && obj[c] < -EPS) else {
                return true;
            };
            let mut best: Option<(f64, usize)> = None;
            for r in 0..m {
                let a = self.t[r][c];
                if a > EPS {
                    let ratio = self.t[r][rhs] / a;
                    let better = match best {
                        None => true,
                        Some((br, bi)) => {
                            ratio < br - EPS || (ratio <= br + EPS && self.basis[r] < self.basis[bi])
                        }
                    };
                    if better {
                        best = Some((ratio, r));
                    }
                }
            }
            let Some((_, r)) = best else { return false };
            self.pivot(r, c);
        }
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let m = self.basis.len();
        let mut obj = vec![0.0; self.cols + 1];
        obj[..cost.len()].copy_from_slice(cost);
        for r in 0..m {
            let cb = obj[self.basis[r]];
            if cb != 0.0 {
                for c in 0..=self.cols {
                    obj[c] -= cb * self.t[r][c];
                }
            }
        }
        self.t[m] = obj;
    }
}

/// `min c.x` subject to `rows` and `x >= 0`.
pub fn minimize(c: &[f64], rows: &[(Vec<f64>, Rel, f64)]) -> LpResult {
    let n = c.len();
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Rel::Eq).count();
    let cols = n + n_slack + m;
    let mut t = vec![vec![0.0; cols + 1]; m + 1];
    let mut basis = vec![0; m];
    let mut s = n;
    for (i, (a, rel, b)) in rows.iter().enumerate() {
        let flip = *b < 0.0;
        let sg = if flip { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sg * a[j];
        }
        t[i][cols] = sg * b;
        match rel {
            Rel::Le => {
                t[i][s] = sg;
                s += 1;
            }
            Rel::Ge => {
                t[i][s] = -sg;
                s += 1;
            }
            Rel::Eq => {}
        }
        t[i][n + n_slack + i] = 1.0;
        basis[i] = n + n_slack + i;
    }
    let mut tab = Tab { t, basis, cols };
    let mut phase1 = vec![0.0; cols];
    for v in &mut phase1[n + n_slack..] {
        *v = 1.0;
    }
    tab.set_objective(&phase1);
    tab.run(&vec![true; cols]);
    if -tab.t[m][cols] > 1e-7 {
        return LpResult::Infeasible;
    }
    // push remaining artificials out of the basis where possible
    for r in 0..m {
        if tab.basis[r] >= n + n_slack {
            if let Some(c) = (0..n + n_slack).find(|&c| tab.t[r][c].abs() > EPS) {
                tab.pivot(r, c);
            }
        }
    }
    let allowed: Vec<bool> = (0..cols).map(|c| c < n + n_slack).collect();
    tab.set_objective(c);
    if !tab.run(&allowed) {
        return LpResult::Unbounded;
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.t[r][cols];
        }
    }
    LpResult::Optimal {
        objective: c.iter().zip(&x).map(|(a, b)| a * b).sum(),
        x,
    }
}
