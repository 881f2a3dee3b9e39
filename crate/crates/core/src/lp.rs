//! Small dense two-phase simplex with Bland's rule.
//!
//! Problems are stated as `min cᵀx` subject to rows `aᵀx (≤|≥|=) b` and
//! `x ≥ 0`. Duals follow the convention that reduced costs
//! `c_j − πᵀa_j` are nonnegative at an optimum, so `≤` rows carry `π ≤ 0`
//! and `≥` rows carry `π ≥ 0`. After the tableau terminates, primal values
//! and duals are recomputed from the original data by solving with the
//! final basis, which removes the rounding drift accumulated by pivoting.

use crate::error::{Error, Result};

pub const FEASIBILITY_TOL: f64 = 1e-10;
pub const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    /// Phase one could not drive the artificial variables to zero.
    /// `duals` are the phase-one multipliers, `infeasibility` the minimal
    /// total artificial mass, `x` the phase-one point.
    Infeasible { duals: Vec<f64>, infeasibility: f64, x: Vec<f64> },
    Unbounded,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        LinearProgram { objective, rows: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        let n = self.n_vars();
        for (k, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "constraint row",
                    expected: n,
                    got: row.coeffs.len(),
                });
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::Lp(format!("row {k} has a non-finite coefficient")));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Lp("objective has a non-finite coefficient".into()));
        }
        Tableau::build(self).run()
    }
}

struct Tableau<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    /// Standard-form column count: originals, then one slack per inequality, then artificials.
    cols: usize,
    first_artificial: usize,
    /// Standard-form matrix, column-major, rows already sign-normalized so `b ≥ 0`.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    flipped: Vec<bool>,
    t: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    live: Vec<bool>,
}

impl<'a> Tableau<'a> {
    fn build(lp: &'a LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.n_vars();
        let mut flipped = vec![false; m];
        let mut relations = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for (i, row) in lp.rows.iter().enumerate() {
            let mut rel = row.relation;
            let mut rhs = row.rhs;
            if rhs < 0.0 {
                flipped[i] = true;
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            relations.push(rel);
            b.push(rhs);
        }
        let slacks = relations.iter().filter(|r| **r != Relation::Eq).count();
        let artificials = relations.iter().filter(|r| **r != Relation::Le).count();
        let first_artificial = n + slacks;
        let cols = first_artificial + artificials;

        let mut a = vec![vec![0.0; m]; cols];
        for (i, row) in lp.rows.iter().enumerate() {
            let sign = if flipped[i] { -1.0 } else { 1.0 };
            for j in 0..n {
                a[j][i] = sign * row.coeffs[j];
            }
        }
        let mut basis = vec![usize::MAX; m];
        let mut next_slack = n;
        let mut next_art = first_artificial;
        for (i, rel) in relations.iter().enumerate() {
            match rel {
                Relation::Le => {
                    a[next_slack][i] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    a[next_slack][i] = -1.0;
                    next_slack += 1;
                    a[next_art][i] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    a[next_art][i] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let t = (0..m).map(|i| (0..cols).map(|j| a[j][i]).collect()).collect();
        Tableau {
            lp,
            m,
            n,
            cols,
            first_artificial,
            a,
            rhs: b.clone(),
            b,
            flipped,
            t,
            basis,
            live: vec![true; m],
        }
    }

    fn cost(&self, phase_one: bool, j: usize) -> f64 {
        if phase_one {
            if j >= self.first_artificial {
                1.0
            } else {
                0.0
            }
        } else if j < self.n {
            self.lp.objective[j]
        } else {
            0.0
        }
    }

    fn reduced_costs(&self, phase_one: bool) -> Vec<f64> {
        let mut z: Vec<f64> = (0..self.cols).map(|j| self.cost(phase_one, j)).collect();
        for i in (0..self.m).filter(|&i| self.live[i]) {
            let cb = self.cost(phase_one, self.basis[i]);
            if cb != 0.0 {
                for (zj, tij) in z.iter_mut().zip(&self.t[i]) {
                    *zj -= cb * tij;
                }
            }
        }
        z
    }

    fn pivot(&mut self, r: usize, c: usize, z: &mut [f64]) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        self.t[r][c] = 1.0;
        let pivot_row = self.t[r].clone();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.m {
            if i == r || !self.live[i] {
                continue;
            }
            let f = self.t[i][c];
            if f != 0.0 {
                for (v, pv) in self.t[i].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.t[i][c] = 0.0;
                self.rhs[i] -= f * pivot_rhs;
                if self.rhs[i] < 0.0 && self.rhs[i] > -PIVOT_TOL {
                    self.rhs[i] = 0.0;
                }
            }
        }
        let f = z[c];
        if f != 0.0 {
            for (v, pv) in z.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            z[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Bland's rule simplex over columns `< limit`. Returns false if unbounded.
    fn optimize(&mut self, phase_one: bool, limit: usize) -> Result<bool> {
        let mut z = self.reduced_costs(phase_one);
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..limit).find(|&j| z[j] < -OPTIMALITY_TOL && !self.basis.contains(&j))
            else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in (0..self.m).filter(|&i| self.live[i]) {
                let tic = self.t[i][c];
                if tic > PIVOT_TOL {
                    let ratio = self.rhs[i] / tic;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-14 * best.abs().max(1.0)
                                || (ratio <= best + 1e-14 * best.abs().max(1.0)
                                    && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, c, &mut z);
        }
        Err(Error::Lp(format!("pivot limit of {MAX_PIVOTS} reached")))
    }

    /// Pivots zero-valued artificials out of the basis, retiring redundant rows.
    fn drive_out_artificials(&mut self) {
        let mut z = vec![0.0; self.cols];
        for i in 0..self.m {
            if !self.live[i] || self.basis[i] < self.first_artificial {
                continue;
            }
            let entering = (0..self.first_artificial)
                .filter(|j| !self.basis.contains(j))
                .max_by(|&p, &q| self.t[i][p].abs().total_cmp(&self.t[i][q].abs()))
                .filter(|&j| self.t[i][j].abs() > 1e-9);
            match entering {
                Some(j) => self.pivot(i, j, &mut z),
                None => self.live[i] = false,
            }
        }
    }

    fn run(mut self) -> Result<LpOutcome> {
        let has_artificials = self.first_artificial < self.cols;
        if has_artificials {
            self.optimize(true, self.cols)?;
            let (x_std, duals) = self.refine(true);
            let infeasibility: f64 = x_std[self.first_artificial..].iter().sum();
            let scale = self.b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            if infeasibility > FEASIBILITY_TOL * scale {
                return Ok(LpOutcome::Infeasible {
                    duals: self.unflip(duals),
                    infeasibility,
                    x: x_std[..self.n].to_vec(),
                });
            }
            self.drive_out_artificials();
        }
        if !self.optimize(false, self.first_artificial)? {
            return Ok(LpOutcome::Unbounded);
        }
        let (x_std, duals) = self.refine(false);
        let x = x_std[..self.n].to_vec();
        let objective = x.iter().zip(&self.lp.objective).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal(LpSolution { x, duals: self.unflip(duals), objective }))
    }

    fn unflip(&self, mut duals: Vec<f64>) -> Vec<f64> {
        for (d, &f) in duals.iter_mut().zip(&self.flipped) {
            if f {
                *d = -*d;
            }
        }
        duals
    }

    /// Recomputes the basic solution `B z = b` and duals `Bᵀπ = c_B` from the
    /// original data; falls back to tableau values if the basis is singular.
    fn refine(&self, phase_one: bool) -> (Vec<f64>, Vec<f64>) {
        let rows: Vec<usize> = (0..self.m).filter(|&i| self.live[i]).collect();
        let k = rows.len();
        let bmat: Vec<Vec<f64>> =
            rows.iter().map(|&i| rows.iter().map(|&r| self.a[self.basis[r]][i]).collect()).collect();
        let bt: Vec<Vec<f64>> = (0..k).map(|p| (0..k).map(|q| bmat[q][p]).collect()).collect();
        let rhs: Vec<f64> = rows.iter().map(|&i| self.b[i]).collect();
        let cb: Vec<f64> = rows.iter().map(|&r| self.cost(phase_one, self.basis[r])).collect();

        let mut x = vec![0.0; self.cols];
        match solve_dense(bmat, rhs) {
            Some(z) => {
                for (p, &r) in rows.iter().enumerate() {
                    x[self.basis[r]] = z[p];
                }
            }
            None => {
                for &r in &rows {
                    x[self.basis[r]] = self.rhs[r];
                }
            }
        }
        for v in x.iter_mut() {
            if *v < 0.0 && *v > -1e-9 {
                *v = 0.0;
            }
        }
        let mut duals = vec![0.0; self.m];
        let pi = solve_dense(bt, cb).unwrap_or_else(|| self.tableau_duals(phase_one, &rows));
        for (p, &r) in rows.iter().enumerate() {
            duals[r] = pi[p];
        }
        (x, duals)
    }

    /// Duals read from the reduced costs of the unit columns; used only when
    /// the basis matrix is numerically singular.
    fn tableau_duals(&self, phase_one: bool, rows: &[usize]) -> Vec<f64> {
        let z = self.reduced_costs(phase_one);
        rows.iter()
            .map(|&i| {
                let unit = (self.n..self.cols).find(|&j| self.a[j][i] != 0.0 && {
                    (0..self.m).all(|r| r == i || self.a[j][r] == 0.0)
                });
                match unit {
                    Some(j) => (self.cost(phase_one, j) - z[j]) / self.a[j][i],
                    None => 0.0,
                }
            })
            .collect()
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..k {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}
