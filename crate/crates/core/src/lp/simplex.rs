//! Two-phase dense primal simplex with Bland's rule.

use super::standard::{solve_dense, StandardForm};
use super::{LinearProgram, LpSolution, LpStatus, CERTIFY_TOL, FEASIBILITY_TOL, PIVOT_TOL};
use crate::error::{Error, Result};

/// Reduced-cost threshold for declaring optimality.
const OPTIMALITY_TOL: f64 = 1e-9;
/// Smallest entry accepted when pivoting an artificial out of the basis.
const DRIVE_OUT_TOL: f64 = 1e-9;

struct Tableau {
    width: usize,
    /// Row-major `rows × width`, last column is the right-hand side.
    data: Vec<f64>,
    /// Reduced costs; the last entry is minus the current objective.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Index into the standard form's rows for each tableau row.
    origin: Vec<usize>,
    iterations: usize,
    limit: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rows(&self) -> usize {
        self.basis.len()
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.at(r, c);
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows() {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f != 0.0 {
                for (v, pr) in self.data[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.data[i * w + c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pr) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Set the cost row to `c − c_B B⁻¹ A` for the current basis.
    fn price(&mut self, c: &[f64]) {
        let w = self.width;
        self.cost = vec![0.0; w];
        self.cost[..c.len()].copy_from_slice(c);
        for r in 0..self.rows() {
            let cb = c.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..w {
                    self.cost[j] -= cb * self.data[r * w + j];
                }
            }
        }
    }

    /// Bland's rule: lowest-index improving column, ties in the ratio test
    /// broken by lowest basic index.
    fn run(&mut self, allowed: usize) -> Result<Outcome> {
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.cost[j] < -OPTIMALITY_TOL) else {
                return Ok(Outcome::Optimal);
            };
            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(Error::MaxIterationsExceeded { limit: self.limit });
            }
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows() {
                let a = self.at(r, enter);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((best_r, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * best.abs().max(1.0);
                        if (!tie && ratio < best) || (tie && self.basis[r] < self.basis[best_r]) {
                            Some((r, ratio))
                        } else {
                            Some((best_r, best))
                        }
                    }
                };
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Ok(Outcome::Unbounded),
            }
        }
    }

    fn drop_row(&mut self, r: usize) {
        let w = self.width;
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.origin.remove(r);
    }
}

/// Solve `lp`, returning a certified optimal point, or an infeasible/unbounded status.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.check()?;
    let sf = StandardForm::new(lp);
    let (m, n) = (sf.rows(), sf.cols());
    let limit = 50 * (lp.num_vars + lp.num_constraints()).max(1);

    // Artificial columns for rows without a usable slack.
    let needs_art: Vec<usize> = (0..m).filter(|&r| sf.unit_column[r].is_none()).collect();
    let width = n + needs_art.len() + 1;
    let mut data = vec![0.0; m * width];
    let mut basis = vec![0; m];
    for r in 0..m {
        data[r * width..r * width + n].copy_from_slice(&sf.a[r]);
        data[r * width + width - 1] = sf.b[r];
        if let Some(col) = sf.unit_column[r] {
            basis[r] = col;
        }
    }
    for (k, &r) in needs_art.iter().enumerate() {
        data[r * width + n + k] = 1.0;
        basis[r] = n + k;
    }
    let mut t = Tableau {
        width,
        data,
        cost: Vec::new(),
        basis,
        origin: (0..m).collect(),
        iterations: 0,
        limit,
    };

    if !needs_art.is_empty() {
        let mut phase1 = vec![0.0; n + needs_art.len()];
        phase1[n..].iter_mut().for_each(|v| *v = 1.0);
        t.price(&phase1);
        t.run(n + needs_art.len())?;
        let infeasibility = -t.cost[width - 1];
        if infeasibility > FEASIBILITY_TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: None,
                point: None,
                iterations: t.iterations,
            });
        }
        // Drive remaining artificials out; rows where that is impossible are redundant.
        let mut r = 0;
        while r < t.rows() {
            if t.basis[r] >= n {
                let best = (0..n)
                    .map(|j| (j, t.at(r, j).abs()))
                    .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
                match best {
                    Some((j, v)) if v > DRIVE_OUT_TOL => t.pivot(r, j),
                    _ => {
                        t.drop_row(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    t.price(&sf.c);
    if let Outcome::Unbounded = t.run(n)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: None,
            point: None,
            iterations: t.iterations,
        });
    }

    let x_std = basic_solution(&sf, &t);
    let point = sf.recover(&x_std);
    let raw = lp.max_violation(&point);
    let scaled = lp.max_scaled_violation(&point);
    if raw > CERTIFY_TOL || scaled > FEASIBILITY_TOL {
        return Err(Error::Numerical(format!(
            "optimal point fails certification (raw violation {raw:e}, scaled {scaled:e})"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: Some(lp.objective_value(&point)),
        point: Some(point),
        iterations: t.iterations,
    })
}

/// Basic variable values, recomputed from the scaled constraint matrix to
/// shed pivoting error; falls back to the tableau when that system is singular.
fn basic_solution(sf: &StandardForm, t: &Tableau) -> Vec<f64> {
    let mut x = vec![0.0; sf.cols()];
    let k = t.rows();
    let matrix: Vec<Vec<f64>> = t
        .origin
        .iter()
        .map(|&r| t.basis.iter().map(|&c| sf.a[r][c]).collect())
        .collect();
    let rhs: Vec<f64> = t.origin.iter().map(|&r| sf.b[r]).collect();
    let refined = solve_dense(matrix, rhs, 1e-12).filter(|v| v.iter().all(|&x| x >= -1e-9));
    for (r, &col) in t.basis.iter().enumerate().take(k) {
        let v = match &refined {
            Some(v) => v[r],
            None => t.rhs(r),
        };
        x[col] = v.max(0.0);
    }
    x
}
