//! Conversion to scaled standard form `A x = b, x ≥ 0, b ≥ 0`, minimizing `c·x`.

use super::{LinearProgram, Relation, Sense};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Column {
    /// Original variable shifted by its lower bound, or the positive part of a free variable.
    Plus(usize),
    /// Negative part of a free variable.
    Minus(usize),
    Slack,
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub columns: Vec<Column>,
    /// Column holding a +1 slack unique to the row, usable as a starting basis.
    pub unit_column: Vec<Option<usize>>,
    shift: Vec<f64>,
    num_vars: usize,
}

struct Row {
    coeffs: Vec<f64>,
    rhs: f64,
    relation: Option<Relation>,
}

impl StandardForm {
    pub fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let mut columns = Vec::new();
        let mut plus_col = vec![0usize; n];
        let mut minus_col = vec![None; n];
        let mut shift = vec![0.0; n];
        for j in 0..n {
            plus_col[j] = columns.len();
            columns.push(Column::Plus(j));
            let lower = lp.var_lower_bounds[j];
            if lower.is_finite() {
                shift[j] = lower;
            } else {
                minus_col[j] = Some(columns.len());
                columns.push(Column::Minus(j));
            }
        }
        let structural = columns.len();

        let mut rows: Vec<Row> = Vec::new();
        for (a, b) in &lp.eq_constraints {
            rows.push(Row { coeffs: a.clone(), rhs: *b, relation: None });
        }
        for (a, b, rel) in &lp.ineq_constraints {
            rows.push(Row { coeffs: a.clone(), rhs: *b, relation: Some(*rel) });
        }
        for j in 0..n {
            let upper = lp.var_upper_bounds[j];
            if upper.is_finite() {
                let mut coeffs = vec![0.0; n];
                coeffs[j] = 1.0;
                rows.push(Row { coeffs, rhs: upper, relation: Some(Relation::Le) });
            }
        }

        let num_slacks = rows.iter().filter(|r| r.relation.is_some()).count();
        let width = structural + num_slacks;
        columns.extend(std::iter::repeat_n(Column::Slack, num_slacks));

        let mut a = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        let mut unit_column = Vec::with_capacity(rows.len());
        let mut next_slack = structural;
        for row in rows {
            let mut dense = vec![0.0; width];
            let mut rhs = row.rhs;
            for (j, &v) in row.coeffs.iter().enumerate() {
                dense[plus_col[j]] = v;
                if let Some(mc) = minus_col[j] {
                    dense[mc] = -v;
                }
                rhs -= v * shift[j];
            }
            let scale = dense[..structural].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale > 0.0 {
                dense.iter_mut().for_each(|v| *v /= scale);
                rhs /= scale;
            }
            let slack = row.relation.map(|rel| {
                let col = next_slack;
                next_slack += 1;
                dense[col] = match rel {
                    Relation::Le => 1.0,
                    Relation::Ge => -1.0,
                };
                col
            });
            if rhs < 0.0 {
                dense.iter_mut().for_each(|v| *v = -*v);
                rhs = -rhs;
            }
            unit_column.push(slack.filter(|&col| dense[col] == 1.0));
            a.push(dense);
            b.push(rhs);
        }

        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut c = vec![0.0; width];
        for j in 0..n {
            c[plus_col[j]] = sign * lp.objective[j];
            if let Some(mc) = minus_col[j] {
                c[mc] = -sign * lp.objective[j];
            }
        }
        let cscale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if cscale > 0.0 {
            c.iter_mut().for_each(|v| *v /= cscale);
        }

        StandardForm { a, b, c, columns, unit_column, shift, num_vars: n }
    }

    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    /// Map a standard-form point back to the original variables.
    pub fn recover(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.shift.clone();
        out.truncate(self.num_vars);
        for (col, kind) in self.columns.iter().enumerate() {
            match *kind {
                Column::Plus(j) => out[j] += x[col],
                Column::Minus(j) => out[j] -= x[col],
                Column::Slack => {}
            }
        }
        out
    }
}

/// Solve a square system by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `tol`.
pub(crate) fn solve_dense(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>, tol: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k].abs() < tol {
            return None;
        }
        m.swap(k, p);
        rhs.swap(k, p);
        let pivot = m[k].clone();
        for i in k + 1..n {
            let f = m[i][k] / pivot[k];
            if f != 0.0 {
                for (v, pv) in m[i][k..].iter_mut().zip(&pivot[k..]) {
                    *v -= f * pv;
                }
                rhs[i] -= f * rhs[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (rhs[k] - s) / m[k][k];
    }
    Some(x)
}
