//! Exhaustive basic-feasible-solution enumeration, used as an independent
//! check on the simplex solver for small problems.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::standard::{solve_dense, StandardForm};
use super::{LinearProgram, CERTIFY_TOL};
use crate::error::{Error, Result};

pub const MAX_ENUMERATION_VARS: usize = 12;

const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub point: Vec<f64>,
    pub value: f64,
}

/// All vertices of the feasible region with their objective values.
/// Empty when the problem is infeasible.
pub fn enumerate_vertices(lp: &LinearProgram) -> Result<Vec<Vertex>> {
    if lp.num_vars > MAX_ENUMERATION_VARS {
        return Err(Error::DimensionTooLarge {
            limit: MAX_ENUMERATION_VARS,
            got: lp.num_vars,
        });
    }
    lp.check()?;
    let sf = StandardForm::new(lp);
    let Some((a, b)) = independent_rows(&sf) else {
        return Ok(Vec::new());
    };
    let rank = a.len();
    let n = sf.cols();

    let mut out: Vec<Vertex> = Vec::new();
    for cols in (0..n).combinations(rank) {
        let m: Vec<Vec<f64>> = a.iter().map(|row| cols.iter().map(|&c| row[c]).collect()).collect();
        let Some(xb) = solve_dense(m, b.clone(), RANK_TOL) else {
            continue;
        };
        if xb.iter().any(|&v| v < -1e-9) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (&c, &v) in cols.iter().zip(&xb) {
            x[c] = v.max(0.0);
        }
        let point = sf.recover(&x);
        if lp.max_violation(&point) > CERTIFY_TOL {
            continue;
        }
        let dup = out.iter().any(|v| {
            v.point.iter().zip(&point).all(|(p, q)| (p - q).abs() <= 1e-9)
        });
        if !dup {
            let value = lp.objective_value(&point);
            out.push(Vertex { point, value });
        }
    }
    Ok(out)
}

/// Reduced row-echelon form of `[A | b]` with dependent rows removed.
/// `None` when the system is inconsistent.
fn independent_rows(sf: &StandardForm) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut a = sf.a.clone();
    let mut b = sf.b.clone();
    let (m, n) = (a.len(), sf.cols());
    let mut rank = 0;
    for col in 0..n {
        if rank == m {
            break;
        }
        let p = (rank..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < RANK_TOL {
            continue;
        }
        a.swap(rank, p);
        b.swap(rank, p);
        let piv = a[rank][col];
        a[rank].iter_mut().for_each(|v| *v /= piv);
        b[rank] /= piv;
        let pivot = a[rank].clone();
        for i in 0..m {
            if i != rank {
                let f = a[i][col];
                if f != 0.0 {
                    for (v, pv) in a[i].iter_mut().zip(&pivot) {
                        *v -= f * pv;
                    }
                    b[i] -= f * b[rank];
                }
            }
        }
        rank += 1;
    }
    if b[rank..].iter().any(|v| v.abs() > 1e-9) {
        return None;
    }
    a.truncate(rank);
    b.truncate(rank);
    Some((a, b))
}
