//! Dense linear programming: a two-phase primal simplex solver and a
//! vertex-enumeration oracle for cross-checking it on small problems.

mod simplex;
mod standard;
mod vertex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use simplex::solve;
pub use vertex::{enumerate_vertices, Vertex, MAX_ENUMERATION_VARS};

/// Feasibility tolerance on scaled rows.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Smallest pivot element accepted.
pub const PIVOT_TOL: f64 = 1e-10;
/// Raw-constraint tolerance used to certify an optimal point.
pub const CERTIFY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub sense: Sense,
    pub eq_constraints: Vec<(Vec<f64>, f64)>,
    pub ineq_constraints: Vec<(Vec<f64>, f64, Relation)>,
    pub var_lower_bounds: Vec<f64>,
    pub var_upper_bounds: Vec<f64>,
}

impl LinearProgram {
    /// An LP over `objective.len()` nonnegative variables with no constraints yet.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            num_vars: n,
            objective,
            sense,
            eq_constraints: Vec::new(),
            ineq_constraints: Vec::new(),
            var_lower_bounds: vec![0.0; n],
            var_upper_bounds: vec![f64::INFINITY; n],
        }
    }

    pub fn eq(mut self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.eq_constraints.push((coeffs, rhs));
        self
    }

    pub fn le(mut self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.ineq_constraints.push((coeffs, rhs, Relation::Le));
        self
    }

    pub fn ge(mut self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.ineq_constraints.push((coeffs, rhs, Relation::Ge));
        self
    }

    pub fn bounds(mut self, var: usize, lower: f64, upper: f64) -> Self {
        self.var_lower_bounds[var] = lower;
        self.var_upper_bounds[var] = upper;
        self
    }

    pub fn with_sense(mut self, sense: Sense) -> Self {
        self.sense = sense;
        self
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_constraints.len() + self.ineq_constraints.len()
    }

    pub fn check(&self) -> Result<()> {
        let n = self.num_vars;
        let bad = |msg: String| Err(Error::MalformedLp(msg));
        if self.objective.len() != n {
            return bad(format!("objective has {} entries, expected {n}", self.objective.len()));
        }
        if self.var_lower_bounds.len() != n || self.var_upper_bounds.len() != n {
            return bad("bound vectors must have num_vars entries".into());
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return bad("objective coefficients must be finite".into());
        }
        let rows = self
            .eq_constraints
            .iter()
            .map(|(a, b)| (a, b))
            .chain(self.ineq_constraints.iter().map(|(a, b, _)| (a, b)));
        for (i, (a, b)) in rows.enumerate() {
            if a.len() != n {
                return bad(format!("constraint {i} has {} coefficients, expected {n}", a.len()));
            }
            if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                return bad(format!("constraint {i} has a non-finite entry"));
            }
        }
        for j in 0..n {
            let (l, u) = (self.var_lower_bounds[j], self.var_upper_bounds[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l > u {
                return bad(format!("variable {j} has invalid bounds [{l}, {u}]"));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest absolute violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b) in &self.eq_constraints {
            worst = worst.max((dot(a, x) - b).abs());
        }
        for (a, b, rel) in &self.ineq_constraints {
            let lhs = dot(a, x);
            let v = match rel {
                Relation::Le => lhs - b,
                Relation::Ge => b - lhs,
            };
            worst = worst.max(v);
        }
        for (j, &xj) in x.iter().enumerate() {
            worst = worst
                .max(self.var_lower_bounds[j] - xj)
                .max(xj - self.var_upper_bounds[j]);
        }
        worst
    }

    /// As [`max_violation`](Self::max_violation), with each row divided by its
    /// largest absolute coefficient.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let scale = |a: &[f64]| {
            let s = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if s > 0.0 {
                s
            } else {
                1.0
            }
        };
        let mut worst: f64 = 0.0;
        for (a, b) in &self.eq_constraints {
            worst = worst.max((dot(a, x) - b).abs() / scale(a));
        }
        for (a, b, rel) in &self.ineq_constraints {
            let lhs = dot(a, x);
            let v = match rel {
                Relation::Le => lhs - b,
                Relation::Ge => b - lhs,
            };
            worst = worst.max(v / scale(a));
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: Option<f64>,
    pub point: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn segment() -> LinearProgram {
        LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]).eq(vec![1.0, 1.0], 1.0)
    }

    fn polygon() -> LinearProgram {
        LinearProgram::new(Sense::Maximize, vec![3.0, 2.0])
            .le(vec![1.0, 1.0], 4.0)
            .le(vec![1.0, 0.0], 2.0)
    }

    fn contradictory() -> LinearProgram {
        LinearProgram::new(Sense::Maximize, vec![1.0, 0.0])
            .eq(vec![1.0, 1.0], 1.0)
            .eq(vec![1.0, 1.0], 2.0)
    }

    #[test]
    fn solve_segment() {
        let s = solve(&segment()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value.unwrap() - 1.0).abs() < 1e-12);
        let p = s.point.unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn solve_contradictory() {
        let s = solve(&contradictory()).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(s.value.is_none() && s.point.is_none());
    }

    #[test]
    fn solve_polygon() {
        let s = solve(&polygon()).unwrap();
        assert!((s.value.unwrap() - 10.0).abs() < 1e-12);
        let p = s.point.unwrap();
        assert!((p[0] - 2.0).abs() < 1e-12 && (p[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn solve_unbounded() {
        let lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]).ge(vec![1.0, -1.0], 0.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn solve_minimize_with_ge_rows() {
        // min x + y s.t. x + 2y ≥ 2, 3x + y ≥ 3  → (0.8, 0.6), value 1.4
        let lp = LinearProgram::new(Sense::Minimize, vec![1.0, 1.0])
            .ge(vec![1.0, 2.0], 2.0)
            .ge(vec![3.0, 1.0], 3.0);
        let s = solve(&lp).unwrap();
        assert!((s.value.unwrap() - 1.4).abs() < 1e-12);
    }

    #[test]
    fn solve_with_variable_bounds() {
        // max x + y, x ∈ [1, 2], y ∈ [-1, 0.5], x + y ≤ 10
        let lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0])
            .le(vec![1.0, 1.0], 10.0)
            .bounds(0, 1.0, 2.0)
            .bounds(1, -1.0, 0.5);
        let s = solve(&lp).unwrap();
        assert!((s.value.unwrap() - 2.5).abs() < 1e-12);
        let lp = lp.with_sense(Sense::Minimize);
        assert!((solve(&lp).unwrap().value.unwrap() - 0.0).abs() < 1e-12);
    }

    #[test]
    fn solve_free_variable() {
        let lp = LinearProgram::new(Sense::Minimize, vec![1.0])
            .ge(vec![1.0], -3.0)
            .bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        assert!((solve(&lp).unwrap().value.unwrap() + 3.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let lp = LinearProgram::new(Sense::Maximize, vec![1.0, 2.0, 0.0])
            .eq(vec![1.0, 1.0, 1.0], 1.0)
            .eq(vec![2.0, 2.0, 2.0], 2.0)
            .eq(vec![0.0, 1.0, 0.0], 0.25);
        let s = solve(&lp).unwrap();
        assert!((s.value.unwrap() - 1.25).abs() < 1e-12);
    }

    #[test]
    fn malformed_lp_is_rejected() {
        let lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]).eq(vec![1.0], 1.0);
        assert!(matches!(solve(&lp), Err(Error::MalformedLp(_))));
    }

    #[test]
    fn vertices_of_examples() {
        let v = enumerate_vertices(&segment()).unwrap();
        let mut pts: Vec<_> = v.iter().map(|v| (v.point[0], v.point[1])).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts, vec![(0.0, 1.0), (1.0, 0.0)]);

        let v = enumerate_vertices(&polygon()).unwrap();
        assert_eq!(v.len(), 4);
        let best = v.iter().map(|v| v.value).fold(f64::NEG_INFINITY, f64::max);
        assert!((best - 10.0).abs() < 1e-12);

        assert!(enumerate_vertices(&contradictory()).unwrap().is_empty());
    }

    #[test]
    fn vertex_guard() {
        let lp = LinearProgram::new(Sense::Maximize, vec![0.0; 13]);
        assert!(matches!(
            enumerate_vertices(&lp),
            Err(Error::DimensionTooLarge { limit: 12, got: 13 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Random bounded LPs: simplex optimum equals the best enumerated vertex.
        #[test]
        fn simplex_matches_vertex_enumeration(
            n in 2usize..6,
            seed_rows in prop::collection::vec(prop::collection::vec(-3i32..=5, 6), 1..4),
            rhs in prop::collection::vec(1i32..10, 4),
            obj in prop::collection::vec(-5i32..=5, 6),
            maximize in any::<bool>(),
        ) {
            let sense = if maximize { Sense::Maximize } else { Sense::Minimize };
            let mut lp = LinearProgram::new(sense, obj[..n].iter().map(|&c| c as f64).collect())
                .le(vec![1.0; n], 10.0);
            for (i, row) in seed_rows.iter().enumerate() {
                lp = lp.le(row[..n].iter().map(|&v| v as f64).collect(), rhs[i] as f64);
            }
            let s = solve(&lp).unwrap();
            let verts = enumerate_vertices(&lp).unwrap();
            prop_assert_eq!(s.status, LpStatus::Optimal);
            let best = verts.iter().map(|v| v.value).fold(
                if maximize { f64::NEG_INFINITY } else { f64::INFINITY },
                |acc, v| if maximize { acc.max(v) } else { acc.min(v) },
            );
            prop_assert!((s.value.unwrap() - best).abs() < 1e-9);
            prop_assert!(lp.max_violation(s.point.as_ref().unwrap()) < CERTIFY_TOL);
        }

        #[test]
        fn solve_is_deterministic(obj in prop::collection::vec(-5.0..5.0f64, 4)) {
            let lp = LinearProgram::new(Sense::Maximize, obj)
                .eq(vec![1.0; 4], 1.0)
                .le(vec![1.0, 2.0, 3.0, 4.0], 2.5);
            prop_assert_eq!(solve(&lp).unwrap(), solve(&lp).unwrap());
        }
    }
}
