//! Built-in fixtures and quick oracle checks behind `otr-bounds selfcheck`.

use crate::benefit::{benefit_bounds_binary, benefit_bounds_lp, build_benefit_lp};
use crate::error::{Error, Result};
use crate::inference::{ci_benefit_lp, normal_quantile, MeanSeConvention};
use crate::lp::{enumerate_vertices, Sense};
use crate::model::normalize_direction;
use crate::validation::{
    benefit_of, brute_force_benefit_bounds, random_binary_trial, random_finite_trial,
    sample_feasible_joints, seeded_rng,
};

use super::report::{sig6, Finding, Report};
use super::study::{parse_study, StudyInput};

/// Bundled study documents, by name.
pub const FIXTURES: &[(&str, &str)] = &[
    ("embarc", include_str!("../../fixtures/embarc.json")),
    ("embarc_tripled", include_str!("../../fixtures/embarc_tripled.json")),
    ("embarc_zero_ate", include_str!("../../fixtures/embarc_zero_ate.json")),
    ("binary", include_str!("../../fixtures/binary.json")),
    ("stratified", include_str!("../../fixtures/stratified.json")),
    ("infeasible", include_str!("../../fixtures/infeasible.json")),
    ("range", include_str!("../../fixtures/range.json")),
    ("unbounded", include_str!("../../fixtures/unbounded.json")),
    ("outcomes", include_str!("../../fixtures/outcomes.json")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Published reference numbers for the depression-trial fixtures:
/// (name, LP lower, LP upper, LP confidence upper).
const REFERENCES: &[(&str, f64, f64, f64)] = &[
    ("embarc", 0.0, 6.43, 12.25),
    ("embarc_tripled", 0.0, 5.43, 9.83),
    ("embarc_zero_ate", 0.14, 7.01, 13.46),
];
const BOUND_TOL: f64 = 0.05;
const CI_TOL: f64 = 0.15;

fn check(report: &mut Report, label: &str, outcome: Result<(bool, String)>) {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    report.findings.push(Finding::Check { label: label.to_string(), passed, detail });
}

fn load(name: &str) -> Result<StudyInput> {
    parse_study(fixture(name).expect("bundled fixture").as_bytes())
}

/// Run every check; a failure sets exit code 2.
pub fn run_selfcheck(report: &mut Report) {
    for (name, text) in FIXTURES {
        let parsed = parse_study(text.as_bytes()).map(|_| (true, "parses".to_string()));
        check(report, &format!("fixture_{name}"), parsed);
    }
    for &(name, lo, hi, ci) in REFERENCES {
        check(report, &format!("{name}_bounds"), reference_bounds(name, lo, hi));
        check(report, &format!("{name}_ci"), reference_ci(name, ci));
    }
    check(report, "normal_quantile", quantile_check());
    check(report, "binary_brute_force", binary_check(20));
    check(report, "lp_vertex_oracle", oracle_check(10));
    check(report, "feasible_joints_sandwiched", sandwich_check(3, 200));
    let failed = report
        .findings
        .iter()
        .any(|f| matches!(f, Finding::Check { passed: false, .. }));
    if failed {
        report.exit_code = report.exit_code.max(2);
    }
}

fn reference_bounds(name: &str, lo: f64, hi: f64) -> Result<(bool, String)> {
    let study = load(name)?;
    let b = benefit_bounds_lp(&study.trial, 0.0)?;
    let (l, u) = (b.interval.lower, b.interval.upper);
    let ok = (l - lo).abs() <= BOUND_TOL && (u - hi).abs() <= BOUND_TOL;
    Ok((ok, format!("[{}, {}], reference [{lo}, {hi}]", sig6(l), sig6(u))))
}

fn reference_ci(name: &str, upper: f64) -> Result<(bool, String)> {
    let study = load(name)?;
    let mom = study.moment_set()?;
    let space = normalize_direction(&study.trial).space;
    let r = ci_benefit_lp(&mom, &space, 0.05, MeanSeConvention::Standard)?;
    let u = r.interval.upper;
    Ok(((u - upper).abs() <= CI_TOL, format!("upper {}, reference {upper}", sig6(u))))
}

fn quantile_check() -> Result<(bool, String)> {
    let z = normal_quantile(0.975)?;
    Ok(((z - 1.959_963_984_540_054).abs() < 1e-9, format!("z(0.975) = {z}")))
}

fn binary_check(trials: usize) -> Result<(bool, String)> {
    let mut rng = seeded_rng(11);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let t = random_binary_trial(&mut rng);
        let closed = benefit_bounds_binary(&t)?.interval;
        let lp = benefit_bounds_lp(&t, 0.0)?.interval;
        let brute = brute_force_benefit_bounds(&t, 2000)?;
        for (a, b) in [(closed.lower, lp.lower), (closed.upper, lp.upper)] {
            worst = worst.max((a - b).abs());
        }
        // The grid can only miss the extremes inward.
        let inside = brute.lower >= closed.lower - 1e-9 && brute.upper <= closed.upper + 1e-9;
        if !inside {
            return Ok((false, format!("grid scan escaped the closed form on {t:?}")));
        }
    }
    Ok((worst <= 1e-6, format!("max |closed form - LP| = {worst:.2e}")))
}

fn oracle_check(trials: usize) -> Result<(bool, String)> {
    let mut rng = seeded_rng(13);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let t = random_finite_trial(&mut rng, 3);
        let b = benefit_bounds_lp(&t, 0.0)?.interval;
        let vs = enumerate_vertices(&build_benefit_lp(&t, Sense::Maximize)?)?;
        if vs.is_empty() {
            return Err(Error::Numerical("vertex oracle found no vertices".into()));
        }
        let lo = vs.iter().map(|v| v.value).fold(f64::INFINITY, f64::min).max(0.0);
        let hi = vs.iter().map(|v| v.value).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((lo - b.lower).abs()).max((hi - b.upper).abs());
    }
    Ok((worst <= 1e-7, format!("max |simplex - vertices| = {worst:.2e}")))
}

fn sandwich_check(trials: usize, joints: usize) -> Result<(bool, String)> {
    let mut rng = seeded_rng(17);
    let mut outside = 0usize;
    for i in 0..trials {
        let t = random_finite_trial(&mut rng, 5);
        let b = benefit_bounds_lp(&t, 0.0)?.interval;
        for j in sample_feasible_joints(&t, joints, 100 + i as u64)? {
            let v = benefit_of(&j);
            if v < b.lower - 1e-7 || v > b.upper + 1e-7 {
                outside += 1;
            }
        }
    }
    Ok((outside == 0, format!("{outside} of {} joints outside the bounds", trials * joints)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let mut r = Report::new("selfcheck");
        run_selfcheck(&mut r);
        for f in &r.findings {
            if let Finding::Check { passed, label, detail } = f {
                assert!(passed, "{label}: {detail}");
            }
        }
        assert_eq!(r.exit_code, 0);
    }
}
