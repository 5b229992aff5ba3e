//! Bounds on the benefit of an ideal individualized rule over the best single
//! treatment, μ_O − μ_T.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heterogeneity::het_bounds_best;
use crate::lp::{solve, LinearProgram, LpStatus, Sense};
use crate::model::{
    normalize_direction, require_valid, structural_diagnostics, validate_with_tolerance, Arm, BoundMethod, Diagnostic,
    Direction, Interval, StratifiedSummary, TrialSummary, Units, CONSISTENCY_TOL,
};

pub const RELAX_HINT: &str =
    "published summaries may be rounded; retry with --relax-eps 1e-3 or check the declared support";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitBound {
    pub interval: Interval,
    /// Best single-treatment mean on the input scale.
    pub mu_t: f64,
    /// Mean under the stratum-optimal rule on the input scale (stratified only).
    pub mu_c: Option<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

impl BenefitBound {
    pub fn method(&self) -> BoundMethod {
        self.interval.method
    }
}

/// Closed range for one moment of one arm; an equality when `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MomentRange {
    pub lo: f64,
    pub hi: f64,
}

impl MomentRange {
    pub fn exact(v: f64) -> Self {
        MomentRange { lo: v, hi: v }
    }

    pub fn relaxed(v: f64, eps: f64) -> Self {
        let d = eps * v.abs().max(1.0);
        MomentRange { lo: v - d, hi: v + d }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MomentBox {
    pub mean: MomentRange,
    pub second: MomentRange,
}

/// Joint-distribution LP over `support × support`; variables are
/// `p[r·k + j] = P(worse arm = y_r, better arm = y_j)`.
pub(crate) fn benefit_lp(
    support: &[f64],
    better: MomentBox,
    worse: MomentBox,
    sense: Sense,
) -> LinearProgram {
    let k = support.len();
    let cell = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
        let mut v = Vec::with_capacity(k * k);
        for &yr in support {
            for &yj in support {
                v.push(f(yr, yj));
            }
        }
        v
    };
    let objective = cell(&|yr, yj| if yj < yr { yr - yj } else { 0.0 });
    let mut lp = LinearProgram::new(sense, objective).eq(vec![1.0; k * k], 1.0);
    let rows: [(Vec<f64>, MomentRange); 4] = [
        (cell(&|_, yj| yj), better.mean),
        (cell(&|yr, _| yr), worse.mean),
        (cell(&|_, yj| yj * yj), better.second),
        (cell(&|yr, _| yr * yr), worse.second),
    ];
    for (coeffs, range) in rows {
        if range.lo == range.hi {
            lp = lp.eq(coeffs, range.lo);
        } else {
            lp = lp.ge(coeffs.clone(), range.lo).le(coeffs, range.hi);
        }
    }
    lp
}

fn support_of(trial: &TrialSummary) -> Result<Vec<f64>> {
    trial
        .space
        .support()
        .map(|s| s.into_owned())
        .ok_or_else(|| Error::UnsupportedSpace {
            required: "a finite support or binary outcome",
            got: trial.space.kind().to_string(),
        })
}

fn boxes(trial: &TrialSummary, eps: f64) -> (MomentBox, MomentBox) {
    let better = trial.better_arm();
    let range = |v: f64| {
        if eps > 0.0 {
            MomentRange::relaxed(v, eps)
        } else {
            MomentRange::exact(v)
        }
    };
    let of = |a: Arm| {
        let s = trial.arm(a);
        MomentBox {
            mean: range(s.mean),
            second: range(s.second_moment()),
        }
    };
    (of(better), of(better.other()))
}

/// The benefit LP for a trial; the higher-mean arm (treatment on ties) plays
/// the better-arm role after direction normalization.
pub fn build_benefit_lp(trial: &TrialSummary, sense: Sense) -> Result<LinearProgram> {
    let trial = normalize_direction(trial);
    let support = support_of(&trial)?;
    let (better, worse) = boxes(&trial, 0.0);
    Ok(benefit_lp(&support, better, worse, sense))
}

/// Best single-treatment mean on the input scale.
fn best_mean(direction: Direction, m0: f64, m1: f64) -> f64 {
    match direction {
        Direction::HigherBetter => m0.max(m1),
        Direction::LowerBetter => m0.min(m1),
    }
}

fn relax_hint(relax_eps: f64) -> String {
    if relax_eps > 0.0 {
        format!("still infeasible with relax_eps {relax_eps}; check the declared support")
    } else {
        RELAX_HINT.to_string()
    }
}

fn check_eps(relax_eps: f64) -> Result<()> {
    if relax_eps.is_finite() && relax_eps >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(vec![Diagnostic::error(
            "options.relax_eps",
            format!("must be a nonnegative finite number, got {relax_eps}"),
        )]))
    }
}

/// Sharp benefit bounds from the min and max joint-distribution LPs.
pub fn benefit_bounds_lp(trial: &TrialSummary, relax_eps: f64) -> Result<BenefitBound> {
    check_eps(relax_eps)?;
    require_valid(structural_diagnostics(trial))?;
    // On a finite support each marginal is realizable iff its moments pass these
    // checks, and then so is the product joint; failures here mean infeasibility.
    let mut diagnostics = require_valid(validate_with_tolerance(trial, relax_eps)).map_err(|e| {
        let Error::InvalidInput(diags) = e else { return e };
        let detail: Vec<String> = diags.iter().map(ToString::to_string).collect();
        Error::InfeasibleSummaries {
            hint: format!("{}; {}", detail.join("; "), relax_hint(relax_eps)),
        }
    })?;
    let norm = normalize_direction(trial);
    let support = support_of(&norm)?;
    let (better, worse) = boxes(&norm, relax_eps);
    let mut ends = [0.0; 2];
    for (slot, sense) in [Sense::Minimize, Sense::Maximize].into_iter().enumerate() {
        let sol = solve(&benefit_lp(&support, better, worse, sense))?;
        match sol.status {
            LpStatus::Optimal => ends[slot] = sol.value.unwrap_or(0.0),
            LpStatus::Infeasible => {
                return Err(Error::InfeasibleSummaries { hint: relax_hint(relax_eps) });
            }
            LpStatus::Unbounded => {
                return Err(Error::Numerical("benefit LP reported unbounded".into()));
            }
        }
    }
    if relax_eps > 0.0 {
        diagnostics.push(Diagnostic::warning(
            "options.relax_eps",
            format!("moment equalities relaxed to rhs ± {relax_eps}·max(1, |rhs|)"),
        ));
    }
    let lower = ends[0].max(0.0);
    let upper = ends[1].max(lower);
    Ok(BenefitBound {
        interval: Interval::new(lower, upper, BoundMethod::BenefitLp, Units::Outcome)?,
        mu_t: best_mean(trial.direction, trial.arm0.mean, trial.arm1.mean),
        mu_c: None,
        diagnostics,
    })
}

/// Closed-form bounds for binary outcomes; only the means enter.
pub fn benefit_bounds_binary(trial: &TrialSummary) -> Result<BenefitBound> {
    if !trial.space.is_binary() {
        return Err(Error::UnsupportedSpace {
            required: "a binary outcome",
            got: trial.space.kind().to_string(),
        });
    }
    let mut diags = Vec::new();
    for (name, arm) in [("control", &trial.arm0), ("treatment", &trial.arm1)] {
        if !(arm.mean >= -CONSISTENCY_TOL && arm.mean <= 1.0 + CONSISTENCY_TOL) {
            diags.push(Diagnostic::error(
                format!("arms.{name}.mean"),
                format!("proportion {} outside [0, 1]", arm.mean),
            ));
        }
    }
    let diagnostics = require_valid(diags)?;
    let norm = normalize_direction(trial);
    let (e0, e1) = (norm.arm0.mean.clamp(0.0, 1.0), norm.arm1.mean.clamp(0.0, 1.0));
    let upper = if e0 <= e1 {
        e0.min(1.0 - e1)
    } else {
        (1.0 - e0).min(e1)
    };
    Ok(BenefitBound {
        interval: Interval::new(
            0.0,
            upper.max(0.0),
            BoundMethod::BenefitBinaryClosedForm,
            Units::Outcome,
        )?,
        mu_t: best_mean(trial.direction, trial.arm0.mean, trial.arm1.mean),
        mu_c: None,
        diagnostics,
    })
}

/// ½·√(B⁺ + E(Δ)²), with B⁺ the tightest var(Δ) upper bound for the space.
pub fn benefit_upper_closed(trial: &TrialSummary) -> Result<f64> {
    let trial = normalize_direction(trial);
    let b_plus = het_bounds_best(&trial)?.interval.upper;
    Ok(0.5 * (b_plus + trial.mean_effect().powi(2)).sqrt())
}

/// Stratum-level quantities on the normalized scale: (prob, better mean).
fn stratum_best(strat: &StratifiedSummary) -> (f64, f64) {
    let (m0, m1) = strat.marginal_means();
    let mu_t = m0.max(m1);
    let mu_c: f64 = strat
        .strata
        .iter()
        .map(|s| s.prob * s.trial.arm0.mean.max(s.trial.arm1.mean))
        .sum();
    (mu_t, mu_c)
}

/// Input-scale μ_T and μ_C for reporting.
fn reported_means(strat: &StratifiedSummary) -> (f64, f64) {
    let dir = strat.direction();
    let (m0, m1) = strat.marginal_means();
    let mu_c = strat
        .strata
        .iter()
        .map(|s| s.prob * best_mean(dir, s.trial.arm0.mean, s.trial.arm1.mean))
        .sum();
    (best_mean(dir, m0, m1), mu_c)
}

fn per_stratum<T>(
    strat: &StratifiedSummary,
    f: impl Fn(&TrialSummary) -> Result<T>,
) -> Result<Vec<T>> {
    let mut ok = Vec::with_capacity(strat.strata.len());
    let mut failures = Vec::new();
    for s in &strat.strata {
        match f(&s.trial) {
            Ok(v) => ok.push(v),
            Err(e) => failures.push((s.label.clone(), e)),
        }
    }
    if failures.is_empty() {
        Ok(ok)
    } else {
        Err(Error::Strata(failures))
    }
}

/// (μ_C − μ_T) plus the probability-weighted per-stratum LP bounds.
pub fn benefit_bounds_stratified(
    strat: &StratifiedSummary,
    relax_eps: f64,
) -> Result<BenefitBound> {
    let norm = strat.normalized();
    let within = per_stratum(&norm, |t| benefit_bounds_lp(t, relax_eps))?;
    let (mu_t, mu_c) = stratum_best(&norm);
    let gap = mu_c - mu_t;
    let probs = norm.strata.iter().map(|s| s.prob);
    let (lo, hi) = probs
        .zip(&within)
        .fold((0.0, 0.0), |(lo, hi), (p, b)| {
            (lo + p * b.interval.lower, hi + p * b.interval.upper)
        });
    let mut diagnostics = Vec::new();
    for (s, b) in strat.strata.iter().zip(&within) {
        for d in &b.diagnostics {
            diagnostics.push(Diagnostic {
                path: format!("strata[{}].{}", s.label, d.path),
                ..d.clone()
            });
        }
    }
    let lower = (gap + lo).max(0.0);
    let (rep_t, rep_c) = reported_means(strat);
    Ok(BenefitBound {
        interval: Interval::new(
            lower,
            (gap + hi).max(lower),
            BoundMethod::BenefitStratifiedLp,
            Units::Outcome,
        )?,
        mu_t: rep_t,
        mu_c: Some(rep_c),
        diagnostics,
    })
}

/// (μ_C − μ_T) + ½·Σ pr·√(B_s⁺ + E(Δ | stratum)²).
pub fn benefit_upper_closed_stratified(strat: &StratifiedSummary) -> Result<f64> {
    let norm = strat.normalized();
    let terms = per_stratum(&norm, benefit_upper_closed)?;
    let (mu_t, mu_c) = stratum_best(&norm);
    let weighted: f64 = norm.strata.iter().zip(&terms).map(|(s, t)| s.prob * t).sum();
    Ok(mu_c - mu_t + weighted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::enumerate_vertices;
    use crate::model::{reflect, ArmSummary, OutcomeSpace, Stratum};
    use proptest::prelude::*;

    fn trial(space: OutcomeSpace, dir: Direction, a0: (f64, f64), a1: (f64, f64)) -> TrialSummary {
        TrialSummary::new(
            ArmSummary::new(100, a0.0, a0.1).unwrap(),
            ArmSummary::new(100, a1.0, a1.1).unwrap(),
            space,
            dir,
        )
    }

    fn binary(p0: f64, p1: f64) -> TrialSummary {
        trial(
            OutcomeSpace::Binary,
            Direction::HigherBetter,
            (p0, p0 * (1.0 - p0)),
            (p1, p1 * (1.0 - p1)),
        )
    }

    fn embarc() -> TrialSummary {
        TrialSummary::new(
            ArmSummary::from_sd(123, 11.94, 7.52).unwrap(),
            ArmSummary::from_sd(115, 10.73, 6.53).unwrap(),
            OutcomeSpace::integer_scale(0, 52).unwrap(),
            Direction::LowerBetter,
        )
    }

    /// max over a dense grid of q = P(both arms 1) of the binary benefit.
    fn grid_oracle(p0: f64, p1: f64) -> (f64, f64) {
        let (lo_q, hi_q) = ((p0 + p1 - 1.0).max(0.0), p0.min(p1));
        let (worse_is_0, _) = (p0 <= p1, ());
        let mut out = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=10_000 {
            let q = lo_q + (hi_q - lo_q) * i as f64 / 10_000.0;
            // P(Y⁰=1, Y¹=0) and P(Y⁰=0, Y¹=1)
            let (p10, p01) = (p0 - q, p1 - q);
            let b = if worse_is_0 { p10 } else { p01 };
            out = (out.0.min(b), out.1.max(b));
        }
        out
    }

    #[test]
    fn lp_shape() {
        let lp = build_benefit_lp(&binary(0.5, 0.5), Sense::Maximize).unwrap();
        assert_eq!((lp.num_vars, lp.eq_constraints.len()), (4, 5));
        let t = trial(
            OutcomeSpace::integer_scale(0, 2).unwrap(),
            Direction::HigherBetter,
            (1.0, 0.5),
            (1.0, 0.5),
        );
        let lp = build_benefit_lp(&t, Sense::Minimize).unwrap();
        assert_eq!((lp.num_vars, lp.eq_constraints.len()), (9, 5));
        // Objective: only cells where the worse arm exceeds the better arm count.
        assert_eq!(lp.objective, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2.0, 1.0, 0.0]);
    }

    #[test]
    fn lp_requires_finite_support() {
        let t = trial(OutcomeSpace::Unbounded, Direction::HigherBetter, (0.0, 1.0), (0.0, 1.0));
        assert!(matches!(
            build_benefit_lp(&t, Sense::Maximize),
            Err(Error::UnsupportedSpace { .. })
        ));
        assert!(matches!(benefit_bounds_lp(&t, 0.0), Err(Error::UnsupportedSpace { .. })));
    }

    #[test]
    fn degenerate_binary_lp_is_well_posed() {
        let b = benefit_bounds_lp(&binary(0.5, 0.5), 0.0).unwrap();
        assert!(b.interval.lower.abs() < 1e-12);
        assert!((b.interval.upper - 0.5).abs() < 1e-12);
    }

    #[test]
    fn binary_lp_examples() {
        let b = benefit_bounds_lp(&binary(0.0, 1.0), 0.0).unwrap();
        assert_eq!((b.interval.lower, b.interval.upper), (0.0, 0.0));
        let b = benefit_bounds_lp(&binary(0.3, 0.5), 0.0).unwrap();
        assert!((b.interval.upper - 0.3).abs() < 1e-12);
        let (glo, ghi) = grid_oracle(0.3, 0.5);
        assert!(glo.abs() < 1e-9 && (ghi - 0.3).abs() < 1e-9);
    }

    #[test]
    fn binary_closed_form_examples() {
        let up = |p0, p1| benefit_bounds_binary(&binary(p0, p1)).unwrap().interval.upper;
        assert!((up(0.3, 0.5) - 0.3).abs() < 1e-15);
        assert_eq!(up(0.0, 0.0), 0.0);
        assert!((up(0.9, 0.2) - 0.1).abs() < 1e-12);
        let (_, ghi) = grid_oracle(0.9, 0.2);
        assert!((ghi - 0.1).abs() < 1e-9);
        let t = trial(OutcomeSpace::Unbounded, Direction::HigherBetter, (0.0, 1.0), (0.0, 1.0));
        assert!(matches!(benefit_bounds_binary(&t), Err(Error::UnsupportedSpace { .. })));
    }

    #[test]
    fn embarc_interval() {
        let b = benefit_bounds_lp(&embarc(), 0.0).unwrap();
        assert!(b.interval.lower.abs() < 1e-9);
        assert!((b.interval.upper - 6.43).abs() < 0.01, "{:?}", b.interval);
        // Best single treatment on the original (lower-is-better) scale.
        assert_eq!(b.mu_t, 10.73);
    }

    #[test]
    fn zero_effect_lower_bound_is_positive() {
        let mut t = embarc();
        t.arm1.mean = t.arm0.mean;
        let b = benefit_bounds_lp(&t, 0.0).unwrap();
        assert!(b.interval.lower > 0.1, "{:?}", b.interval);
    }

    #[test]
    fn infeasible_summaries_suggest_relaxation() {
        // Prevalence 0.33 with a rounded SD of 0.47: 0.47² < 0.33·0.67.
        let t = trial(
            OutcomeSpace::integer_scale(0, 1).unwrap(),
            Direction::HigherBetter,
            (0.33, 0.47f64.powi(2)),
            (0.5, 0.25),
        );
        let err = benefit_bounds_lp(&t, 0.0).unwrap_err();
        let Error::InfeasibleSummaries { hint } = err else { panic!("{err:?}") };
        assert!(hint.contains("--relax-eps"));
        let relaxed = benefit_bounds_lp(&t, 1e-3).unwrap();
        assert!(relaxed.interval.upper > 0.0);
        // Structural problems stay input errors.
        let mut bad = t.clone();
        bad.arm0.variance = -1.0;
        assert!(matches!(benefit_bounds_lp(&bad, 0.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn relaxation_is_recorded() {
        let t = binary(0.3, 0.5);
        let b = benefit_bounds_lp(&t, 1e-3).unwrap();
        assert!(b.diagnostics.iter().any(|d| d.path == "options.relax_eps"));
        let exact = benefit_bounds_lp(&t, 0.0).unwrap();
        assert!(b.interval.contains(&exact.interval, 1e-12));
        assert!(benefit_bounds_lp(&t, -1.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let t = trial(OutcomeSpace::Unbounded, Direction::HigherBetter, (0.0, 1.0), (0.0, 1.0));
        assert!((benefit_upper_closed(&t).unwrap() - 1.0).abs() < 1e-15);
        let t = trial(OutcomeSpace::Unbounded, Direction::HigherBetter, (0.0, 1.0), (3.0, 1.0));
        assert!((benefit_upper_closed(&t).unwrap() - 13f64.sqrt() / 2.0).abs() < 1e-15);
        let t = trial(OutcomeSpace::Unbounded, Direction::HigherBetter, (0.0, 6.25), (0.0, 6.25));
        assert!((benefit_upper_closed(&t).unwrap() - 2.5).abs() < 1e-15);
        let t = trial(OutcomeSpace::Unbounded, Direction::HigherBetter, (0.0, 0.0), (0.0, 1.0));
        assert_eq!(benefit_upper_closed(&t), Err(Error::ZeroControlVariance));
    }

    #[test]
    fn closed_form_dominates_lp_on_embarc() {
        let t = embarc();
        let lp = benefit_bounds_lp(&t, 0.0).unwrap();
        assert!(lp.interval.upper <= benefit_upper_closed(&t).unwrap() + 1e-8);
    }

    fn stratum(label: &str, prob: f64, t: TrialSummary) -> Stratum {
        Stratum { label: label.into(), prob, trial: t }
    }

    fn point_mass_strata() -> StratifiedSummary {
        let space = OutcomeSpace::integer_scale(0, 2).unwrap();
        let s1 = trial(space.clone(), Direction::HigherBetter, (0.0, 0.0), (2.0, 0.0));
        let s2 = trial(space, Direction::HigherBetter, (2.0, 0.0), (0.0, 0.0));
        StratifiedSummary::new(vec![stratum("a", 0.5, s1), stratum("b", 0.5, s2)]).unwrap().0
    }

    #[test]
    fn stratified_point_masses() {
        let b = benefit_bounds_stratified(&point_mass_strata(), 0.0).unwrap();
        assert_eq!((b.interval.lower, b.interval.upper), (1.0, 1.0));
        assert_eq!((b.mu_t, b.mu_c), (1.0, Some(2.0)));
    }

    #[test]
    fn stratified_closed_form_by_hand() {
        // Per-stratum B⁺ = 4 with E(Δ) = ±2.
        let s1 = trial(OutcomeSpace::Unbounded, Direction::HigherBetter, (0.0, 1.0), (2.0, 1.0));
        let s2 = trial(OutcomeSpace::Unbounded, Direction::HigherBetter, (2.0, 1.0), (0.0, 1.0));
        let strat =
            StratifiedSummary::new(vec![stratum("a", 0.5, s1), stratum("b", 0.5, s2)]).unwrap().0;
        let v = benefit_upper_closed_stratified(&strat).unwrap();
        assert!((v - (1.0 + 8f64.sqrt() / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn stratified_reductions() {
        let t = embarc();
        let lp = benefit_bounds_lp(&t, 0.0).unwrap();
        let one = StratifiedSummary::new(vec![stratum("all", 1.0, t.clone())]).unwrap().0;
        let b = benefit_bounds_stratified(&one, 0.0).unwrap();
        assert_eq!((b.interval.lower, b.interval.upper), (lp.interval.lower, lp.interval.upper));
        let two = StratifiedSummary::new(vec![
            stratum("x", 0.5, t.clone()),
            stratum("y", 0.5, t.clone()),
        ])
        .unwrap()
        .0;
        let b = benefit_bounds_stratified(&two, 0.0).unwrap();
        assert!((b.interval.upper - lp.interval.upper).abs() < 1e-12);
        let closed = benefit_upper_closed(&t).unwrap();
        assert_eq!(benefit_upper_closed_stratified(&one).unwrap(), closed);
        assert!((benefit_upper_closed_stratified(&two).unwrap() - closed).abs() < 1e-12);
    }

    #[test]
    fn stratified_errors_carry_labels() {
        // Mean 0.5 on {0, 1} forces variance 0.25.
        let broken = trial(OutcomeSpace::Binary, Direction::HigherBetter, (0.5, 0.1), (0.5, 0.25));
        let strat = StratifiedSummary {
            strata: vec![stratum("ok", 0.5, binary(0.3, 0.5)), stratum("broken", 0.5, broken)],
        };
        let Err(Error::Strata(fails)) = benefit_bounds_stratified(&strat, 0.0) else {
            panic!("expected per-stratum failure")
        };
        assert_eq!(fails.len(), 1);
        assert_eq!(fails[0].0, "broken");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn binary_lp_matches_closed_form(p0 in 0.0..=1.0f64, p1 in 0.0..=1.0f64) {
            let t = binary(p0, p1);
            let lp = benefit_bounds_lp(&t, 0.0).unwrap();
            let cf = benefit_bounds_binary(&t).unwrap();
            prop_assert!((lp.interval.lower - cf.interval.lower).abs() < 1e-8);
            prop_assert!((lp.interval.upper - cf.interval.upper).abs() < 1e-8);
            let (_, ghi) = grid_oracle(p0, p1);
            prop_assert!((ghi - cf.interval.upper).abs() < 1e-3);
        }

        /// Small supports: the simplex optimum agrees with vertex enumeration.
        #[test]
        fn lp_matches_vertex_oracle(w in prop::collection::vec(1u32..20, 9)) {
            let support = [0.0, 1.0, 3.0];
            let total: u32 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|&x| x as f64 / total as f64).collect();
            let moments = |f: &dyn Fn(usize, usize) -> f64| -> f64 {
                (0..3).flat_map(|r| (0..3).map(move |j| (r, j))).map(|(r, j)| p[r * 3 + j] * f(r, j)).sum()
            };
            let m0 = moments(&|r, _| support[r]);
            let m1 = moments(&|_, j| support[j]);
            let v0 = moments(&|r, _| support[r].powi(2)) - m0 * m0;
            let v1 = moments(&|_, j| support[j].powi(2)) - m1 * m1;
            let t = trial(OutcomeSpace::finite(support.to_vec()).unwrap(), Direction::HigherBetter, (m0, v0), (m1, v1));
            let b = benefit_bounds_lp(&t, 0.0).unwrap();
            let verts = enumerate_vertices(&build_benefit_lp(&t, Sense::Maximize).unwrap()).unwrap();
            let best = verts.iter().map(|v| v.value).fold(f64::NEG_INFINITY, f64::max);
            let worst = verts.iter().map(|v| v.value).fold(f64::INFINITY, f64::min);
            prop_assert!((b.interval.upper - best).abs() < 1e-8);
            prop_assert!((b.interval.lower - worst.max(0.0)).abs() < 1e-8);
        }

        #[test]
        fn reflection_invariance(p0 in 0.05..0.95f64, p1 in 0.05..0.95f64) {
            let t = binary(p0, p1);
            let a = benefit_bounds_lp(&t, 0.0).unwrap();
            let b = benefit_bounds_lp(&reflect(&t), 0.0).unwrap();
            prop_assert!((a.interval.lower - b.interval.lower).abs() < 1e-9);
            prop_assert!((a.interval.upper - b.interval.upper).abs() < 1e-9);
        }
    }
}
