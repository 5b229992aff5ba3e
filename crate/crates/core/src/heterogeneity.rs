//! Bounds on var(Δ), the variance of the individual treatment effect.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    normalize_direction, BoundMethod, Interval, OutcomeSpace, StratifiedSummary, TrialSummary,
    Units,
};

/// Which closed form set an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    General,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityBound {
    pub interval: Interval,
    pub s_minus: Option<f64>,
    pub s_plus: Option<f64>,
    /// sqrt(var(Y¹)/var(Y⁰)); taken as 1 when both variances are zero.
    /// Absent for stratified bounds.
    pub nu: Option<f64>,
    pub lower_from: Formula,
    pub upper_from: Formula,
}

/// Per-stratum bound used inside [`het_bounds_stratified`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerStratum {
    General,
    Bounded,
}

fn nu_of(trial: &TrialSummary) -> f64 {
    let (v0, v1) = (trial.arm0.variance, trial.arm1.variance);
    if v0 == 0.0 && v1 == 0.0 {
        1.0
    } else {
        (v1 / v0).sqrt()
    }
}

/// (σ₁ − σ₀)² and (σ₁ + σ₀)², i.e. var(Y⁰)(ν ∓ 1)² written without the ratio.
fn general_endpoints(trial: &TrialSummary) -> (f64, f64) {
    let (s0, s1) = (trial.arm0.sd(), trial.arm1.sd());
    ((s1 - s0).powi(2).max(0.0), (s1 + s0).powi(2))
}

/// var(Y⁰)(ν−1)² ≤ var(Δ) ≤ var(Y⁰)(ν+1)².
pub fn het_bounds_general(trial: &TrialSummary) -> Result<HeterogeneityBound> {
    let (v0, v1) = (trial.arm0.variance, trial.arm1.variance);
    if v0 == 0.0 && v1 > 0.0 {
        return Err(Error::ZeroControlVariance);
    }
    let (lo, hi) = general_endpoints(trial);
    Ok(HeterogeneityBound {
        interval: Interval::new(lo, hi, BoundMethod::HetGeneral, Units::OutcomeSquared)?,
        s_minus: None,
        s_plus: None,
        nu: Some(nu_of(trial)),
        lower_from: Formula::General,
        upper_from: Formula::General,
    })
}

/// Raw bounded-outcome covariance terms and interval, before clipping or
/// intersection with the general bound: `(s⁻, s⁺, lower, upper)`.
pub fn bounded_formula(trial: &TrialSummary) -> Result<(f64, f64, f64, f64)> {
    let (m, big_m) = trial.space.bounds().ok_or_else(|| Error::UnsupportedSpace {
        required: "a bounded outcome space",
        got: trial.space.kind().to_string(),
    })?;
    let (e0, e1) = (trial.arm0.mean, trial.arm1.mean);
    let (v0, v1) = (trial.arm0.variance, trial.arm1.variance);
    let root = (v0 * v1).sqrt();
    let s_minus = 2.0 * root.min((big_m - e0) * (e1 - m)).min((e0 - m) * (big_m - e1));
    let s_plus = 2.0 * root.min((e0 - m) * (e1 - m)).min((big_m - e0) * (big_m - e1));
    Ok((s_minus, s_plus, v0 + v1 - s_minus, v0 + v1 + s_plus))
}

/// Bounded-outcome bound, intersected per side with the general bound.
pub fn het_bounds_bounded(trial: &TrialSummary) -> Result<HeterogeneityBound> {
    let trial = normalize_direction(trial);
    let (s_minus, s_plus, raw_lo, raw_hi) = bounded_formula(&trial)?;
    let (gen_lo, gen_hi) = general_endpoints(&trial);
    let bounded_lo = raw_lo.max(0.0);
    let (lower, lower_from) = if bounded_lo >= gen_lo {
        (bounded_lo, Formula::Bounded)
    } else {
        (gen_lo, Formula::General)
    };
    let (upper, upper_from) = if raw_hi <= gen_hi {
        (raw_hi, Formula::Bounded)
    } else {
        (gen_hi, Formula::General)
    };
    Ok(HeterogeneityBound {
        interval: Interval::new(lower, upper, BoundMethod::HetBounded, Units::OutcomeSquared)?,
        s_minus: Some(s_minus),
        s_plus: Some(s_plus),
        nu: Some(nu_of(&trial)),
        lower_from,
        upper_from,
    })
}

/// The tightest per-trial bound the outcome space supports.
pub fn het_bounds_best(trial: &TrialSummary) -> Result<HeterogeneityBound> {
    match trial.space {
        OutcomeSpace::Unbounded => het_bounds_general(trial),
        _ => het_bounds_bounded(trial),
    }
}

/// var(Δ) bounds from stratum-level summaries via the law of total variance.
pub fn het_bounds_stratified(
    strat: &StratifiedSummary,
    per_stratum: PerStratum,
) -> Result<HeterogeneityBound> {
    let mut failures = Vec::new();
    let mut within = Vec::with_capacity(strat.strata.len());
    for s in &strat.strata {
        let b = match per_stratum {
            PerStratum::General => het_bounds_general(&s.trial),
            PerStratum::Bounded => het_bounds_bounded(&s.trial),
        };
        match b {
            Ok(b) => within.push((s.prob, s.trial.mean_effect(), b.interval)),
            Err(e) => failures.push((s.label.clone(), e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Strata(failures));
    }
    let overall: f64 = within.iter().map(|(p, d, _)| p * d).sum();
    let r_c: f64 = within.iter().map(|(p, d, _)| p * (d - overall).powi(2)).sum();
    let lo: f64 = within.iter().map(|(p, _, iv)| p * iv.lower).sum();
    let hi: f64 = within.iter().map(|(p, _, iv)| p * iv.upper).sum();
    let formula = match per_stratum {
        PerStratum::General => Formula::General,
        PerStratum::Bounded => Formula::Bounded,
    };
    Ok(HeterogeneityBound {
        interval: Interval::new(
            r_c + lo,
            r_c + hi,
            BoundMethod::HetStratified,
            Units::OutcomeSquared,
        )?,
        s_minus: None,
        s_plus: None,
        nu: None,
        lower_from: formula,
        upper_from: formula,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

/// Joint distribution uniform on two points `(y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubletonJoint {
    pub points: [(f64, f64); 2],
}

impl DoubletonJoint {
    pub fn means(&self) -> (f64, f64) {
        let [(a0, a1), (b0, b1)] = self.points;
        ((a0 + b0) / 2.0, (a1 + b1) / 2.0)
    }

    pub fn variances(&self) -> (f64, f64) {
        let [(a0, a1), (b0, b1)] = self.points;
        (((a0 - b0) / 2.0).powi(2), ((a1 - b1) / 2.0).powi(2))
    }

    pub fn var_delta(&self) -> f64 {
        let [(a0, a1), (b0, b1)] = self.points;
        let (da, db) = (a1 - a0, b1 - b0);
        ((da - db) / 2.0).powi(2)
    }
}

/// Joint that attains the lower (comonotone) or upper (antitone) general bound.
pub fn attainment_distribution(trial: &TrialSummary, side: Side) -> DoubletonJoint {
    let (m0, m1) = (trial.arm0.mean, trial.arm1.mean);
    let (s0, s1) = (trial.arm0.sd(), trial.arm1.sd());
    let points = match side {
        Side::Lower => [(m0 - s0, m1 - s1), (m0 + s0, m1 + s1)],
        Side::Upper => [(m0 - s0, m1 + s1), (m0 + s0, m1 - s1)],
    };
    DoubletonJoint { points }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArmSummary, Direction, Stratum};
    use proptest::prelude::*;

    fn trial(space: OutcomeSpace, m0: f64, v0: f64, m1: f64, v1: f64) -> TrialSummary {
        TrialSummary::new(
            ArmSummary { n: 100, mean: m0, variance: v0 },
            ArmSummary { n: 100, mean: m1, variance: v1 },
            space,
            Direction::HigherBetter,
        )
    }

    fn unbounded(v0: f64, v1: f64) -> TrialSummary {
        trial(OutcomeSpace::Unbounded, 0.0, v0, 0.0, v1)
    }

    /// Covariance extremes for Bernoulli marginals, written directly from the
    /// two-by-two table rather than from the bounded formula.
    fn frechet_hoeffding_binary(p0: f64, p1: f64) -> (f64, f64) {
        let (v0, v1) = (p0 * (1.0 - p0), p1 * (1.0 - p1));
        let cov_max = p0.min(p1) - p0 * p1;
        let cov_min = (p0 + p1 - 1.0).max(0.0) - p0 * p1;
        (v0 + v1 - 2.0 * cov_max, v0 + v1 - 2.0 * cov_min)
    }

    #[test]
    fn general_examples() {
        let b = het_bounds_general(&unbounded(4.0, 9.0)).unwrap();
        assert_eq!(b.nu, Some(1.5));
        assert_eq!((b.interval.lower, b.interval.upper), (1.0, 25.0));

        let b = het_bounds_general(&unbounded(4.0, 4.0)).unwrap();
        assert_eq!((b.interval.lower, b.interval.upper), (0.0, 16.0));

        let b = het_bounds_general(&unbounded(1.0, 0.0)).unwrap();
        assert_eq!(b.nu, Some(0.0));
        assert_eq!((b.interval.lower, b.interval.upper), (1.0, 1.0));
    }

    #[test]
    fn general_zero_control_variance() {
        assert_eq!(
            het_bounds_general(&unbounded(0.0, 1.0)).unwrap_err(),
            Error::ZeroControlVariance
        );
        let b = het_bounds_general(&unbounded(0.0, 0.0)).unwrap();
        assert_eq!((b.interval.lower, b.interval.upper), (0.0, 0.0));
    }

    #[test]
    fn bounded_binary_symmetric() {
        let t = trial(OutcomeSpace::Binary, 0.5, 0.25, 0.5, 0.25);
        let b = het_bounds_bounded(&t).unwrap();
        assert_eq!(b.s_minus, Some(0.5));
        assert_eq!(b.s_plus, Some(0.5));
        assert_eq!((b.interval.lower, b.interval.upper), (0.0, 1.0));
    }

    #[test]
    fn bounded_binary_asymmetric() {
        let t = trial(OutcomeSpace::Binary, 0.2, 0.16, 0.8, 0.16);
        let b = het_bounds_bounded(&t).unwrap();
        assert!((b.s_minus.unwrap() - 0.08).abs() < 1e-15);
        assert!((b.s_plus.unwrap() - 0.32).abs() < 1e-15);
        assert!((b.interval.lower - 0.24).abs() < 1e-15);
        assert!((b.interval.upper - 0.64).abs() < 1e-15);
        assert_eq!(b.lower_from, Formula::Bounded);
    }

    #[test]
    fn bounded_boundary_means() {
        // E(Y⁰)=M and E(Y¹)=m zero the first s⁻ product.
        let t = trial(OutcomeSpace::bounded_range(0.0, 1.0).unwrap(), 1.0, 0.0, 0.0, 0.0);
        let (s_minus, _, lo, _) = bounded_formula(&t).unwrap();
        assert_eq!(s_minus, 0.0);
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn bounded_requires_bounded_space() {
        assert!(matches!(
            het_bounds_bounded(&unbounded(1.0, 1.0)),
            Err(Error::UnsupportedSpace { .. })
        ));
    }

    #[test]
    fn stratified_examples() {
        let t = trial(OutcomeSpace::Unbounded, 0.0, 1.0, 1.0, 1.0);
        let same = StratifiedSummary {
            strata: vec![
                Stratum { label: "a".into(), prob: 0.5, trial: t.clone() },
                Stratum { label: "b".into(), prob: 0.5, trial: t.clone() },
            ],
        };
        let b = het_bounds_stratified(&same, PerStratum::General).unwrap();
        let single = het_bounds_general(&t).unwrap();
        assert_eq!(b.interval.lower, single.interval.lower);
        assert_eq!(b.interval.upper, single.interval.upper);

        let pos = trial(OutcomeSpace::Unbounded, 0.0, 0.0, 2.0, 0.0);
        let neg = trial(OutcomeSpace::Unbounded, 2.0, 0.0, 0.0, 0.0);
        let s = StratifiedSummary {
            strata: vec![
                Stratum { label: "a".into(), prob: 0.5, trial: pos },
                Stratum { label: "b".into(), prob: 0.5, trial: neg },
            ],
        };
        let b = het_bounds_stratified(&s, PerStratum::General).unwrap();
        assert_eq!((b.interval.lower, b.interval.upper), (4.0, 4.0));

        let c1 = trial(OutcomeSpace::Unbounded, 0.0, 1.0, 1.0, 1.0);
        let c2 = trial(OutcomeSpace::Unbounded, 0.0, 1.0, 0.0, 1.0);
        let s = StratifiedSummary {
            strata: vec![
                Stratum { label: "a".into(), prob: 0.4, trial: c1 },
                Stratum { label: "b".into(), prob: 0.6, trial: c2 },
            ],
        };
        let b = het_bounds_stratified(&s, PerStratum::General).unwrap();
        assert!((b.interval.lower - 0.24).abs() < 1e-12);
        assert!((b.interval.upper - 4.24).abs() < 1e-12);
    }

    #[test]
    fn stratified_reports_failing_labels() {
        let bad = unbounded(0.0, 1.0);
        let s = StratifiedSummary {
            strata: vec![
                Stratum { label: "ok".into(), prob: 0.5, trial: unbounded(1.0, 1.0) },
                Stratum { label: "bad".into(), prob: 0.5, trial: bad },
            ],
        };
        match het_bounds_stratified(&s, PerStratum::General) {
            Err(Error::Strata(errs)) => assert_eq!(errs[0].0, "bad"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn attainment_examples() {
        let t = unbounded(1.0, 1.0);
        let lo = attainment_distribution(&t, Side::Lower);
        assert_eq!(lo.points, [(-1.0, -1.0), (1.0, 1.0)]);
        assert_eq!(lo.var_delta(), 0.0);
        let hi = attainment_distribution(&t, Side::Upper);
        assert_eq!(hi.points, [(-1.0, 1.0), (1.0, -1.0)]);
        assert_eq!(hi.var_delta(), 4.0);

        let t = unbounded(2.0, 0.0);
        for side in [Side::Lower, Side::Upper] {
            assert!((attainment_distribution(&t, side).var_delta() - 2.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn attainment_reproduces_general_bounds(
            m0 in -10.0..10.0f64, m1 in -10.0..10.0f64,
            s0 in 0.01..5.0f64, s1 in 0.0..5.0f64,
        ) {
            let t = trial(OutcomeSpace::Unbounded, m0, s0 * s0, m1, s1 * s1);
            let b = het_bounds_general(&t).unwrap();
            for (side, target) in [(Side::Lower, b.interval.lower), (Side::Upper, b.interval.upper)] {
                let j = attainment_distribution(&t, side);
                let (mm0, mm1) = j.means();
                let (vv0, vv1) = j.variances();
                prop_assert!((mm0 - m0).abs() < 1e-12 && (mm1 - m1).abs() < 1e-12);
                prop_assert!((vv0 - t.arm0.variance).abs() < 1e-12 * (1.0 + t.arm0.variance));
                prop_assert!((vv1 - t.arm1.variance).abs() < 1e-12 * (1.0 + t.arm1.variance));
                prop_assert!((j.var_delta() - target).abs() < 1e-10);
            }
        }

        #[test]
        fn binary_matches_frechet_hoeffding(p0 in 0.0..=1.0f64, p1 in 0.0..=1.0f64) {
            let t = trial(OutcomeSpace::Binary, p0, p0 * (1.0 - p0), p1, p1 * (1.0 - p1));
            let (_, _, lo, hi) = bounded_formula(&t).unwrap();
            let (flo, fhi) = frechet_hoeffding_binary(p0, p1);
            prop_assert!((lo - flo).abs() < 1e-12);
            prop_assert!((hi - fhi).abs() < 1e-12);
            let b = het_bounds_bounded(&t).unwrap();
            prop_assert!((b.interval.lower - flo.max(0.0)).abs() < 1e-12);
            prop_assert!((b.interval.upper - fhi).abs() < 1e-12);
        }

        #[test]
        fn bounded_within_general(
            lo in -5.0..0.0f64, width in 0.5..10.0f64,
            u0 in 0.0..1.0f64, u1 in 0.0..1.0f64, f0 in 0.01..1.0f64, f1 in 0.01..1.0f64,
        ) {
            let hi = lo + width;
            let m0 = lo + u0 * width;
            let m1 = lo + u1 * width;
            let v0 = f0 * (hi - m0) * (m0 - lo);
            let v1 = f1 * (hi - m1) * (m1 - lo);
            prop_assume!(v0 > 1e-9);
            let t = trial(OutcomeSpace::bounded_range(lo, hi).unwrap(), m0, v0, m1, v1);
            let g = het_bounds_general(&t).unwrap().interval;
            let b = het_bounds_bounded(&t).unwrap().interval;
            prop_assert!(g.contains(&b, 1e-12));

            // Without intersection, containment holds when the root term binds both minima.
            let (s_minus, s_plus, raw_lo, raw_hi) = bounded_formula(&t).unwrap();
            let root = 2.0 * (v0 * v1).sqrt();
            if s_minus == root && s_plus == root {
                prop_assert!(raw_lo >= g.lower - 1e-12 && raw_hi <= g.upper + 1e-12);
            }
        }

        #[test]
        fn reflection_invariant(
            u0 in 0.0..1.0f64, u1 in 0.0..1.0f64, f0 in 0.01..1.0f64, f1 in 0.01..1.0f64,
        ) {
            let (m0, m1) = (10.0 * u0, 10.0 * u1);
            let v0 = f0 * (10.0 - m0) * m0;
            let v1 = f1 * (10.0 - m1) * m1;
            prop_assume!(v0 > 1e-9);
            let t = trial(OutcomeSpace::bounded_range(0.0, 10.0).unwrap(), m0, v0, m1, v1);
            let mut lower_better = t.clone();
            lower_better.direction = Direction::LowerBetter;
            let a = het_bounds_bounded(&t).unwrap().interval;
            let b = het_bounds_bounded(&lower_better).unwrap().interval;
            prop_assert!((a.lower - b.lower).abs() < 1e-9 && (a.upper - b.upper).abs() < 1e-9);
        }

        #[test]
        fn single_effective_stratum(v0 in 0.1..4.0f64, v1 in 0.0..4.0f64, d in -3.0..3.0f64) {
            let t = trial(OutcomeSpace::Unbounded, 0.0, v0, d, v1);
            let s = StratifiedSummary {
                strata: vec![Stratum { label: "all".into(), prob: 1.0, trial: t.clone() }],
            };
            let a = het_bounds_stratified(&s, PerStratum::General).unwrap().interval;
            let b = het_bounds_general(&t).unwrap().interval;
            prop_assert_eq!((a.lower, a.upper), (b.lower, b.upper));
        }
    }
}
