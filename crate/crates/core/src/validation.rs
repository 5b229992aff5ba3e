//! Independent oracles for the bound computations: explicit joint
//! distributions, feasible-joint sampling, brute-force binary bounds, and
//! seeded generators of consistent trial summaries.
//!
//! All randomness comes from ChaCha8 seeded with a `u64`, so every sample
//! list is bit-reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::benefit::build_benefit_lp;
use crate::error::{Error, Result};
use crate::lp::{solve, LinearProgram, LpStatus, Sense};
use crate::model::{
    normalize_direction, Arm, ArmSummary, BoundMethod, Diagnostic, Direction, Interval,
    OutcomeSpace, StratifiedSummary, Stratum, TrialSummary, Units,
};

/// Deterministic generator used throughout the oracles.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// P(Y⁰ = support0[r], Y¹ = support1[j]) stored as `probs[r][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub support0: Vec<f64>,
    pub support1: Vec<f64>,
    pub probs: Vec<Vec<f64>>,
}

impl JointDistribution {
    /// Entries down to −1e-15 are clipped to 0; the total must be 1 within 1e-12.
    pub fn new(support0: Vec<f64>, support1: Vec<f64>, mut probs: Vec<Vec<f64>>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidInput(vec![Diagnostic::error("joint", msg)]));
        if probs.len() != support0.len() || probs.iter().any(|row| row.len() != support1.len()) {
            return bad("probability matrix shape does not match the supports".into());
        }
        for row in &mut probs {
            for p in row.iter_mut() {
                if !p.is_finite() || *p < -1e-15 {
                    return bad(format!("invalid probability {p}"));
                }
                *p = p.max(0.0);
            }
        }
        let total: f64 = probs.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("probabilities sum to {total}"));
        }
        Ok(JointDistribution { support0, support1, probs })
    }

    fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.probs.iter().enumerate().flat_map(move |(r, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, &p)| (self.support0[r], self.support1[j], p))
        })
    }

    /// (E Y⁰, E Y¹)
    pub fn means(&self) -> (f64, f64) {
        self.cells().fold((0.0, 0.0), |(a, b), (y0, y1, p)| (a + p * y0, b + p * y1))
    }

    /// (E (Y⁰)², E (Y¹)²)
    pub fn second_moments(&self) -> (f64, f64) {
        self.cells()
            .fold((0.0, 0.0), |(a, b), (y0, y1, p)| (a + p * y0 * y0, b + p * y1 * y1))
    }

    pub fn var_delta(&self) -> f64 {
        let (m0, m1) = self.means();
        let d = m1 - m0;
        self.cells().map(|(y0, y1, p)| p * (y1 - y0 - d).powi(2)).sum()
    }
}

/// E max(Y⁰, Y¹) − max(E Y⁰, E Y¹), computed directly from the matrix.
pub fn benefit_of(joint: &JointDistribution) -> f64 {
    let e_max: f64 = joint.cells().map(|(y0, y1, p)| p * y0.max(y1)).sum();
    let (m0, m1) = joint.means();
    e_max - m0.max(m1)
}

fn finite_support(trial: &TrialSummary) -> Result<Vec<f64>> {
    trial
        .space
        .support()
        .map(|s| s.into_owned())
        .ok_or_else(|| Error::UnsupportedSpace {
            required: "a finite support or binary outcome",
            got: trial.space.kind().to_string(),
        })
}

/// Map an LP point (rows = worse arm, columns = better arm) to a joint with rows = Y⁰.
fn joint_from_point(support: &[f64], better: Arm, point: &[f64]) -> Result<JointDistribution> {
    let k = support.len();
    let mut probs = vec![vec![0.0; k]; k];
    for r in 0..k {
        for j in 0..k {
            let p = point[r * k + j];
            match better {
                Arm::Treatment => probs[r][j] = p,
                Arm::Control => probs[j][r] = p,
            }
        }
    }
    // Renormalize away accumulated rounding so the sum check is exact-ish.
    let total: f64 = probs.iter().flatten().sum();
    for row in &mut probs {
        for p in row.iter_mut() {
            *p = p.max(0.0) / total;
        }
    }
    JointDistribution::new(support.to_vec(), support.to_vec(), probs)
}

fn mix(parts: &[(&JointDistribution, f64)]) -> Result<JointDistribution> {
    let first = parts[0].0;
    let k0 = first.support0.len();
    let k1 = first.support1.len();
    let mut probs = vec![vec![0.0; k1]; k0];
    for (joint, w) in parts {
        for (row, src) in probs.iter_mut().zip(&joint.probs) {
            for (p, q) in row.iter_mut().zip(src) {
                *p += w * q;
            }
        }
    }
    JointDistribution::new(first.support0.clone(), first.support1.clone(), probs)
}

/// Joints on the higher-is-better scale whose marginal moments match the
/// trial, drawn as LP vertices under random objectives (always including the
/// benefit-minimizing and -maximizing vertices) and random convex mixtures of them.
pub fn sample_feasible_joints(
    trial: &TrialSummary,
    count: usize,
    seed: u64,
) -> Result<Vec<JointDistribution>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let norm = normalize_direction(trial);
    let support = finite_support(&norm)?;
    let better = norm.better_arm();
    let base = build_benefit_lp(&norm, Sense::Maximize)?;
    let mut rng = seeded_rng(seed);

    let vertex = |lp: &LinearProgram| -> Result<JointDistribution> {
        let sol = solve(lp)?;
        match sol.status {
            LpStatus::Optimal => joint_from_point(&support, better, sol.point.as_deref().unwrap_or(&[])),
            _ => Err(Error::InfeasibleSummaries { hint: crate::benefit::RELAX_HINT.into() }),
        }
    };

    let mut pool = vec![vertex(&base)?, vertex(&base.clone().with_sense(Sense::Minimize))?];
    let pool_size = count.clamp(2, 24);
    while pool.len() < pool_size {
        let mut lp = base.clone();
        lp.objective = (0..lp.num_vars).map(|_| rng.random_range(-1.0..1.0)).collect();
        pool.push(vertex(&lp)?);
    }

    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i < pool.len() && i % 3 == 0 {
            out.push(pool[i].clone());
            continue;
        }
        let parts = rng.random_range(2..=4usize);
        let mut weights: Vec<f64> = (0..parts).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let chosen: Vec<(&JointDistribution, f64)> = weights
            .iter()
            .map(|&w| (&pool[rng.random_range(0..pool.len())], w))
            .collect();
        out.push(mix(&chosen)?);
    }
    Ok(out)
}

/// Binary benefit bounds by scanning the one free cell P(Y⁰ = 1, Y¹ = 1)
/// over its feasible segment at `grid` evenly spaced points.
pub fn brute_force_benefit_bounds(trial: &TrialSummary, grid: usize) -> Result<Interval> {
    if !trial.space.is_binary() {
        return Err(Error::UnsupportedSpace {
            required: "a binary outcome",
            got: trial.space.kind().to_string(),
        });
    }
    if grid < 100 {
        return Err(Error::InvalidInput(vec![Diagnostic::error("grid", "must be at least 100")]));
    }
    let norm = normalize_direction(trial);
    let (p0, p1) = (norm.arm0.mean.clamp(0.0, 1.0), norm.arm1.mean.clamp(0.0, 1.0));
    let lo_q = (p0 + p1 - 1.0).max(0.0);
    let hi_q = p0.min(p1).max(lo_q);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..grid {
        let q = lo_q + (hi_q - lo_q) * i as f64 / (grid - 1) as f64;
        let cells = [
            (1.0 - p0 - p1 + q).max(0.0),
            (p1 - q).max(0.0),
            (p0 - q).max(0.0),
            q,
        ];
        let total: f64 = cells.iter().sum();
        let joint = JointDistribution::new(
            vec![0.0, 1.0],
            vec![0.0, 1.0],
            vec![
                vec![cells[0] / total, cells[1] / total],
                vec![cells[2] / total, cells[3] / total],
            ],
        )?;
        let b = benefit_of(&joint);
        lo = lo.min(b);
        hi = hi.max(b);
    }
    Interval::new(lo.max(0.0), hi.max(lo.max(0.0)), BoundMethod::BruteForce, Units::Outcome)
}

fn random_simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// (mean, population variance) of a distribution on `support`.
pub fn moments_of(support: &[f64], probs: &[f64]) -> (f64, f64) {
    let mean: f64 = support.iter().zip(probs).map(|(y, p)| y * p).sum();
    let var: f64 = support.iter().zip(probs).map(|(y, p)| p * (y - mean).powi(2)).sum();
    (mean, var)
}

fn arm_from<R: Rng>(rng: &mut R, support: &[f64], probs: &[f64]) -> ArmSummary {
    let (mean, var) = moments_of(support, probs);
    ArmSummary { n: rng.random_range(20..500), mean, variance: var.max(0.0) }
}

fn random_direction<R: Rng>(rng: &mut R) -> Direction {
    if rng.random_bool(0.5) {
        Direction::HigherBetter
    } else {
        Direction::LowerBetter
    }
}

/// Binary trial with variances p(1 − p).
pub fn random_binary_trial<R: Rng>(rng: &mut R) -> TrialSummary {
    let (p0, p1): (f64, f64) = (rng.random(), rng.random());
    TrialSummary::new(
        ArmSummary { n: rng.random_range(20..500), mean: p0, variance: p0 * (1.0 - p0) },
        ArmSummary { n: rng.random_range(20..500), mean: p1, variance: p1 * (1.0 - p1) },
        OutcomeSpace::Binary,
        random_direction(rng),
    )
}

/// Distinct sorted integer values, `k` of them, drawn from 0..=3k.
pub fn random_support<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut values: Vec<i64> = Vec::with_capacity(k);
    while values.len() < k {
        let v = rng.random_range(0..=(3 * k) as i64);
        if !values.contains(&v) {
            values.push(v);
        }
    }
    values.sort_unstable();
    values.into_iter().map(|v| v as f64).collect()
}

/// Trial on a random finite support of size 2..=k_max whose arm moments come
/// from actual distributions, so the LP is feasible by construction.
pub fn random_finite_trial<R: Rng>(rng: &mut R, k_max: usize) -> TrialSummary {
    let k = rng.random_range(2..=k_max.max(2));
    let support = random_support(rng, k);
    let (p0, p1) = (random_simplex(rng, k), random_simplex(rng, k));
    TrialSummary::new(
        arm_from(rng, &support, &p0),
        arm_from(rng, &support, &p1),
        OutcomeSpace::finite(support.clone()).expect("generated support is valid"),
        random_direction(rng),
    )
}

/// Stratified summaries on a shared finite support together with the marginal
/// trial their mixture defines (law of total mean and variance hold exactly
/// because the marginal is computed from the mixed distributions).
pub fn random_stratified<R: Rng>(
    rng: &mut R,
    k_max: usize,
    strata: usize,
) -> (StratifiedSummary, TrialSummary) {
    let k = rng.random_range(2..=k_max.max(2));
    let support = random_support(rng, k);
    let space = OutcomeSpace::finite(support.clone()).expect("generated support is valid");
    let direction = random_direction(rng);
    let probs = random_simplex(rng, strata);
    let mut mix0 = vec![0.0; k];
    let mut mix1 = vec![0.0; k];
    let mut list = Vec::with_capacity(strata);
    let mut n_total = (0u64, 0u64);
    for (s, &pr) in probs.iter().enumerate() {
        let (p0, p1) = (random_simplex(rng, k), random_simplex(rng, k));
        for i in 0..k {
            mix0[i] += pr * p0[i];
            mix1[i] += pr * p1[i];
        }
        let trial = TrialSummary::new(
            arm_from(rng, &support, &p0),
            arm_from(rng, &support, &p1),
            space.clone(),
            direction,
        );
        n_total = (n_total.0 + trial.arm0.n, n_total.1 + trial.arm1.n);
        list.push(Stratum { label: format!("s{s}"), prob: pr, trial });
    }
    let (m0, v0) = moments_of(&support, &mix0);
    let (m1, v1) = moments_of(&support, &mix1);
    let marginal = TrialSummary::new(
        ArmSummary { n: n_total.0, mean: m0, variance: v0 },
        ArmSummary { n: n_total.1, mean: m1, variance: v1 },
        space,
        direction,
    );
    let (strat, _) = StratifiedSummary::new(list).expect("generated strata are valid");
    (strat, marginal)
}

/// Unbounded-outcome trial with means in [−10, 10] and SDs in [0.1, 10].
pub fn random_unbounded_trial<R: Rng>(rng: &mut R) -> TrialSummary {
    let mut arm = || ArmSummary {
        n: rng.random_range(20..500),
        mean: rng.random_range(-10.0..10.0),
        variance: rng.random_range(0.1f64..10.0).powi(2),
    };
    let (a0, a1) = (arm(), arm());
    TrialSummary::new(a0, a1, OutcomeSpace::Unbounded, Direction::HigherBetter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benefit::{benefit_bounds_binary, benefit_bounds_lp};
    use crate::heterogeneity::{attainment_distribution, Side};
    use crate::model::validate;

    fn joint(probs: Vec<Vec<f64>>) -> JointDistribution {
        JointDistribution::new(vec![0.0, 1.0], vec![0.0, 1.0], probs).unwrap()
    }

    fn binary(p0: f64, p1: f64) -> TrialSummary {
        TrialSummary::new(
            ArmSummary { n: 100, mean: p0, variance: p0 * (1.0 - p0) },
            ArmSummary { n: 100, mean: p1, variance: p1 * (1.0 - p1) },
            OutcomeSpace::Binary,
            Direction::HigherBetter,
        )
    }

    #[test]
    fn benefit_of_examples() {
        assert_eq!(benefit_of(&joint(vec![vec![0.0, 0.0], vec![0.0, 1.0]])), 0.0);
        assert_eq!(benefit_of(&joint(vec![vec![0.0, 0.5], vec![0.5, 0.0]])), 0.5);
    }

    #[test]
    fn comonotone_doubleton_has_no_benefit() {
        let t = TrialSummary::new(
            ArmSummary { n: 10, mean: 2.0, variance: 4.0 },
            ArmSummary { n: 10, mean: 2.0, variance: 4.0 },
            OutcomeSpace::Unbounded,
            Direction::HigherBetter,
        );
        let d = attainment_distribution(&t, Side::Lower);
        let j = JointDistribution::new(
            d.points.iter().map(|p| p.0).collect(),
            d.points.iter().map(|p| p.1).collect(),
            vec![vec![0.5, 0.0], vec![0.0, 0.5]],
        )
        .unwrap();
        assert!(benefit_of(&j).abs() < 1e-12);
    }

    #[test]
    fn joint_validation() {
        assert!(JointDistribution::new(vec![0.0], vec![0.0], vec![vec![0.9]]).is_err());
        assert!(JointDistribution::new(vec![0.0, 1.0], vec![0.0], vec![vec![1.0]]).is_err());
        let j = JointDistribution::new(vec![0.0, 1.0], vec![0.0], vec![vec![1.0], vec![-1e-16]]).unwrap();
        assert_eq!(j.probs[1][0], 0.0);
    }

    #[test]
    fn sampling_edge_cases() {
        assert!(sample_feasible_joints(&binary(0.3, 0.5), 0, 1).unwrap().is_empty());
        let t = random_unbounded_trial(&mut seeded_rng(1));
        assert!(matches!(sample_feasible_joints(&t, 3, 1), Err(Error::UnsupportedSpace { .. })));
    }

    #[test]
    fn binary_samples_match_moments() {
        let t = binary(0.3, 0.5);
        let joints = sample_feasible_joints(&t, 100, 7).unwrap();
        assert_eq!(joints.len(), 100);
        for j in &joints {
            let (m0, m1) = j.means();
            assert!((m0 - 0.3).abs() < 1e-8 && (m1 - 0.5).abs() < 1e-8);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let t = random_finite_trial(&mut seeded_rng(3), 5);
        assert_eq!(
            sample_feasible_joints(&t, 50, 9).unwrap(),
            sample_feasible_joints(&t, 50, 9).unwrap()
        );
        assert_ne!(
            sample_feasible_joints(&t, 50, 9).unwrap(),
            sample_feasible_joints(&t, 50, 10).unwrap()
        );
    }

    #[test]
    fn sandwich_small() {
        let mut rng = seeded_rng(21);
        for _ in 0..5 {
            let t = random_finite_trial(&mut rng, 4);
            let b = benefit_bounds_lp(&t, 0.0).unwrap().interval;
            let norm = normalize_direction(&t);
            for j in sample_feasible_joints(&t, 200, rng.random()).unwrap() {
                let v = benefit_of(&j);
                assert!(v >= b.lower - 1e-6 && v <= b.upper + 1e-6);
                let (m0, m1) = j.means();
                assert!((m0 - norm.arm0.mean).abs() < 1e-8 && (m1 - norm.arm1.mean).abs() < 1e-8);
                let (s0, s1) = j.second_moments();
                assert!((s0 - norm.arm0.second_moment()).abs() < 1e-8);
                assert!((s1 - norm.arm1.second_moment()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        for grid in [100, 1000, 10_000] {
            let b = brute_force_benefit_bounds(&binary(0.3, 0.5), grid).unwrap();
            assert!((b.upper - 0.3).abs() < 1e-12 && b.lower.abs() < 1e-12);
        }
        let b = brute_force_benefit_bounds(&binary(0.0, 0.0), 100).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let b = brute_force_benefit_bounds(&binary(0.0, 1.0), 100).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        assert!(brute_force_benefit_bounds(&binary(0.3, 0.5), 99).is_err());
        let t = random_finite_trial(&mut seeded_rng(1), 4);
        assert!(matches!(brute_force_benefit_bounds(&t, 100), Err(Error::UnsupportedSpace { .. })));
    }

    #[test]
    fn brute_force_agrees_with_closed_form() {
        let mut rng = seeded_rng(2);
        for _ in 0..50 {
            let t = random_binary_trial(&mut rng);
            let bf = brute_force_benefit_bounds(&t, 1000).unwrap();
            let cf = benefit_bounds_binary(&t).unwrap().interval;
            assert!((bf.upper - cf.upper).abs() <= 2e-3 && (bf.lower - cf.lower).abs() <= 2e-3);
        }
    }

    #[test]
    fn generators_produce_valid_trials() {
        let mut rng = seeded_rng(4);
        for _ in 0..50 {
            assert!(validate(&random_finite_trial(&mut rng, 10)).is_empty());
            assert!(validate(&random_binary_trial(&mut rng)).is_empty());
            let (strat, marginal) = random_stratified(&mut rng, 5, 3);
            assert!(validate(&marginal).is_empty());
            // Law of total expectation.
            let (m0, m1) = strat.marginal_means();
            assert!((m0 - marginal.arm0.mean).abs() < 1e-12 && (m1 - marginal.arm1.mean).abs() < 1e-12);
            // Law of total variance.
            let within: f64 = strat.strata.iter().map(|s| s.prob * s.trial.arm0.variance).sum();
            let between: f64 =
                strat.strata.iter().map(|s| s.prob * (s.trial.arm0.mean - m0).powi(2)).sum();
            assert!((within + between - marginal.arm0.variance).abs() < 1e-10);
        }
    }
}
