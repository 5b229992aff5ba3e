//! Shared data model: arm summaries, outcome spaces, trial summaries, intervals.
//!
//! Every type here is an immutable value. Operations elsewhere take a
//! [`TrialSummary`] and, where direction matters, first pass it through
//! [`normalize_direction`] so that larger outcomes are always preferable.

use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking published moments for consistency.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Published per-arm summary statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
}

impl ArmSummary {
    pub fn new(n: u64, mean: f64, variance: f64) -> Result<Self> {
        let arm = ArmSummary { n, mean, variance };
        let diags = arm.check("arm");
        if diags.is_empty() {
            Ok(arm)
        } else {
            Err(Error::InvalidInput(diags))
        }
    }

    pub fn from_sd(n: u64, mean: f64, sd: f64) -> Result<Self> {
        Self::new(n, mean, sd * sd)
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    /// E(Y²) implied by the mean and variance.
    pub fn second_moment(&self) -> f64 {
        self.variance + self.mean * self.mean
    }

    pub fn check(&self, path: &str) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.n < 2 {
            out.push(Diagnostic::error(format!("{path}.n"), "must be at least 2"));
        }
        if !self.mean.is_finite() {
            out.push(Diagnostic::error(format!("{path}.mean"), "must be finite"));
        }
        if !self.variance.is_finite() {
            out.push(Diagnostic::error(format!("{path}.variance"), "must be finite"));
        } else if self.variance < 0.0 {
            out.push(Diagnostic::error(format!("{path}.variance"), "must be ≥ 0"));
        }
        out
    }
}

/// Structure of the outcome scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", from = "SpaceRepr")]
pub enum OutcomeSpace {
    Unbounded,
    #[serde(rename = "range")]
    BoundedRange { min: f64, max: f64 },
    #[serde(rename = "finite")]
    FiniteSupport { values: Vec<f64> },
    /// Shorthand for the support {0, 1}.
    Binary,
}

// Serde lets unit variants of tagged enums accept stray fields; empty struct
// variants reject them.
#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SpaceRepr {
    Unbounded {},
    Range { min: f64, max: f64 },
    Finite { values: Vec<f64> },
    Binary {},
}

impl From<SpaceRepr> for OutcomeSpace {
    fn from(r: SpaceRepr) -> Self {
        match r {
            SpaceRepr::Unbounded {} => OutcomeSpace::Unbounded,
            SpaceRepr::Range { min, max } => OutcomeSpace::BoundedRange { min, max },
            SpaceRepr::Finite { values } => OutcomeSpace::FiniteSupport { values },
            SpaceRepr::Binary {} => OutcomeSpace::Binary,
        }
    }
}

impl OutcomeSpace {
    pub fn bounded_range(min: f64, max: f64) -> Result<Self> {
        let space = OutcomeSpace::BoundedRange { min, max };
        space.into_checked()
    }

    pub fn finite(values: Vec<f64>) -> Result<Self> {
        OutcomeSpace::FiniteSupport { values }.into_checked()
    }

    /// Integer rating scale `lo, lo+1, ..., hi`.
    pub fn integer_scale(lo: i64, hi: i64) -> Result<Self> {
        Self::finite((lo..=hi).map(|v| v as f64).collect())
    }

    fn into_checked(self) -> Result<Self> {
        let diags = self.check("outcome_space");
        if diags.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidInput(diags))
        }
    }

    pub fn check(&self, path: &str) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        match self {
            OutcomeSpace::Unbounded | OutcomeSpace::Binary => {}
            OutcomeSpace::BoundedRange { min, max } => {
                if !(min.is_finite() && max.is_finite()) {
                    out.push(Diagnostic::error(path, "range endpoints must be finite"));
                } else if min >= max {
                    out.push(Diagnostic::error(format!("{path}.min"), "must be < max"));
                }
            }
            OutcomeSpace::FiniteSupport { values } => {
                if values.len() < 2 {
                    out.push(Diagnostic::error(
                        format!("{path}.values"),
                        "support needs at least 2 values",
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    out.push(Diagnostic::error(format!("{path}.values"), "values must be finite"));
                } else if values.windows(2).any(|w| w[0] >= w[1]) {
                    out.push(Diagnostic::error(
                        format!("{path}.values"),
                        "values must be strictly increasing",
                    ));
                }
            }
        }
        out
    }

    /// Logical range `(m, M)`, if the space is bounded.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match self {
            OutcomeSpace::Unbounded => None,
            OutcomeSpace::BoundedRange { min, max } => Some((*min, *max)),
            OutcomeSpace::FiniteSupport { values } => {
                Some((*values.first()?, *values.last()?))
            }
            OutcomeSpace::Binary => Some((0.0, 1.0)),
        }
    }

    /// Support points for finite spaces.
    pub fn support(&self) -> Option<Cow<'_, [f64]>> {
        match self {
            OutcomeSpace::FiniteSupport { values } => Some(Cow::Borrowed(values)),
            OutcomeSpace::Binary => Some(Cow::Owned(vec![0.0, 1.0])),
            _ => None,
        }
    }

    pub fn is_binary(&self) -> bool {
        match self {
            OutcomeSpace::Binary => true,
            OutcomeSpace::FiniteSupport { values } => values.as_slice() == [0.0, 1.0],
            _ => false,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            OutcomeSpace::Unbounded => "unbounded",
            OutcomeSpace::BoundedRange { .. } => "range",
            OutcomeSpace::FiniteSupport { .. } => "finite",
            OutcomeSpace::Binary => "binary",
        }
    }

    /// The reflection that turns "lower is better" into "higher is better".
    pub fn reflect_value(&self, y: f64) -> f64 {
        match self.bounds() {
            None => -y,
            Some((m, big_m)) => (big_m + m) - y,
        }
    }

    fn reflected(&self) -> OutcomeSpace {
        match self {
            OutcomeSpace::FiniteSupport { values } => OutcomeSpace::FiniteSupport {
                values: values.iter().rev().map(|&y| self.reflect_value(y)).collect(),
            },
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

impl Direction {
    fn flipped(self) -> Self {
        match self {
            Direction::HigherBetter => Direction::LowerBetter,
            Direction::LowerBetter => Direction::HigherBetter,
        }
    }
}

/// Two arm summaries on a declared outcome space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    /// Control arm (Y⁰).
    pub arm0: ArmSummary,
    /// Treatment arm (Y¹).
    pub arm1: ArmSummary,
    pub space: OutcomeSpace,
    pub direction: Direction,
    /// Set when the outcome scale has been reflected relative to the input.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reflected: bool,
}

impl TrialSummary {
    pub fn new(
        arm0: ArmSummary,
        arm1: ArmSummary,
        space: OutcomeSpace,
        direction: Direction,
    ) -> Self {
        TrialSummary {
            arm0,
            arm1,
            space,
            direction,
            reflected: false,
        }
    }

    pub fn arm(&self, a: Arm) -> &ArmSummary {
        match a {
            Arm::Control => &self.arm0,
            Arm::Treatment => &self.arm1,
        }
    }

    /// E(Δ) = E(Y¹) − E(Y⁰).
    pub fn mean_effect(&self) -> f64 {
        self.arm1.mean - self.arm0.mean
    }

    /// The arm with the larger mean; treatment wins ties.
    pub fn better_arm(&self) -> Arm {
        if self.arm1.mean >= self.arm0.mean {
            Arm::Treatment
        } else {
            Arm::Control
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Control,
    Treatment,
}

impl Arm {
    pub fn other(self) -> Arm {
        match self {
            Arm::Control => Arm::Treatment,
            Arm::Treatment => Arm::Control,
        }
    }
}

/// Reflect the outcome scale, toggling both the direction and the `reflected` flag.
pub fn reflect(trial: &TrialSummary) -> TrialSummary {
    let map = |arm: &ArmSummary| ArmSummary {
        n: arm.n,
        mean: trial.space.reflect_value(arm.mean),
        variance: arm.variance,
    };
    TrialSummary {
        arm0: map(&trial.arm0),
        arm1: map(&trial.arm1),
        space: trial.space.reflected(),
        direction: trial.direction.flipped(),
        reflected: !trial.reflected,
    }
}

/// Returns an equivalent summary in which larger outcomes are better.
pub fn normalize_direction(trial: &TrialSummary) -> TrialSummary {
    match trial.direction {
        Direction::HigherBetter => trial.clone(),
        Direction::LowerBetter => reflect(trial),
    }
}

/// All invariant violations of a trial summary; empty means valid.
pub fn validate(trial: &TrialSummary) -> Vec<Diagnostic> {
    validate_with_tolerance(trial, 0.0)
}

/// As [`validate`], with moment-consistency checks loosened by `slack`
/// (relative to `max(1, |rhs|)`), matching the LP relaxation semantics.
pub fn validate_with_tolerance(trial: &TrialSummary, slack: f64) -> Vec<Diagnostic> {
    let mut out = trial.space.check("outcome_space");
    for (name, arm) in [("control", &trial.arm0), ("treatment", &trial.arm1)] {
        let path = format!("arms.{name}");
        let arm_diags = arm.check(&path);
        let structurally_ok = arm_diags.is_empty();
        out.extend(arm_diags);
        if structurally_ok && out.iter().all(|d| !d.path.starts_with("outcome_space")) {
            out.extend(moment_consistency(&trial.space, arm, &path, slack));
        }
    }
    out
}

/// Structural checks only: outcome space and per-arm field domains.
pub fn structural_diagnostics(trial: &TrialSummary) -> Vec<Diagnostic> {
    let mut out = trial.space.check("outcome_space");
    out.extend(trial.arm0.check("arms.control"));
    out.extend(trial.arm1.check("arms.treatment"));
    out
}

fn moment_consistency(
    space: &OutcomeSpace,
    arm: &ArmSummary,
    path: &str,
    slack: f64,
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let Some((m, big_m)) = space.bounds() else {
        return out;
    };
    let mu = arm.mean;
    let mean_tol = CONSISTENCY_TOL * (big_m - m) + slack * mu.abs().max(1.0);
    if mu < m - mean_tol || mu > big_m + mean_tol {
        out.push(Diagnostic::error(
            format!("{path}.mean"),
            format!("mean {mu} outside range [{m}, {big_m}]"),
        ));
        return out;
    }
    let var_tol = CONSISTENCY_TOL * (big_m - m).powi(2)
        + slack * arm.second_moment().abs().max(1.0);
    let max_var = (big_m - mu) * (mu - m);
    if arm.variance > max_var + var_tol {
        out.push(Diagnostic::error(
            format!("{path}.variance"),
            format!(
                "variance {} exceeds (M−μ)(μ−m)={} for mean {mu} on [{m}, {big_m}]",
                arm.variance, max_var
            ),
        ));
    }
    if let Some(support) = space.support() {
        // A mean strictly between two adjacent support points forces some spread.
        let min_var = support
            .windows(2)
            .find(|w| w[0] <= mu && mu <= w[1])
            .map(|w| (mu - w[0]) * (w[1] - mu))
            .unwrap_or(0.0);
        if arm.variance < min_var - var_tol {
            out.push(Diagnostic::error(
                format!("{path}.variance"),
                format!(
                    "variance {} below the minimum {} attainable on the support with mean {mu}",
                    arm.variance, min_var
                ),
            ));
        }
    }
    out
}

/// Fails with [`Error::InvalidInput`] unless every diagnostic is a warning.
pub fn require_valid(diags: Vec<Diagnostic>) -> Result<Vec<Diagnostic>> {
    if diags.iter().any(|d| d.severity == Severity::Error) {
        Err(Error::InvalidInput(diags))
    } else {
        Ok(diags)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub label: String,
    pub prob: f64,
    pub trial: TrialSummary,
}

/// Summaries reported within levels of a baseline covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedSummary {
    pub strata: Vec<Stratum>,
}

impl StratifiedSummary {
    /// Checks shared space and direction, and renormalizes probabilities that
    /// do not sum to one (reported as a warning).
    pub fn new(mut strata: Vec<Stratum>) -> Result<(Self, Vec<Diagnostic>)> {
        let mut diags = Vec::new();
        if strata.is_empty() {
            return Err(Error::InvalidInput(vec![Diagnostic::error(
                "strata",
                "at least one stratum required",
            )]));
        }
        if strata.len() < 2 {
            diags.push(Diagnostic::warning(
                "strata",
                "only one stratum; stratified bounds reduce to the unstratified ones",
            ));
        }
        let first = &strata[0].trial;
        for (i, s) in strata.iter().enumerate() {
            if !(s.prob > 0.0 && s.prob <= 1.0) {
                diags.push(Diagnostic::error(
                    format!("strata[{i}].prob"),
                    "must lie in (0, 1]",
                ));
            }
            if s.trial.space != first.space {
                diags.push(Diagnostic::error(
                    format!("strata[{i}].outcome_space"),
                    "all strata must share one outcome space",
                ));
            }
            if s.trial.direction != first.direction {
                diags.push(Diagnostic::error(
                    format!("strata[{i}].direction"),
                    "all strata must share one direction",
                ));
            }
        }
        let mut diags = require_valid(diags)?;
        let total: f64 = strata.iter().map(|s| s.prob).sum();
        if (total - 1.0).abs() > 1e-6 {
            diags.push(Diagnostic::warning(
                "strata",
                format!("probabilities sum to {total}; renormalized to 1"),
            ));
            for s in &mut strata {
                s.prob /= total;
            }
        }
        Ok((StratifiedSummary { strata }, diags))
    }

    pub fn direction(&self) -> Direction {
        self.strata[0].trial.direction
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.strata[0].trial.space
    }

    pub fn normalized(&self) -> StratifiedSummary {
        StratifiedSummary {
            strata: self
                .strata
                .iter()
                .map(|s| Stratum {
                    label: s.label.clone(),
                    prob: s.prob,
                    trial: normalize_direction(&s.trial),
                })
                .collect(),
        }
    }

    /// Marginal arm means by the law of total expectation.
    pub fn marginal_means(&self) -> (f64, f64) {
        self.strata.iter().fold((0.0, 0.0), |(m0, m1), s| {
            (m0 + s.prob * s.trial.arm0.mean, m1 + s.prob * s.trial.arm1.mean)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn warning(path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.path, self.message)
    }
}

/// Which bound produced an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    HetGeneral,
    HetBounded,
    HetStratified,
    BenefitLp,
    BenefitClosedForm,
    BenefitBinaryClosedForm,
    BenefitStratifiedLp,
    BenefitStratifiedClosedForm,
    CiHeterogeneity,
    UcbBenefitClosedForm,
    CiBenefitLp,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Outcome,
    OutcomeSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub method: BoundMethod,
    pub units: Units,
}

impl Interval {
    pub fn new(lower: f64, upper: f64, method: BoundMethod, units: Units) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower > upper + 1e-12 {
            return Err(Error::Numerical(format!(
                "{method:?} produced an inverted interval [{lower}, {upper}]"
            )));
        }
        Ok(Interval {
            lower,
            upper,
            method,
            units,
        })
    }

    pub fn contains(&self, other: &Interval, tol: f64) -> bool {
        self.lower <= other.lower + tol && self.upper >= other.upper - tol
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}
