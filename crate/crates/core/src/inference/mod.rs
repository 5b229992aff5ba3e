//! Plug-in estimates and large-sample confidence intervals for the bounds.

mod quantile;

use serde::{Deserialize, Serialize};

use crate::benefit::{benefit_lp, MomentBox, MomentRange};
use crate::error::{Error, Result};
use crate::lp::{solve, LpStatus, Sense};
use crate::model::{
    normalize_direction, BoundMethod, Diagnostic, Interval, OutcomeSpace, TrialSummary, Units,
};

pub use quantile::{normal_cdf, normal_quantile};

/// Higher sample moments, available only with individual-level outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HigherMoments {
    /// Third central moment (divisor n).
    pub central3: f64,
    /// Fourth central moment (divisor n).
    pub central4: f64,
    /// Third raw moment E(Y³).
    pub raw3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmMoments {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub higher: Option<HigherMoments>,
}

impl ArmMoments {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn second_moment(&self) -> f64 {
        self.variance + self.mean * self.mean
    }
}

/// Divisor used when summarizing individual outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceConvention {
    /// n − 1
    #[default]
    Sample,
    /// n
    Population,
}

/// Sample statistics for both arms on a higher-is-better scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub arm0: ArmMoments,
    pub arm1: ArmMoments,
}

fn check_arm(a: &ArmMoments, path: &str, out: &mut Vec<Diagnostic>) {
    if a.n < 2 {
        out.push(Diagnostic::error(format!("{path}.n"), "inference needs n ≥ 2"));
    }
    if !a.mean.is_finite() {
        out.push(Diagnostic::error(format!("{path}.mean"), "must be finite"));
    }
    if !(a.variance.is_finite() && a.variance >= 0.0) {
        out.push(Diagnostic::error(format!("{path}.variance"), "must be finite and ≥ 0"));
    }
}

impl MomentSet {
    pub fn new(arm0: ArmMoments, arm1: ArmMoments) -> Result<Self> {
        let mut diags = Vec::new();
        check_arm(&arm0, "arms.control", &mut diags);
        check_arm(&arm1, "arms.treatment", &mut diags);
        if diags.is_empty() {
            Ok(MomentSet { arm0, arm1 })
        } else {
            Err(Error::InvalidInput(diags))
        }
    }

    /// Summary statistics only, after direction normalization.
    pub fn from_trial(trial: &TrialSummary) -> Result<Self> {
        let t = normalize_direction(trial);
        let arm = |a: &crate::model::ArmSummary| ArmMoments {
            n: a.n,
            mean: a.mean,
            variance: a.variance,
            higher: None,
        };
        MomentSet::new(arm(&t.arm0), arm(&t.arm1))
    }

    /// Exact moments from individual outcomes, already on a higher-is-better scale.
    pub fn from_outcomes(y0: &[f64], y1: &[f64], conv: VarianceConvention) -> Result<Self> {
        MomentSet::new(summarize(y0, conv), summarize(y1, conv))
    }

    pub fn total_n(&self) -> f64 {
        (self.arm0.n + self.arm1.n) as f64
    }

    /// Allocation ratios (r₀, r₁).
    pub fn ratios(&self) -> (f64, f64) {
        let total = self.total_n();
        (self.arm0.n as f64 / total, self.arm1.n as f64 / total)
    }

    /// Ȳ¹ − Ȳ⁰.
    pub fn delta_bar(&self) -> f64 {
        self.arm1.mean - self.arm0.mean
    }

    /// s₁ / s₀.
    pub fn nu_hat(&self) -> f64 {
        self.arm1.sd() / self.arm0.sd()
    }

    pub fn has_higher_moments(&self) -> bool {
        self.arm0.higher.is_some() && self.arm1.higher.is_some()
    }

    /// Arms swapped so that arm 1 has the larger mean (arm 1 kept on ties).
    pub fn oriented(&self) -> MomentSet {
        if self.arm1.mean >= self.arm0.mean {
            *self
        } else {
            MomentSet { arm0: self.arm1, arm1: self.arm0 }
        }
    }

    /// Plug-in var(Δ) bounds (s₁ − s₀)², (s₁ + s₀)².
    pub fn het_point(&self) -> (f64, f64) {
        let (s0, s1) = (self.arm0.sd(), self.arm1.sd());
        ((s1 - s0).powi(2), (s1 + s0).powi(2))
    }

    /// Plug-in closed-form benefit bound ½·√(s₀²(ν̂+1)² + Δ̄²).
    pub fn benefit_point(&self) -> f64 {
        0.5 * self.benefit_denominator().sqrt()
    }

    fn benefit_denominator(&self) -> f64 {
        (self.arm0.sd() + self.arm1.sd()).powi(2) + self.delta_bar().powi(2)
    }

    fn require_positive_sd(&self) -> Result<()> {
        let mut diags = Vec::new();
        for (name, a) in [("control", &self.arm0), ("treatment", &self.arm1)] {
            if a.variance <= 0.0 {
                diags.push(Diagnostic::error(
                    format!("arms.{name}.variance"),
                    "asymptotic variance formulas need a positive variance in both arms",
                ));
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(diags))
        }
    }
}

fn summarize(y: &[f64], conv: VarianceConvention) -> ArmMoments {
    let n = y.len();
    let nf = n as f64;
    let mean = y.iter().sum::<f64>() / nf;
    let c = |k: i32| y.iter().map(|v| (v - mean).powi(k)).sum::<f64>() / nf;
    let ss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let variance = match conv {
        VarianceConvention::Sample if n > 1 => ss / (nf - 1.0),
        _ => ss / nf,
    };
    ArmMoments {
        n: n as u64,
        mean,
        variance,
        higher: Some(HigherMoments {
            central3: c(3),
            central4: c(4),
            raw3: y.iter().map(|v| v.powi(3)).sum::<f64>() / nf,
        }),
    }
}

/// How the fourth (and third) moments entering the asymptotic variances are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MomentMode {
    /// Sample higher moments from individual outcomes.
    Exact,
    /// Moment bounds implied by an outcome range [min, max].
    Bounded { min: f64, max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMode {
    ExactMoments,
    SummaryConservative,
}

/// Half-width convention for the mean intervals of the LP confidence region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanSeConvention {
    /// s/√n
    #[default]
    Standard,
    /// s²/√n
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

fn named(name: &str, value: f64) -> NamedValue {
    NamedValue { name: name.to_string(), value }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub level: f64,
    pub z: f64,
}

fn quantile(level: f64) -> Result<Quantile> {
    Ok(Quantile { level, z: normal_quantile(level)? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiReport {
    pub interval: Interval,
    pub alpha: f64,
    pub mode: CiMode,
    pub tau_values: Vec<NamedValue>,
    pub quantiles_used: Vec<Quantile>,
    pub diagnostics: Vec<Diagnostic>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(alpha))
    }
}

fn fourth_moment_bound(a: &ArmMoments, min: f64, max: f64) -> f64 {
    (max - a.mean).powi(2).max((min - a.mean).powi(2)) * a.variance
}

/// Asymptotic variances (τ⁻, τ⁺) of the plug-in var(Δ) bounds.
pub fn tau_het(mom: &MomentSet, mode: MomentMode) -> Result<(f64, f64)> {
    mom.require_positive_sd()?;
    let (r0, r1) = mom.ratios();
    let nu = mom.nu_hat();
    let (v0, v1) = (mom.arm0.variance, mom.arm1.variance);
    let (k0, k1) = match mode {
        MomentMode::Exact => {
            let h0 = mom.arm0.higher.ok_or(Error::MissingMoments(0))?;
            let h1 = mom.arm1.higher.ok_or(Error::MissingMoments(1))?;
            (h0.central4 / r0 - v0 * v0, h1.central4 / r1 - v1 * v1)
        }
        MomentMode::Bounded { min, max } => (
            fourth_moment_bound(&mom.arm0, min, max) / r0 - v0 * v0,
            fourth_moment_bound(&mom.arm1, min, max) / r1 - v1 * v1,
        ),
    };
    let f = |z: f64| k1 * (1.0 / nu + z).powi(2) + k0 * (nu + z).powi(2);
    Ok((f(-1.0), f(1.0)))
}

fn mode_for(mom: &MomentSet, space: &OutcomeSpace) -> Result<(MomentMode, CiMode)> {
    if mom.has_higher_moments() {
        return Ok((MomentMode::Exact, CiMode::ExactMoments));
    }
    match space.bounds() {
        Some((min, max)) => Ok((MomentMode::Bounded { min, max }, CiMode::SummaryConservative)),
        None => Err(Error::UnsupportedSpace {
            required: "a bounded outcome space or individual-level outcomes",
            got: space.kind().to_string(),
        }),
    }
}

/// Two-sided interval covering both var(Δ) bounds.
pub fn ci_heterogeneity(mom: &MomentSet, space: &OutcomeSpace, alpha: f64) -> Result<CiReport> {
    check_alpha(alpha)?;
    let (mode, ci_mode) = mode_for(mom, space)?;
    ci_heterogeneity_with(mom, mode, ci_mode, alpha)
}

fn ci_heterogeneity_with(
    mom: &MomentSet,
    mode: MomentMode,
    ci_mode: CiMode,
    alpha: f64,
) -> Result<CiReport> {
    let (tau_minus, tau_plus) = tau_het(mom, mode)?;
    let q = quantile(1.0 - alpha / 2.0)?;
    let n = mom.total_n();
    let (lo, hi) = mom.het_point();
    let lower = (lo - q.z * (tau_minus.max(0.0) / n).sqrt()).max(0.0);
    let upper = hi + q.z * (tau_plus.max(0.0) / n).sqrt();
    Ok(CiReport {
        interval: Interval::new(lower, upper, BoundMethod::CiHeterogeneity, Units::OutcomeSquared)?,
        alpha,
        mode: ci_mode,
        tau_values: vec![named("tau_het_minus", tau_minus), named("tau_het_plus", tau_plus)],
        quantiles_used: vec![q],
        diagnostics: Vec::new(),
    })
}

/// Conservative plug-in estimate of τ_ben from summary statistics and the
/// outcome range, evaluated term by term as published. Arms are oriented so
/// that arm 1 has the larger mean.
pub fn tau_ben_bound(mom: &MomentSet, min: f64, max: f64) -> Result<f64> {
    mom.require_positive_sd()?;
    let m = mom.oriented();
    let h = m.benefit_denominator();
    if h <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let (r0, r1) = m.ratios();
    let nu = m.nu_hat();
    let d = m.delta_bar();
    let (a0, a1) = (&m.arm0, &m.arm1);
    let (v0, v1) = (a0.variance, a1.variance);
    let big = max.abs().max(min.abs());
    let t1 = (fourth_moment_bound(a1, min, max) / r1 - v1 * v1) * (1.0 + 1.0 / nu).powi(2);
    let t2 = (fourth_moment_bound(a0, min, max) / r0 - v0 * v0) * (1.0 + nu).powi(2);
    let t3 = 4.0 * (a1.second_moment() / r1 + a0.second_moment() / r0 - d * d) * d * d;
    let t4 = 4.0
        * ((big * a1.second_moment() - 2.0 * a1.mean * v1 - a1.mean.powi(3)) / r1 - d * v1)
        * d
        * (1.0 + 1.0 / nu);
    let t5 = 4.0
        * ((big * a0.second_moment() + 2.0 * a0.mean * v0 + a0.mean.powi(3)) / r0 - d * v0)
        * d
        * (1.0 + nu);
    Ok((t1 + t2 + t3 + t4 + t5) / (16.0 * h))
}

/// Delta-method τ_ben from exact sample moments:
/// Σₐ (1/rₐ)[cₐ²(μ₄ₐ − sₐ⁴) + 4Δ̄²sₐ² ± 4Δ̄cₐμ₃ₐ] / (16h), c₁ = 1 + ν̂⁻¹, c₀ = 1 + ν̂.
pub fn tau_ben_exact(mom: &MomentSet) -> Result<f64> {
    mom.require_positive_sd()?;
    let m = mom.oriented();
    let h0 = m.arm0.higher.ok_or(Error::MissingMoments(0))?;
    let h1 = m.arm1.higher.ok_or(Error::MissingMoments(1))?;
    let h = m.benefit_denominator();
    if h <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let (r0, r1) = m.ratios();
    let nu = m.nu_hat();
    let d = m.delta_bar();
    let (c0, c1) = (1.0 + nu, 1.0 + 1.0 / nu);
    let (v0, v1) = (m.arm0.variance, m.arm1.variance);
    let arm1 = (c1 * c1 * (h1.central4 - v1 * v1) + 4.0 * d * d * v1 + 4.0 * d * c1 * h1.central3) / r1;
    let arm0 = (c0 * c0 * (h0.central4 - v0 * v0) + 4.0 * d * d * v0 - 4.0 * d * c0 * h0.central3) / r0;
    Ok((arm0 + arm1) / (16.0 * h))
}

/// One-sided upper confidence bound on the closed-form benefit bound.
pub fn ucb_benefit_closed(mom: &MomentSet, space: &OutcomeSpace, alpha: f64) -> Result<CiReport> {
    check_alpha(alpha)?;
    let (mode, ci_mode) = mode_for(mom, space)?;
    let tau = match mode {
        MomentMode::Exact => tau_ben_exact(mom)?,
        MomentMode::Bounded { min, max } => tau_ben_bound(mom, min, max)?,
    };
    let q = quantile(1.0 - alpha)?;
    let upper = mom.benefit_point() + q.z * (tau.max(0.0) / mom.total_n()).sqrt();
    Ok(CiReport {
        interval: Interval::new(0.0, upper, BoundMethod::UcbBenefitClosedForm, Units::Outcome)?,
        alpha,
        mode: ci_mode,
        tau_values: vec![named("tau_ben", tau)],
        quantiles_used: vec![q],
        diagnostics: Vec::new(),
    })
}

/// Upper bound on the standard deviation of Y² from summary statistics.
pub fn gamma(a: &ArmMoments, min: f64, max: f64) -> f64 {
    let (y, v) = (a.mean, a.variance);
    let g2 = fourth_moment_bound(a, min, max) - v * v
        + 4.0 * y.abs() * max.abs().max(min.abs()) * (v + y * y)
        - 8.0 * v * y * y
        - 4.0 * y.powi(4);
    g2.max(0.0).sqrt()
}

/// Benefit LP re-solved over confidence boxes for each arm's mean and
/// second moment (each at level 1 − α/4), so the result covers the sharp
/// bounds with asymptotic probability ≥ 1 − α.
pub fn ci_benefit_lp(
    mom: &MomentSet,
    space: &OutcomeSpace,
    alpha: f64,
    mean_se: MeanSeConvention,
) -> Result<CiReport> {
    check_alpha(alpha)?;
    let support = space.support().ok_or_else(|| Error::UnsupportedSpace {
        required: "a finite support or binary outcome",
        got: space.kind().to_string(),
    })?;
    let (min, max) = (support[0], support[support.len() - 1]);
    let q = quantile(1.0 - alpha / 8.0)?;
    let m = mom.oriented();
    let mut tau_values = Vec::new();
    let mut make_box = |a: &ArmMoments, label: &str| {
        let rn = (a.n as f64).sqrt();
        let spread = match mean_se {
            MeanSeConvention::Standard => a.sd(),
            MeanSeConvention::AsPrinted => a.variance,
        };
        let mean_hw = q.z * spread / rn;
        let g = gamma(a, min, max);
        let second_hw = q.z * g / rn;
        tau_values.push(named(&format!("mean_half_width_{label}"), mean_hw));
        tau_values.push(named(&format!("gamma_{label}"), g));
        tau_values.push(named(&format!("second_moment_half_width_{label}"), second_hw));
        let range = |c: f64, hw: f64| MomentRange { lo: c - hw, hi: c + hw };
        MomentBox { mean: range(a.mean, mean_hw), second: range(a.second_moment(), second_hw) }
    };
    let worse = make_box(&m.arm0, "worse");
    let better = make_box(&m.arm1, "better");
    let mut ends = [0.0; 2];
    for (slot, sense) in [Sense::Minimize, Sense::Maximize].into_iter().enumerate() {
        let sol = solve(&benefit_lp(&support, better, worse, sense))?;
        match sol.status {
            LpStatus::Optimal => ends[slot] = sol.value.unwrap_or(0.0),
            status => {
                return Err(Error::InfeasibleWidenedLp(format!(
                    "{sense:?} problem returned {status:?}; mean boxes {:?}/{:?}, second-moment boxes {:?}/{:?}",
                    better.mean, worse.mean, better.second, worse.second
                )))
            }
        }
    }
    let diagnostics = vec![match mean_se {
        MeanSeConvention::Standard => Diagnostic::warning(
            "options.mean_se",
            "mean intervals use s/√n; the as-printed convention (s²/√n) is available via --mean-se as-printed",
        ),
        MeanSeConvention::AsPrinted => Diagnostic::warning(
            "options.mean_se",
            "mean intervals use s²/√n as printed, which is not the standard error of a mean",
        ),
    }];
    let lower = ends[0].max(0.0);
    Ok(CiReport {
        interval: Interval::new(lower, ends[1].max(lower), BoundMethod::CiBenefitLp, Units::Outcome)?,
        alpha,
        mode: CiMode::SummaryConservative,
        tau_values,
        quantiles_used: vec![q],
        diagnostics,
    })
}
