//! Study input documents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{MeanSeConvention, MomentSet, VarianceConvention};
use crate::model::{
    ArmSummary, Diagnostic, Direction, OutcomeSpace, Severity, StratifiedSummary, Stratum,
    TrialSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    pub alpha: f64,
    pub relax_eps: f64,
    pub mean_se: MeanSeConvention,
    pub variance_convention: VarianceConvention,
    pub format: OutputFormat,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            alpha: 0.05,
            relax_eps: 0.0,
            mean_se: MeanSeConvention::Standard,
            variance_convention: VarianceConvention::Sample,
            format: OutputFormat::Text,
        }
    }
}

/// One arm as written in a study document: summary statistics
/// (`variance` or `sd`) or individual outcomes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmsInput {
    pub control: ArmInput,
    pub treatment: ArmInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumInput {
    pub label: String,
    pub prob: f64,
    pub arms: ArmsInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyDocument {
    pub outcome_space: OutcomeSpace,
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arms: Option<ArmsInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strata: Option<Vec<StratumInput>>,
    #[serde(default)]
    pub options: Options,
}

/// A parsed, structurally valid study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyInput {
    pub trial: TrialSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strata: Option<StratifiedSummary>,
    /// Exact sample moments when both arms supplied individual outcomes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentSet>,
    pub options: Options,
    pub diagnostics: Vec<Diagnostic>,
}

impl StudyInput {
    /// Moments for inference: exact when outcomes were given, summary-only otherwise.
    pub fn moment_set(&self) -> Result<MomentSet> {
        match self.moments {
            Some(m) => Ok(m),
            None => MomentSet::from_trial(&self.trial),
        }
    }
}

/// Parse and structurally validate a study document. Syntax and type errors
/// carry the offending field path; domain errors carry one diagnostic per field.
pub fn parse_study(text: &[u8]) -> Result<StudyInput> {
    let de = &mut serde_json::Deserializer::from_slice(text);
    let doc: StudyDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            path: if path == "." { String::new() } else { path },
            message: inner.to_string(),
        }
    })?;
    build_study(doc)
}

struct BuiltArm {
    summary: ArmSummary,
    outcomes: Option<Vec<f64>>,
}

fn build_arm(
    arm: &ArmInput,
    path: &str,
    conv: VarianceConvention,
    space: &OutcomeSpace,
    diags: &mut Vec<Diagnostic>,
) -> Option<BuiltArm> {
    let before = diags.len();
    if let Some(ys) = &arm.outcomes {
        for (field, present) in [
            ("n", arm.n.is_some()),
            ("mean", arm.mean.is_some()),
            ("variance", arm.variance.is_some()),
            ("sd", arm.sd.is_some()),
        ] {
            if present {
                diags.push(Diagnostic::error(
                    format!("{path}.{field}"),
                    "not allowed together with outcomes",
                ));
            }
        }
        if ys.iter().any(|y| !y.is_finite()) {
            diags.push(Diagnostic::error(format!("{path}.outcomes"), "values must be finite"));
        }
        if ys.len() < 2 {
            diags.push(Diagnostic::error(format!("{path}.outcomes"), "need at least 2 outcomes"));
        }
        if diags.len() > before {
            return None;
        }
        let m = MomentSet::from_outcomes(ys, ys, conv).ok()?;
        if let Some((lo, hi)) = space.bounds() {
            if ys.iter().any(|&y| y < lo || y > hi) {
                diags.push(Diagnostic::error(
                    format!("{path}.outcomes"),
                    format!("values must lie in [{lo}, {hi}]"),
                ));
            }
        }
        if let Some(support) = space.support() {
            if ys.iter().any(|y| !support.contains(y)) {
                diags.push(Diagnostic::error(
                    format!("{path}.outcomes"),
                    "values must belong to the declared support",
                ));
            }
        }
        let a = m.arm0;
        return Some(BuiltArm {
            summary: ArmSummary { n: a.n, mean: a.mean, variance: a.variance },
            outcomes: Some(ys.clone()),
        });
    }
    let variance = match (arm.variance, arm.sd) {
        (Some(v), None) => Some(v),
        (None, Some(sd)) => {
            if sd < 0.0 {
                diags.push(Diagnostic::error(format!("{path}.sd"), "must be ≥ 0"));
            }
            Some(sd * sd)
        }
        (Some(_), Some(_)) => {
            diags.push(Diagnostic::error(path, "give either variance or sd, not both"));
            None
        }
        (None, None) => {
            diags.push(Diagnostic::error(format!("{path}.variance"), "missing field (or give sd)"));
            None
        }
    };
    if arm.n.is_none() {
        diags.push(Diagnostic::error(format!("{path}.n"), "missing field"));
    }
    if arm.mean.is_none() {
        diags.push(Diagnostic::error(format!("{path}.mean"), "missing field"));
    }
    let (Some(n), Some(mean), Some(variance)) = (arm.n, arm.mean, variance) else {
        return None;
    };
    let summary = ArmSummary { n, mean, variance };
    diags.extend(summary.check(path));
    (diags.len() == before).then_some(BuiltArm { summary, outcomes: None })
}

fn build_arms(
    arms: &ArmsInput,
    path: &str,
    doc: &StudyDocument,
    diags: &mut Vec<Diagnostic>,
) -> Option<(TrialSummary, Option<MomentSet>)> {
    let conv = doc.options.variance_convention;
    let c = build_arm(&arms.control, &format!("{path}.control"), conv, &doc.outcome_space, diags);
    let t = build_arm(&arms.treatment, &format!("{path}.treatment"), conv, &doc.outcome_space, diags);
    let (c, t) = (c?, t?);
    let trial = TrialSummary::new(c.summary, t.summary, doc.outcome_space.clone(), doc.direction);
    let moments = match (c.outcomes, t.outcomes) {
        (Some(y0), Some(y1)) => {
            // Inference runs on the higher-is-better scale.
            let flip = |ys: Vec<f64>| -> Vec<f64> {
                match doc.direction {
                    Direction::HigherBetter => ys,
                    Direction::LowerBetter => {
                        ys.into_iter().map(|y| doc.outcome_space.reflect_value(y)).collect()
                    }
                }
            };
            MomentSet::from_outcomes(&flip(y0), &flip(y1), conv).ok()
        }
        (None, None) => None,
        _ => {
            diags.push(Diagnostic::warning(
                path,
                "outcomes given for one arm only; inference uses summary statistics",
            ));
            None
        }
    };
    Some((trial, moments))
}

/// Marginal arm summaries implied by the strata (law of total mean and variance).
fn marginal_from_strata(strat: &StratifiedSummary) -> TrialSummary {
    let first = &strat.strata[0].trial;
    let pool = |pick: fn(&TrialSummary) -> &ArmSummary| {
        let mean: f64 = strat.strata.iter().map(|s| s.prob * pick(&s.trial).mean).sum();
        let second: f64 =
            strat.strata.iter().map(|s| s.prob * pick(&s.trial).second_moment()).sum();
        let n: u64 = strat.strata.iter().map(|s| pick(&s.trial).n).sum();
        ArmSummary { n, mean, variance: (second - mean * mean).max(0.0) }
    };
    TrialSummary::new(
        pool(|t| &t.arm0),
        pool(|t| &t.arm1),
        first.space.clone(),
        first.direction,
    )
}

fn build_study(doc: StudyDocument) -> Result<StudyInput> {
    let mut diags = doc.outcome_space.check("outcome_space");
    let o = &doc.options;
    if !(o.alpha > 0.0 && o.alpha < 1.0) {
        diags.push(Diagnostic::error("options.alpha", "must lie in (0, 1)"));
    }
    if !(o.relax_eps.is_finite() && o.relax_eps >= 0.0) {
        diags.push(Diagnostic::error("options.relax_eps", "must be ≥ 0"));
    }
    if doc.arms.is_none() && doc.strata.is_none() {
        diags.push(Diagnostic::error("arms", "missing field (or give strata)"));
    }
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(Error::InvalidInput(diags));
    }

    let marginal = doc
        .arms
        .as_ref()
        .map(|arms| build_arms(arms, "arms", &doc, &mut diags));

    let mut strata = None;
    if let Some(list) = &doc.strata {
        let mut built = Vec::with_capacity(list.len());
        for (i, s) in list.iter().enumerate() {
            if let Some((trial, _)) = build_arms(&s.arms, &format!("strata[{i}].arms"), &doc, &mut diags) {
                built.push(Stratum { label: s.label.clone(), prob: s.prob, trial });
            }
        }
        if built.len() == list.len() {
            match StratifiedSummary::new(built) {
                Ok((st, d)) => {
                    diags.extend(d);
                    strata = Some(st);
                }
                Err(Error::InvalidInput(d)) => diags.extend(d),
                Err(e) => return Err(e),
            }
        }
    }
    if diags.iter().any(|d| d.severity == Severity::Error) {
        return Err(Error::InvalidInput(diags));
    }

    let (trial, moments) = match marginal {
        Some(Some(built)) => built,
        Some(None) => unreachable!("arm errors were reported above"),
        None => {
            let st = strata.as_ref().expect("strata present when arms are absent");
            diags.push(Diagnostic::warning(
                "arms",
                "marginal arms derived from the strata by the laws of total mean and variance",
            ));
            (marginal_from_strata(st), None)
        }
    };
    Ok(StudyInput {
        trial,
        strata,
        moments,
        options: doc.options,
        diagnostics: diags,
    })
}
