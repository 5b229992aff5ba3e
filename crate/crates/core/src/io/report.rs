//! Analysis reports: a structured machine block and a human-readable block.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::benefit::BenefitBound;
use crate::error::{Error, Result};
use crate::heterogeneity::HeterogeneityBound;
use crate::inference::CiReport;
use crate::model::{Diagnostic, Interval, Severity};

use super::study::StudyInput;

pub const TOOL: &str = "otr-bounds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    Heterogeneity { label: String, bound: HeterogeneityBound },
    Benefit { label: String, bound: BenefitBound },
    BenefitUpper { label: String, value: f64 },
    Ci { label: String, report: CiReport },
    Check { label: String, passed: bool, detail: String },
    Note { label: String, message: String },
}

impl Finding {
    pub fn label(&self) -> &str {
        match self {
            Finding::Heterogeneity { label, .. }
            | Finding::Benefit { label, .. }
            | Finding::BenefitUpper { label, .. }
            | Finding::Ci { label, .. }
            | Finding::Check { label, .. }
            | Finding::Note { label, .. } => label,
        }
    }

    /// The interval carried by this finding, if any.
    pub fn interval(&self) -> Option<&Interval> {
        match self {
            Finding::Heterogeneity { bound, .. } => Some(&bound.interval),
            Finding::Benefit { bound, .. } => Some(&bound.interval),
            Finding::Ci { report, .. } => Some(&report.interval),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Seconds since the Unix epoch; absent with `--no-timestamp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<StudyInput>,
    pub findings: Vec<Finding>,
    pub diagnostics: Vec<Diagnostic>,
    pub exit_code: i32,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            generated_at: None,
            input: None,
            findings: Vec::new(),
            diagnostics: Vec::new(),
            exit_code: 0,
        }
    }

    pub fn stamp_now(&mut self) {
        self.generated_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }

    /// Record a failure: its message becomes an error diagnostic and the exit
    /// code is raised to the error's code.
    pub fn fail(&mut self, label: &str, err: &Error) {
        match err {
            Error::InvalidInput(diags) => self.diagnostics.extend(diags.iter().cloned()),
            other => self.diagnostics.push(Diagnostic::error(label, other.to_string())),
        }
        self.exit_code = self.exit_code.max(err.exit_code());
    }

    pub fn find(&self, label: &str) -> Option<&Finding> {
        self.findings.iter().find(|f| f.label() == label)
    }

    pub fn to_machine(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_machine(text: &str) -> Result<Report> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}: {}", self.tool, self.version, self.command);
        if let Some(input) = &self.input {
            let t = &input.trial;
            let _ = writeln!(
                out,
                "outcome space: {}; direction: {}",
                t.space.kind(),
                match t.direction {
                    crate::model::Direction::HigherBetter => "higher is better",
                    crate::model::Direction::LowerBetter => "lower is better",
                }
            );
            for (name, a) in [("control", &t.arm0), ("treatment", &t.arm1)] {
                let _ = writeln!(
                    out,
                    "  {name:<9} n={} mean={} sd={}",
                    a.n,
                    sig6(a.mean),
                    sig6(a.sd())
                );
            }
            if let Some(st) = &input.strata {
                let _ = writeln!(out, "  {} strata", st.strata.len());
            }
        }
        if !self.findings.is_empty() {
            out.push('\n');
        }
        for f in &self.findings {
            let _ = writeln!(out, "{}", render_finding(f));
        }
        if !self.diagnostics.is_empty() {
            out.push('\n');
            for d in &self.diagnostics {
                let tag = match d.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                let _ = writeln!(out, "{tag}: {}: {}", d.path, d.message);
            }
        }
        let _ = writeln!(out, "\nexit code {}", self.exit_code);
        out
    }
}

fn render_interval(iv: &Interval) -> String {
    format!("[{}, {}]", sig6(iv.lower), sig6(iv.upper))
}

fn render_finding(f: &Finding) -> String {
    match f {
        Finding::Heterogeneity { label, bound } => {
            let mut s = format!("{label}: var(Δ) ∈ {}", render_interval(&bound.interval));
            if let Some(nu) = bound.nu {
                let _ = write!(s, "  (ν={})", sig6(nu));
            }
            s
        }
        Finding::Benefit { label, bound } => {
            let mut s = format!(
                "{label}: benefit ∈ {}  (μ_T={}",
                render_interval(&bound.interval),
                sig6(bound.mu_t)
            );
            if let Some(c) = bound.mu_c {
                let _ = write!(s, ", μ_C={}", sig6(c));
            }
            s.push(')');
            s
        }
        Finding::BenefitUpper { label, value } => format!("{label}: benefit ≤ {}", sig6(*value)),
        Finding::Ci { label, report } => format!(
            "{label}: {}% interval {}  ({})",
            sig6(100.0 * (1.0 - report.alpha)),
            render_interval(&report.interval),
            match report.mode {
                crate::inference::CiMode::ExactMoments => "exact moments",
                crate::inference::CiMode::SummaryConservative => "conservative, summary statistics",
            }
        ),
        Finding::Check { label, passed, detail } => {
            format!("{} {label}: {detail}", if *passed { "PASS" } else { "FAIL" })
        }
        Finding::Note { label, message } => format!("{label}: {message}"),
    }
}

/// Six significant digits, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
