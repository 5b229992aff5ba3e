//! `otr-bounds` command-line interface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::benefit::{
    benefit_bounds_binary, benefit_bounds_lp, benefit_bounds_stratified, benefit_upper_closed,
    benefit_upper_closed_stratified,
};
use crate::error::{Error, Result};
use crate::heterogeneity::{
    het_bounds_bounded, het_bounds_general, het_bounds_stratified, PerStratum,
};
use crate::inference::{
    ci_benefit_lp, ci_heterogeneity, ucb_benefit_closed, MeanSeConvention, VarianceConvention,
};
use crate::model::{normalize_direction, validate, Diagnostic, Severity};

use super::report::{Finding, Report};
use super::selfcheck::run_selfcheck;
use super::study::{parse_study, OutputFormat, StudyInput};

#[derive(Debug, Parser)]
#[command(
    name = "otr-bounds",
    version,
    about = "Bounds on treatment-effect heterogeneity and on the benefit of optimal treatment rules from two-arm trial summaries"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds on var(Y¹ − Y⁰).
    Heterogeneity(StudyArgs),
    /// Closed-form benefit bounds.
    Benefit(StudyArgs),
    /// Sharp benefit bounds by linear programming over a finite support.
    BenefitLp(StudyArgs),
    /// Large-sample confidence intervals.
    Ci(StudyArgs),
    /// Check a study document against the model invariants.
    Validate(StudyArgs),
    /// Run built-in fixtures and oracle checks.
    Selfcheck(OutputArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeanSeArg {
    AsPrinted,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VarianceArg {
    Sample,
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Machine,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Omit the generation time so output is byte-for-byte reproducible.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    /// Study document (JSON).
    pub input: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub relax_eps: Option<f64>,
    #[arg(long, value_enum)]
    pub mean_se: Option<MeanSeArg>,
    /// Variance convention applied to individual outcomes.
    #[arg(long, value_enum)]
    pub variance_convention: Option<VarianceArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// The analyses that read a study document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Heterogeneity,
    Benefit,
    BenefitLp,
    Ci,
    Validate,
}

impl Analysis {
    pub const ALL: [Analysis; 5] = [
        Analysis::Heterogeneity,
        Analysis::Benefit,
        Analysis::BenefitLp,
        Analysis::Ci,
        Analysis::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Heterogeneity => "heterogeneity",
            Analysis::Benefit => "benefit",
            Analysis::BenefitLp => "benefit-lp",
            Analysis::Ci => "ci",
            Analysis::Validate => "validate",
        }
    }

    pub fn from_name(name: &str) -> Option<Analysis> {
        Analysis::ALL.into_iter().find(|a| a.name() == name)
    }
}

/// Run one analysis on an in-memory study document, using the options it
/// declares. The report carries no timestamp.
pub fn analyze_document(analysis: Analysis, text: &[u8]) -> Report {
    let mut report = Report::new(analysis.name());
    match parse_study(text) {
        Ok(study) => run_study(analysis, study, &mut report),
        Err(e) => report.fail("input", &e),
    }
    report
}

impl Command {
    fn analysis(&self) -> Option<Analysis> {
        match self {
            Command::Heterogeneity(_) => Some(Analysis::Heterogeneity),
            Command::Benefit(_) => Some(Analysis::Benefit),
            Command::BenefitLp(_) => Some(Analysis::BenefitLp),
            Command::Ci(_) => Some(Analysis::Ci),
            Command::Validate(_) => Some(Analysis::Validate),
            Command::Selfcheck(_) => None,
        }
    }

    pub fn name(&self) -> &'static str {
        self.analysis().map_or("selfcheck", Analysis::name)
    }

    fn output(&self) -> &OutputArgs {
        match self {
            Command::Heterogeneity(a)
            | Command::Benefit(a)
            | Command::BenefitLp(a)
            | Command::Ci(a)
            | Command::Validate(a) => &a.output,
            Command::Selfcheck(o) => o,
        }
    }
}

/// A finished run: the report and how to render it.
#[derive(Debug, Clone)]
pub struct Execution {
    pub report: Report,
    pub format: OutputFormat,
}

impl Execution {
    pub fn render(&self) -> String {
        match self.format {
            OutputFormat::Text => self.report.to_text(),
            OutputFormat::Machine => self.report.to_machine() + "\n",
        }
    }
}

/// Parse arguments, run, print the report and return the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let exec = execute(&cli.command);
    print!("{}", exec.render());
    exec.report.exit_code
}

/// Read the input file, apply flag overrides and run one subcommand.
pub fn execute(command: &Command) -> Execution {
    let mut report = Report::new(command.name());
    let out = command.output();
    let mut format = out.format.map(format_of).unwrap_or_default();
    if !out.no_timestamp {
        report.stamp_now();
    }
    let args = match command {
        Command::Selfcheck(_) => {
            run_selfcheck(&mut report);
            return Execution { report, format };
        }
        Command::Heterogeneity(a)
        | Command::Benefit(a)
        | Command::BenefitLp(a)
        | Command::Ci(a)
        | Command::Validate(a) => a,
    };
    let study = match load(args) {
        Ok(s) => s,
        Err(e) => {
            report.fail("input", &e);
            return Execution { report, format };
        }
    };
    if out.format.is_none() {
        format = study.options.format;
    }
    let analysis = command.analysis().expect("selfcheck returned above");
    run_study(analysis, study, &mut report);
    Execution { report, format }
}

fn format_of(f: FormatArg) -> OutputFormat {
    match f {
        FormatArg::Text => OutputFormat::Text,
        FormatArg::Machine => OutputFormat::Machine,
    }
}

fn load(args: &StudyArgs) -> Result<StudyInput> {
    let bytes = std::fs::read(&args.input).map_err(|e| {
        Error::InvalidInput(vec![Diagnostic::error(
            "input",
            format!("cannot read {}: {e}", args.input.display()),
        )])
    })?;
    // The variance convention shapes how outcomes become moments, so it is
    // applied by re-parsing with the override written into the document.
    let bytes = match args.variance_convention {
        Some(v) => override_variance_convention(&bytes, v)?,
        None => bytes,
    };
    let mut study = parse_study(&bytes)?;
    let opts = &mut study.options;
    if let Some(a) = args.alpha {
        opts.alpha = a;
    }
    if let Some(e) = args.relax_eps {
        opts.relax_eps = e;
    }
    if let Some(m) = args.mean_se {
        opts.mean_se = match m {
            MeanSeArg::AsPrinted => MeanSeConvention::AsPrinted,
            MeanSeArg::Standard => MeanSeConvention::Standard,
        };
    }
    Ok(study)
}

fn override_variance_convention(bytes: &[u8], v: VarianceArg) -> Result<Vec<u8>> {
    let mut doc: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        path: String::new(),
        message: e.to_string(),
    })?;
    let conv = match v {
        VarianceArg::Sample => VarianceConvention::Sample,
        VarianceArg::Population => VarianceConvention::Population,
    };
    if let Some(obj) = doc.as_object_mut() {
        let opts = obj
            .entry("options")
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
        if let Some(o) = opts.as_object_mut() {
            o.insert(
                "variance_convention".into(),
                serde_json::to_value(conv).expect("enum serializes"),
            );
        }
    }
    Ok(serde_json::to_vec(&doc).expect("value serializes"))
}

fn record<T>(report: &mut Report, label: &str, result: Result<T>, make: impl FnOnce(String, T) -> Finding) {
    match result {
        Ok(v) => report.findings.push(make(label.to_string(), v)),
        Err(e) => report.fail(label, &e),
    }
}

fn run_study(analysis: Analysis, study: StudyInput, report: &mut Report) {
    report.diagnostics.extend(study.diagnostics.iter().cloned());
    let trial = &study.trial;
    let opts = study.options;
    let bounded = trial.space.bounds().is_some();
    match analysis {
        Analysis::Heterogeneity => {
            record(report, "general", het_bounds_general(trial), |label, bound| {
                Finding::Heterogeneity { label, bound }
            });
            if bounded {
                record(report, "bounded", het_bounds_bounded(trial), |label, bound| {
                    Finding::Heterogeneity { label, bound }
                });
            }
            if let Some(st) = &study.strata {
                let g = het_bounds_stratified(st, PerStratum::General);
                record(report, "stratified_general", g, |label, bound| {
                    Finding::Heterogeneity { label, bound }
                });
                if bounded {
                    let b = het_bounds_stratified(st, PerStratum::Bounded);
                    record(report, "stratified_bounded", b, |label, bound| {
                        Finding::Heterogeneity { label, bound }
                    });
                }
            }
        }
        Analysis::Benefit => {
            record(report, "closed_form_upper", benefit_upper_closed(trial), |label, value| {
                Finding::BenefitUpper { label, value }
            });
            if trial.space.is_binary() {
                record(report, "binary", benefit_bounds_binary(trial), |label, bound| {
                    Finding::Benefit { label, bound }
                });
            }
            if let Some(st) = &study.strata {
                let u = benefit_upper_closed_stratified(st);
                record(report, "stratified_closed_form_upper", u, |label, value| {
                    Finding::BenefitUpper { label, value }
                });
            }
        }
        Analysis::BenefitLp => {
            let lp = benefit_bounds_lp(trial, opts.relax_eps);
            record(report, "lp", lp, |label, bound| Finding::Benefit { label, bound });
            if let Some(st) = &study.strata {
                let s = benefit_bounds_stratified(st, opts.relax_eps);
                record(report, "stratified_lp", s, |label, bound| {
                    Finding::Benefit { label, bound }
                });
            }
        }
        Analysis::Ci => {
            let mom = match study.moment_set() {
                Ok(m) => m,
                Err(e) => {
                    report.fail("moments", &e);
                    return;
                }
            };
            // Moments are on the higher-is-better scale; so is this space.
            let space = normalize_direction(trial).space;
            let ci = |label, report: crate::inference::CiReport| Finding::Ci { label, report };
            record(report, "heterogeneity", ci_heterogeneity(&mom, &space, opts.alpha), ci);
            record(report, "benefit_upper", ucb_benefit_closed(&mom, &space, opts.alpha), ci);
            if space.support().is_some() {
                let lp = ci_benefit_lp(&mom, &space, opts.alpha, opts.mean_se);
                record(report, "benefit_lp", lp, ci);
            }
            if study.strata.is_some() {
                report.findings.push(Finding::Note {
                    label: "strata".into(),
                    message: "stratified confidence intervals are not provided; intervals use the marginal summaries".into(),
                });
            }
        }
        Analysis::Validate => {
            let mut diags = validate(trial);
            if let Some(st) = &study.strata {
                for s in &st.strata {
                    diags.extend(validate(&s.trial).into_iter().map(|mut d| {
                        d.path = format!("strata[{}].{}", s.label, d.path);
                        d
                    }));
                }
            }
            let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
            report.findings.push(Finding::Check {
                label: "invariants".into(),
                passed: errors == 0,
                detail: if errors == 0 {
                    "all invariants hold".into()
                } else {
                    format!("{errors} violation(s)")
                },
            });
            if errors > 0 {
                report.exit_code = report.exit_code.max(1);
            }
            report.diagnostics.extend(diags);
        }
    }
    report.input = Some(study);
}
