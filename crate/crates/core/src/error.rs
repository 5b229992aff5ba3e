use thiserror::Error;

use crate::model::Diagnostic;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {}", render_diagnostics(.0))]
    InvalidInput(Vec<Diagnostic>),

    #[error("control-arm variance is zero while treatment-arm variance is positive; the variance ratio is undefined")]
    ZeroControlVariance,

    #[error("operation requires {required}, got {got}")]
    UnsupportedSpace { required: &'static str, got: String },

    #[error("the summaries admit no joint distribution on the declared support ({hint})")]
    InfeasibleSummaries { hint: String },

    #[error("widened confidence LP is infeasible: {0}")]
    InfeasibleWidenedLp(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("simplex exceeded {limit} iterations")]
    MaxIterationsExceeded { limit: usize },

    #[error("vertex enumeration limited to {limit} variables, got {got}")]
    DimensionTooLarge { limit: usize, got: usize },

    #[error("{0} is outside the open interval (0, 1)")]
    DomainError(f64),

    #[error("exact-moment mode requires higher moments for arm {0}")]
    MissingMoments(u8),

    #[error("degenerate denominator in variance formula")]
    DegenerateDenominator,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{}", render_strata(.0))]
    Strata(Vec<(String, Error)>),

    #[error("parse error{}: {message}", at_path(.path))]
    Parse { path: String, message: String },
}

impl Error {
    /// Process exit code: 1 for bad or infeasible input, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::MaxIterationsExceeded { .. }
            | Error::Numerical(_)
            | Error::InfeasibleWidenedLp(_)
            | Error::MalformedLp(_) => 2,
            Error::Strata(errs) => errs.iter().map(|(_, e)| e.exit_code()).max().unwrap_or(1),
            _ => 1,
        }
    }
}

fn at_path(path: &str) -> String {
    if path.is_empty() {
        String::new()
    } else {
        format!(" at {path}")
    }
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("{}: {}", d.path, d.message))
        .collect::<Vec<_>>()
        .join("; ")
}

fn render_strata(errs: &[(String, Error)]) -> String {
    errs.iter()
        .map(|(label, e)| format!("stratum `{label}`: {e}"))
        .collect::<Vec<_>>()
        .join("; ")
}
