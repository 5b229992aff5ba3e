//! Study documents, reports and the command-line front end.

pub mod cli;
pub mod report;
pub mod selfcheck;
pub mod study;

pub use report::{Finding, Report};
pub use study::{parse_study, Options, OutputFormat, StudyInput};
