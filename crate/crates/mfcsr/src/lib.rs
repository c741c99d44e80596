//! Command-line front end, file formats and simulation harness for
//! Minkowski-functional tests of complete spatial randomness.

pub mod analyze;
pub mod calibrate;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod power;
pub mod report;
pub mod summaries;

pub use analyze::{analyze_dataset, analyze_pattern, AnalysisConfig, CsrReport};
pub use error::{AppError, Result};
pub use power::{power_study, CriticalValueSource, PowerRow, PowerStudySpec, PowerTable, StudyStatistic};
pub use report::{emit, Format, Tabular};
