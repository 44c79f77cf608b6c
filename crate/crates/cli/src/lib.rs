//! Campaign runner, reports and trace replay for greduce.

pub mod campaign;
pub mod replay;
pub mod report;

use greduce::trace::TraceError;

pub use campaign::{campaign_exit_code, run_campaign, CampaignConfig, SeedSpec, BUG_SEED_UNITS};
pub use replay::{replay, LabelingFile, ReplayOutput, LABELING_VERSION};
pub use report::{emit_report, parse_json, ReductionReport, ReportFormat, CSV_COLUMNS, REPORT_SCHEMA};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown case {0:?}")]
    UnknownCase(String),
    #[error("no registered generator with id {0:?}")]
    UnknownGenerator(String),
    #[error("{0}")]
    Config(String),
    #[error("cannot parse {what}: {message}")]
    Parse { what: &'static str, message: String },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("generator failed: {0}")]
    Generator(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Every error is a configuration or input problem; soundness failures
    /// are reported through the campaign exit code instead.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
