//! Batch front-end for the `plateloc` pipeline: image I/O, configuration,
//! result records, overlays and the `plateloc` subcommands.

use std::path::PathBuf;

pub mod app;
pub mod commands;
pub mod config;
pub mod imageio;
pub mod overlay;
pub mod records;

pub use commands::{cmd_analyze_plates, cmd_evaluate, cmd_localize, cmd_preprocess, cmd_synth, BatchReport};
pub use config::RunConfig;
pub use records::{format_records, parse_records, BoxRecord, ImageRecords};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("{}: {message}", path.display())]
    Decode { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<CliError>,
    },
    #[error("cannot read config {}: {source}", path.display())]
    ConfigUnreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Records { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Plate {
        path: PathBuf,
        #[source]
        source: plateloc::PeakError,
    },
    #[error(transparent)]
    Stats(#[from] plateloc::StatsError),
    #[error(transparent)]
    Localize(#[from] plateloc::LocalizeError),
    #[error(transparent)]
    Preprocess(#[from] plateloc::preprocess::PreprocessError),
    #[error(transparent)]
    Eval(#[from] plateloc::eval::EvalError),
    #[error(transparent)]
    Synth(#[from] plateloc::SynthError),
    #[error("image ids differ between results and truth; missing from results: [{}]; missing from truth: [{}]",
        missing_from_results.join(", "), missing_from_truth.join(", "))]
    IdMismatch {
        missing_from_results: Vec<String>,
        missing_from_truth: Vec<String>,
    },
    #[error("no input images")]
    NoInputs,
    #[error("duplicate image id {0:?}")]
    DuplicateId(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for bad invocations and configs, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigUnreadable { .. }
            | CliError::Config { .. }
            | CliError::InvalidConfig(_)
            | CliError::Usage(_)
            | CliError::NoInputs => 2,
            CliError::InFile { source, .. } => match **source {
                CliError::Config { .. } | CliError::InvalidConfig(_) => 2,
                _ => 1,
            },
            _ => 1,
        }
    }
}
