//! End-to-end commands behind the `sixlead` binary: synthesize, preprocess,
//! train, reconstruct, evaluate, explain, and sweep the regularization
//! weight. Each command consumes and produces only documented files, and
//! identical inputs plus configuration yield byte-identical outputs.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{
    cmd_evaluate, cmd_explain, cmd_preprocess, cmd_reconstruct, cmd_sweep_lambda, cmd_synth,
    cmd_train, EvaluateCommand, EvaluateOutput, ExplainCommand, ExplainOutput, PreprocessOutput,
    ReconstructCommand, ReconstructOutput, SweepOutput, SweepRow, SynthCommand, SynthOutput,
    TrainOptions, TrainOutput,
};
pub use config::RunConfig;
pub use manifest::RunManifest;

use thiserror::Error;

/// Pipeline failures labeled by stage; each stage maps to a distinct
/// process exit code for scriptability.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[config] {0}")]
    Config(String),
    #[error("[io] {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("[io] {0}")]
    SignalIo(#[from] crate::signal_io::SignalIoError),
    #[error("[io] input record is missing channel `{0}`")]
    MissingChannel(String),
    #[error("[preprocess] {0}")]
    Preprocess(#[from] crate::preprocess::PreprocessError),
    #[error("[solver] {0}")]
    Kernel(#[from] crate::kernel::KernelError),
    #[error("[solver] {0}")]
    Solver(#[from] crate::solver::SolverError),
    #[error("[model] {0}")]
    Model(#[from] crate::model::ModelError),
    #[error("[model] standardization mismatch: {0}")]
    StatsMismatch(String),
    #[error("[evaluate] {0}")]
    Leads(#[from] crate::leads::LeadsError),
    #[error("[explain] model was trained on digest {expected} but record digest is {found}")]
    DigestMismatch { expected: String, found: String },
    #[error("[synth] {0}")]
    Synth(#[from] crate::synth::SynthError),
}

impl PipelineError {
    /// Stable exit code per failing stage (0 is success).
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Io { .. }
            | PipelineError::SignalIo(_)
            | PipelineError::MissingChannel(_) => 3,
            PipelineError::Preprocess(_) => 4,
            PipelineError::Kernel(_) | PipelineError::Solver(_) => 5,
            PipelineError::Model(_) | PipelineError::StatsMismatch(_) => 6,
            PipelineError::Leads(_) => 7,
            PipelineError::DigestMismatch { .. } => 8,
            PipelineError::Synth(_) => 9,
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path, source: std::io::Error) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}
