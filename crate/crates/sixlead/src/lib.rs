//! Six-lead ECG reconstruction from a single-channel recording.
//!
//! The library learns the pointwise transformations from a single cardiac
//! channel (e.g. an implantable monitor signal) to Leads I and II as sparse
//! piecewise-linear functions. Each transformation is the global optimum of
//! an L1-regularized convex program whose solution maps one-to-one onto a
//! two-layer ReLU network; the remaining frontal-plane leads (III, aVR, aVL,
//! aVF) follow from Einthoven's identities.
//!
//! The crate is organized around the stages of that workflow:
//!
//! - [`signal_io`]: CSV ingestion and emission of multi-channel records
//! - [`preprocess`]: zero-phase Butterworth band-pass, decimation,
//!   standardization, train/test splitting
//! - [`kernel`]: the ReLU feature matrix built from training inputs
//! - [`solver`]: the L1 solver (accelerated proximal gradient plus an
//!   independent coordinate-descent path) with KKT certification
//! - [`model`]: extraction, evaluation, export, and breakpoint-level
//!   explanation of the learned piecewise-linear predictor
//! - [`leads`]: six-lead derivation and evaluation metrics
//! - [`synth`]: deterministic synthetic ECG and single-channel generator
//! - [`pipeline`]: the end-to-end commands behind the `sixlead` binary
//!
//! Every stage is deterministic: identical inputs and configuration produce
//! bit-identical models, manifests, and reports.

pub mod kernel;
pub mod leads;
pub mod model;
pub mod pipeline;
pub mod plot;
pub mod preprocess;
pub mod rng;
pub mod signal_io;
pub mod solver;
pub mod synth;

pub use kernel::KernelMatrix;
pub use leads::{LeadReport, SixLeadFrame};
pub use model::{PredictionTrace, ReluNetwork, TwoLayerWeights};
pub use preprocess::{FilterSpec, SplitSpec, ZScoreStats};
pub use signal_io::EcgRecord;
pub use solver::{Algorithm, LassoSolution, SolverConfig};
pub use synth::{IcmMapSpec, SynthConfig};
