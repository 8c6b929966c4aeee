//! Dataset ingestion, preprocessing, classical classifiers, and experiment
//! orchestration around the quantum edge-detection and kernel modules.

pub mod config;
pub mod experiment;
pub mod idx;
pub mod logreg;
pub mod pgm;
pub mod preprocess;

pub use config::{ExperimentConfig, NoiseKind, RawConfig};
pub use experiment::{fmt_sig, run_experiment, RunSummary};
pub use idx::{load_idx, write_idx_images, write_idx_labels, Dataset};
pub use logreg::{logreg_predict, logreg_train, LogRegModel};
pub use pgm::{load_pgm, save_edge_pgm, save_gradient_pgm, save_pgm};
pub use preprocess::{apply_preprocess, fit_preprocess, PcaTransform};
