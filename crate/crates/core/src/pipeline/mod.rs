//! Corpora, training of both networks, and block-level evaluation.

mod corpus;
pub mod files;
mod metrics;
mod train;

pub use corpus::{Corpus, Page, Split};
pub use metrics::{evaluate, Confusion, Metrics};
pub use train::{
    derive_seed, sample_windows, train, train_with_progress, Checkpoint, NetworkReport, Progress, TrainConfig,
    TrainReport,
};
