use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot decode input as text: {0}")]
    Parse(String),

    #[error("{0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {actual} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("training diverged in {network} network at step {step}: loss = {loss}")]
    Divergence {
        network: &'static str,
        step: usize,
        loss: f64,
    },

    #[error("invalid model file: {0}")]
    ModelFormat(String),

    #[error("invalid corpus: {0}")]
    Corpus(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                what,
                expected,
                actual,
            })
        }
    }
}
