//! The two potential networks: five bias-free 1-D convolutions with ReLU,
//! trained with cross-entropy, dropout, L2 decay and Adam.

mod conv;
mod network;
mod optim;

pub use conv::ConvKernel;
pub use network::{
    softmax_in_place, Architecture, CnnParams, ForwardCache, Gradients, MIN_PROB, PAIRWISE_PARAMS,
    UNARY_PARAMS,
};
pub use optim::{adam_update, AdamConfig, Moments, TrainState};

use crate::error::{Error, Result};

/// Index of the label pair `(a, b)` in a pairwise probability row.
#[inline]
pub fn pair_index(a: u8, b: u8) -> usize {
    2 * a as usize + b as usize
}

/// Summed cross-entropy of per-block probability rows against 0/1 labels.
pub fn unary_loss(probs: &[f64], labels: &[u8]) -> Result<f64> {
    Error::check_len("unary potentials", 2 * labels.len(), probs.len())?;
    Ok(labels
        .iter()
        .zip(probs.chunks(2))
        .map(|(&l, row)| -row[l as usize].ln())
        .sum())
}

/// Summed cross-entropy of per-edge rows against consecutive label pairs.
pub fn pairwise_loss(probs: &[f64], labels: &[u8]) -> Result<f64> {
    let edges = labels.len().saturating_sub(1);
    Error::check_len("pairwise potentials", 4 * edges, probs.len())?;
    Ok(labels
        .windows(2)
        .zip(probs.chunks(4))
        .map(|(w, row)| -row[pair_index(w[0], w[1])].ln())
        .sum())
}

/// Targets for the pairwise network given block labels.
pub fn pair_targets(labels: &[u8]) -> Vec<usize> {
    labels.windows(2).map(|w| pair_index(w[0], w[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_unary_loss_is_n_log_2() {
        let probs = vec![0.5; 14];
        let loss = unary_loss(&probs, &[0, 1, 1, 0, 1, 0, 0]).unwrap();
        assert!((loss - 7.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pairwise_loss_picks_joint_entries() {
        let probs = [0.1, 0.2, 0.3, 0.4, 0.4, 0.3, 0.2, 0.1];
        // labels 1,0,1: pairs (1,0)->2 and (0,1)->1
        let loss = pairwise_loss(&probs, &[1, 0, 1]).unwrap();
        assert!((loss - (-(0.3f64).ln() - (0.3f64).ln())).abs() < 1e-12);
        assert_eq!(pair_targets(&[1, 0, 1]), vec![2, 1]);
    }

    #[test]
    fn loss_length_checks() {
        assert!(unary_loss(&[0.5, 0.5], &[0, 1]).is_err());
        assert!(pairwise_loss(&[0.25; 4], &[0, 1, 1]).is_err());
        assert_eq!(pairwise_loss(&[], &[1]).unwrap(), 0.0);
    }
}
