//! Joint sequence scoring and Viterbi decoding over block labels.
//!
//! Label 1 is main content, 0 is boilerplate. The score of a labeling is
//! `sum_i log p_i(l_i) + lambda * sum_i log p_{i,i+1}(l_i, l_{i+1})`.

use crate::cnn::pair_index;
use crate::error::{Error, Result};

/// Probability tables for one page: a `(p(0), p(1))` pair per block and a
/// `p(00), p(01), p(10), p(11)` row per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSequence {
    unary: Vec<[f64; 2]>,
    pairwise: Vec<[f64; 4]>,
}

fn check_row(row: &[f64]) -> Result<()> {
    if row.iter().all(|&p| p > 0.0 && p.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain(format!("potentials must be positive and finite, got {row:?}")))
    }
}

impl PotentialSequence {
    pub fn new(unary: Vec<[f64; 2]>, pairwise: Vec<[f64; 4]>) -> Result<Self> {
        Error::check_len("pairwise potentials", unary.len().saturating_sub(1), pairwise.len())?;
        for row in &unary {
            check_row(row)?;
        }
        for row in &pairwise {
            check_row(row)?;
        }
        Ok(PotentialSequence { unary, pairwise })
    }

    /// Builds from flat network outputs (`2n` and `4(n-1)` values).
    pub fn from_flat(unary: &[f64], pairwise: &[f64]) -> Result<Self> {
        if !unary.len().is_multiple_of(2) || !pairwise.len().is_multiple_of(4) {
            return Err(Error::domain("flat potentials have a ragged last row"));
        }
        let u = unary.chunks(2).map(|c| [c[0], c[1]]).collect();
        let p = pairwise.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
        Self::new(u, p)
    }

    pub fn len(&self) -> usize {
        self.unary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unary.is_empty()
    }

    pub fn unary(&self) -> &[[f64; 2]] {
        &self.unary
    }

    pub fn pairwise(&self) -> &[[f64; 4]] {
        &self.pairwise
    }

    /// The same chain read right to left; pairwise tables are transposed.
    pub fn reversed(&self) -> Self {
        PotentialSequence {
            unary: self.unary.iter().rev().copied().collect(),
            pairwise: self
                .pairwise
                .iter()
                .rev()
                .map(|&[a, b, c, d]| [a, c, b, d])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceConfig {
    lambda: f64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig { lambda: 0.1 }
    }
}

impl InferenceConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda >= 0.0 && lambda.is_finite() {
            Ok(InferenceConfig { lambda })
        } else {
            Err(Error::domain(format!("lambda must be finite and non-negative, got {lambda}")))
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Log score of `labels` under the chain.
pub fn sequence_log_prob(pot: &PotentialSequence, labels: &[u8], cfg: &InferenceConfig) -> Result<f64> {
    Error::check_len("labeling", pot.len(), labels.len())?;
    if let Some(&l) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::domain(format!("label {l} is not 0 or 1")));
    }
    let unary: f64 = pot
        .unary
        .iter()
        .zip(labels)
        .map(|(row, &l)| row[l as usize].ln())
        .sum();
    let pairwise: f64 = pot
        .pairwise
        .iter()
        .zip(labels.windows(2))
        .map(|(row, w)| row[pair_index(w[0], w[1])].ln())
        .sum();
    Ok(unary + cfg.lambda * pairwise)
}

/// Highest-scoring labeling. Among equally scored labelings the one that is
/// lexicographically greatest (content preferred, earliest block first) wins.
pub fn viterbi(pot: &PotentialSequence, cfg: &InferenceConfig) -> Result<Vec<u8>> {
    let n = pot.len();
    if n == 0 {
        return Err(Error::domain("cannot decode an empty block sequence"));
    }
    let lu = |i: usize, l: usize| pot.unary[i][l].ln();
    let lp = |i: usize, a: usize, b: usize| cfg.lambda * pot.pairwise[i][2 * a + b].ln();

    // suffix[i][l]: best score of blocks i.. given label l at block i
    let mut suffix = vec![[0.0f64; 2]; n];
    suffix[n - 1] = [lu(n - 1, 0), lu(n - 1, 1)];
    for i in (0..n - 1).rev() {
        for l in 0..2 {
            let best = (0..2)
                .map(|next| lp(i, l, next) + suffix[i + 1][next])
                .fold(f64::NEG_INFINITY, f64::max);
            suffix[i][l] = lu(i, l) + best;
        }
    }

    let pick = |s0: f64, s1: f64| if s1 >= s0 { 1u8 } else { 0u8 };
    let mut labels = Vec::with_capacity(n);
    labels.push(pick(suffix[0][0], suffix[0][1]));
    for i in 0..n - 1 {
        let prev = labels[i] as usize;
        let s0 = lp(i, prev, 0) + suffix[i + 1][0];
        let s1 = lp(i, prev, 1) + suffix[i + 1][1];
        labels.push(pick(s0, s1));
    }
    Ok(labels)
}

/// Texts of the blocks labeled 1, in order, one per line.
pub fn extract_text<S: AsRef<str>>(texts: &[S], labels: &[u8]) -> Result<String> {
    Error::check_len("labeling", texts.len(), labels.len())?;
    let kept: Vec<&str> = texts
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == 1)
        .map(|(t, _)| t.as_ref())
        .collect();
    Ok(kept.join("\n"))
}
