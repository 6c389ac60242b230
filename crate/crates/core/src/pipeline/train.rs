use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::corpus::{Corpus, Page, Split};
use crate::blocks::FeatureScaler;
use crate::cnn::{pair_targets, AdamConfig, Architecture, CnnParams, Gradients, TrainState};
use crate::error::{Error, Result};
use crate::model::Model;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub batch_size: usize,
    /// Blocks per excerpt; the pairwise network sees one edge fewer.
    pub excerpt_len: usize,
    pub adam: AdamConfig,
    pub dropout: f64,
    pub validate_every: usize,
    pub lambda: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 5000,
            batch_size: 128,
            excerpt_len: 9,
            adam: AdamConfig::default(),
            dropout: 0.2,
            validate_every: 100,
            lambda: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.iterations > 0
            && self.batch_size > 0
            && self.excerpt_len >= 2
            && self.validate_every > 0
            && (0.0..1.0).contains(&self.dropout)
            && self.adam.learning_rate > 0.0
            && self.lambda >= 0.0
            && self.lambda.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid training configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    /// Mean batch loss (per position) since the previous checkpoint.
    pub train_loss: f64,
    /// Mean per-position loss over the validation split, if it has any.
    pub validation_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkReport {
    pub arch: Architecture,
    pub checkpoints: Vec<Checkpoint>,
    pub best_step: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub unary: NetworkReport,
    pub pairwise: NetworkReport,
}

pub type Progress<'a> = &'a (dyn Fn(Architecture, &Checkpoint) + Sync);

/// Picks `count` excerpts of `len` consecutive positions: a page uniformly
/// among those with at least `len` positions, then a uniform start.
pub fn sample_windows<R: Rng>(lengths: &[usize], len: usize, count: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    let eligible: Vec<usize> = (0..lengths.len()).filter(|&i| lengths[i] >= len).collect();
    if eligible.is_empty() {
        return Err(Error::domain(format!("no training page has at least {len} blocks")));
    }
    Ok((0..count)
        .map(|_| {
            let page = eligible[rng.gen_range(0..eligible.len())];
            (page, rng.gen_range(0..=lengths[page] - len))
        })
        .collect())
}

/// Deterministic seed derivation (splitmix64 over the parts).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9e37_79b9_7f4a_7c15u64;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        h = z ^ (z >> 31);
    }
    h
}

/// Network inputs for one page, already scaled.
struct Sequence {
    x: Vec<f64>,
    targets: Vec<usize>,
}

impl Sequence {
    fn len(&self) -> usize {
        self.targets.len()
    }
}

fn sequences(arch: Architecture, pages: &[&Page], block: &FeatureScaler, edge: &FeatureScaler) -> Vec<Sequence> {
    pages
        .iter()
        .map(|p| match arch {
            Architecture::Unary => Sequence {
                x: block.apply_rows(p.block_features.iter().map(|b| b.values())),
                targets: p.labels.iter().map(|&l| l as usize).collect(),
            },
            Architecture::Pairwise => Sequence {
                x: edge.apply_rows(p.edge_features.iter().map(|e| e.values())),
                targets: pair_targets(&p.labels),
            },
        })
        .collect()
}

/// Excerpts per gradient chunk; chunk sums are added in a fixed order so the
/// result does not depend on the number of threads.
const CHUNK: usize = 16;

fn arch_tag(arch: Architecture) -> u64 {
    match arch {
        Architecture::Unary => 1,
        Architecture::Pairwise => 2,
    }
}

fn validation_loss(params: &CnnParams, val: &[Sequence]) -> Result<Option<f64>> {
    let positions: usize = val.iter().map(Sequence::len).sum();
    if positions == 0 {
        return Ok(None);
    }
    let losses = val
        .par_iter()
        .filter(|s| s.len() > 0)
        .map(|s| params.eval_loss(&s.x, s.len(), &s.targets))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Some(losses.iter().sum::<f64>() / positions as f64))
}

fn train_network(
    arch: Architecture,
    train: &[Sequence],
    val: &[Sequence],
    cfg: &TrainConfig,
    progress: Progress<'_>,
) -> Result<(CnnParams, NetworkReport)> {
    let tag = arch_tag(arch);
    let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[cfg.seed, tag, 0]));
    let params = CnnParams::init(arch, &mut init_rng);
    let mut state = TrainState::new(params, cfg.adam, cfg.dropout, cfg.seed);
    let mut sample_rng = ChaCha8Rng::seed_from_u64(derive_seed(&[cfg.seed, tag, 1]));

    let window = match arch {
        Architecture::Unary => cfg.excerpt_len,
        Architecture::Pairwise => cfg.excerpt_len - 1,
    };
    let lengths: Vec<usize> = train.iter().map(Sequence::len).collect();
    let dim = arch.input_dim();
    let scale = 1.0 / (cfg.batch_size * window) as f64;

    let mut best = (state.params.clone(), 0usize, f64::INFINITY);
    let mut checkpoints = Vec::new();
    let mut running = (0.0, 0usize);

    for step in 1..=cfg.iterations {
        let windows = sample_windows(&lengths, window, cfg.batch_size, &mut sample_rng)?;
        let params = &state.params;
        let chunks = windows
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(ci, chunk)| -> Result<(Gradients, f64)> {
                let mut grads = params.zero_gradients();
                let mut loss = 0.0;
                for (k, &(page, start)) in chunk.iter().enumerate() {
                    let excerpt = (ci * CHUNK + k) as u64;
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(derive_seed(&[cfg.seed, tag, 2, step as u64, excerpt]));
                    let seq = &train[page];
                    let x = &seq.x[start * dim..(start + window) * dim];
                    let cache = params.forward_train(x, window, cfg.dropout, &mut rng)?;
                    loss += params.backward(&cache, &seq.targets[start..start + window], scale, &mut grads)?;
                }
                Ok((grads, loss))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut iter = chunks.into_iter();
        let (mut grads, mut loss) = iter.next().expect("batch is non-empty");
        for (g, l) in iter {
            for (acc, part) in grads.iter_mut().zip(&g) {
                for (a, b) in acc.iter_mut().zip(part) {
                    *a += b;
                }
            }
            loss += l;
        }
        let loss = loss * scale;
        if !loss.is_finite() || grads.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::Divergence {
                network: arch.name(),
                step,
                loss,
            });
        }
        state.adam_step(&grads)?;
        running.0 += loss;
        running.1 += 1;

        if step % cfg.validate_every == 0 || step == cfg.iterations {
            let validation_loss = validation_loss(&state.params, val)?;
            if let Some(v) = validation_loss {
                if !v.is_finite() {
                    return Err(Error::Divergence {
                        network: arch.name(),
                        step,
                        loss: v,
                    });
                }
            }
            let cp = Checkpoint {
                step,
                train_loss: running.0 / running.1 as f64,
                validation_loss,
            };
            running = (0.0, 0);
            progress(arch, &cp);
            checkpoints.push(cp);
            // without validation data the last checkpoint wins
            let score = validation_loss.unwrap_or(f64::NEG_INFINITY);
            if score < best.2 || validation_loss.is_none() {
                best = (state.params.clone(), step, score);
            }
        }
    }
    Ok((
        best.0,
        NetworkReport {
            arch,
            checkpoints,
            best_step: best.1,
        },
    ))
}

pub fn train(corpus: &Corpus, cfg: &TrainConfig) -> Result<(Model, TrainReport)> {
    train_with_progress(corpus, cfg, &|_, _| {})
}

/// Trains both networks (concurrently, with independent state) and returns
/// the checkpoints with the lowest validation loss.
pub fn train_with_progress(corpus: &Corpus, cfg: &TrainConfig, progress: Progress<'_>) -> Result<(Model, TrainReport)> {
    cfg.validate()?;
    let (block_scaler, edge_scaler) = corpus.fit_scalers()?;
    let train_pages: Vec<&Page> = corpus.split(Split::Train).collect();
    let val_pages: Vec<&Page> = corpus.split(Split::Validation).collect();

    let run = |arch| {
        let train = sequences(arch, &train_pages, &block_scaler, &edge_scaler);
        let val = sequences(arch, &val_pages, &block_scaler, &edge_scaler);
        train_network(arch, &train, &val, cfg, progress)
    };
    let (unary, pairwise) = rayon::join(|| run(Architecture::Unary), || run(Architecture::Pairwise));
    let (unary, unary_report) = unary?;
    let (pairwise, pairwise_report) = pairwise?;

    let mut model = Model {
        block_scaler,
        edge_scaler,
        unary,
        pairwise,
        lambda: cfg.lambda,
    };
    model.quantize();
    Ok((
        model,
        TrainReport {
            unary: unary_report,
            pairwise: pairwise_report,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_length_page_has_one_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = sample_windows(&[9, 3], 9, 50, &mut rng).unwrap();
        assert!(w.iter().all(|&x| x == (0, 0)));
    }

    #[test]
    fn short_pages_only_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_windows(&[8, 3], 9, 1, &mut rng).is_err());
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            sample_windows(&[20, 9, 40], 9, 128, &mut rng).unwrap()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn seed_derivation_separates_parts() {
        assert_ne!(derive_seed(&[1, 2]), derive_seed(&[2, 1]));
        assert_ne!(derive_seed(&[0]), derive_seed(&[0, 0]));
        assert_eq!(derive_seed(&[5, 6, 7]), derive_seed(&[5, 6, 7]));
    }
}
