//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use declutter_core::cnn::{CnnParams, ConvKernel};
use declutter_core::inference::{sequence_log_prob, InferenceConfig, PotentialSequence};
use rand::Rng;

/// Direct triple loop over positions, taps and channels.
pub fn naive_conv(k: &ConvKernel, x: &[f64], len: usize) -> Vec<f64> {
    let half = (k.width / 2) as isize;
    let mut y = vec![0.0; len * k.out_channels];
    for i in 0..len {
        for o in 0..k.out_channels {
            let mut acc = 0.0;
            for t in 0..k.width {
                let j = i as isize + t as isize - half;
                if j < 0 || j >= len as isize {
                    continue;
                }
                for c in 0..k.in_channels {
                    acc += k.weights[(t * k.in_channels + c) * k.out_channels + o] * x[j as usize * k.in_channels + c];
                }
            }
            y[i * k.out_channels + o] = acc;
        }
    }
    y
}

pub fn naive_logits(p: &CnnParams, x: &[f64], len: usize) -> Vec<f64> {
    let mut h = x.to_vec();
    for (i, k) in p.layers.iter().enumerate() {
        h = naive_conv(k, &h, len);
        if i + 1 < p.layers.len() {
            h.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }
    h
}

/// Sum of `-log softmax(row)[target]`, written out without shortcuts.
pub fn naive_cross_entropy(logits: &[f64], classes: usize, targets: &[usize]) -> f64 {
    let mut total = 0.0;
    for (row, &t) in logits.chunks(classes).zip(targets) {
        let m = row.iter().cloned().fold(f64::MIN, f64::max);
        let z: f64 = row.iter().map(|v| (v - m).exp()).sum();
        total += -(row[t] - m - z.ln());
    }
    total
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// Result of a central-difference gradient check on one layer.
#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    pub max_rel_err: f64,
    pub checked: usize,
    pub skipped_kinks: usize,
}

pub const FD_EPS: f64 = 1e-4;
/// Denominator floor of the relative error, for gradients that are
/// essentially zero.
pub const REL_ERR_FLOOR: f64 = 1e-6;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_ERR_FLOOR)
}

/// Compares the analytic gradient of the summed cross-entropy with central
/// differences on `per_layer` random parameters of every layer. Samples whose
/// perturbation flips any ReLU are redrawn.
pub fn gradient_check<R: Rng>(
    params: &CnnParams,
    x: &[f64],
    len: usize,
    targets: &[usize],
    per_layer: usize,
    rng: &mut R,
) -> Vec<GradCheck> {
    let cache = params.forward_train(x, len, 0.0, rng).unwrap();
    let mut grads = params.zero_gradients();
    params.backward(&cache, targets, 1.0, &mut grads).unwrap();
    let pattern = params.activation_pattern(x, len).unwrap();
    let classes = params.arch.classes();
    let loss = |p: &CnnParams| naive_cross_entropy(&naive_logits(p, x, len), classes, targets);

    let mut out = Vec::new();
    for l in 0..params.layers.len() {
        let mut check = GradCheck {
            max_rel_err: 0.0,
            checked: 0,
            skipped_kinks: 0,
        };
        let mut attempts = 0;
        while check.checked < per_layer {
            attempts += 1;
            assert!(attempts < per_layer * 50, "too many kinks in layer {l}");
            let idx = rng.gen_range(0..params.layers[l].len());
            let mut plus = params.clone();
            plus.layers[l].weights[idx] += FD_EPS;
            let mut minus = params.clone();
            minus.layers[l].weights[idx] -= FD_EPS;
            if plus.activation_pattern(x, len).unwrap() != pattern || minus.activation_pattern(x, len).unwrap() != pattern {
                check.skipped_kinks += 1;
                continue;
            }
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * FD_EPS);
            check.max_rel_err = check.max_rel_err.max(rel_err(grads[l][idx], numeric));
            check.checked += 1;
        }
        out.push(check);
    }
    out
}

/// Best score by enumerating all labelings, and every labeling reaching it
/// within `tol`.
pub fn brute_force(pot: &PotentialSequence, cfg: &InferenceConfig, tol: f64) -> (f64, Vec<Vec<u8>>) {
    let n = pot.len();
    let mut scored = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let labels: Vec<u8> = (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as u8).collect();
        let s = sequence_log_prob(pot, &labels, cfg).unwrap();
        scored.push((s, labels));
    }
    let best = scored.iter().map(|(s, _)| *s).fold(f64::NEG_INFINITY, f64::max);
    let winners = scored
        .into_iter()
        .filter(|(s, _)| best - s <= tol)
        .map(|(_, l)| l)
        .collect();
    (best, winners)
}

pub fn random_potentials<R: Rng>(rng: &mut R, n: usize) -> PotentialSequence {
    let unary = (0..n)
        .map(|_| {
            let p = rng.gen_range(0.001..0.999);
            [1.0 - p, p]
        })
        .collect();
    let pairwise = (0..n.saturating_sub(1))
        .map(|_| {
            let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            [raw[0] / s, raw[1] / s, raw[2] / s, raw[3] / s]
        })
        .collect();
    PotentialSequence::new(unary, pairwise).unwrap()
}

/// A random lowercase word of 3 to 9 letters.
pub fn word<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(3..=9);
    (0..n).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

/// `n` pairwise distinct block texts of at least 10 non-space characters.
pub fn distinct_blocks<R: Rng>(rng: &mut R, n: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(n);
    while out.len() < n {
        let words = rng.gen_range(3..12);
        let text: Vec<String> = (0..words).map(|_| word(rng)).collect();
        let text = text.join(" ");
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.chars().count() >= 10 && !out.contains(&text) {
            out.push(text);
        }
    }
    out
}

/// Per-dimension mean and population variance, two passes, no shortcuts.
pub fn moments(rows: &[Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for d in 0..dim {
            mean[d] += r[d] / n;
        }
    }
    let mut var = vec![0.0; dim];
    for r in rows {
        for d in 0..dim {
            var[d] += (r[d] - mean[d]).powi(2) / n;
        }
    }
    (mean, var)
}

/// One line per block: label, p_content bits in hex, text.
pub fn block_lines(ex: &declutter_core::model::Extraction) -> String {
    let mut out = String::new();
    for b in &ex.blocks {
        out.push_str(&format!("{}\t{:016x}\t{}\n", b.label, b.p_content.to_bits(), b.text));
    }
    out
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}
