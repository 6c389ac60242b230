use rand::Rng;

use super::conv::ConvKernel;
use crate::error::{Error, Result};

/// Which of the two potential networks a parameter set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    /// 128 block features in, 2 classes out.
    Unary,
    /// 25 edge features in, 4 label pairs out.
    Pairwise,
}

pub const UNARY_PARAMS: usize = 17_960;
pub const PAIRWISE_PARAMS: usize = 12_870;

impl Architecture {
    /// `(in, out, width)` of each of the five layers.
    pub fn shapes(self) -> [(usize, usize, usize); 5] {
        let (input, output) = match self {
            Architecture::Unary => (128, 2),
            Architecture::Pairwise => (25, 4),
        };
        [
            (input, 50, 1),
            (50, 50, 1),
            (50, 50, 3),
            (50, 10, 3),
            (10, output, 3),
        ]
    }

    pub fn input_dim(self) -> usize {
        self.shapes()[0].0
    }

    pub fn classes(self) -> usize {
        self.shapes()[4].1
    }

    pub fn expected_params(self) -> usize {
        match self {
            Architecture::Unary => UNARY_PARAMS,
            Architecture::Pairwise => PAIRWISE_PARAMS,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Unary => "unary",
            Architecture::Pairwise => "pairwise",
        }
    }
}

/// Weights of one five-layer network.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    pub arch: Architecture,
    pub layers: Vec<ConvKernel>,
}

/// Gradient with the same shapes as [`CnnParams::layers`].
pub type Gradients = Vec<Vec<f64>>;

/// Intermediate values of a training-mode forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub len: usize,
    /// Input to each layer (after ReLU and dropout for hidden layers).
    pub inputs: Vec<Vec<f64>>,
    /// Pre-activation output of each hidden layer.
    pub hidden: Vec<Vec<f64>>,
    /// Dropout multipliers (0 or 1/(1-rate)) for each hidden layer; empty
    /// when dropout is off.
    pub masks: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
}

impl CnnParams {
    pub fn zeros(arch: Architecture) -> Self {
        let layers = arch
            .shapes()
            .iter()
            .map(|&(i, o, k)| ConvKernel::zeros(i, o, k))
            .collect();
        let p = CnnParams { arch, layers };
        assert_eq!(p.num_params(), arch.expected_params());
        p
    }

    /// He-style uniform initialization: U(-a, a) with a = sqrt(6 / fan_in).
    pub fn init<R: Rng>(arch: Architecture, rng: &mut R) -> Self {
        let mut p = Self::zeros(arch);
        for layer in &mut p.layers {
            let limit = (6.0 / (layer.in_channels * layer.width) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.gen_range(-limit..limit);
            }
        }
        p
    }

    /// Validates shapes and finiteness.
    pub fn from_layers(arch: Architecture, layers: Vec<ConvKernel>) -> Result<Self> {
        let shapes = arch.shapes();
        if layers.len() != shapes.len() {
            return Err(Error::domain(format!("{} network needs 5 layers", arch.name())));
        }
        for (l, &(i, o, k)) in layers.iter().zip(&shapes) {
            if (l.in_channels, l.out_channels, l.width) != (i, o, k) || l.weights.len() != i * o * k {
                return Err(Error::domain(format!(
                    "{} layer has shape ({}, {}, {}), expected ({i}, {o}, {k})",
                    arch.name(),
                    l.in_channels,
                    l.out_channels,
                    l.width
                )));
            }
            if l.weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::domain("non-finite weight"));
            }
        }
        Ok(CnnParams { arch, layers })
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    pub fn zero_gradients(&self) -> Gradients {
        self.layers.iter().map(|l| vec![0.0; l.len()]).collect()
    }

    pub fn squared_norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter())
            .map(|w| w * w)
            .sum()
    }

    /// Rounds every weight to single precision.
    pub fn quantize(&mut self) {
        for w in self.layers.iter_mut().flat_map(|l| l.weights.iter_mut()) {
            *w = *w as f32 as f64;
        }
    }

    fn check_input(&self, input: &[f64], len: usize) -> Result<()> {
        if len == 0 {
            return Err(Error::domain(format!(
                "{} network needs a non-empty sequence",
                self.arch.name()
            )));
        }
        Error::check_len("network input", len * self.arch.input_dim(), input.len())
    }

    /// Logits for every position (eval mode, no dropout).
    pub fn logits(&self, input: &[f64], len: usize) -> Result<Vec<f64>> {
        self.check_input(input, len)?;
        let mut x = input.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut y = vec![0.0; len * layer.out_channels];
            layer.forward_into(&x, len, &mut y);
            if li + 1 < self.layers.len() {
                relu(&mut y);
            }
            x = y;
        }
        Ok(x)
    }

    /// Softmax probabilities, `len x classes`, every entry strictly positive.
    pub fn probabilities(&self, input: &[f64], len: usize) -> Result<Vec<f64>> {
        let mut logits = self.logits(input, len)?;
        for row in logits.chunks_mut(self.arch.classes()) {
            softmax_in_place(row);
            for p in row.iter_mut() {
                *p = p.max(MIN_PROB);
            }
        }
        Ok(logits)
    }

    /// Training-mode forward pass recording everything `backward` needs.
    /// `dropout` is the drop probability for hidden activations.
    pub fn forward_train<R: Rng>(
        &self,
        input: &[f64],
        len: usize,
        dropout: f64,
        rng: &mut R,
    ) -> Result<ForwardCache> {
        self.check_input(input, len)?;
        let n = self.layers.len();
        let mut cache = ForwardCache {
            len,
            inputs: Vec::with_capacity(n),
            hidden: Vec::with_capacity(n - 1),
            masks: Vec::new(),
            logits: Vec::new(),
        };
        let keep_scale = 1.0 / (1.0 - dropout);
        let mut x = input.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; len * layer.out_channels];
            layer.forward_into(&x, len, &mut z);
            cache.inputs.push(x);
            if li + 1 == n {
                cache.logits = z;
                break;
            }
            let mut h = z.clone();
            relu(&mut h);
            if dropout > 0.0 {
                let mask: Vec<f64> = (0..h.len())
                    .map(|_| if rng.gen::<f64>() < dropout { 0.0 } else { keep_scale })
                    .collect();
                for (v, m) in h.iter_mut().zip(&mask) {
                    *v *= m;
                }
                cache.masks.push(mask);
            }
            cache.hidden.push(z);
            x = h;
        }
        Ok(cache)
    }

    /// Back-propagates the summed cross-entropy of `targets` (one class per
    /// position) multiplied by `scale`. Gradients are added to `grads`;
    /// returns the unscaled summed loss.
    pub fn backward(&self, cache: &ForwardCache, targets: &[usize], scale: f64, grads: &mut Gradients) -> Result<f64> {
        Error::check_len("targets", cache.len, targets.len())?;
        let classes = self.arch.classes();
        let len = cache.len;
        let mut delta = cache.logits.clone();
        let mut loss = 0.0;
        for (row, &t) in delta.chunks_mut(classes).zip(targets) {
            if t >= classes {
                return Err(Error::domain(format!("class {t} out of range")));
            }
            loss -= log_softmax_at(row, t);
            softmax_in_place(row);
            row[t] -= 1.0;
            for v in row.iter_mut() {
                *v *= scale;
            }
        }
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            if li == 0 {
                layer.backward(&cache.inputs[0], len, &delta, &mut grads[0], None);
                break;
            }
            let mut grad_in = vec![0.0; len * layer.in_channels];
            layer.backward(&cache.inputs[li], len, &delta, &mut grads[li], Some(grad_in.as_mut_slice()));
            // through dropout and ReLU of hidden layer li-1
            if let Some(mask) = cache.masks.get(li - 1) {
                for (g, m) in grad_in.iter_mut().zip(mask) {
                    *g *= m;
                }
            }
            for (g, &z) in grad_in.iter_mut().zip(&cache.hidden[li - 1]) {
                if z <= 0.0 {
                    *g = 0.0;
                }
            }
            delta = grad_in;
        }
        Ok(loss)
    }

    /// Summed cross-entropy in eval mode, from log-softmax of the logits.
    pub fn eval_loss(&self, input: &[f64], len: usize, targets: &[usize]) -> Result<f64> {
        Error::check_len("targets", len, targets.len())?;
        let logits = self.logits(input, len)?;
        let classes = self.arch.classes();
        let mut loss = 0.0;
        for (row, &t) in logits.chunks(classes).zip(targets) {
            if t >= classes {
                return Err(Error::domain(format!("class {t} out of range")));
            }
            loss -= log_softmax_at(row, t);
        }
        Ok(loss)
    }

    /// Sign pattern of all hidden pre-activations (eval mode), used to detect
    /// ReLU kinks in finite-difference checks.
    pub fn activation_pattern(&self, input: &[f64], len: usize) -> Result<Vec<bool>> {
        self.check_input(input, len)?;
        let mut pattern = Vec::new();
        let mut x = input.to_vec();
        for layer in &self.layers[..self.layers.len() - 1] {
            let mut y = vec![0.0; len * layer.out_channels];
            layer.forward_into(&x, len, &mut y);
            relu(&mut y);
            pattern.extend(y.iter().map(|&v| v > 0.0));
            x = y;
        }
        Ok(pattern)
    }
}

/// Floor applied to output probabilities so that logs stay finite.
pub const MIN_PROB: f64 = 1e-15;

fn relu(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

fn log_softmax_at(row: &[f64], t: usize) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
    row[t] - lse
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_counts() {
        assert_eq!(CnnParams::zeros(Architecture::Unary).num_params(), 17_960);
        assert_eq!(CnnParams::zeros(Architecture::Pairwise).num_params(), 12_870);
        for arch in [Architecture::Unary, Architecture::Pairwise] {
            let sum: usize = arch.shapes().iter().map(|(i, o, k)| i * o * k).sum();
            assert_eq!(sum, arch.expected_params());
        }
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        let p = CnnParams::zeros(Architecture::Unary);
        let x = vec![0.5; 4 * 128];
        let probs = p.probabilities(&x, 4).unwrap();
        assert!(probs.iter().all(|&v| v == 0.5));
        let q = CnnParams::zeros(Architecture::Pairwise);
        let probs = q.probabilities(&vec![1.0; 3 * 25], 3).unwrap();
        assert!(probs.iter().all(|&v| v == 0.25));
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let p = CnnParams::zeros(Architecture::Unary);
        assert!(p.probabilities(&[], 0).is_err());
        assert!(p.probabilities(&[0.0; 127], 1).is_err());
    }

    #[test]
    fn rows_sum_to_one_and_eval_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = CnnParams::init(Architecture::Unary, &mut rng);
        let x: Vec<f64> = (0..7 * 128).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let a = p.probabilities(&x, 7).unwrap();
        let b = p.probabilities(&x, 7).unwrap();
        assert_eq!(a, b);
        for row in a.chunks(2) {
            assert!((row[0] + row[1] - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn saturated_prediction_has_vanishing_gradient() {
        // final layer pushes class 1 hard via a single positive feature path
        let mut p = CnnParams::zeros(Architecture::Unary);
        for l in 0..4 {
            let k = &mut p.layers[l];
            let centre = k.width / 2;
            let i = k.index(centre, 0, 0);
            k.weights[i] = 1.0;
        }
        let last = &mut p.layers[4];
        let i = last.index(1, 0, 1);
        last.weights[i] = 1000.0;
        let mut x = vec![0.0; 128];
        x[0] = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cache = p.forward_train(&x, 1, 0.0, &mut rng).unwrap();
        let mut g = p.zero_gradients();
        let loss = p.backward(&cache, &[1], 1.0, &mut g).unwrap();
        assert!(loss < 1e-300);
        assert!(g.iter().flatten().all(|v| v.abs() < 1e-300));
    }
}
