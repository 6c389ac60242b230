use super::network::{CnnParams, Gradients};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 coefficient; `weight_decay * theta` is added to every gradient.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 1e-4,
        }
    }
}

/// First and second moment estimates for a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Moments {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Moments {
    pub fn zeros(n: usize) -> Self {
        Moments {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }
}

/// One Adam update with bias correction. `t` is the 1-based step number.
pub fn adam_update(cfg: &AdamConfig, t: u64, params: &mut [f64], grads: &[f64], moments: &mut Moments) {
    let b1t = 1.0 - cfg.beta1.powi(t as i32);
    let b2t = 1.0 - cfg.beta2.powi(t as i32);
    for (i, (p, &g0)) in params.iter_mut().zip(grads).enumerate() {
        let g = g0 + cfg.weight_decay * *p;
        let m = &mut moments.m[i];
        let v = &mut moments.v[i];
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / b1t;
        let v_hat = *v / b2t;
        *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

/// Optimizer state of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub params: CnnParams,
    pub moments: Vec<Moments>,
    pub step: u64,
    pub adam: AdamConfig,
    pub dropout: f64,
    pub seed: u64,
}

impl TrainState {
    pub fn new(params: CnnParams, adam: AdamConfig, dropout: f64, seed: u64) -> Self {
        let moments = params.layers.iter().map(|l| Moments::zeros(l.len())).collect();
        TrainState {
            params,
            moments,
            step: 0,
            adam,
            dropout,
            seed,
        }
    }

    pub fn adam_step(&mut self, grads: &Gradients) -> Result<()> {
        Error::check_len("gradient layers", self.params.layers.len(), grads.len())?;
        for (layer, g) in self.params.layers.iter().zip(grads) {
            Error::check_len("layer gradient", layer.len(), g.len())?;
        }
        self.step += 1;
        for ((layer, g), mom) in self.params.layers.iter_mut().zip(grads).zip(&mut self.moments) {
            adam_update(&self.adam, self.step, &mut layer.weights, g, mom);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_sign_scaled() {
        let cfg = AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::default()
        };
        let mut p = vec![1.0, 1.0, 1.0];
        let g = [0.5, -2.0, 1e-3];
        let mut m = Moments::zeros(3);
        adam_update(&cfg, 1, &mut p, &g, &mut m);
        for (pi, gi) in p.iter().zip(g) {
            let expected = 1.0 - cfg.learning_rate * gi / (gi.abs() + cfg.epsilon);
            assert!((pi - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_gradient_applies_only_decay() {
        let cfg = AdamConfig::default();
        let mut p = vec![0.0, 2.0];
        let mut m = Moments::zeros(2);
        adam_update(&cfg, 1, &mut p, &[0.0, 0.0], &mut m);
        assert_eq!(p[0], 0.0);
        // effective gradient is wd * 2 > 0, so the first step moves by ~lr
        assert!((p[1] - (2.0 - cfg.learning_rate)).abs() < 1e-6);
    }

    #[test]
    fn converges_on_quadratic() {
        // f(x) = 0.5 * sum a_i (x_i - c_i)^2
        let a = [1.0, 4.0, 0.5, 10.0];
        let c = [0.3, -0.2, 0.1, 0.05];
        let cfg = AdamConfig {
            learning_rate: 0.035,
            weight_decay: 0.0,
            ..AdamConfig::default()
        };
        let mut x = vec![0.0; 4];
        let mut m = Moments::zeros(4);
        for t in 1..=100 {
            let g: Vec<f64> = (0..4).map(|i| a[i] * (x[i] - c[i])).collect();
            adam_update(&cfg, t, &mut x, &g, &mut m);
        }
        let err = x.iter().zip(c).map(|(xi, ci)| (xi - ci).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-3, "distance {err}");
    }
}
