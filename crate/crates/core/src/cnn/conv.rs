//! Bias-free 1-D convolution with stride 1 and zero "same" padding.
//!
//! Sequences are row-major `len x channels` buffers.

use crate::error::{Error, Result};

/// Kernel weights laid out as `[tap][in][out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    pub in_channels: usize,
    pub out_channels: usize,
    pub width: usize,
    pub weights: Vec<f64>,
}

impl ConvKernel {
    pub fn zeros(in_channels: usize, out_channels: usize, width: usize) -> Self {
        assert!(width % 2 == 1, "kernel width must be odd");
        ConvKernel {
            in_channels,
            out_channels,
            width,
            weights: vec![0.0; in_channels * out_channels * width],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn index(&self, tap: usize, input: usize, output: usize) -> usize {
        (tap * self.in_channels + input) * self.out_channels + output
    }

    pub fn at(&self, tap: usize, input: usize, output: usize) -> f64 {
        self.weights[self.index(tap, input, output)]
    }

    fn pad(&self) -> usize {
        self.width / 2
    }

    /// Output length equals input length.
    pub fn forward(&self, input: &[f64], len: usize) -> Result<Vec<f64>> {
        if len == 0 {
            return Err(Error::domain("convolution over an empty sequence"));
        }
        if input.len() != len * self.in_channels {
            return Err(Error::domain(format!(
                "input has {} values, expected {len} x {} channels",
                input.len(),
                self.in_channels
            )));
        }
        let mut out = vec![0.0; len * self.out_channels];
        self.forward_into(input, len, &mut out);
        Ok(out)
    }

    pub(crate) fn forward_into(&self, input: &[f64], len: usize, out: &mut [f64]) {
        let (cin, cout, pad) = (self.in_channels, self.out_channels, self.pad());
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..len {
            let y = &mut out[i * cout..(i + 1) * cout];
            for tap in 0..self.width {
                let Some(src) = (i + tap).checked_sub(pad).filter(|&s| s < len) else {
                    continue;
                };
                let x = &input[src * cin..(src + 1) * cin];
                for (c, &xv) in x.iter().enumerate() {
                    if xv == 0.0 {
                        continue;
                    }
                    let w = &self.weights[(tap * cin + c) * cout..(tap * cin + c + 1) * cout];
                    for (yo, &wo) in y.iter_mut().zip(w) {
                        *yo += xv * wo;
                    }
                }
            }
        }
    }

    /// Accumulates the weight gradient into `grad_w` and, if requested, writes
    /// the input gradient into `grad_in`.
    pub(crate) fn backward(
        &self,
        input: &[f64],
        len: usize,
        grad_out: &[f64],
        grad_w: &mut [f64],
        mut grad_in: Option<&mut [f64]>,
    ) {
        let (cin, cout, pad) = (self.in_channels, self.out_channels, self.pad());
        if let Some(g) = grad_in.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        for i in 0..len {
            let gy = &grad_out[i * cout..(i + 1) * cout];
            for tap in 0..self.width {
                let Some(src) = (i + tap).checked_sub(pad).filter(|&s| s < len) else {
                    continue;
                };
                for c in 0..cin {
                    let base = (tap * cin + c) * cout;
                    let xv = input[src * cin + c];
                    if xv != 0.0 {
                        for (gw, &g) in grad_w[base..base + cout].iter_mut().zip(gy) {
                            *gw += xv * g;
                        }
                    }
                    if let Some(gx) = grad_in.as_deref_mut() {
                        let w = &self.weights[base..base + cout];
                        let dot: f64 = w.iter().zip(gy).map(|(a, b)| a * b).sum();
                        gx[src * cin + c] += dot;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_kernel() {
        let mut k = ConvKernel::zeros(3, 3, 1);
        for c in 0..3 {
            let i = k.index(0, c, c);
            k.weights[i] = 1.0;
        }
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(k.forward(&x, 2).unwrap(), x);
    }

    #[test]
    fn padding_leaves_only_center_tap() {
        let mut k = ConvKernel::zeros(1, 1, 3);
        k.weights = vec![10.0, 2.0, 30.0];
        assert_eq!(k.forward(&[1.5], 1).unwrap(), vec![3.0]);
        // length 2: y0 = 2*x0 + 30*x1, y1 = 10*x0 + 2*x1
        assert_eq!(k.forward(&[1.0, 1.0], 2).unwrap(), vec![32.0, 12.0]);
    }

    #[test]
    fn channel_mismatch_and_empty_input() {
        let k = ConvKernel::zeros(2, 1, 3);
        assert!(k.forward(&[1.0, 2.0, 3.0], 1).is_err());
        assert!(k.forward(&[], 0).is_err());
    }

    #[test]
    fn output_is_linear() {
        let mut k = ConvKernel::zeros(2, 2, 3);
        for (i, w) in k.weights.iter_mut().enumerate() {
            *w = (i as f64 * 0.37).sin();
        }
        let a = [0.3, -1.0, 2.0, 0.5, -0.7, 0.1];
        let b = [1.1, 0.2, -0.4, 0.9, 0.0, 2.5];
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - y).collect();
        let ya = k.forward(&a, 3).unwrap();
        let yb = k.forward(&b, 3).unwrap();
        let ys = k.forward(&sum, 3).unwrap();
        for i in 0..ys.len() {
            assert!((ys[i] - (2.0 * ya[i] - yb[i])).abs() < 1e-12);
        }
    }
}
