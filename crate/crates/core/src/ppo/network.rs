//! Fully connected tanh networks with hand-written reverse-mode gradients.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `(inputs, outputs)`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    /// Uniform `+-1/sqrt(fan_in)` initialisation for weights and biases.
    pub fn init<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        let w = Array2::from_shape_simple_fn((inputs, outputs), || rng.random_range(-bound..bound));
        let b = Array1::from_shape_simple_fn(outputs, || rng.random_range(-bound..bound));
        Self { w, b }
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            w: Array2::zeros((inputs, outputs)),
            b: Array1::zeros(outputs),
        }
    }

    fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w) + &self.b
    }
}

/// Hidden layers use tanh; the output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Activations kept from a forward pass for the backward pass.
pub struct MlpCache {
    /// Input to each layer.
    inputs: Vec<Array2<f64>>,
}

impl Mlp {
    /// `sizes = [inputs, hidden.., outputs]`.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(
            sizes.len() >= 2,
            "network needs an input and an output size"
        );
        Self {
            layers: sizes
                .windows(2)
                .map(|w| Dense::init(w[0], w[1], rng))
                .collect(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Dense::zeros(l.w.nrows(), l.w.ncols()))
                .collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").w.ncols()
    }

    /// Row-wise forward pass over a batch.
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        self.forward_cached(x).0
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> (Array2<f64>, MlpCache) {
        assert_eq!(x.ncols(), self.input_dim(), "observation width mismatch");
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(&h);
            inputs.push(h);
            h = if k == last { z } else { z.mapv(f64::tanh) };
        }
        (h, MlpCache { inputs })
    }

    /// Accumulates parameter gradients for `d_out = dL/d(output)` into `grad`.
    pub fn backward(&self, cache: &MlpCache, d_out: &Array2<f64>, grad: &mut Mlp) {
        let mut delta = d_out.clone();
        for k in (0..self.layers.len()).rev() {
            let input = &cache.inputs[k];
            grad.layers[k].w += &input.t().dot(&delta);
            grad.layers[k].b += &delta.sum_axis(Axis(0));
            if k > 0 {
                // input = tanh(z) of the previous layer.
                let back = delta.dot(&self.layers[k].w.t());
                delta = back * input.mapv(|a| 1.0 - a * a);
            }
        }
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn write_flat(&self, out: &mut Vec<f64>) {
        for l in &self.layers {
            out.extend(l.w.iter());
            out.extend(l.b.iter());
        }
    }

    /// Reads parameters in `write_flat` order; returns the number consumed.
    pub fn read_flat(&mut self, src: &[f64]) -> usize {
        let mut k = 0;
        for l in &mut self.layers {
            for v in l.w.iter_mut().chain(l.b.iter_mut()) {
                *v = src[k];
                k += 1;
            }
        }
        k
    }
}
