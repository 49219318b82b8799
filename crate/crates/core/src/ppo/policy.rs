//! Diagonal Gaussian policy with a separate value network.

use super::network::Mlp;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub policy: Mlp,
    /// State-independent log standard deviation per action dimension.
    pub log_std: Array1<f64>,
    pub value: Mlp,
}

impl PolicyParams {
    pub fn new<R: Rng>(obs_dim: usize, action_dim: usize, hidden: &[usize], rng: &mut R) -> Self {
        let sizes = |out: usize| {
            std::iter::once(obs_dim)
                .chain(hidden.iter().copied())
                .chain(std::iter::once(out))
                .collect::<Vec<_>>()
        };
        let policy = Mlp::new(&sizes(action_dim), rng);
        let value = Mlp::new(&sizes(1), rng);
        Self {
            policy,
            log_std: Array1::zeros(action_dim),
            value,
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            policy: self.policy.zeros_like(),
            log_std: Array1::zeros(self.log_std.len()),
            value: self.value.zeros_like(),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.policy.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn n_params(&self) -> usize {
        self.policy.n_params() + self.log_std.len() + self.value.n_params()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        self.policy.write_flat(&mut out);
        out.extend(self.log_std.iter());
        self.value.write_flat(&mut out);
        out
    }

    pub fn set_flat(&mut self, src: &[f64]) {
        assert_eq!(src.len(), self.n_params(), "flat parameter length mismatch");
        let mut k = self.policy.read_flat(src);
        for v in self.log_std.iter_mut() {
            *v = src[k];
            k += 1;
        }
        self.value.read_flat(&src[k..]);
    }

    pub fn clamp_log_std(&mut self) {
        self.log_std
            .mapv_inplace(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX));
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }

    /// Batched action means.
    pub fn policy_forward(&self, obs: &Array2<f64>) -> Array2<f64> {
        self.policy.forward(obs)
    }

    /// Batched state values.
    pub fn value_forward(&self, obs: &Array2<f64>) -> Array1<f64> {
        self.value.forward(obs).column(0).to_owned()
    }

    pub fn mean_action(&self, obs: &[f64]) -> Vec<f64> {
        self.policy_forward(&row(obs)).row(0).to_vec()
    }

    pub fn value_of(&self, obs: &[f64]) -> f64 {
        self.value.forward(&row(obs))[(0, 0)]
    }

    /// Draws an unclamped action and its log-density.
    pub fn sample_action<R: Rng>(&self, obs: &[f64], rng: &mut R) -> (Vec<f64>, f64) {
        let mean = self.mean_action(obs);
        let action: Vec<f64> = mean
            .iter()
            .zip(self.log_std.iter())
            .map(|(m, ls)| {
                let z: f64 = rng.sample(StandardNormal);
                m + ls.exp() * z
            })
            .collect();
        let lp = gaussian_log_prob(&action, &mean, self.log_std.as_slice().expect("contiguous"));
        (action, lp)
    }

    /// Closed-form entropy of the diagonal Gaussian.
    pub fn entropy(&self) -> f64 {
        self.log_std.iter().map(|ls| 0.5 + 0.5 * LN_2PI + ls).sum()
    }
}

pub fn row(x: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape")
}

/// Exact diagonal Gaussian log-density.
pub fn gaussian_log_prob(action: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    action
        .iter()
        .zip(mean)
        .zip(log_std)
        .map(|((a, m), ls)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - 0.5 * LN_2PI
        })
        .sum()
}
