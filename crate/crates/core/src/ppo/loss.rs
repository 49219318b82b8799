//! Combined PPO loss `-J_clip + c1 * value_mse - c2 * entropy` and its exact
//! gradient with respect to every parameter.

use super::gae::clipped_from_ratio;
use super::policy::PolicyParams;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

/// One minibatch, rows aligned across fields.
pub struct Minibatch<'a> {
    pub obs: ArrayView2<'a, f64>,
    /// Unclamped sampled actions.
    pub actions: ArrayView2<'a, f64>,
    pub old_log_probs: &'a [f64],
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossCoefficients {
    pub clip: f64,
    pub value: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossReport {
    pub total: f64,
    /// `-mean(J_clip)`.
    pub policy: f64,
    /// Mean squared value error (before the coefficient).
    pub value: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
}

/// Loss value and gradient; the gradient has the same layout as `params`.
pub fn loss_and_grad(
    params: &PolicyParams,
    mb: &Minibatch,
    coef: &LossCoefficients,
) -> (LossReport, PolicyParams) {
    let n = mb.obs.nrows();
    let nf = n as f64;
    let k = params.action_dim();
    let obs = mb.obs.to_owned();
    let mut grad = params.zeros_like();

    let (mean, pcache) = params.policy.forward_cached(&obs);
    let log_std = &params.log_std;
    let std: Vec<f64> = log_std.iter().map(|v| v.exp()).collect();

    let mut d_mean = Array2::zeros((n, k));
    let mut policy_loss = 0.0;
    let mut kl = 0.0;
    let mut clipped = 0usize;
    for i in 0..n {
        let mut logp = 0.0;
        let mut z = vec![0.0; k];
        for j in 0..k {
            z[j] = (mb.actions[(i, j)] - mean[(i, j)]) / std[j];
            logp += -0.5 * z[j] * z[j] - log_std[j] - 0.5 * std::f64::consts::TAU.ln();
        }
        let a = mb.advantages[i];
        let ratio = (logp - mb.old_log_probs[i]).exp();
        policy_loss -= clipped_from_ratio(ratio, a, coef.clip) / nf;
        kl += (mb.old_log_probs[i] - logp) / nf;
        if (ratio - 1.0).abs() > coef.clip {
            clipped += 1;
        }
        let bounded = ratio.clamp(1.0 - coef.clip, 1.0 + coef.clip);
        // Only the unclipped branch carries gradient.
        let d_logp = if ratio * a <= bounded * a {
            -ratio * a / nf
        } else {
            0.0
        };
        for j in 0..k {
            d_mean[(i, j)] = d_logp * z[j] / std[j];
            grad.log_std[j] += d_logp * (z[j] * z[j] - 1.0);
        }
    }
    params.policy.backward(&pcache, &d_mean, &mut grad.policy);

    let (values, vcache) = params.value.forward_cached(&obs);
    let mut d_value = Array2::zeros((n, 1));
    let mut mse = 0.0;
    for i in 0..n {
        let err = values[(i, 0)] - mb.returns[i];
        mse += err * err / nf;
        d_value[(i, 0)] = 2.0 * coef.value * err / nf;
    }
    params.value.backward(&vcache, &d_value, &mut grad.value);

    let entropy = params.entropy();
    for j in 0..k {
        grad.log_std[j] -= coef.entropy;
    }

    let report = LossReport {
        total: policy_loss + coef.value * mse - coef.entropy * entropy,
        policy: policy_loss,
        value: mse,
        entropy,
        approx_kl: kl,
        clip_fraction: clipped as f64 / nf,
    };
    (report, grad)
}
