//! Generalized advantage estimation.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("GAE input lengths differ: {rewards} rewards, {values} values, {dones} dones")]
pub struct GaeLengthError {
    pub rewards: usize,
    pub values: usize,
    pub dones: usize,
}

/// Advantages and returns for one actor's rollout. `dones[t]` marks that the
/// episode ended with step `t`; `last_value` bootstraps the state after the
/// final step.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), GaeLengthError> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(GaeLengthError {
            rewards: n,
            values: values.len(),
            dones: dones.len(),
        });
    }
    let mut adv = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n { values[t + 1] } else { last_value };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        acc = delta + gamma * lambda * live * acc;
        adv[t] = acc;
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// Rescales to zero mean and unit standard deviation.
pub fn normalize(values: &mut [f64]) {
    let n = values.len() as f64;
    if values.len() < 2 {
        return;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt() + 1e-8;
    for v in values.iter_mut() {
        *v = (*v - mean) / std;
    }
}

/// `min(r A, clip(r, 1-eps, 1+eps) A)` with `r = exp(logp_new - logp_old)`.
pub fn clipped_objective(logp_new: f64, logp_old: f64, advantage: f64, epsilon: f64) -> f64 {
    let r = (logp_new - logp_old).exp();
    clipped_from_ratio(r, advantage, epsilon)
}

pub fn clipped_from_ratio(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
    (ratio * advantage).min(clipped * advantage)
}
