mod common;

use colav::ppo::gae::{clipped_from_ratio, normalize};
use colav::ppo::policy::gaussian_log_prob;
use colav::ppo::{
    compute_gae, loss_and_grad, Adam, LossCoefficients, Minibatch, PolicyParams, RunningNorm,
};
use common::{gae_oracle, numeric_grad};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rollout() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<bool>, f64)> {
    (1usize..64).prop_flat_map(|n| {
        (
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
            prop::collection::vec(prop::bool::weighted(0.1), n),
            -10.0f64..10.0,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gae_matches_explicit_sums((r, v, d, last) in rollout(), gamma in 0.5f64..1.0, lambda in 0.0f64..1.0) {
        let (adv, ret) = compute_gae(&r, &v, &d, last, gamma, lambda).unwrap();
        let oracle = gae_oracle(&r, &v, &d, last, gamma, lambda);
        for t in 0..r.len() {
            prop_assert!((adv[t] - oracle[t]).abs() < 1e-10, "t={} {} vs {}", t, adv[t], oracle[t]);
            prop_assert!((ret[t] - adv[t] - v[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn clipped_objective_never_exceeds_unclipped(ratio in 0.0f64..3.0, adv in -5.0f64..5.0, eps in 0.05f64..0.5) {
        prop_assert!(clipped_from_ratio(ratio, adv, eps) <= ratio * adv + 1e-12);
    }

    #[test]
    fn normalized_batches_are_standard(mut x in prop::collection::vec(-100.0f64..100.0, 2..200)) {
        let spread = x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread > 1e-3);
        normalize(&mut x);
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        prop_assert!(mean.abs() < 1e-9 && (var - 1.0).abs() < 1e-4);
    }
}

#[test]
fn clip_cases() {
    assert_eq!(clipped_from_ratio(1.0, 2.0, 0.2), 2.0);
    assert_eq!(clipped_from_ratio(1.5, 2.0, 0.2), 1.2 * 2.0);
    assert_eq!(clipped_from_ratio(0.5, -2.0, 0.2), 0.8 * -2.0);
    // Outside the trust region on the unfavourable side the ratio is kept.
    assert_eq!(clipped_from_ratio(0.5, 2.0, 0.2), 1.0);
    assert_eq!(clipped_from_ratio(1.5, -2.0, 0.2), -3.0);
}

#[test]
fn gae_respects_episode_ends() {
    let r = [1.0, 1.0, 1.0];
    let v = [0.0, 5.0, 0.0];
    let (adv, _) = compute_gae(&r, &v, &[true, false, false], 7.0, 0.9, 1.0).unwrap();
    assert_eq!(adv[0], 1.0);
    assert!((adv[2] - (1.0 + 0.9 * 7.0)).abs() < 1e-12);
}

fn batch(
    params: &PolicyParams,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (Array2<f64>, Array2<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (d, k) = (params.obs_dim(), params.action_dim());
    let obs = Array2::from_shape_simple_fn((n, d), || rng.random_range(-2.0..2.0));
    let mut actions = Array2::zeros((n, k));
    let mut old = Vec::with_capacity(n);
    for i in 0..n {
        let row = obs.row(i).to_vec();
        let (a, lp) = params.sample_action(&row, rng);
        for j in 0..k {
            actions[(i, j)] = a[j];
        }
        // Keeps the ratio away from the clip kinks.
        old.push(lp + rng.random_range(-0.1..0.1));
    }
    let adv = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let ret = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    (obs, actions, old, adv, ret)
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut params = PolicyParams::new(5, 2, &[8, 6], &mut rng);
    params.log_std.mapv_inplace(|_| rng.random_range(-0.8..0.3));
    let (obs, actions, old, adv, ret) = batch(&params, 24, &mut rng);
    let mb = Minibatch {
        obs: obs.view(),
        actions: actions.view(),
        old_log_probs: &old,
        advantages: &adv,
        returns: &ret,
    };
    let coef = LossCoefficients {
        clip: 0.2,
        value: 0.5,
        entropy: 0.01,
    };
    let (_, grad) = loss_and_grad(&params, &mb, &coef);
    let analytic = grad.to_flat();
    let numeric = numeric_grad(&params, 1e-6, |p| loss_and_grad(p, &mb, &coef).0.total);
    let mut checked = 0;
    for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
        let scale = a.abs().max(n.abs());
        if scale < 1e-6 {
            continue;
        }
        let rel = (a - n).abs() / scale;
        assert!(rel <= 1e-4, "param {i}: {a} vs {n} ({rel})");
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} informative coordinates");
}

#[test]
fn forward_pass_matches_explicit_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = PolicyParams::new(4, 2, &[5, 3], &mut rng);
    let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut h = x.clone();
    let layers = &params.policy.layers;
    for (k, l) in layers.iter().enumerate() {
        let mut out = vec![0.0; l.w.ncols()];
        for j in 0..l.w.ncols() {
            let mut z = l.b[j];
            for i in 0..l.w.nrows() {
                z += h[i] * l.w[(i, j)];
            }
            out[j] = if k + 1 == layers.len() { z } else { z.tanh() };
        }
        h = out;
    }
    let got = params.mean_action(&x);
    for (a, b) in got.iter().zip(&h) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn sampled_actions_follow_the_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut params = PolicyParams::new(3, 2, &[4], &mut rng);
    params.log_std[0] = -1.0;
    params.log_std[1] = 0.5;
    let obs = [0.2, -0.4, 0.9];
    let mean = params.mean_action(&obs);
    let n = 40_000;
    let mut sum = [0.0; 2];
    let mut sq = [0.0; 2];
    for _ in 0..n {
        let (a, lp) = params.sample_action(&obs, &mut rng);
        assert!(
            (lp - gaussian_log_prob(&a, &mean, params.log_std.as_slice().unwrap())).abs() < 1e-12
        );
        for j in 0..2 {
            sum[j] += a[j];
            sq[j] += (a[j] - mean[j]).powi(2);
        }
    }
    for j in 0..2 {
        let std = params.log_std[j].exp();
        assert!((sum[j] / n as f64 - mean[j]).abs() < 4.0 * std / (n as f64).sqrt());
        assert!(((sq[j] / n as f64).sqrt() / std - 1.0).abs() < 0.02);
    }
}

#[test]
fn log_density_matches_closed_form() {
    let lp = gaussian_log_prob(&[1.0], &[0.0], &[0.0]);
    assert!((lp - (-0.5 - 0.5 * (2.0 * std::f64::consts::PI).ln())).abs() < 1e-12);
}

#[test]
fn first_adam_step_moves_by_the_learning_rate() {
    let mut adam = Adam::new(3, 0.01);
    let mut p = vec![1.0, 2.0, 3.0];
    adam.step(&mut p, &[4.0, -0.5, 0.0]);
    assert!((p[0] - 0.99).abs() < 1e-6);
    assert!((p[1] - 2.01).abs() < 1e-6);
    assert_eq!(p[2], 3.0);
}

#[test]
fn running_norm_tracks_batch_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data: Vec<Vec<f64>> = (0..5000)
        .map(|_| {
            vec![
                rng.random_range(0.0..10.0),
                rng.random_range(-1.0..1.0) * 3.0 + 7.0,
            ]
        })
        .collect();
    let mut norm = RunningNorm::new(2, true);
    for chunk in data.chunks(137) {
        norm.update(chunk);
    }
    let n = data.len() as f64;
    for j in 0..2 {
        let mean = data.iter().map(|x| x[j]).sum::<f64>() / n;
        let var = data.iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / n;
        assert!((norm.mean[j] - mean).abs() < 1e-9);
        assert!((norm.std()[j] - var.sqrt()).abs() < 1e-6);
    }
    let z = norm.normalize(&[norm.mean[0], norm.mean[1]]);
    assert!(z.iter().all(|v| v.abs() < 1e-9));
}
