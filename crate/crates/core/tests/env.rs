use colav::env::{
    generate_training_scenario, EnvConfig, GeneratorConfig, ScenarioSource, VesselEnv,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn generated_env(seed: u64) -> VesselEnv {
    let ctx = Arc::new(EnvConfig::default().build().unwrap());
    let source = ScenarioSource::Generated {
        generator: GeneratorConfig::default(),
    };
    VesselEnv::new(ctx, source, seed)
}

fn rollout(seed: u64, steps: usize) -> Vec<(Vec<f64>, f64, bool)> {
    let mut env = generated_env(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
    let mut out = vec![(env.reset().unwrap().to_vec(), 0.0, false)];
    for _ in 0..steps {
        let action = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let r = env.step(action).unwrap();
        out.push((r.observation.to_vec(), r.reward, r.done));
        if r.done {
            out.push((env.reset().unwrap().to_vec(), 0.0, false));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn observations_stay_finite(seed in any::<u64>()) {
        let env = generated_env(0);
        for (obs, reward, _) in rollout(seed, 300) {
            prop_assert_eq!(obs.len(), env.obs_dim());
            prop_assert!(obs.iter().all(|v| v.is_finite()));
            prop_assert!(reward.is_finite());
            // Closeness features live in [0, 1].
            for k in 0..9 {
                prop_assert!((0.0..=1.0).contains(&obs[6 + 3 * k]));
            }
        }
    }

    #[test]
    fn generated_scenarios_validate(seed in any::<u64>()) {
        let cfg = EnvConfig::default();
        let sc = generate_training_scenario(&GeneratorConfig::default(), seed).unwrap();
        let issues = sc.validate((cfg.ship.length, cfg.ship.width), cfg.fillet(), cfg.world_margin);
        prop_assert!(issues.is_empty(), "{:?}", issues);
    }
}

#[test]
fn rollouts_are_deterministic() {
    let a = rollout(42, 400);
    let b = rollout(42, 400);
    assert_eq!(a, b);
    assert_ne!(a, rollout(43, 400));
}

#[test]
fn stepping_before_reset_fails() {
    let mut env = generated_env(1);
    assert!(env.step([0.0, 0.0]).is_err());
}
