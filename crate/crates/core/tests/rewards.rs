use colav::guidance::NavFeatures;
use colav::rewards::{
    dynamic_colav_reward, dynamic_raw_penalty, lambda_i, path_reward, static_colav_reward,
    static_penalty, total_reward_from_rays, zeta_x, RayReading, RewardConfig,
};
use proptest::prelude::*;
use std::f64::consts::PI;

fn nav(u: f64, psi: f64, eps: f64) -> NavFeatures {
    NavFeatures {
        u,
        v: 0.0,
        r: 0.0,
        cross_track_error: eps,
        heading_error: psi,
        lookahead_heading_error: psi,
        omega_bar: 0.0,
        progress: 0.0,
    }
}

#[test]
fn table_values() {
    let c = RewardConfig::default();
    assert!((path_reward(&nav(2.0, 0.0, 0.0), 2.0, &c) - (1.0 + 2.0 * c.gamma_r)).abs() < 1e-9);
    assert!((path_reward(&nav(2.0, PI, 0.0), 2.0, &c) + 1.0).abs() < 1e-9);
    assert!((static_penalty(0.0, 0.0, &c) + 75.0).abs() < 1e-9);
    let expected = 1.0 / (1.0 + 4f64.exp());
    for v in [0.0, 0.5, 3.0] {
        assert!((lambda_i(0.0, v, &c) - expected).abs() < 1e-9);
    }
}

#[test]
fn collision_overrides_everything() {
    let c = RewardConfig::default();
    let rays = [RayReading {
        distance: 0.0,
        angle: 0.0,
        dynamic: false,
        approach_speed: 0.0,
    }];
    let t = total_reward_from_rays(&nav(2.0, 0.0, 0.0), &rays, 1500.0, 2.0, true, &c);
    assert_eq!(t.total, c.r_coll);
}

#[test]
fn empty_world_lambda() {
    let c = RewardConfig::default();
    let rays: Vec<RayReading> = (0..180)
        .map(|i| RayReading {
            distance: 1500.0,
            angle: -PI + i as f64 * PI / 90.0,
            dynamic: false,
            approach_speed: 0.0,
        })
        .collect();
    let (dyn_r, lambda) = dynamic_colav_reward(&rays, 1500.0, &c);
    let expected = 1.0 / (1.0 + (-0.003f64 * 1500.0 + 4.0).exp());
    assert!((lambda - expected).abs() < 1e-12);
    assert!(dyn_r <= 0.0);
    assert!(static_colav_reward(&rays, 1500.0, &c) > -1e-3);
}

proptest! {
    #[test]
    fn starboard_weighs_more_than_port(theta in 0.01f64..112.5f64.to_radians() - 0.01, x in 0.01f64..1500.0) {
        let c = RewardConfig::default();
        prop_assert!(zeta_x(theta, &c) < zeta_x(-theta, &c));
        prop_assert!(dynamic_raw_penalty(x, theta, 0.0, &c) > dynamic_raw_penalty(x, -theta, 0.0, &c));
    }

    #[test]
    fn approaching_costs_more_than_receding(theta in -PI..PI, x in 0.01f64..1500.0, s in 0.01f64..5.0) {
        let c = RewardConfig::default();
        prop_assert!(dynamic_raw_penalty(x, theta, s, &c) > dynamic_raw_penalty(x, theta, -s, &c));
    }

    #[test]
    fn lambda_is_monotone(a in 0.0f64..3000.0, b in 0.0f64..3000.0, v in -5.0f64..5.0) {
        let c = RewardConfig::default();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(lambda_i(lo, v, &c) <= lambda_i(hi, v, &c));
    }

    #[test]
    fn path_reward_falls_with_error(u in 0.0f64..2.0, psi in -1.5f64..1.5, e1 in 0.0f64..30.0, e2 in 0.0f64..30.0) {
        let c = RewardConfig::default();
        prop_assume!((e1 - e2).abs() > 1e-6);
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(path_reward(&nav(u, psi, lo), 2.0, &c) > path_reward(&nav(u, psi, hi), 2.0, &c));
    }
}
