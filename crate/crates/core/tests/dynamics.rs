use colav::dynamics::{step, ControlInput, ShipConfig, VesselModel, VesselState};
use proptest::prelude::*;

fn simulate(
    model: &VesselModel,
    s0: VesselState,
    input: ControlInput,
    t_end: f64,
    dt: f64,
) -> VesselState {
    let n = (t_end / dt).round() as usize;
    (0..n).fold(s0, |s, _| step(&s, &input, model, dt).unwrap())
}

fn distance(a: &VesselState, b: &VesselState) -> f64 {
    let mut d = a.to_vector() - b.to_vector();
    // Heading is wrapped independently on each trajectory.
    d[2] = colav::geometry::wrap_angle(d[2]);
    d.norm()
}

#[test]
fn rk4_converges_at_fourth_order() {
    let model = VesselModel::default();
    let s0 = VesselState {
        x_n: 0.0,
        y_n: 0.0,
        psi: 0.4,
        u: 1.2,
        v: 0.3,
        r: -0.25,
    };
    // Keeps u, v and r away from zero, where |.| damping is not smooth.
    let input = ControlInput::new(4.0, -0.4);
    let reference = simulate(&model, s0, input, 4.0, 0.4 / 256.0);
    let e1 = distance(&simulate(&model, s0, input, 4.0, 0.4), &reference);
    let e2 = distance(&simulate(&model, s0, input, 4.0, 0.2), &reference);
    let end = simulate(&model, s0, input, 4.0, 0.1);
    assert!(end.u > 0.0 && end.v > 0.0 && end.r < 0.0);
    let e3 = distance(&end, &reference);
    let p1 = (e1 / e2).log2();
    let p2 = (e2 / e3).log2();
    assert!(p1 > 3.9 && p2 > 3.9, "orders {p1} {p2}");
}

#[test]
fn full_thrust_settles_at_the_quadratic_root() {
    let model = VesselModel::default();
    let d_lin = model.linear_damping[(0, 0)];
    let d_quad = model.quadratic_damping[0];
    let t = model.thrust_max;
    let expected = (-d_lin + (d_lin * d_lin + 4.0 * d_quad * t).sqrt()) / (2.0 * d_quad);
    let s = simulate(
        &model,
        VesselState::at_rest(0.0, 0.0, 0.0),
        ControlInput::new(t, 0.0),
        120.0,
        0.1,
    );
    assert!((s.u - expected).abs() < 1e-6, "{} vs {expected}", s.u);
    assert!((expected - model.u_max).abs() / model.u_max < 0.02);
    assert!(s.v.abs() < 1e-12 && s.r.abs() < 1e-12);
}

#[test]
fn preset_parses_with_rigid_body_coriolis() {
    let cfg = ShipConfig::default();
    let model = VesselModel::from_config(&cfg).unwrap();
    assert_ne!(model.coriolis_mass, model.mass);
    assert_eq!(VesselModel::from_config(&model.to_config()).unwrap(), model);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn energy_never_grows_without_input(
        u in -2.5f64..2.5, v in -1.0f64..1.0, r in -1.0f64..1.0, psi in -3.2f64..3.2,
    ) {
        let model = VesselModel::default();
        let mut s = VesselState { x_n: 0.0, y_n: 0.0, psi, u, v, r };
        let mut e = model.kinetic_energy(&s);
        for _ in 0..20 {
            s = step(&s, &ControlInput::default(), &model, 0.1).unwrap();
            let next = model.kinetic_energy(&s);
            prop_assert!(next <= e * (1.0 + 1e-12) + 1e-15, "{} -> {}", e, next);
            e = next;
        }
    }

    #[test]
    fn coriolis_is_skew(u in -3.0f64..3.0, v in -3.0f64..3.0, r in -3.0f64..3.0) {
        let model = VesselModel::default();
        let c = model.coriolis(&nalgebra::Vector3::new(u, v, r));
        prop_assert!((c + c.transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn motion_is_translation_invariant(x in -1e4f64..1e4, y in -1e4f64..1e4, tu in -10.0f64..10.0, tr in -2.0f64..2.0) {
        let model = VesselModel::default();
        let a = VesselState { x_n: 0.0, y_n: 0.0, psi: 0.3, u: 1.0, v: 0.1, r: -0.1 };
        let b = VesselState { x_n: x, y_n: y, ..a };
        let input = ControlInput::new(tu, tr);
        let (a1, b1) = (step(&a, &input, &model, 0.1).unwrap(), step(&b, &input, &model, 0.1).unwrap());
        prop_assert!((b1.x_n - x - a1.x_n).abs() < 1e-9 && (b1.y_n - y - a1.y_n).abs() < 1e-9);
        prop_assert_eq!((a1.u, a1.v, a1.r), (b1.u, b1.v, b1.r));
    }
}
