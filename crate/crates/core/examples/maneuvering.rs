//! Turning circle of the bundled vessel: full thrust, then a hard
//! starboard yaw moment once the ship is up to speed.
//!
//!     cargo run --example maneuvering

use colav::dynamics::{step, ControlInput, VesselModel, VesselState};

fn main() {
    let model = VesselModel::default();
    let dt = 0.1;
    let mut s = VesselState::at_rest(0.0, 0.0, 0.0);
    let ahead = ControlInput::new(model.thrust_max, 0.0);
    for _ in 0..1200 {
        s = step(&s, &ahead, &model, dt).expect("finite state");
    }
    println!(
        "steady surge speed {:.3} m/s (u_max {:.3})",
        s.u, model.u_max
    );

    let turn = ControlInput::new(model.thrust_max, model.moment_max);
    let (mut min_y, mut max_y) = (s.y_n, s.y_n);
    // Heading wraps, so integrate the yaw rate instead.
    let (mut turned, mut t) = (0.0, 0.0);
    while turned < 2.0 * std::f64::consts::PI && t < 3600.0 {
        s = step(&s, &turn, &model, dt).expect("finite state");
        turned += s.r * dt;
        min_y = min_y.min(s.y_n);
        max_y = max_y.max(s.y_n);
        t += dt;
    }
    println!(
        "full circle in {t:.1} s; tactical diameter {:.1} m",
        max_y - min_y
    );
    println!("yaw rate {:.4} rad/s, drift speed {:.3} m/s", s.r, s.v);
}
