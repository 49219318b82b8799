//! A hand-tuned look-ahead heading controller on a filleted zig-zag path,
//! showing projection, cross-track error and the navigation features.
//!
//!     cargo run --example path_following

use colav::dynamics::{step, ControlInput, VesselModel, VesselState};
use colav::geometry::Point;
use colav::guidance::{build_path, nav_features};

fn main() {
    let waypoints = [
        Point::new(0.0, 0.0),
        Point::new(200.0, 80.0),
        Point::new(400.0, -40.0),
        Point::new(650.0, 0.0),
    ];
    let path = build_path(&waypoints, 10.0).expect("valid path");
    let model = VesselModel::default();
    let mut s = VesselState::at_rest(0.0, -15.0, 0.3);
    let mut omega = 0.0;
    let dt = 0.2;
    println!("path length {:.1} m", path.length());
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>8}",
        "t", "omega", "e", "chi", "u"
    );
    for k in 0..2000 {
        let (nav, _) = nav_features(&path, &s, omega, 25.0);
        omega = nav.omega_bar;
        if k % 100 == 0 {
            println!(
                "{:>6.1} {:>8.1} {:>8.2} {:>8.3} {:>8.3}",
                k as f64 * dt,
                nav.omega_bar,
                nav.cross_track_error,
                nav.heading_error,
                nav.u
            );
        }
        if nav.progress > 0.99 {
            println!("reached the end after {:.1} s", k as f64 * dt);
            break;
        }
        let rudder = (2.0 * nav.heading_error - 4.0 * s.r).clamp(-1.0, 1.0);
        let input = ControlInput::from_normalized([0.8, rudder], &model);
        s = step(&s, &input, &model, dt).expect("finite state");
    }
}
