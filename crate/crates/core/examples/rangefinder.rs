//! The 180-ray rangefinder around a ship passing a rock, a breakwater and
//! an oncoming vessel, pooled into nine sectors.
//!
//!     cargo run --example rangefinder

use colav::dynamics::VesselState;
use colav::geometry::Point;
use colav::sensing::{perception_vector, sense, Obstacle, ObstacleKind, SensorConfig, Shape};

fn main() {
    let suite = SensorConfig::default().build().expect("default sensor");
    let pose = VesselState::at_rest(0.0, 0.0, 0.0);
    let obstacles = vec![
        Obstacle::circle(1, Point::new(120.0, 40.0), 25.0),
        Obstacle {
            id: 2,
            shape: Shape::polygon(vec![
                Point::new(-50.0, -80.0),
                Point::new(300.0, -80.0),
                Point::new(300.0, -95.0),
                Point::new(-50.0, -95.0),
            ]),
            kind: ObstacleKind::Static,
            velocity: Point::zeros(),
        },
        Obstacle {
            id: 3,
            shape: Shape::Circle {
                center: Point::new(600.0, -10.0),
                radius: 30.0,
            },
            kind: ObstacleKind::Dynamic,
            velocity: Point::new(-4.0, 0.5),
        },
    ];
    let frame = sense(&pose, &obstacles, &suite, 1.0);
    println!(
        "{:>6} {:>10} {:>9} {:>9} {:>9}",
        "sector", "distance", "closeness", "v_x", "v_y"
    );
    for k in 0..frame.sector_distances.len() {
        let (vx, vy) = frame.sector_velocities[k];
        println!(
            "{k:>6} {:>10.1} {:>9.3} {:>9.2} {:>9.2}",
            frame.sector_distances[k], frame.sector_closeness[k], vx, vy
        );
    }
    let hits = frame.hit_ids.iter().flatten().count();
    println!("{hits} of {} rays hit something", frame.distances.len());
    println!(
        "perception vector has {} entries",
        perception_vector(&frame).len()
    );
}
