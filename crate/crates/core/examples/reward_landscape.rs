//! Tabulates the collision-avoidance penalties by bearing and distance, and
//! the path-following weight for approaching and receding ships.
//!
//!     cargo run --example reward_landscape

use colav::rewards::{colregs_sector, dynamic_penalty, lambda_i, static_penalty, RewardConfig};

fn main() {
    let c = RewardConfig::default();
    let bearings = [-150.0, -90.0, -45.0, -10.0, 0.0, 10.0, 45.0, 90.0, 150.0];
    let distances = [0.0, 50.0, 200.0, 500.0, 1000.0];

    println!("static penalty (rows: bearing deg, columns: distance m)");
    table(&bearings, &distances, |x, th| static_penalty(x, th, &c));

    for v in [2.0, -2.0] {
        println!("\ndynamic penalty, target speed towards own ship {v} m/s");
        table(&bearings, &distances, |x, th| dynamic_penalty(x, th, v, &c));
    }

    println!("\n{:>8} {:>12} {:>12}", "x (m)", "lambda(+)", "lambda(-)");
    for x in [0.0, 250.0, 500.0, 1000.0, 1500.0, 2000.0] {
        println!(
            "{x:>8.0} {:>12.4} {:>12.4}",
            lambda_i(x, 1.0, &c),
            lambda_i(x, -1.0, &c)
        );
    }
}

fn table(bearings: &[f64], distances: &[f64], f: impl Fn(f64, f64) -> f64) {
    print!("{:>7} {:>10}", "deg", "sector");
    for x in distances {
        print!(" {x:>10.0}");
    }
    println!();
    for &b in bearings {
        let th = f64::to_radians(b);
        print!(
            "{b:>7.0} {:>10}",
            format!("{:?}", colregs_sector(th)).to_lowercase()
        );
        for &x in distances {
            print!(" {:>10.3}", f(x, th));
        }
        println!();
    }
}
