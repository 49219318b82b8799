//! Draws a few training scenarios, validates them and prints a summary.
//!
//!     cargo run --example generate_scenario -- [seed]

use colav::commands::describe;
use colav::env::{generate_training_scenario, EnvConfig, GeneratorConfig};

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let env = EnvConfig::default();
    let generator = GeneratorConfig::default();
    for k in 0..3 {
        let sc = generate_training_scenario(&generator, seed + k).expect("generator settles");
        let issues = sc.validate(
            (env.ship.length, env.ship.width),
            env.fillet(),
            env.world_margin,
        );
        println!("--- seed {} ({} issues)", seed + k, issues.len());
        print!("{}", describe(&sc, env.fillet(), env.world_margin));
    }
}
