//! Runs the scripted head-on and crossing sets with a simple look-ahead
//! controller (no learning) and prints outcome counts per set. Pass a
//! checkpoint to evaluate a trained policy instead.
//!
//!     cargo run --release --example evaluate_encounters -- [checkpoint.json]

use colav::env::{EncounterConfig, EnvConfig, ScenarioSource};
use colav::eval::{build_episodes, evaluate, Aggregate, EncounterLayout, ScenarioSet};
use colav::ppo::PolicySnapshot;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let snapshot = match std::env::args().nth(1) {
        Some(p) => Some(PolicySnapshot::load(p.as_ref())?),
        None => None,
    };
    let ctx = Arc::new(EnvConfig::default().build()?);
    // Observation layout: u, v, r, e, chi, chi_la, then sector features.
    let controller = |obs: &[f64]| -> [f64; 2] {
        match &snapshot {
            Some(s) => {
                let a = s.act(obs);
                [a[0], a[1]]
            }
            None => [0.8, (2.0 * obs[4] - 4.0 * obs[2]).clamp(-1.0, 1.0)],
        }
    };
    let layout = EncounterLayout::default();
    let source = ScenarioSource::Generated {
        generator: Default::default(),
    };
    for set in [
        ScenarioSet::HeadOn,
        ScenarioSet::CrossingStarboard,
        ScenarioSet::CrossingPort,
    ] {
        let specs = build_episodes(&set, 5, 1, &source, &layout)?;
        let (records, _) = evaluate(&ctx, &specs, &controller, &EncounterConfig::default(), 0)?;
        let agg = Aggregate::from_episodes(&records);
        println!(
            "{set}: goal {} collision {} timeout {} mean reward {:.1} encounters {:?}",
            agg.goal, agg.collision, agg.timeout, agg.mean_total_reward, agg.encounter_outcomes
        );
    }
    Ok(())
}
