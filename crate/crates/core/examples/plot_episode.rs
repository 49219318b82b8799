//! Simulates one crossing encounter with a look-ahead controller and writes
//! the scene, reward and cross-track plots as SVG.
//!
//!     cargo run --release --example plot_episode -- [out_dir]

use colav::env::{EnvConfig, ScenarioSource, VesselEnv};
use colav::eval::EncounterLayout;
use colav::plot::log_plots;
use std::path::PathBuf;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "plots/example".into()),
    );
    let layout = EncounterLayout::default();
    let scenario = layout.crossing(true, 10.0);
    let ctx = Arc::new(EnvConfig::default().build()?);
    let mut env = VesselEnv::new(
        ctx,
        ScenarioSource::Fixed {
            scenario: scenario.clone(),
        },
        0,
    );
    let mut obs = env.reset()?.to_vec();
    let mut records = Vec::new();
    loop {
        let action = [0.8, (2.0 * obs[4] - 4.0 * obs[2]).clamp(-1.0, 1.0)];
        let r = env.step(action)?;
        records.push(env.record(action, &r));
        obs = r.observation.to_vec();
        if r.done {
            println!("episode ended after {} steps: {:?}", env.steps(), r.cause);
            break;
        }
    }
    std::fs::create_dir_all(&out)?;
    for (name, svg) in log_plots(&records, Some(&scenario)) {
        let path = out.join(name);
        std::fs::write(&path, svg)?;
        println!("{}", path.display());
    }
    Ok(())
}
