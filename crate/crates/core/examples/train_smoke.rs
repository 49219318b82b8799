//! Trains the small path-following preset and writes metrics plus a
//! checkpoint. Use a release build; it takes under a minute.
//!
//!     cargo run --release --example train_smoke -- [out_dir]

use colav::config::RunConfig;
use colav::env::VesselEnv;
use colav::ppo::{Checkpoint, Trainer};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "runs/example_smoke".into()),
    );
    let preset = Path::new(env!("CARGO_MANIFEST_DIR")).join("presets/smoke_straight.toml");
    let cfg = RunConfig::load(&preset)?;
    let prepared = cfg.prepare()?;
    let ctx = Arc::new(prepared.context);
    let source = prepared.source;
    let mut trainer = Trainer::new(
        cfg.ppo.clone(),
        |_, seed| VesselEnv::new(ctx.clone(), source.clone(), seed),
        cfg.seed,
    )?;

    std::fs::create_dir_all(&out)?;
    let mut log = std::fs::File::create(out.join("metrics.jsonl"))?;
    let metrics = trainer.train(|_, m| {
        if m.iteration % 20 == 0 {
            println!(
                "iter {:>4}  |e| {:>6.2}  episode reward {:>8.1}",
                m.iteration,
                m.mean_abs_cross_track_error.unwrap_or(f64::NAN),
                m.mean_episode_reward.unwrap_or(f64::NAN)
            );
        }
    })?;
    for m in &metrics {
        writeln!(log, "{}", serde_json::to_string(m)?)?;
    }
    let config = serde_json::to_value(&cfg)?;
    Checkpoint::new(cfg.hash(), config, trainer.state.clone())
        .save(&out.join("checkpoint.json"))?;
    println!("wrote {}", out.display());
    Ok(())
}
