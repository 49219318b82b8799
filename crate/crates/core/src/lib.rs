//! Deterministic 2-D vessel guidance simulator with an embedded PPO trainer.

pub mod commands;
pub mod config;
pub mod data;
pub mod dynamics;
pub mod env;
pub mod eval;
pub mod geometry;
pub mod guidance;
pub mod plot;
pub mod ppo;
pub mod rewards;
pub mod sensing;
