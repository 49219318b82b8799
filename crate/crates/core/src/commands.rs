//! Command-line front end: `train`, `eval`, `plot` and `scenario`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime fault.

use crate::config::{ConfigError, RunConfig, ScenarioSpec};
use crate::env::{
    generate_training_scenario, write_log, EncounterConfig, GeneratorConfig, Scenario, Spawn,
    TargetMotion, VesselEnv,
};
use crate::eval::{build_episodes, evaluate, Aggregate, EncounterLayout, EvalReport, ScenarioSet};
use crate::guidance::build_path;
use crate::ppo::{Checkpoint, IterationMetrics, PolicyCheckpoint, TrainError, Trainer};
use crate::sensing::Shape;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Parser)]
#[command(
    name = "colav",
    version,
    about = "Vessel path following and collision avoidance with PPO"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a policy; writes metrics.jsonl and checkpoints to the output directory.
    Train(TrainArgs),
    /// Evaluate a checkpoint's mean action on a scenario set.
    Eval(EvalArgs),
    /// Render a trajectory log (.jsonl) or evaluation report (.json) as SVG.
    Plot(PlotArgs),
    /// Generate, validate or describe scenario files.
    #[command(subcommand)]
    Scenario(ScenarioCommand),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Resume from this checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Must hash to the checkpoint's configuration; defaults to the embedded one.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// head-on, crossing-starboard, crossing-port, training-random or replay:<preset>
    #[arg(long, default_value = "training-random")]
    pub scenario: String,
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "eval")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Trajectory log or evaluation report.
    pub input: PathBuf,
    /// Scenario file whose path and obstacles are drawn under a trajectory.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value = "plots")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCommand {
    /// Draw a training scenario and write it as JSON.
    Generate {
        /// Generator settings come from `[scenario.generator]` when present.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check every scenario invariant; failures list field paths.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print counts and bounds.
    Describe {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let (CliError::Usage(m) | CliError::Runtime(m)) = &e;
            eprintln!("error: {m}");
            e.code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Plot(a) => plot(a),
        Command::Scenario(c) => scenario(c),
    }
}

fn metrics_line(m: &IterationMetrics) -> String {
    let mut s = serde_json::to_string(m).expect("metrics serialize");
    s.push('\n');
    s
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let resume = match &a.checkpoint {
        Some(p) => {
            Some(Checkpoint::<VesselEnv>::load(p).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        None => None,
    };
    let mut cfg = match (&a.config, &resume) {
        (None, Some(ck)) => serde_json::from_value(ck.config.clone())
            .map_err(|e| CliError::Usage(format!("checkpoint configuration: {e}")))?,
        _ => load_config(a.config.as_deref())?,
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(o) = &a.out {
        cfg.out = o.clone();
    }
    let prepared = cfg.prepare()?;
    let hash = cfg.hash();
    if let Some(ck) = &resume {
        if ck.config_hash != hash {
            return Err(CliError::Usage(format!(
                "checkpoint was trained with configuration {} but the given configuration hashes to {hash}",
                ck.config_hash
            )));
        }
    }

    let mut trainer = match resume {
        Some(ck) => Trainer::from_state(ck.state),
        None => {
            let ctx = Arc::new(prepared.context);
            let source = prepared.source;
            Trainer::new(
                cfg.ppo.clone(),
                |_, seed| VesselEnv::new(ctx.clone(), source.clone(), seed),
                cfg.seed,
            )
            .map_err(runtime)?
        }
    };

    let out = cfg.out.clone();
    create_dir(&out)?;
    write_file(&out.join("config.toml"), cfg.to_toml().as_bytes())?;
    let metrics_path = out.join("metrics.jsonl");
    // On resume keep only records the checkpoint has already accounted for.
    let kept: String = fs::read_to_string(&metrics_path)
        .unwrap_or_default()
        .lines()
        .filter(|l| {
            serde_json::from_str::<IterationMetrics>(l)
                .is_ok_and(|m| m.iteration <= trainer.state.iteration)
        })
        .map(|l| format!("{l}\n"))
        .collect();
    let kept = if trainer.state.iteration == 0 {
        String::new()
    } else {
        kept
    };
    write_file(&metrics_path, kept.as_bytes())?;
    let mut metrics = fs::OpenOptions::new()
        .append(true)
        .open(&metrics_path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", metrics_path.display())))?;

    let config_value = serde_json::to_value(&cfg).expect("config serializes");
    let save = |trainer: &Trainer<VesselEnv>, name: &str| -> Result<(), CliError> {
        Checkpoint::new(hash.clone(), config_value.clone(), trainer.state.clone())
            .save(&out.join(name))
            .map_err(runtime)
    };
    let total = cfg.ppo.iterations();
    log::info!("training for {total} iterations into {}", out.display());
    while !trainer.done() {
        let m = match trainer.iterate() {
            Ok(m) => m,
            Err(e @ (TrainError::Env { .. } | TrainError::NonFinite { .. })) => {
                let report = format!("iteration {}: {e}\n", trainer.state.iteration + 1);
                write_file(&out.join("fault.txt"), report.as_bytes())?;
                return Err(CliError::Runtime(format!(
                    "{e}; last good checkpoint in {}",
                    out.display()
                )));
            }
            Err(e) => return Err(runtime(e)),
        };
        metrics
            .write_all(metrics_line(&m).as_bytes())
            .and_then(|_| metrics.flush())
            .map_err(runtime)?;
        log::info!(
            "iteration {}/{total}: episodes {} mean reward {:?} collisions {:?}",
            m.iteration,
            m.episodes,
            m.mean_episode_reward,
            m.collision_rate
        );
        if cfg.checkpoint_every > 0 && m.iteration % cfg.checkpoint_every == 0 {
            save(&trainer, &format!("checkpoint_{:06}.json", m.iteration))?;
        }
    }
    save(&trainer, "checkpoint.json")?;
    println!(
        "trained {} iterations; outputs in {}",
        trainer.state.iteration,
        out.display()
    );
    Ok(())
}

/// Trajectory logs are written for at most this many episodes.
const LOGGED_EPISODES: usize = 10;

fn eval(a: EvalArgs) -> Result<(), CliError> {
    let set: ScenarioSet = a.scenario.parse().map_err(CliError::Usage)?;
    let ck = PolicyCheckpoint::load(&a.checkpoint).map_err(|e| CliError::Usage(e.to_string()))?;
    let cfg: RunConfig = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => serde_json::from_value(ck.config.clone())
            .map_err(|e| CliError::Usage(format!("checkpoint configuration: {e}")))?,
    };
    let hash = cfg.hash();
    if hash != ck.config_hash {
        return Err(CliError::Usage(format!(
            "configuration mismatch: checkpoint {} vs config {hash}",
            ck.config_hash
        )));
    }
    let prepared = cfg.prepare()?;
    let specs = build_episodes(
        &set,
        a.episodes,
        a.seed,
        &prepared.source,
        &EncounterLayout::default(),
    )
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let ctx = Arc::new(prepared.context);
    let policy = ck.state;
    let act = |obs: &[f64]| {
        let v = policy.act(obs);
        [v[0], v[1]]
    };
    let (episodes, logs) = evaluate(
        &ctx,
        &specs,
        &act,
        &EncounterConfig::default(),
        LOGGED_EPISODES,
    )
    .map_err(runtime)?;
    let report = EvalReport {
        scenario_set: set.to_string(),
        seed: a.seed,
        config_hash: hash,
        aggregate: Aggregate::from_episodes(&episodes),
        episodes,
    };
    create_dir(&a.out)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&a.out.join("report.json"), json.as_bytes())?;
    for (k, log) in logs.iter().enumerate() {
        let mut buf = Vec::new();
        write_log(&mut buf, log).map_err(runtime)?;
        write_file(&a.out.join(format!("episode_{k:03}.jsonl")), &buf)?;
        write_file(
            &a.out.join(format!("episode_{k:03}.scenario.json")),
            specs[k].scenario.to_json().as_bytes(),
        )?;
    }
    let g = &report.aggregate;
    println!(
        "{}: {} episodes, goal {}, collision {}, timeout {}, left world {}, mean reward {:.2}",
        report.scenario_set,
        g.episodes,
        g.goal,
        g.collision,
        g.timeout,
        g.left_world,
        g.mean_total_reward
    );
    Ok(())
}

fn plot(a: PlotArgs) -> Result<(), CliError> {
    let scenario = match &a.scenario {
        Some(p) => Some(Scenario::load(p).map_err(|e| CliError::Usage(e.to_string()))?),
        None => None,
    };
    if !a.input.exists() {
        return Err(CliError::Usage(format!(
            "{}: no such file",
            a.input.display()
        )));
    }
    let out = crate::plot::plot_file(&a.input, scenario.as_ref(), &a.out).map_err(|e| match e {
        crate::plot::PlotError::Format { .. } => CliError::Usage(e.to_string()),
        other => runtime(other),
    })?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    for f in &out.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn scenario(c: ScenarioCommand) -> Result<(), CliError> {
    match c {
        ScenarioCommand::Generate { config, seed, out } => {
            let cfg = load_config(config.as_deref())?;
            let generator = match cfg.scenario {
                ScenarioSpec::Generated { generator } => generator,
                ScenarioSpec::File { .. } => GeneratorConfig::default(),
            };
            let sc = generate_training_scenario(&generator, seed)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                create_dir(dir)?;
            }
            write_file(&out, sc.to_json().as_bytes())?;
            println!("{}", out.display());
            Ok(())
        }
        ScenarioCommand::Validate { scenario, config } => {
            let cfg = load_config(config.as_deref())?;
            let ctx = cfg
                .env
                .build()
                .map_err(|e| CliError::Usage(format!("env: {e}")))?;
            let sc = Scenario::load(&scenario).map_err(|e| CliError::Usage(e.to_string()))?;
            let issues = sc.validate(
                (ctx.model.length, ctx.model.width),
                cfg.env.fillet(),
                cfg.env.world_margin,
            );
            if issues.is_empty() {
                println!("{}: valid", scenario.display());
                return Ok(());
            }
            for i in &issues {
                eprintln!("{}: {}", i.field, i.message);
            }
            Err(CliError::Usage(format!(
                "{}: {} validation issue(s)",
                scenario.display(),
                issues.len()
            )))
        }
        ScenarioCommand::Describe { scenario, config } => {
            let cfg = load_config(config.as_deref())?;
            let sc = Scenario::load(&scenario).map_err(|e| CliError::Usage(e.to_string()))?;
            print!("{}", describe(&sc, cfg.env.fillet(), cfg.env.world_margin));
            Ok(())
        }
    }
}

/// Human-readable summary, one `key: value` per line.
pub fn describe(sc: &Scenario, fillet: f64, margin: f64) -> String {
    let circles = sc
        .obstacles
        .iter()
        .filter(|o| matches!(o.shape, Shape::Circle { .. }))
        .count();
    let tracks = sc
        .targets
        .iter()
        .filter(|t| matches!(t.motion, TargetMotion::Track { .. }))
        .count();
    let length = build_path(&sc.waypoints, fillet)
        .map(|p| format!("{:.1}", p.length()))
        .unwrap_or_else(|e| format!("invalid ({e})"));
    let b = sc.bounds_or(margin);
    let spawn = match sc.spawn {
        Spawn::Fixed { pose } => {
            format!("fixed ({:.1}, {:.1}, {:.3})", pose.x_n, pose.y_n, pose.psi)
        }
        Spawn::Random { lateral, heading } => {
            format!("random (lateral {lateral}, heading {heading})")
        }
    };
    format!(
        "name: {}\nseed: {}\nwaypoints: {}\npath_length: {length}\nobstacles: {}\ncircles: {circles}\npolygons: {}\ntargets: {}\nlinear_targets: {}\ntrack_targets: {tracks}\nspawn: {spawn}\ngoal_radius: {}\nmax_steps: {}\nbounds: [{:.1}, {:.1}] .. [{:.1}, {:.1}]\n",
        sc.name,
        sc.seed,
        sc.waypoints.len(),
        sc.obstacles.len(),
        sc.obstacles.len() - circles,
        sc.targets.len(),
        sc.targets.len() - tracks,
        sc.goal_radius,
        sc.max_steps,
        b.min.x,
        b.min.y,
        b.max.x,
        b.max.y
    )
}
