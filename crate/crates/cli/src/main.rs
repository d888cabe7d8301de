use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use frenet_racer::env::Algorithm;
use frenet_racer::exec::{par_map, ExecMode};
use frenet_racer::harness::assets::load_track;
use frenet_racer::harness::events::event_line;
use frenet_racer::harness::export::{write_episodes_csv, Format, Results};
use frenet_racer::harness::{evaluate, evaluate_episode, run_sweep, train, RunConfig, SweepKind, SweepSpec};
use frenet_racer::rl::Checkpoint;
use frenet_racer::vehicle::MismatchSpec;

/// Train, evaluate and stress-test racing agents on Frenet tracks.
///
/// Progress and diagnostics go to stderr as line-delimited JSON events.
#[derive(Parser, Debug)]
#[command(name = "frenet-racer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train agents with TD3 and write logs and checkpoints.
    Train(TrainArgs),
    /// Evaluate a checkpoint over a number of laps.
    Eval(EvalArgs),
    /// Evaluate a checkpoint across a model-mismatch grid.
    Sweep(SweepArgs),
    /// Convert a result JSON file to CSV or JSON.
    Export(ExportArgs),
    /// Parse and validate a run config without running anything.
    ValidateConfig(ValidateArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Run config (JSON).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (defaults to the config's output_dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run independent units one at a time instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn mode(&self) -> ExecMode {
        if self.sequential {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// Number of independent replicas; replica r uses seed + r and writes to <out>/replica_<r>.
    #[arg(long, default_value_t = 1)]
    replicas: u32,
    /// Overrides the config's training budget (agent steps).
    #[arg(long)]
    steps: Option<u64>,
    /// Overrides the config's track (bundled id or CSV path).
    #[arg(long)]
    track: Option<String>,
    /// Overrides the config's algorithm (partial | end_to_end).
    #[arg(long)]
    algorithm: Option<Algorithm>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    /// Checkpoint to evaluate.
    #[arg(long, value_name = "PATH")]
    checkpoint: PathBuf,
    /// Evaluate on this track instead of the training track.
    #[arg(long)]
    track: Option<String>,
    /// Number of laps (overrides the config).
    #[arg(long)]
    laps: Option<usize>,
    /// Write trajectory CSVs for the first N laps.
    #[arg(long)]
    trajectories: Option<usize>,
    /// Friction coefficient override.
    #[arg(long)]
    mu: Option<f64>,
    /// Disable observation noise.
    #[arg(long)]
    no_obs_noise: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Checkpoint to evaluate.
    #[arg(long, value_name = "PATH")]
    checkpoint: PathBuf,
    /// Sweep kind (friction | stiffness_front | stiffness_rear | stiffness_both | mass);
    /// overrides the config's sweep section.
    #[arg(long)]
    kind: Option<String>,
    /// Grid values (comma separated).
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Mass positions from the rear axle in metres (comma separated, mass sweeps).
    #[arg(long, value_delimiter = ',')]
    positions: Option<Vec<f64>>,
    /// Laps per grid cell.
    #[arg(long)]
    laps: Option<usize>,
    /// Evaluate on this track instead of the training track.
    #[arg(long)]
    track: Option<String>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    /// Result JSON written by `eval` or `sweep`.
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    /// Output format: csv | json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Run config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
}

fn log(event: &str, fields: serde_json::Value) {
    if let Ok(line) = event_line(event, &fields) {
        eprintln!("{line}");
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => {
            if !p.exists() {
                bail!("config file {} not found", p.display());
            }
            RunConfig::load(p).with_context(|| format!("loading config {}", p.display()))
        }
        None => bail!("--config is required"),
    }
}

/// Config for a checkpoint: the one stored in it, or `--config` when given.
fn checkpoint_config(common: &Common, ckpt: &Checkpoint) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(Some(p))?,
        None => serde_json::from_value(ckpt.run.clone()).context("checkpoint carries no usable run config")?,
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
        cfg.eval.seed = Some(seed);
    }
    Ok(cfg)
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    if !path.exists() {
        bail!("checkpoint {} not found", path.display());
    }
    Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut cfg = load_config(args.common.config.as_deref())?;
    if let Some(seed) = args.common.seed {
        cfg.seed = seed;
    }
    if let Some(steps) = args.steps {
        cfg.total_steps = steps;
    }
    if let Some(track) = args.track {
        cfg.track = track;
    }
    if let Some(alg) = args.algorithm {
        cfg.algorithm = alg;
    }
    cfg.validate()?;
    if args.replicas == 0 {
        bail!("--replicas must be at least 1");
    }
    let track = load_track(&cfg.track)?;
    let out = args.common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let replicas: Vec<u32> = (0..args.replicas).collect();
    let results = par_map(args.common.mode(), replicas, |r| {
        let mut rc = cfg.clone();
        rc.seed = cfg.seed + r as u64;
        let dir = if args.replicas > 1 {
            out.join(format!("replica_{r}"))
        } else {
            out.clone()
        };
        rc.output_dir = dir.clone();
        log(
            "train_start",
            json!({"replica": r, "seed": rc.seed, "algorithm": rc.algorithm, "track": rc.track,
                   "total_steps": rc.total_steps, "out": dir}),
        );
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("config.json"), rc.to_json())?;
        let outcome = train(&rc, track.clone(), Some(&dir), |ep| {
            if ep.episode % 50 == 0 {
                log(
                    "episode",
                    json!({"replica": r, "episode": ep.episode, "total_steps": ep.total_steps,
                           "status": ep.status, "return": ep.episode_return}),
                );
            }
        })?;
        let frac = frenet_racer::harness::crash_free_fraction(&outcome.episodes);
        log(
            "train_done",
            json!({"replica": r, "episodes": outcome.episodes.len(), "crash_free_fraction": frac,
                   "checkpoint": outcome.checkpoint}),
        );
        anyhow::Ok(())
    });
    results.into_iter().collect()
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let ckpt = load_checkpoint(&args.checkpoint)?;
    let mut cfg = checkpoint_config(&args.common, &ckpt)?;
    if let Some(t) = args.track {
        cfg.track = t;
    }
    if let Some(l) = args.laps {
        cfg.eval.laps = l;
    }
    if let Some(n) = args.trajectories {
        cfg.eval.trajectories = n;
    }
    if args.no_obs_noise {
        cfg.eval.obs_noise = false;
    }
    cfg.validate()?;
    let mismatch = MismatchSpec {
        mu_override: args.mu,
        ..MismatchSpec::default()
    };
    let track = load_track(&cfg.track)?;
    let setup = cfg.env_setup(track)?;
    let seed = cfg.eval_seed();
    let report = evaluate(&ckpt.agent.actor, &setup, &mismatch, &cfg.eval, seed, args.common.mode())?;
    let out = args.common.out.unwrap_or_else(|| cfg.output_dir.join("eval"));
    let results = Results::Evaluation(report.clone());
    results.export(&out, "eval", Format::Json)?;
    let file = std::fs::File::create(out.join("episodes.csv"))?;
    write_episodes_csv(&report.episodes, std::io::BufWriter::new(file))?;
    for i in 0..cfg.eval.trajectories.min(cfg.eval.laps) as u64 {
        let (_, traj) = evaluate_episode(&ckpt.agent.actor, &setup, &mismatch, cfg.eval.obs_noise, seed, i, true)?;
        if let Some(traj) = traj {
            traj.save(out.join("trajectories").join(format!("episode_{i:04}.csv")))?;
        }
    }
    log(
        "eval_done",
        json!({"algorithm": report.algorithm, "track": report.track, "laps": report.aggregates.laps,
               "success_pct": report.aggregates.success_pct,
               "mean_lap_time_s": report.aggregates.mean_lap_time_s, "out": out}),
    );
    println!("{}", serde_json::to_string(&report.aggregates)?);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let ckpt = load_checkpoint(&args.checkpoint)?;
    let mut cfg = checkpoint_config(&args.common, &ckpt)?;
    if let Some(t) = args.track {
        cfg.track = t;
    }
    let mut spec = match (&args.kind, cfg.sweep.clone()) {
        (Some(kind), _) => {
            let kind: SweepKind = serde_json::from_value(json!(kind)).with_context(|| format!("unknown sweep kind `{kind}`"))?;
            if kind == SweepKind::Friction {
                SweepSpec::friction_default(cfg.eval.laps)
            } else {
                SweepSpec {
                    kind,
                    values: Vec::new(),
                    positions: Vec::new(),
                    laps: cfg.eval.laps,
                }
            }
        }
        (None, Some(spec)) => spec,
        (None, None) => SweepSpec::friction_default(cfg.eval.laps),
    };
    if let Some(v) = args.values {
        spec.values = v;
    }
    if let Some(p) = args.positions {
        spec.positions = p;
    }
    if let Some(l) = args.laps {
        spec.laps = l;
    }
    spec.validate(cfg.vehicle.wheelbase())?;
    let track = load_track(&cfg.track)?;
    let setup = cfg.env_setup(track)?;
    let results = run_sweep(&ckpt.agent.actor, &setup, &spec, cfg.eval_seed(), args.common.mode())?;
    for row in results.rows.iter().filter(|r| r.error.is_some()) {
        log("cell_failed", json!({"values": row.values, "error": row.error}));
    }
    let out = args.common.out.unwrap_or_else(|| cfg.output_dir.join("sweep"));
    let stem = format!("sweep_{}", serde_json::to_value(spec.kind)?.as_str().unwrap_or("sweep"));
    let wrapped = Results::Sweep(results);
    let json_path = wrapped.export(&out, &stem, Format::Json)?;
    let csv_path = wrapped.export(&out, &stem, Format::Csv)?;
    log("sweep_done", json!({"json": json_path, "csv": csv_path}));
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let format: Format = args.format.parse()?;
    if !args.input.exists() {
        bail!("results file {} not found", args.input.display());
    }
    let results = Results::load_json(&args.input)?;
    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results")
        .to_string();
    let path = results.export(&args.out, &stem, format)?;
    log("export_done", json!({"path": path}));
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let cfg = load_config(Some(&args.config))?;
    load_track(&cfg.track)?;
    log("config_ok", json!({"config": args.config, "algorithm": cfg.algorithm, "track": cfg.track}));
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Export(a) => cmd_export(a),
        Command::ValidateConfig(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log("error", json!({"message": format!("{e:#}")}));
            ExitCode::FAILURE
        }
    }
}
