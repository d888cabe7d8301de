use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::events::JsonlWriter;
use super::seeds::{stream_rng, Purpose};
use crate::env::{EpisodeStatus, RaceEnv};
use crate::error::Result;
use crate::rl::{Checkpoint, ReplayBuffer, Td3Agent, Transition};
use crate::track::TrackGeometry;
use crate::vehicle::MismatchSpec;

pub const TRAIN_LOG: &str = "train_log.jsonl";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";

/// One finished training episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: u64,
    /// Agent steps in this episode.
    pub steps: u64,
    /// Agent steps since the start of training, including this episode.
    pub total_steps: u64,
    pub status: EpisodeStatus,
    pub crashed: bool,
    pub lap_time_s: Option<f64>,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub distance_m: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agent: Td3Agent,
    pub episodes: Vec<EpisodeLog>,
    pub checkpoint: Option<PathBuf>,
}

/// Fraction of logged episodes that ended without a crash.
pub fn crash_free_fraction(episodes: &[EpisodeLog]) -> f64 {
    if episodes.is_empty() {
        return 0.0;
    }
    episodes.iter().filter(|e| !e.crashed).count() as f64 / episodes.len() as f64
}

/// Trains one agent. With `out` set, writes the JSONL training log,
/// periodic checkpoints under `checkpoints/`, and `final.ckpt`.
///
/// `on_episode` observes every finished episode (progress reporting).
pub fn train(
    cfg: &RunConfig,
    track: Arc<TrackGeometry>,
    out: Option<&Path>,
    mut on_episode: impl FnMut(&EpisodeLog),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let setup = cfg.env_setup(track)?;
    let obs_dim = setup.env.obs_dim();
    let mut env = RaceEnv::new(setup)?;
    let nominal = MismatchSpec::default();
    let run_meta = serde_json::to_value(cfg)?;

    let mut agent = Td3Agent::new(obs_dim, 2, cfg.td3, &mut stream_rng(cfg.seed, Purpose::AgentInit, 0))?;
    let capacity = cfg.td3.buffer_capacity.min(cfg.total_steps as usize);
    let mut buffer = ReplayBuffer::new(capacity, obs_dim, 2);
    let mut act_rng = stream_rng(cfg.seed, Purpose::Exploration, 0);
    let mut learn_rng = stream_rng(cfg.seed, Purpose::Learning, 0);

    let mut log = match out {
        Some(dir) => Some(JsonlWriter::create(dir.join(TRAIN_LOG))?),
        None => None,
    };
    let mut episodes = Vec::new();
    let mut episode = 0u64;
    let mut ep_steps = 0u64;
    let mut ep_return = 0.0;
    let mut obs = env.reset(&mut stream_rng(cfg.seed, Purpose::TrainEpisode, 0), &nominal)?;

    for t in 0..cfg.total_steps {
        let action = if t < cfg.td3.warmup_steps {
            vec![act_rng.random_range(-1.0..=1.0), act_rng.random_range(-1.0..=1.0)]
        } else {
            agent.act(obs.as_slice(), cfg.td3.expl_noise, &mut act_rng)?
        };
        let step = env.step(&action)?;
        buffer.push(&Transition {
            obs: obs.0,
            action,
            reward: step.reward,
            next_obs: step.obs.0.clone(),
            done: RaceEnv::is_terminal(step.info.status),
        })?;
        ep_steps += 1;
        ep_return += step.reward;
        if t >= cfg.td3.warmup_steps {
            agent.update(&buffer, &mut learn_rng)?;
        }

        if step.done {
            let entry = EpisodeLog {
                episode,
                steps: ep_steps,
                total_steps: t + 1,
                status: step.info.status,
                crashed: step.info.status == EpisodeStatus::Crashed,
                lap_time_s: step.info.lap_time,
                episode_return: ep_return,
                distance_m: step.info.distance,
            };
            if let Some(log) = log.as_mut() {
                log.emit("episode", &entry)?;
            }
            on_episode(&entry);
            episodes.push(entry);
            episode += 1;
            ep_steps = 0;
            ep_return = 0.0;
            obs = env.reset(&mut stream_rng(cfg.seed, Purpose::TrainEpisode, episode), &nominal)?;
        } else {
            obs = step.obs;
        }

        if let Some(dir) = out {
            let done_steps = t + 1;
            if cfg.checkpoint_every > 0 && done_steps % cfg.checkpoint_every == 0 && done_steps < cfg.total_steps {
                Checkpoint {
                    run: run_meta.clone(),
                    step: done_steps,
                    agent: agent.clone(),
                }
                .save(dir.join("checkpoints").join(format!("step_{done_steps:08}.ckpt")))?;
            }
        }
    }

    let checkpoint = match out {
        Some(dir) => {
            let path = dir.join(FINAL_CHECKPOINT);
            Checkpoint {
                run: run_meta,
                step: cfg.total_steps,
                agent: agent.clone(),
            }
            .save(&path)?;
            if let Some(log) = log.as_mut() {
                log.emit(
                    "finished",
                    &serde_json::json!({
                        "total_steps": cfg.total_steps,
                        "episodes": episodes.len(),
                        "updates": agent.updates,
                        "crash_free_fraction": crash_free_fraction(&episodes),
                    }),
                )?;
                log.flush()?;
            }
            Some(path)
        }
        None => None,
    };
    Ok(TrainOutcome {
        agent,
        episodes,
        checkpoint,
    })
}
