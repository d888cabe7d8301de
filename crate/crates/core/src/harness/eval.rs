use serde::{Deserialize, Serialize};

use super::config::EvalSpec;
use super::seeds::{stream_rng, Purpose};
use crate::env::{EnvSetup, EpisodeStatus, RaceEnv, TrajectoryLog};
use crate::error::{Error, Result};
use crate::exec::{par_map, ExecMode};
use crate::rl::Mlp;
use crate::vehicle::{apply_mismatch, MismatchSpec, VehicleParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub success: bool,
    pub status: EpisodeStatus,
    pub lap_time_s: Option<f64>,
    /// Centerline position and Cartesian point of the crash, if any.
    pub crash_s: Option<f64>,
    pub crash_x: Option<f64>,
    pub crash_y: Option<f64>,
    pub agent_steps: u64,
}

/// Success rate and lap-time statistics over successful laps only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub laps: usize,
    pub success_pct: f64,
    pub mean_lap_time_s: Option<f64>,
    /// Sample standard deviation (zero for a single lap).
    pub std_lap_time_s: Option<f64>,
}

impl Aggregates {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let times: Vec<f64> = records.iter().filter_map(|r| r.lap_time_s).collect();
        let successes = records.iter().filter(|r| r.success).count();
        let success_pct = if records.is_empty() {
            0.0
        } else {
            successes as f64 * 100.0 / records.len() as f64
        };
        let (mean, std) = if times.is_empty() {
            (None, None)
        } else {
            let n = times.len() as f64;
            let mean = times.iter().sum::<f64>() / n;
            let std = if times.len() > 1 {
                (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            (Some(mean), Some(std))
        };
        Self {
            laps: records.len(),
            success_pct,
            mean_lap_time_s: mean,
            std_lap_time_s: std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithm: String,
    pub track: String,
    pub seed: u64,
    pub mismatch: MismatchSpec,
    /// Vehicle parameters the laps were driven with.
    pub params: VehicleParams,
    #[serde(flatten)]
    pub aggregates: Aggregates,
    pub episodes: Vec<EpisodeRecord>,
}

/// Drives one evaluation lap with the deterministic policy.
pub fn evaluate_episode(
    actor: &Mlp,
    setup: &EnvSetup,
    mismatch: &MismatchSpec,
    obs_noise: bool,
    seed: u64,
    episode: u64,
    record: bool,
) -> Result<(EpisodeRecord, Option<TrajectoryLog>)> {
    let mut env = RaceEnv::new(setup.clone())?;
    env.set_observation_noise(obs_noise);
    let mut rng = stream_rng(seed, Purpose::EvalEpisode, episode);
    let mut obs = env.reset(&mut rng, mismatch)?;
    let mut log = record.then(TrajectoryLog::default);
    loop {
        let action = actor.forward(obs.as_slice())?;
        let step = env.step(&action)?;
        if let Some(log) = log.as_mut() {
            log.record(&step, setup.env.physics_dt);
        }
        if step.done {
            let crashed = step.info.status == EpisodeStatus::Crashed;
            let rec = EpisodeRecord {
                episode,
                success: step.info.status == EpisodeStatus::LapComplete,
                status: step.info.status,
                lap_time_s: step.info.lap_time,
                crash_s: crashed.then(|| step.info.frenet.map(|f| f.s)).flatten(),
                crash_x: crashed.then_some(step.info.state.x),
                crash_y: crashed.then_some(step.info.state.y),
                agent_steps: env.agent_steps(),
            };
            return Ok((rec, log));
        }
        obs = step.obs;
    }
}

/// Runs `spec.laps` independent laps; lap `i` always uses the same random
/// stream, so the report does not depend on the execution mode.
pub fn evaluate(
    actor: &Mlp,
    setup: &EnvSetup,
    mismatch: &MismatchSpec,
    spec: &EvalSpec,
    seed: u64,
    mode: ExecMode,
) -> Result<EvalReport> {
    if spec.laps == 0 {
        return Err(Error::Config("evaluation needs at least one lap".into()));
    }
    let obs_dim = setup.env.obs_dim();
    if actor.input_dim() != obs_dim || actor.output_dim() != 2 {
        return Err(Error::Config(format!(
            "policy maps {} -> {} but the environment needs {obs_dim} -> 2",
            actor.input_dim(),
            actor.output_dim()
        )));
    }
    mismatch.validate(setup.vehicle.wheelbase())?;
    let params = apply_mismatch(&setup.vehicle, mismatch)?;
    let episodes: Vec<u64> = (0..spec.laps as u64).collect();
    let records = par_map(mode, episodes, |i| {
        evaluate_episode(actor, setup, mismatch, spec.obs_noise, seed, i, false).map(|(r, _)| r)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        algorithm: setup.algorithm.to_string(),
        track: setup.track.name().to_string(),
        seed,
        mismatch: *mismatch,
        params,
        aggregates: Aggregates::from_records(&records),
        episodes: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(success: bool, t: Option<f64>) -> EpisodeRecord {
        EpisodeRecord {
            episode: 0,
            success,
            status: if success { EpisodeStatus::LapComplete } else { EpisodeStatus::Crashed },
            lap_time_s: t,
            crash_s: None,
            crash_x: None,
            crash_y: None,
            agent_steps: 1,
        }
    }

    #[test]
    fn failed_laps_excluded_from_lap_time() {
        let a = Aggregates::from_records(&[rec(true, Some(6.0)), rec(false, None), rec(true, Some(8.0)), rec(false, None)]);
        assert_eq!(a.success_pct, 50.0);
        assert_eq!(a.mean_lap_time_s, Some(7.0));
        assert!((a.std_lap_time_s.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn no_success_has_no_lap_time() {
        let a = Aggregates::from_records(&[rec(false, None)]);
        assert_eq!(a.success_pct, 0.0);
        assert_eq!(a.mean_lap_time_s, None);
    }
}
