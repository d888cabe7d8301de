use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sweep::SweepSpec;
use crate::env::{Algorithm, EnvConfig, EnvSetup};
use crate::error::{Error, Result};
use crate::planning::{ControllerConfig, PlannerConfig};
use crate::rl::{RewardConfig, Td3Config};
use crate::track::TrackGeometry;
use crate::vehicle::{VehicleConstraints, VehicleParams};

/// Evaluation protocol: laps with observation noise and a noiseless policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSpec {
    pub laps: usize,
    pub obs_noise: bool,
    /// Evaluation seed; the run seed when absent.
    pub seed: Option<u64>,
    /// Write trajectory CSVs for this many leading episodes.
    pub trajectories: usize,
}

impl Default for EvalSpec {
    fn default() -> Self {
        Self {
            laps: 100,
            obs_noise: true,
            seed: None,
            trajectories: 0,
        }
    }
}

fn default_track() -> String {
    "porto".into()
}

fn default_total_steps() -> u64 {
    100_000
}

fn default_checkpoint_every() -> u64 {
    25_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

/// Everything needed to reproduce a training run or an evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    /// Bundled track id or path to a track CSV.
    #[serde(default = "default_track")]
    pub track: String,
    /// Agent steps of training.
    #[serde(default = "default_total_steps")]
    pub total_steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub td3: Td3Config,
    #[serde(default)]
    pub controller: ControllerConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub reward: RewardConfig,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub constraints: VehicleConstraints,
    #[serde(default)]
    pub eval: EvalSpec,
    /// Save an intermediate checkpoint every this many steps (0 disables).
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            track: default_track(),
            total_steps: default_total_steps(),
            seed: 0,
            td3: Td3Config::default(),
            controller: ControllerConfig::default(),
            planner: PlannerConfig::default(),
            reward: RewardConfig::default(),
            env: EnvConfig::default(),
            vehicle: VehicleParams::default(),
            constraints: VehicleConstraints::default(),
            eval: EvalSpec::default(),
            checkpoint_every: default_checkpoint_every(),
            output_dir: default_output_dir(),
            sweep: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that can be checked without touching the track.
    pub fn validate(&self) -> Result<()> {
        self.td3.validate()?;
        self.controller.validate()?;
        self.planner.validate()?;
        self.env.validate()?;
        self.vehicle.validate()?;
        self.constraints.validate()?;
        if self.total_steps <= self.td3.warmup_steps {
            return Err(Error::Config(format!(
                "total_steps ({}) must exceed the warmup ({})",
                self.total_steps, self.td3.warmup_steps
            )));
        }
        if self.eval.laps == 0 {
            return Err(Error::Config("eval.laps must be at least 1".into()));
        }
        if self.track.trim().is_empty() {
            return Err(Error::Config("track must not be empty".into()));
        }
        if let Some(sweep) = &self.sweep {
            sweep.validate(self.vehicle.wheelbase())?;
        }
        Ok(())
    }

    pub fn eval_seed(&self) -> u64 {
        self.eval.seed.unwrap_or(self.seed)
    }

    pub fn env_setup(&self, track: Arc<TrackGeometry>) -> Result<EnvSetup> {
        let setup = EnvSetup {
            track,
            algorithm: self.algorithm,
            env: self.env,
            vehicle: self.vehicle,
            constraints: self.constraints,
            planner: self.planner,
            controller: self.controller,
            reward: self.reward,
        };
        setup.validate()?;
        Ok(setup)
    }
}
