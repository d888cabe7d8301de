//! Stepped racing environment wiring agents to the simulator.
//!
//! Two agent architectures share the environment:
//! * end-to-end: the action is `[acceleration, steering]`, both in [-1, 1];
//! * partial: the action is `[lateral target, desired velocity]`, turned into
//!   a cubic Frenet path tracked by pure pursuit and the velocity law.

mod log;

pub use log::{TrajectoryLog, TrajectoryRow};

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planning::{
    desired_velocity, plan, pure_pursuit_steer, scale_action, straight_ahead, velocity_command,
    velocity_constraint, ControllerConfig, PlannedTrajectory, PlannerConfig,
};
use crate::rl::{compute_reward, RewardConfig};
use crate::track::{FrenetPose, LidarConfig, TrackGeometry};
use crate::vehicle::{
    apply_mismatch, step as physics_step, ControlCommand, MismatchSpec, VehicleConstraints,
    VehicleParams, VehicleState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    EndToEnd,
    Partial,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::EndToEnd => "end_to_end",
            Algorithm::Partial => "partial",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "end_to_end" | "end-to-end" | "e2e" => Ok(Algorithm::EndToEnd),
            "partial" => Ok(Algorithm::Partial),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Physics integration step (s).
    pub physics_dt: f64,
    /// Physics steps per agent decision.
    pub agent_period_steps: u32,
    /// Simulated time limit per episode (s).
    pub timeout_s: f64,
    /// Half of the vehicle width used for boundary contact (m).
    pub vehicle_half_width: f64,
    /// Std of Gaussian noise on each normalized observation element when
    /// observation noise is enabled.
    pub obs_noise_std: f64,
    /// Episodes start this much above the minimum allowable velocity.
    pub start_velocity_offset: f64,
    pub lidar: LidarConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            physics_dt: 0.01,
            agent_period_steps: 10,
            timeout_s: 60.0,
            vehicle_half_width: 0.1,
            obs_noise_std: 0.01,
            start_velocity_offset: 0.1,
            lidar: LidarConfig::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.lidar.validate()?;
        let ok = self.physics_dt > 0.0
            && self.physics_dt <= 0.02
            && self.agent_period_steps >= 1
            && self.timeout_s > 0.0
            && self.vehicle_half_width >= 0.0
            && self.obs_noise_std >= 0.0
            && self.start_velocity_offset >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid env config {self:?}")))
        }
    }

    pub fn obs_dim(&self) -> usize {
        4 + self.lidar.n_beams
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeStatus {
    Running,
    Crashed,
    LapComplete,
    Timeout,
}

/// Normalized observation: x, y, heading, velocity, then LiDAR ranges, all in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Observation(pub Vec<f64>);

impl Observation {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Per-step diagnostics consumed by loggers.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub state: VehicleState,
    pub frenet: Option<FrenetPose>,
    pub action: [f64; 2],
    pub status: EpisodeStatus,
    /// Centerline distance covered in this agent step.
    pub progress: f64,
    pub distance: f64,
    pub physics_steps: u64,
    /// Set when the lap completes.
    pub lap_time: Option<f64>,
    pub collided: bool,
    /// Planned trajectory for partial agents.
    pub trajectory: Option<PlannedTrajectory>,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub obs: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Static description shared by every environment instance of a run.
#[derive(Debug, Clone)]
pub struct EnvSetup {
    pub track: Arc<TrackGeometry>,
    pub algorithm: Algorithm,
    pub env: EnvConfig,
    pub vehicle: VehicleParams,
    pub constraints: VehicleConstraints,
    pub planner: PlannerConfig,
    pub controller: ControllerConfig,
    pub reward: RewardConfig,
}

impl EnvSetup {
    pub fn new(track: Arc<TrackGeometry>, algorithm: Algorithm) -> Self {
        Self {
            track,
            algorithm,
            env: EnvConfig::default(),
            vehicle: VehicleParams::default(),
            constraints: VehicleConstraints::default(),
            planner: PlannerConfig::default(),
            controller: ControllerConfig::default(),
            reward: RewardConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.vehicle.validate()?;
        self.constraints.validate()?;
        self.planner.validate()?;
        self.controller.validate()?;
        let min_w = self.track.min_half_width();
        if min_w <= self.env.vehicle_half_width {
            return Err(Error::Config(format!(
                "track `{}` half-width {min_w} does not exceed the vehicle half-width {}",
                self.track.name(),
                self.env.vehicle_half_width
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RaceEnv {
    setup: EnvSetup,
    params: VehicleParams,
    state: VehicleState,
    frenet: FrenetPose,
    last_s: f64,
    distance: f64,
    physics_steps: u64,
    agent_steps: u64,
    trajectory: Option<PlannedTrajectory>,
    status: EpisodeStatus,
    observation_noise: bool,
    rng: ChaCha8Rng,
}

impl RaceEnv {
    pub fn new(setup: EnvSetup) -> Result<Self> {
        setup.validate()?;
        let params = setup.vehicle;
        Ok(Self {
            setup,
            params,
            state: VehicleState::default(),
            frenet: FrenetPose {
                s: 0.0,
                n: 0.0,
                psi: 0.0,
            },
            last_s: 0.0,
            distance: 0.0,
            physics_steps: 0,
            agent_steps: 0,
            trajectory: None,
            status: EpisodeStatus::Crashed,
            observation_noise: false,
            rng: ChaCha8Rng::seed_from_u64(0),
        })
    }

    pub fn setup(&self) -> &EnvSetup {
        &self.setup
    }

    pub fn track(&self) -> &TrackGeometry {
        &self.setup.track
    }

    pub fn state(&self) -> &VehicleState {
        &self.state
    }

    pub fn frenet(&self) -> &FrenetPose {
        &self.frenet
    }

    pub fn effective_params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn status(&self) -> EpisodeStatus {
        self.status
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn physics_steps(&self) -> u64 {
        self.physics_steps
    }

    pub fn agent_steps(&self) -> u64 {
        self.agent_steps
    }

    pub fn trajectory(&self) -> Option<&PlannedTrajectory> {
        self.trajectory.as_ref()
    }

    pub fn obs_dim(&self) -> usize {
        self.setup.env.obs_dim()
    }

    /// Enables Gaussian noise on observations (evaluation conditions).
    pub fn set_observation_noise(&mut self, on: bool) {
        self.observation_noise = on;
    }

    /// Starts an episode at a uniformly random centerline position.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R, mismatch: &MismatchSpec) -> Result<Observation> {
        let s = rng.random_range(0.0..self.setup.track.total_length());
        let seed = rng.random::<u64>();
        self.reset_at(s, seed, mismatch)
    }

    /// Starts an episode on the centerline at arclength `s`, heading along it.
    pub fn reset_at(&mut self, s: f64, noise_seed: u64, mismatch: &MismatchSpec) -> Result<Observation> {
        self.params = apply_mismatch(&self.setup.vehicle, mismatch)?;
        let track = &self.setup.track;
        let c = &self.setup.constraints;
        let p = track.to_cartesian(s, 0.0);
        self.state = VehicleState {
            x: p.x,
            y: p.y,
            delta: 0.0,
            v: (c.v_min_allow + self.setup.env.start_velocity_offset).min(c.v_max_allow),
            psi: p.tangent_angle,
            psi_dot: 0.0,
            beta: 0.0,
        };
        self.frenet = track.to_frenet(p.x, p.y, p.tangent_angle)?;
        self.last_s = self.frenet.s;
        self.distance = 0.0;
        self.physics_steps = 0;
        self.agent_steps = 0;
        self.trajectory = None;
        self.status = EpisodeStatus::Running;
        self.rng = ChaCha8Rng::seed_from_u64(noise_seed);
        Ok(self.build_observation())
    }

    /// Normalized observation of the current state; noisy when observation
    /// noise is enabled.
    pub fn build_observation(&mut self) -> Observation {
        let track = &self.setup.track;
        let cfg = &self.setup.env;
        let bb = track.bounding_box();
        let st = &self.state;
        let unit = |v: f64| v.clamp(0.0, 1.0);
        let mut obs = Vec::with_capacity(cfg.obs_dim());
        obs.push(unit((st.x - bb.min.x) / (bb.max.x - bb.min.x)));
        obs.push(unit((st.y - bb.min.y) / (bb.max.y - bb.min.y)));
        obs.push(unit((crate::geometry::wrap_angle(st.psi) + PI) / (2.0 * PI)));
        obs.push(unit(st.v / self.setup.constraints.v_max_allow));
        let scan = track.lidar_scan(st.x, st.y, st.psi, &cfg.lidar, &mut self.rng);
        obs.extend(scan.iter().map(|r| unit(r / cfg.lidar.max_range)));
        if self.observation_noise && cfg.obs_noise_std > 0.0 {
            let normal = Normal::new(0.0, cfg.obs_noise_std).expect("validated std");
            for v in &mut obs {
                *v = unit(*v + normal.sample(&mut self.rng));
            }
        }
        Observation(obs)
    }

    /// Advances one agent period for whichever architecture the env was set up with.
    pub fn step(&mut self, action: &[f64]) -> Result<StepResult> {
        match self.setup.algorithm {
            Algorithm::EndToEnd => self.step_end_to_end(action),
            Algorithm::Partial => self.step_partial(action),
        }
    }

    fn check_action(&self, action: &[f64]) -> Result<[f64; 2]> {
        if self.status != EpisodeStatus::Running {
            return Err(Error::EpisodeOver(self.status));
        }
        if action.len() != 2 {
            return Err(Error::Shape(format!("expected 2 actions, got {}", action.len())));
        }
        Ok([action[0].clamp(-1.0, 1.0), action[1].clamp(-1.0, 1.0)])
    }

    /// End-to-end step: `[acceleration, steering]` scaled to actuator ranges
    /// and held for one agent period.
    pub fn step_end_to_end(&mut self, action: &[f64]) -> Result<StepResult> {
        let action = self.check_action(action)?;
        let c = self.setup.constraints;
        let accel_d = scale_action(action[0], -c.a_max, c.a_max);
        let steer_d = scale_action(action[1], c.delta_min, c.delta_max);
        self.advance(action, |_, state| {
            ControlCommand::new(velocity_constraint(accel_d, state.v, &c), steer_d)
        })
    }

    /// Partial end-to-end step: `[lateral, velocity]` define a Frenet path
    /// tracked by pure pursuit and the proportional velocity law.
    pub fn step_partial(&mut self, action: &[f64]) -> Result<StepResult> {
        let action = self.check_action(action)?;
        let setup = &self.setup;
        let c = setup.constraints;
        let traj = match plan(
            &self.frenet,
            action[0],
            action[1],
            &setup.track,
            &c,
            &setup.planner,
        ) {
            Ok(t) => t,
            Err(Error::HeadingDegenerate { .. }) => match self.trajectory.take() {
                Some(prev) => prev,
                None => straight_ahead(
                    self.state.x,
                    self.state.y,
                    self.state.psi,
                    setup.planner.horizon,
                    desired_velocity(action[1], &c),
                    setup.planner.samples,
                ),
            },
            Err(e) => return Err(e),
        };
        let wheelbase = setup.vehicle.wheelbase();
        let ctrl = setup.controller;
        let path = traj.clone();
        self.trajectory = Some(traj);
        self.advance(action, move |_, state| {
            let steer = pure_pursuit_steer(&path, state.x, state.y, state.psi, wheelbase, ctrl.lookahead, &c);
            let accel = velocity_command(path.v_d, state.v, ctrl.k_v, &c);
            ControlCommand::new(velocity_constraint(accel, state.v, &c), steer)
        })
    }

    fn advance<F>(&mut self, action: [f64; 2], mut control: F) -> Result<StepResult>
    where
        F: FnMut(u32, &VehicleState) -> ControlCommand,
    {
        let dt = self.setup.env.physics_dt;
        let hw = self.setup.env.vehicle_half_width;
        let max_steps = (self.setup.env.timeout_s / dt).round() as u64;
        let start_distance = self.distance;
        let mut collided = false;
        let mut frenet_ok = true;

        for k in 0..self.setup.env.agent_period_steps {
            let cmd = control(k, &self.state);
            self.state = physics_step(&self.state, cmd, &self.params, &self.setup.constraints, dt)?;
            self.physics_steps += 1;
            let track = &self.setup.track;
            match track.to_frenet(self.state.x, self.state.y, self.state.psi) {
                Ok(f) => {
                    self.frenet = f;
                    self.distance += track.centerline_progress(self.last_s, f.s);
                    self.last_s = f.s;
                    if track.check_collision(&f, hw) {
                        collided = true;
                    }
                }
                Err(Error::OutOfCorridor { .. }) => {
                    collided = true;
                    frenet_ok = false;
                }
                Err(e) => return Err(e),
            }
            if collided {
                self.status = EpisodeStatus::Crashed;
                break;
            }
            if track.is_closed() && self.distance >= track.total_length() {
                // the lap is measured to the finish line, not past it
                self.distance = track.total_length();
                self.status = EpisodeStatus::LapComplete;
                break;
            }
            if !track.is_closed() && self.frenet.s >= track.total_length() {
                self.status = EpisodeStatus::LapComplete;
                break;
            }
            if self.physics_steps >= max_steps {
                self.status = EpisodeStatus::Timeout;
                break;
            }
        }
        self.agent_steps += 1;

        let progress = self.distance - start_distance;
        let reward = compute_reward(progress, collided, &self.setup.reward);
        let obs = self.build_observation();
        let done = self.status != EpisodeStatus::Running;
        let lap_time = (self.status == EpisodeStatus::LapComplete)
            .then(|| self.physics_steps as f64 * dt);
        Ok(StepResult {
            obs,
            reward,
            done,
            info: StepInfo {
                state: self.state,
                frenet: frenet_ok.then_some(self.frenet),
                action,
                status: self.status,
                progress,
                distance: self.distance,
                physics_steps: self.physics_steps,
                lap_time,
                collided,
                trajectory: self.trajectory.clone(),
            },
        })
    }

    /// Whether the transition ending in `status` should cut bootstrapping.
    pub fn is_terminal(status: EpisodeStatus) -> bool {
        matches!(status, EpisodeStatus::Crashed | EpisodeStatus::LapComplete)
    }
}
