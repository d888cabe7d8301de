//! Partial end-to-end planning layer and the classical tracking controllers
//! shared by both agent architectures.

mod cubic;

pub use cubic::CubicPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::track::{FrenetPose, TrackGeometry};
use crate::vehicle::VehicleConstraints;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Distance ahead of the vehicle where the path ends (m).
    pub horizon: f64,
    /// Number of path samples, endpoints included.
    pub samples: usize,
    /// Clearance kept from each boundary (m).
    pub margin: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            horizon: 2.0,
            samples: 20,
            margin: 0.15,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || self.samples < 2 || !(self.margin >= 0.0) {
            return Err(Error::Config(format!("invalid planner config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    /// Proportional velocity gain.
    pub k_v: f64,
    /// Pure pursuit lookahead distance (m).
    pub lookahead: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            k_v: 1.0,
            lookahead: 0.6,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_v > 0.0) || !(self.lookahead > 0.0) {
            return Err(Error::Config(format!("invalid controller config {self:?}")));
        }
        Ok(())
    }
}

/// Path plus a single desired velocity, handed to the tracking layer.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedTrajectory {
    pub points: Vec<Vec2>,
    pub v_d: f64,
}

/// Maps an action in [-1, 1] linearly onto `[lo, hi]`.
pub fn scale_action(action: f64, lo: f64, hi: f64) -> f64 {
    let a = action.clamp(-1.0, 1.0);
    lo + 0.5 * (a + 1.0) * (hi - lo)
}

/// Desired velocity selected by the planner's longitudinal action.
pub fn desired_velocity(velocity_action: f64, c: &VehicleConstraints) -> f64 {
    scale_action(velocity_action, c.v_min_allow, c.v_max_allow)
}

/// Builds the cubic Frenet path for the agent's actions and samples it in
/// Cartesian coordinates.
///
/// Samples are kept inside the corridor shrunk by the planner margin; the
/// target offset already lies inside it, only the segment near a vehicle that
/// sits close to a boundary gets clipped.
pub fn plan(
    frenet: &FrenetPose,
    lateral_action: f64,
    velocity_action: f64,
    track: &TrackGeometry,
    c: &VehicleConstraints,
    cfg: &PlannerConfig,
) -> Result<PlannedTrajectory> {
    let s0 = frenet.s;
    let s1 = s0 + cfg.horizon;
    let n1 = target_offset(track, s1, lateral_action, cfg.margin);
    let cubic = CubicPath::solve(s0, frenet.n, frenet.psi, s1, n1)?;

    let last = cfg.samples - 1;
    let points = (0..cfg.samples)
        .map(|i| {
            let s = if i == last {
                s1
            } else {
                s0 + cfg.horizon * i as f64 / last as f64
            };
            let hi = (track.left_width_at(s) - cfg.margin).max(0.0);
            let lo = -(track.right_width_at(s) - cfg.margin).max(0.0);
            let n = cubic.eval(s).clamp(lo, hi);
            let p = track.to_cartesian(s, n);
            Vec2::new(p.x, p.y)
        })
        .collect();
    Ok(PlannedTrajectory {
        points,
        v_d: desired_velocity(velocity_action, c),
    })
}

/// Lateral target at `s` for a lateral action in [-1, 1].
pub fn target_offset(track: &TrackGeometry, s: f64, lateral_action: f64, margin: f64) -> f64 {
    let hi = (track.left_width_at(s) - margin).max(0.0);
    let lo = -(track.right_width_at(s) - margin).max(0.0);
    scale_action(lateral_action, lo, hi)
}

/// Straight path along the current heading, used when no cubic exists.
pub fn straight_ahead(x: f64, y: f64, heading: f64, length: f64, v_d: f64, samples: usize) -> PlannedTrajectory {
    let dir = Vec2::from_angle(heading);
    let origin = Vec2::new(x, y);
    let last = (samples.max(2) - 1) as f64;
    let points = (0..samples.max(2))
        .map(|i| origin + dir * (length * i as f64 / last))
        .collect();
    PlannedTrajectory { points, v_d }
}

/// Pure pursuit steering toward the first path point at least `lookahead`
/// away (or the last point when none is that far).
pub fn pure_pursuit_steer(
    path: &PlannedTrajectory,
    x: f64,
    y: f64,
    heading: f64,
    wheelbase: f64,
    lookahead: f64,
    c: &VehicleConstraints,
) -> f64 {
    let pos = Vec2::new(x, y);
    let Some(last) = path.points.last() else {
        return 0.0;
    };
    let target = path
        .points
        .iter()
        .find(|p| p.distance(pos) >= lookahead)
        .unwrap_or(last);
    let d = *target - pos;
    let dist_sq = d.norm_sq();
    if dist_sq < 1e-12 {
        return 0.0;
    }
    let (sin_h, cos_h) = heading.sin_cos();
    let lateral = -sin_h * d.x + cos_h * d.y;
    let curvature = 2.0 * lateral / dist_sq;
    (wheelbase * curvature).atan().clamp(c.delta_min, c.delta_max)
}

/// Proportional velocity law with asymmetric gains for speeding up and
/// slowing down.
pub fn velocity_command(v_d: f64, v: f64, k_v: f64, c: &VehicleConstraints) -> f64 {
    if v_d >= v {
        k_v * (c.a_max / c.v_max_allow) * (v_d - v)
    } else {
        k_v * (c.a_max / c.v_min_allow) * (v_d - v)
    }
}

/// Zeroes the longitudinal command outside the allowable velocity band.
pub fn velocity_constraint(a_long_d: f64, v: f64, c: &VehicleConstraints) -> f64 {
    if v >= c.v_max_allow || v <= c.v_min_allow {
        0.0
    } else {
        a_long_d
    }
}
