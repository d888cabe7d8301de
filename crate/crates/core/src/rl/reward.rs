use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub r_collision: f64,
    /// Reward per metre of centerline progress.
    pub r_dist: f64,
    /// Per agent step.
    pub r_time: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            r_collision: -1.0,
            r_dist: 1.0,
            r_time: -0.01,
        }
    }
}

/// Collision penalty, otherwise distance reward plus the per-step time penalty.
pub fn compute_reward(progress_delta: f64, collided: bool, k: &RewardConfig) -> f64 {
    if collided {
        k.r_collision
    } else {
        k.r_dist * progress_delta + k.r_time
    }
}
