//! Single-track vehicle model: parameters, actuator limits, integration and
//! model-mismatch transforms.

mod dynamics;
mod mismatch;

pub use dynamics::{constrain_inputs, derivatives, step, GRAVITY};
pub use mismatch::{apply_mismatch, AddedMass, MismatchSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the F1tenth-scale car.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleParams {
    /// Mass (kg).
    pub m: f64,
    /// Yaw moment of inertia (kg m^2).
    #[serde(rename = "I_z")]
    pub i_z: f64,
    /// CoG to front axle (m).
    pub l_f: f64,
    /// CoG to rear axle (m).
    pub l_r: f64,
    /// CoG height (m).
    pub h_cg: f64,
    /// Front cornering stiffness coefficient (1/rad).
    #[serde(rename = "C_Sf")]
    pub c_sf: f64,
    /// Rear cornering stiffness coefficient (1/rad).
    #[serde(rename = "C_Sr")]
    pub c_sr: f64,
    /// Road friction coefficient.
    pub mu: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            m: 3.74,
            i_z: 0.04712,
            l_f: 0.1587,
            l_r: 0.17145,
            h_cg: 0.074,
            c_sf: 4.718,
            c_sr: 5.4562,
            mu: 1.0489,
        }
    }
}

impl VehicleParams {
    pub fn wheelbase(&self) -> f64 {
        self.l_f + self.l_r
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("m", self.m),
            ("I_z", self.i_z),
            ("l_f", self.l_f),
            ("l_r", self.l_r),
            ("h_cg", self.h_cg),
            ("C_Sf", self.c_sf),
            ("C_Sr", self.c_sr),
            ("mu", self.mu),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "vehicle parameter {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Actuator and velocity limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleConstraints {
    pub delta_min: f64,
    pub delta_max: f64,
    pub ddelta_min: f64,
    pub ddelta_max: f64,
    pub v_min_model: f64,
    pub v_max_model: f64,
    pub a_max: f64,
    pub v_switch: f64,
    pub v_max_allow: f64,
    pub v_min_allow: f64,
}

impl Default for VehicleConstraints {
    fn default() -> Self {
        Self {
            delta_min: -0.4189,
            delta_max: 0.4189,
            ddelta_min: -3.2,
            ddelta_max: 3.2,
            v_min_model: -5.0,
            v_max_model: 20.0,
            a_max: 9.51,
            v_switch: 7.319,
            v_max_allow: 5.0,
            v_min_allow: 3.0,
        }
    }
}

impl VehicleConstraints {
    pub fn validate(&self) -> Result<()> {
        let ok = self.delta_min < 0.0
            && self.delta_max > 0.0
            && self.ddelta_min < 0.0
            && self.ddelta_max > 0.0
            && self.a_max > 0.0
            && self.v_switch > 0.0
            && self.v_min_model < self.v_max_model
            && self.v_min_allow > 0.0
            && self.v_min_allow < self.v_max_allow
            && self.v_max_allow <= self.v_max_model;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("inconsistent vehicle constraints: {self:?}")))
        }
    }
}

/// Dynamic state of the single-track model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Front wheel steering angle (rad).
    pub delta: f64,
    /// Longitudinal velocity (m/s).
    pub v: f64,
    /// Yaw (rad), not wrapped.
    pub psi: f64,
    pub psi_dot: f64,
    /// Slip angle at the CoG (rad).
    pub beta: f64,
}

impl VehicleState {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.x,
            self.y,
            self.delta,
            self.v,
            self.psi,
            self.psi_dot,
            self.beta,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            delta: a[2],
            v: a[3],
            psi: a[4],
            psi_dot: a[5],
            beta: a[6],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Direction of travel (yaw plus slip).
    pub fn course(&self) -> f64 {
        self.psi + self.beta
    }
}

/// Commanded longitudinal acceleration and steering angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlCommand {
    pub accel: f64,
    pub steer: f64,
}

impl ControlCommand {
    pub fn new(accel: f64, steer: f64) -> Self {
        Self { accel, steer }
    }
}
