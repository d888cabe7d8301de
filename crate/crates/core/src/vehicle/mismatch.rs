use serde::{Deserialize, Serialize};

use super::VehicleParams;
use crate::error::{Error, Result};

/// Point mass attached on the longitudinal axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddedMass {
    /// kg
    pub mass: f64,
    /// Metres forward of the rear axle.
    pub position: f64,
}

/// Perturbation applied to the nominal model at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MismatchSpec {
    pub mu_override: Option<f64>,
    pub c_sf_scale: f64,
    pub c_sr_scale: f64,
    pub added_mass: Option<AddedMass>,
}

impl Default for MismatchSpec {
    fn default() -> Self {
        Self {
            mu_override: None,
            c_sf_scale: 1.0,
            c_sr_scale: 1.0,
            added_mass: None,
        }
    }
}

impl MismatchSpec {
    pub fn nominal() -> Self {
        Self::default()
    }

    pub fn friction(mu: f64) -> Self {
        Self {
            mu_override: Some(mu),
            ..Self::default()
        }
    }

    pub fn stiffness(front: f64, rear: f64) -> Self {
        Self {
            c_sf_scale: front,
            c_sr_scale: rear,
            ..Self::default()
        }
    }

    pub fn mass(mass: f64, position: f64) -> Self {
        Self {
            added_mass: Some(AddedMass { mass, position }),
            ..Self::default()
        }
    }

    pub fn is_nominal(&self) -> bool {
        *self == Self::default()
    }

    pub fn validate(&self, wheelbase: f64) -> Result<()> {
        if let Some(mu) = self.mu_override {
            if !(mu > 0.0 && mu <= 2.0) {
                return Err(Error::Config(format!("friction override {mu} outside (0, 2]")));
            }
        }
        for (name, s) in [("c_sf_scale", self.c_sf_scale), ("c_sr_scale", self.c_sr_scale)] {
            if !(0.5..=2.0).contains(&s) {
                return Err(Error::Config(format!("{name} {s} outside [0.5, 2]")));
            }
        }
        if let Some(am) = self.added_mass {
            if !(am.mass >= 0.0 && am.mass.is_finite()) {
                return Err(Error::Config(format!("added mass {} must be >= 0", am.mass)));
            }
            if !(am.position >= 0.0 && am.position <= wheelbase) {
                return Err(Error::Config(format!(
                    "added mass position {} outside [0, {wheelbase}]",
                    am.position
                )));
            }
        }
        Ok(())
    }
}

/// Builds the evaluation parameter set for a mismatch experiment.
///
/// An added point mass shifts the CoG along the wheelbase and raises the yaw
/// inertia by the parallel-axis terms of both the chassis and the new mass.
pub fn apply_mismatch(nominal: &VehicleParams, spec: &MismatchSpec) -> Result<VehicleParams> {
    let wheelbase = nominal.wheelbase();
    spec.validate(wheelbase)?;
    let mut out = *nominal;
    if let Some(mu) = spec.mu_override {
        out.mu = mu;
    }
    out.c_sf = nominal.c_sf * spec.c_sf_scale;
    out.c_sr = nominal.c_sr * spec.c_sr_scale;
    if let Some(AddedMass { mass, position }) = spec.added_mass {
        if mass > 0.0 {
            let total = nominal.m + mass;
            // CoG shift toward the added mass
            let shift = mass * (position - nominal.l_r) / total;
            let cog = nominal.l_r + shift;
            let mass_arm = position - cog;
            out.m = total;
            out.l_r = cog;
            out.l_f = nominal.l_f - shift;
            out.i_z = nominal.i_z
                + nominal.m * shift * shift
                + mass * mass_arm * mass_arm;
        }
    }
    Ok(out)
}
