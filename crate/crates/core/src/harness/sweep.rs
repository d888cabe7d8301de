//! Model-mismatch sweeps: one evaluation per grid cell.

use serde::{Deserialize, Serialize};

use super::config::EvalSpec;
use super::eval::evaluate;
use crate::env::EnvSetup;
use crate::error::{Error, Result};
use crate::exec::{par_map, ExecMode};
use crate::rl::Mlp;
use crate::vehicle::{AddedMass, MismatchSpec};

/// Masses allowed in mass sweeps (kg).
pub const MASS_GRID: [f64; 4] = [0.3, 0.5, 1.0, 1.5];
pub const FRICTION_RANGE: (f64, f64) = (0.5, 1.0489);
pub const STIFFNESS_RANGE: (f64, f64) = (0.8, 1.2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Friction,
    StiffnessFront,
    StiffnessRear,
    StiffnessBoth,
    Mass,
}

impl SweepKind {
    /// Leading CSV columns naming the swept variable(s).
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            SweepKind::Friction => &["mu"],
            SweepKind::StiffnessFront => &["c_sf_scale"],
            SweepKind::StiffnessRear => &["c_sr_scale"],
            SweepKind::StiffnessBoth => &["stiffness_scale"],
            SweepKind::Mass => &["mass_kg", "position_m"],
        }
    }

    pub fn from_columns(header: &[&str]) -> Option<Self> {
        [
            SweepKind::Friction,
            SweepKind::StiffnessFront,
            SweepKind::StiffnessRear,
            SweepKind::StiffnessBoth,
            SweepKind::Mass,
        ]
        .into_iter()
        .find(|k| header.starts_with(k.columns()))
    }
}

fn default_laps() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    /// Friction coefficients, stiffness scales, or masses (kg).
    pub values: Vec<f64>,
    /// Mass positions measured forward from the rear axle (m); mass sweeps only.
    #[serde(default)]
    pub positions: Vec<f64>,
    #[serde(default = "default_laps")]
    pub laps: usize,
}

/// One evaluation condition of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub values: [f64; 2],
    pub mismatch: MismatchSpec,
}

impl SweepSpec {
    /// The paper-style friction grid 0.5, 0.6, ..., 1.0, 1.0489.
    pub fn friction_default(laps: usize) -> Self {
        let mut values: Vec<f64> = (5..=10).map(|k| k as f64 / 10.0).collect();
        values.push(FRICTION_RANGE.1);
        Self {
            kind: SweepKind::Friction,
            values,
            positions: Vec::new(),
            laps,
        }
    }

    pub fn validate(&self, wheelbase: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.values.is_empty() {
            return bad("sweep grid is empty".into());
        }
        if self.laps == 0 {
            return bad("sweep needs at least one lap per cell".into());
        }
        let within = |v: f64, (lo, hi): (f64, f64)| v >= lo - 1e-12 && v <= hi + 1e-12;
        for &v in &self.values {
            let ok = match self.kind {
                SweepKind::Friction => within(v, FRICTION_RANGE),
                SweepKind::StiffnessFront | SweepKind::StiffnessRear | SweepKind::StiffnessBoth => {
                    within(v, STIFFNESS_RANGE)
                }
                SweepKind::Mass => MASS_GRID.contains(&v),
            };
            if !ok {
                return bad(format!("{:?} sweep value {v} outside the allowed grid", self.kind));
            }
        }
        match self.kind {
            SweepKind::Mass => {
                if self.positions.is_empty() {
                    return bad("mass sweep needs mass positions".into());
                }
                if let Some(p) = self.positions.iter().find(|p| !(0.0..=wheelbase).contains(*p)) {
                    return bad(format!("mass position {p} outside [0, {wheelbase}]"));
                }
            }
            _ if !self.positions.is_empty() => {
                return bad("positions only apply to mass sweeps".into());
            }
            _ => {}
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<SweepCell> {
        let nominal = MismatchSpec::default();
        match self.kind {
            SweepKind::Mass => self
                .values
                .iter()
                .flat_map(|&m| {
                    self.positions.iter().map(move |&p| SweepCell {
                        values: [m, p],
                        mismatch: MismatchSpec {
                            added_mass: Some(AddedMass { mass: m, position: p }),
                            ..nominal
                        },
                    })
                })
                .collect(),
            kind => self
                .values
                .iter()
                .map(|&v| {
                    let mismatch = match kind {
                        SweepKind::Friction => MismatchSpec {
                            mu_override: Some(v),
                            ..nominal
                        },
                        SweepKind::StiffnessFront => MismatchSpec {
                            c_sf_scale: v,
                            ..nominal
                        },
                        SweepKind::StiffnessRear => MismatchSpec {
                            c_sr_scale: v,
                            ..nominal
                        },
                        _ => MismatchSpec {
                            c_sf_scale: v,
                            c_sr_scale: v,
                            ..nominal
                        },
                    };
                    SweepCell {
                        values: [v, f64::NAN],
                        mismatch,
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Swept variable(s), in `SweepKind::columns` order.
    pub values: Vec<f64>,
    pub success_pct: Option<f64>,
    pub mean_lap_time_s: Option<f64>,
    pub laps: usize,
    /// Set when the cell could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResults {
    pub kind: SweepKind,
    pub algorithm: String,
    pub track: String,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

/// Evaluates every cell with the same seed, so a cell's result depends only
/// on its own mismatch. Cell failures are recorded instead of aborting.
pub fn run_sweep(actor: &Mlp, setup: &EnvSetup, spec: &SweepSpec, seed: u64, mode: ExecMode) -> Result<SweepResults> {
    spec.validate(setup.vehicle.wheelbase())?;
    let eval = EvalSpec {
        laps: spec.laps,
        obs_noise: true,
        seed: Some(seed),
        trajectories: 0,
    };
    let width = spec.kind.columns().len();
    let rows = par_map(mode, spec.cells(), |cell| {
        let values = cell.values[..width].to_vec();
        match evaluate(actor, setup, &cell.mismatch, &eval, seed, mode) {
            Ok(report) => SweepRow {
                values,
                success_pct: Some(report.aggregates.success_pct),
                mean_lap_time_s: report.aggregates.mean_lap_time_s,
                laps: report.aggregates.laps,
                error: None,
            },
            Err(e) => SweepRow {
                values,
                success_pct: None,
                mean_lap_time_s: None,
                laps: spec.laps,
                error: Some(e.to_string()),
            },
        }
    });
    Ok(SweepResults {
        kind: spec.kind,
        algorithm: setup.algorithm.to_string(),
        track: setup.track.name().to_string(),
        seed,
        rows,
    })
}
