use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::StepResult;
use crate::error::{Error, Result};

/// One agent step of a rollout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub v: f64,
    pub s: f64,
    pub n: f64,
    pub action0: f64,
    pub action1: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryLog {
    pub rows: Vec<TrajectoryRow>,
}

impl TrajectoryLog {
    pub fn record(&mut self, step: &StepResult, dt: f64) {
        let st = &step.info.state;
        let (s, n) = step.info.frenet.map_or((f64::NAN, f64::NAN), |f| (f.s, f.n));
        self.rows.push(TrajectoryRow {
            t: step.info.physics_steps as f64 * dt,
            x: st.x,
            y: st.y,
            psi: st.psi,
            v: st.v,
            s,
            n,
            action0: step.info.action[0],
            action1: step.info.action[1],
            reward: step.reward,
        });
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io("<trajectory>", e))?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path)?;
        let rows = r.deserialize().collect::<std::result::Result<Vec<TrajectoryRow>, _>>()?;
        Ok(Self { rows })
    }
}
