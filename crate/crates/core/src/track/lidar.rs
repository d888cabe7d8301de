use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::TrackGeometry;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LidarConfig {
    pub n_beams: usize,
    /// Total angular span, centred on the heading.
    pub fov: f64,
    pub max_range: f64,
    pub noise_std: f64,
}

impl Default for LidarConfig {
    fn default() -> Self {
        Self {
            n_beams: 20,
            fov: PI,
            max_range: 20.0,
            noise_std: 0.0,
        }
    }
}

impl LidarConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_beams < 2 {
            return Err(Error::Config("lidar needs at least 2 beams".into()));
        }
        if !(self.fov > 0.0 && self.fov <= 2.0 * PI) {
            return Err(Error::Config(format!("lidar fov {} outside (0, 2pi]", self.fov)));
        }
        if !(self.max_range > 0.0) {
            return Err(Error::Config("lidar max_range must be positive".into()));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::Config("lidar noise_std must be non-negative".into()));
        }
        Ok(())
    }

    /// Beam angle offsets relative to the heading.
    pub fn beam_offsets(&self) -> impl Iterator<Item = f64> + '_ {
        let step = self.fov / (self.n_beams - 1) as f64;
        (0..self.n_beams).map(move |i| -0.5 * self.fov + i as f64 * step)
    }
}

/// Distance along the unit ray `origin + t * dir` to segment `a`-`b`, if hit.
fn ray_segment(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let ao = a - origin;
    let t = ao.cross(e) / denom;
    let u = ao.cross(dir) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}

impl TrackGeometry {
    fn boundary_segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let closed = self.closed;
        [&self.left_boundary, &self.right_boundary]
            .into_iter()
            .flat_map(move |poly| {
                let m = poly.len();
                let count = if closed { m } else { m - 1 };
                (0..count).map(move |i| (poly[i], poly[(i + 1) % m]))
            })
    }

    /// Noise-free range along one ray, saturated at `max_range`.
    pub fn cast_ray(&self, origin: Vec2, angle: f64, max_range: f64) -> f64 {
        let dir = Vec2::from_angle(angle);
        self.boundary_segments()
            .filter_map(|(a, b)| ray_segment(origin, dir, a, b))
            .fold(max_range, f64::min)
    }

    /// Simulated planar scan from pose `(x, y, heading)`.
    pub fn lidar_scan<R: Rng + ?Sized>(
        &self,
        x: f64,
        y: f64,
        heading: f64,
        cfg: &LidarConfig,
        rng: &mut R,
    ) -> Vec<f64> {
        let origin = Vec2::new(x, y);
        let dirs: Vec<Vec2> = cfg
            .beam_offsets()
            .map(|off| Vec2::from_angle(heading + off))
            .collect();
        let mut ranges = vec![cfg.max_range; cfg.n_beams];
        for (a, b) in self.boundary_segments() {
            for (r, dir) in ranges.iter_mut().zip(&dirs) {
                if let Some(t) = ray_segment(origin, *dir, a, b) {
                    if t < *r {
                        *r = t;
                    }
                }
            }
        }
        if cfg.noise_std > 0.0 {
            let normal = Normal::new(0.0, cfg.noise_std).expect("validated noise std");
            for r in &mut ranges {
                *r = (*r + normal.sample(rng)).clamp(0.0, cfg.max_range);
            }
        }
        ranges
    }
}
