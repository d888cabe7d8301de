//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use frenet_racer::geometry::Vec2;
use frenet_racer::track::TrackGeometry;

pub const BUNDLED: [&str; 4] = ["porto", "barcelona", "monaco", "test_oval"];

pub fn assets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets")
}

pub fn track(name: &str) -> Arc<TrackGeometry> {
    Arc::new(TrackGeometry::load(assets().join("tracks").join(format!("{name}.csv"))).unwrap())
}

/// Plain point-to-segment distance, written without the library helpers.
pub fn seg_dist(px: f64, py: f64, ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    let (ex, ey) = (bx - ax, by - ay);
    let len2 = ex * ex + ey * ey;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - ax) * ex + (py - ay) * ey) / len2).clamp(0.0, 1.0)
    };
    let (dx, dy) = (ax + t * ex - px, ay + t * ey - py);
    (dx * dx + dy * dy).sqrt()
}

pub fn closed_segments(poly: &[Vec2]) -> Vec<(Vec2, Vec2)> {
    (0..poly.len()).map(|i| (poly[i], poly[(i + 1) % poly.len()])).collect()
}

/// Distance from `p` to the nearest boundary segment.
pub fn boundary_distance(track: &TrackGeometry, p: Vec2) -> f64 {
    let mut best = f64::INFINITY;
    for poly in [track.left_boundary(), track.right_boundary()] {
        for (a, b) in closed_segments(poly) {
            best = best.min(seg_dist(p.x, p.y, a.x, a.y, b.x, b.y));
        }
    }
    best
}

/// Distance to the centerline polyline.
pub fn centerline_distance(track: &TrackGeometry, p: Vec2) -> f64 {
    closed_segments(track.centerline())
        .into_iter()
        .map(|(a, b)| seg_dist(p.x, p.y, a.x, a.y, b.x, b.y))
        .fold(f64::INFINITY, f64::min)
}

/// Sphere-traced range: advance by the distance to the nearest boundary until
/// that distance vanishes. Never steps over a boundary.
pub fn march_ray(track: &TrackGeometry, origin: Vec2, angle: f64, max_range: f64) -> f64 {
    let dir = Vec2::new(angle.cos(), angle.sin());
    let mut t = 0.0;
    for _ in 0..200_000 {
        let p = Vec2::new(origin.x + dir.x * t, origin.y + dir.y * t);
        let d = boundary_distance(track, p);
        if d < 1e-9 {
            return t.min(max_range);
        }
        t += d;
        if t >= max_range {
            return max_range;
        }
    }
    t.min(max_range)
}

/// Central finite-difference derivative.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Kolmogorov-Smirnov statistic of samples in [0, 1) against the uniform law.
pub fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}
