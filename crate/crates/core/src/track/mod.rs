//! Racetrack geometry: centerline loading, Frenet conversion, progress and
//! boundary contact.

mod lidar;

pub use lidar::LidarConfig;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{project_onto_segment, segments_intersect, wrap_angle, Vec2};

/// First and last rows closer than this close the loop.
const CLOSE_TOLERANCE: f64 = 0.01;

/// Pose expressed relative to the track centerline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrenetPose {
    /// Arclength along the centerline.
    pub s: f64,
    /// Signed offset from the centerline, positive to the left.
    pub n: f64,
    /// Heading relative to the local centerline tangent, in (-pi, pi].
    pub psi: f64,
}

/// Result of [`TrackGeometry::to_cartesian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub tangent_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Vec2,
    pub max: Vec2,
}

#[derive(Debug, Clone)]
pub struct TrackGeometry {
    name: String,
    centerline: Vec<Vec2>,
    w_left: Vec<f64>,
    w_right: Vec<f64>,
    cum_s: Vec<f64>,
    total_length: f64,
    closed: bool,
    // per segment: unit direction and length
    seg_dir: Vec<Vec2>,
    seg_len: Vec<f64>,
    left_boundary: Vec<Vec2>,
    right_boundary: Vec<Vec2>,
    max_half_width: f64,
    bbox: BoundingBox,
}

impl TrackGeometry {
    /// Parses racetrack CSV content (`x_m, y_m, w_tr_left_m, w_tr_right_m`).
    ///
    /// Lines starting with `#` are comments. A comment or header row naming
    /// both `w_tr_left` and `w_tr_right` fixes the width column order, so files
    /// that list the right width first load correctly.
    pub fn parse_csv(name: &str, source: &str) -> Result<Self> {
        let mut left_col = 2usize;
        let mut right_col = 3usize;
        let mut points = Vec::new();
        let mut w_left = Vec::new();
        let mut w_right = Vec::new();

        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let body = line.strip_prefix('#').unwrap_or(line);
            if line.starts_with('#') || body.contains("x_m") {
                if let Some((l, r)) = width_columns(body) {
                    left_col = l;
                    right_col = r;
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::TrackParse {
                    line: line_no,
                    message: format!("expected 4 columns, found {}", fields.len()),
                });
            }
            let mut vals = [0.0; 4];
            for (v, f) in vals.iter_mut().zip(&fields) {
                *v = f.parse::<f64>().map_err(|e| Error::TrackParse {
                    line: line_no,
                    message: format!("`{f}`: {e}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::TrackParse {
                        line: line_no,
                        message: format!("non-finite value `{f}`"),
                    });
                }
            }
            points.push(Vec2::new(vals[0], vals[1]));
            w_left.push(vals[left_col]);
            w_right.push(vals[right_col]);
        }

        Self::from_points(name, points, w_left, w_right)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let source = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("track")
            .to_string();
        Self::parse_csv(&name, &source)
    }

    /// Builds a track from raw samples. A final sample repeating the first
    /// (within 1 cm) marks the track as a closed loop and is dropped.
    pub fn from_points(
        name: &str,
        mut points: Vec<Vec2>,
        mut w_left: Vec<f64>,
        mut w_right: Vec<f64>,
    ) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::TrackValidation(format!(
                "need at least 3 centerline rows, found {}",
                points.len()
            )));
        }
        if points.len() != w_left.len() || points.len() != w_right.len() {
            return Err(Error::TrackValidation("width column length mismatch".into()));
        }
        let closed = points[0].distance(points[points.len() - 1]) <= CLOSE_TOLERANCE;
        if closed {
            points.pop();
            w_left.pop();
            w_right.pop();
            if points.len() < 3 {
                return Err(Error::TrackValidation(
                    "closed track needs at least 3 distinct points".into(),
                ));
            }
        }
        if let Some(i) = w_left
            .iter()
            .zip(&w_right)
            .position(|(l, r)| *l <= 0.0 || *r <= 0.0)
        {
            return Err(Error::TrackValidation(format!(
                "non-positive half-width at point {i}"
            )));
        }

        let n = points.len();
        let n_seg = if closed { n } else { n - 1 };
        let mut seg_dir = Vec::with_capacity(n_seg);
        let mut seg_len = Vec::with_capacity(n_seg);
        for i in 0..n_seg {
            let d = points[(i + 1) % n] - points[i];
            let len = d.norm();
            if len <= 0.0 {
                return Err(Error::TrackValidation(format!(
                    "centerline points {i} and {} coincide",
                    (i + 1) % n
                )));
            }
            seg_dir.push(d * (1.0 / len));
            seg_len.push(len);
        }
        let mut cum_s = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 0..n {
            cum_s.push(acc);
            if i < n_seg {
                acc += seg_len[i];
            }
        }
        let total_length = acc;

        let mut left_boundary = Vec::with_capacity(n);
        let mut right_boundary = Vec::with_capacity(n);
        for i in 0..n {
            let tangent = vertex_tangent(&seg_dir, i, closed);
            let normal = tangent.left_normal();
            left_boundary.push(points[i] + normal * w_left[i]);
            right_boundary.push(points[i] - normal * w_right[i]);
        }

        let max_half_width = w_left
            .iter()
            .chain(&w_right)
            .fold(0.0f64, |acc, w| acc.max(*w));
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in left_boundary.iter().chain(&right_boundary) {
            min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
            max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
        }

        let track = TrackGeometry {
            name: name.to_string(),
            centerline: points,
            w_left,
            w_right,
            cum_s,
            total_length,
            closed,
            seg_dir,
            seg_len,
            left_boundary,
            right_boundary,
            max_half_width,
            bbox: BoundingBox { min, max },
        };
        track.validate_boundaries()?;
        Ok(track)
    }

    fn validate_boundaries(&self) -> Result<()> {
        for (label, poly) in [("left", &self.left_boundary), ("right", &self.right_boundary)] {
            // a width beyond the local turn radius folds the boundary backwards
            let m = poly.len();
            for (i, dir) in self.seg_dir.iter().enumerate() {
                if (poly[(i + 1) % m] - poly[i]).dot(*dir) <= 0.0 {
                    return Err(Error::TrackValidation(format!(
                        "{label} boundary folds back at segment {i}"
                    )));
                }
            }
            if let Some((i, j)) = polyline_self_intersection(poly, self.closed) {
                return Err(Error::TrackValidation(format!(
                    "{label} boundary self-intersects between segments {i} and {j}"
                )));
            }
        }
        let segs = |poly: &[Vec2]| -> Vec<(Vec2, Vec2)> {
            let m = poly.len();
            let count = if self.closed { m } else { m - 1 };
            (0..count).map(|i| (poly[i], poly[(i + 1) % m])).collect()
        };
        let left = segs(&self.left_boundary);
        let right = segs(&self.right_boundary);
        for (i, (a, b)) in left.iter().enumerate() {
            for (j, (c, d)) in right.iter().enumerate() {
                if boxes_overlap(*a, *b, *c, *d) && segments_intersect(*a, *b, *c, *d) {
                    return Err(Error::TrackValidation(format!(
                        "left boundary segment {i} crosses right boundary segment {j}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn centerline(&self) -> &[Vec2] {
        &self.centerline
    }

    pub fn w_left(&self) -> &[f64] {
        &self.w_left
    }

    pub fn w_right(&self) -> &[f64] {
        &self.w_right
    }

    pub fn cum_s(&self) -> &[f64] {
        &self.cum_s
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn left_boundary(&self) -> &[Vec2] {
        &self.left_boundary
    }

    pub fn right_boundary(&self) -> &[Vec2] {
        &self.right_boundary
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bbox
    }

    pub fn max_half_width(&self) -> f64 {
        self.max_half_width
    }

    pub fn min_half_width(&self) -> f64 {
        self.w_left
            .iter()
            .chain(&self.w_right)
            .fold(f64::INFINITY, |acc, w| acc.min(*w))
    }

    fn segment_count(&self) -> usize {
        self.seg_len.len()
    }

    /// Wraps (closed) or clamps (open) an arclength into the valid range.
    pub fn normalize_s(&self, s: f64) -> f64 {
        if self.closed {
            let w = s.rem_euclid(self.total_length);
            // rem_euclid can round up to the modulus itself
            if w >= self.total_length {
                0.0
            } else {
                w
            }
        } else {
            s.clamp(0.0, self.total_length)
        }
    }

    /// Segment containing arclength `s` (already normalized) and the offset into it.
    fn locate(&self, s: f64) -> (usize, f64) {
        let idx = match self.cum_s.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let idx = idx.min(self.segment_count() - 1);
        (idx, s - self.cum_s[idx])
    }

    fn half_widths_at(&self, s: f64) -> (f64, f64) {
        let (i, offset) = self.locate(self.normalize_s(s));
        let j = (i + 1) % self.centerline.len();
        let t = (offset / self.seg_len[i]).clamp(0.0, 1.0);
        (
            self.w_left[i] + t * (self.w_left[j] - self.w_left[i]),
            self.w_right[i] + t * (self.w_right[j] - self.w_right[i]),
        )
    }

    /// Left half-width at arclength `s`, linearly interpolated.
    pub fn left_width_at(&self, s: f64) -> f64 {
        self.half_widths_at(s).0
    }

    /// Right half-width at arclength `s`, linearly interpolated.
    pub fn right_width_at(&self, s: f64) -> f64 {
        self.half_widths_at(s).1
    }

    /// Half-width on the side selected by the sign of `n`.
    pub fn half_width_toward(&self, s: f64, n: f64) -> f64 {
        let (l, r) = self.half_widths_at(s);
        if n >= 0.0 {
            l
        } else {
            r
        }
    }

    /// Projects a Cartesian pose onto the centerline.
    ///
    /// The closest point over all segments wins; on exact ties the segment
    /// with the smaller arclength is kept.
    pub fn to_frenet(&self, x: f64, y: f64, heading: f64) -> Result<FrenetPose> {
        let p = Vec2::new(x, y);
        let n_pts = self.centerline.len();
        let mut best_d2 = f64::INFINITY;
        let mut best = (0usize, 0.0f64);
        for i in 0..self.segment_count() {
            let a = self.centerline[i];
            let b = self.centerline[(i + 1) % n_pts];
            let t = project_onto_segment(p, a, b);
            let foot = a + (b - a) * t;
            let d2 = (p - foot).norm_sq();
            if d2 < best_d2 {
                best_d2 = d2;
                best = (i, t);
            }
        }
        let limit = 2.0 * self.max_half_width;
        let dist = best_d2.sqrt();
        if dist > limit {
            return Err(Error::OutOfCorridor {
                x,
                y,
                distance: dist,
                limit,
            });
        }

        let (i, t) = best;
        let dir = self.seg_dir[i];
        let a = self.centerline[i];
        let rel = p - a;
        let n = if t > 0.0 && t < 1.0 {
            dir.cross(rel)
        } else {
            let foot = a + dir * (t * self.seg_len[i]);
            let side = dir.cross(p - foot);
            if side < 0.0 {
                -dist
            } else {
                dist
            }
        };
        let s = self.normalize_s(self.cum_s[i] + t * self.seg_len[i]);
        Ok(FrenetPose {
            s,
            n,
            psi: wrap_angle(heading - dir.angle()),
        })
    }

    /// Centerline point at arclength `s` displaced `n` along the left normal.
    pub fn to_cartesian(&self, s: f64, n: f64) -> CartesianPoint {
        let (i, offset) = self.locate(self.normalize_s(s));
        let dir = self.seg_dir[i];
        let p = self.centerline[i] + dir * offset + dir.left_normal() * n;
        CartesianPoint {
            x: p.x,
            y: p.y,
            tangent_angle: dir.angle(),
        }
    }

    /// True when the vehicle footprint touches or crosses the boundary.
    pub fn check_collision(&self, pose: &FrenetPose, vehicle_half_width: f64) -> bool {
        pose.n.abs() + vehicle_half_width >= self.half_width_toward(pose.s, pose.n)
    }

    /// Signed centerline distance travelled from `s_prev` to `s_now`.
    ///
    /// On closed tracks this is the shortest wrapped difference, so its
    /// magnitude never exceeds half a lap.
    pub fn centerline_progress(&self, s_prev: f64, s_now: f64) -> f64 {
        let d = s_now - s_prev;
        if !self.closed {
            return d;
        }
        let half = 0.5 * self.total_length;
        let w = (d + half).rem_euclid(self.total_length) - half;
        if w == -half {
            half
        } else {
            w
        }
    }
}

fn vertex_tangent(seg_dir: &[Vec2], i: usize, closed: bool) -> Vec2 {
    let n_seg = seg_dir.len();
    if closed {
        let prev = seg_dir[(i + n_seg - 1) % n_seg];
        let next = seg_dir[i % n_seg];
        let sum = prev + next;
        if sum.norm() < 1e-9 {
            next
        } else {
            sum.normalized()
        }
    } else if i == 0 {
        seg_dir[0]
    } else if i >= n_seg {
        seg_dir[n_seg - 1]
    } else {
        (seg_dir[i - 1] + seg_dir[i]).normalized()
    }
}

fn width_columns(header: &str) -> Option<(usize, usize)> {
    let cols: Vec<String> = header
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    let left = cols.iter().position(|c| c.contains("w_tr_left"))?;
    let right = cols.iter().position(|c| c.contains("w_tr_right"))?;
    if left < 2 || right < 2 || cols.len() != 4 {
        return None;
    }
    Some((left, right))
}

fn boxes_overlap(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    a.x.min(b.x) <= c.x.max(d.x)
        && c.x.min(d.x) <= a.x.max(b.x)
        && a.y.min(b.y) <= c.y.max(d.y)
        && c.y.min(d.y) <= a.y.max(b.y)
}

fn polyline_self_intersection(poly: &[Vec2], closed: bool) -> Option<(usize, usize)> {
    let m = poly.len();
    let count = if closed { m } else { m - 1 };
    for i in 0..count {
        let (a, b) = (poly[i], poly[(i + 1) % m]);
        for j in (i + 2)..count {
            // closing segment is adjacent to the first one
            if closed && i == 0 && j == count - 1 {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % m]);
            if boxes_overlap(a, b, c, d) && segments_intersect(a, b, c, d) {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn straight(len: usize, w: f64) -> TrackGeometry {
        let pts = (0..=len).map(|i| Vec2::new(i as f64, 0.0)).collect();
        TrackGeometry::from_points("straight", pts, vec![w; len + 1], vec![w; len + 1]).unwrap()
    }

    fn circle(n: usize, r: f64) -> TrackGeometry {
        let mut pts: Vec<Vec2> = (0..n)
            .map(|i| Vec2::from_angle(2.0 * PI * i as f64 / n as f64) * r)
            .collect();
        pts.push(pts[0]);
        TrackGeometry::from_points("circle", pts, vec![1.0; n + 1], vec![1.0; n + 1]).unwrap()
    }

    #[test]
    fn straight_polyline_length() {
        let csv = "0,0,1.0,1.0\n1,0,1.0,1.0\n2,0,1.0,1.0\n";
        let t = TrackGeometry::parse_csv("s", csv).unwrap();
        assert_eq!(t.total_length(), 2.0);
        assert!(!t.is_closed());
    }

    #[test]
    fn circle_circumference_within_one_percent() {
        let t = circle(20, 5.0);
        assert!(t.is_closed());
        let exact = 2.0 * PI * 5.0;
        // chord sum: 2 n r sin(pi/n)
        let chord = 2.0 * 20.0 * 5.0 * (PI / 20.0).sin();
        assert!((t.total_length() - chord).abs() < 1e-9);
        assert!((t.total_length() - exact).abs() / exact <= 0.01);
    }

    #[test]
    fn parse_error_names_line() {
        let csv = "# x_m,y_m,w_tr_left_m,w_tr_right_m\n0,0,1,1\n1,0,abc,1\n2,0,1,1\n";
        match TrackGeometry::parse_csv("bad", csv) {
            Err(Error::TrackParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let short = "0,0,1,1\n1,0,1\n";
        assert!(matches!(
            TrackGeometry::parse_csv("bad", short),
            Err(Error::TrackParse { line: 2, .. })
        ));
    }

    #[test]
    fn too_few_rows_rejected() {
        let csv = "0,0,1,1\n1,0,1,1\n";
        assert!(matches!(
            TrackGeometry::parse_csv("few", csv),
            Err(Error::TrackValidation(_))
        ));
    }

    #[test]
    fn header_fixes_width_order() {
        let csv = "# x_m,y_m,w_tr_right_m,w_tr_left_m\n0,0,0.5,1.5\n1,0,0.5,1.5\n2,0,0.5,1.5\n";
        let t = TrackGeometry::parse_csv("db", csv).unwrap();
        assert_eq!(t.w_left()[0], 1.5);
        assert_eq!(t.w_right()[0], 0.5);
    }

    #[test]
    fn self_intersecting_boundary_rejected() {
        // inner boundary of a tight circle with a wide track folds over itself
        let n = 16;
        let mut pts: Vec<Vec2> = (0..n)
            .map(|i| Vec2::from_angle(2.0 * PI * i as f64 / n as f64))
            .collect();
        pts.push(pts[0]);
        let res = TrackGeometry::from_points("tight", pts, vec![1.5; n + 1], vec![0.2; n + 1]);
        assert!(matches!(res, Err(Error::TrackValidation(_))), "{res:?}");
    }

    #[test]
    fn frenet_on_straight() {
        let t = straight(10, 1.0);
        let f = t.to_frenet(4.0, 0.5, 0.0).unwrap();
        assert!((f.s - 4.0).abs() < 1e-12);
        assert!((f.n - 0.5).abs() < 1e-12);
        assert_eq!(f.psi, 0.0);
        let f = t.to_frenet(0.0, 0.0, 0.0).unwrap();
        assert_eq!((f.s, f.n, f.psi), (0.0, 0.0, 0.0));
        let right = t.to_frenet(3.0, -0.3, 0.0).unwrap();
        assert!(right.n < 0.0);
    }

    #[test]
    fn out_of_corridor() {
        let t = straight(10, 1.0);
        assert!(matches!(
            t.to_frenet(5.0, 2.5, 0.0),
            Err(Error::OutOfCorridor { .. })
        ));
    }

    #[test]
    fn cartesian_on_straight_and_wrap() {
        let t = straight(10, 1.0);
        let c = t.to_cartesian(0.0, 0.0);
        assert_eq!((c.x, c.y), (0.0, 0.0));
        let c = t.to_cartesian(1.5, -0.25);
        assert!((c.x - 1.5).abs() < 1e-12 && (c.y + 0.25).abs() < 1e-12);
        assert_eq!(c.tangent_angle, 0.0);

        // square loop of length 10: 2.5 per side
        let pts = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.5, 0.0),
            Vec2::new(2.5, 2.5),
            Vec2::new(0.0, 2.5),
            Vec2::new(0.0, 0.0),
        ];
        let sq = TrackGeometry::from_points("sq", pts, vec![0.5; 5], vec![0.5; 5]).unwrap();
        assert_eq!(sq.total_length(), 10.0);
        assert_eq!(sq.to_cartesian(12.5, 0.1), sq.to_cartesian(2.5, 0.1));
    }

    #[test]
    fn collision_convention() {
        let t = straight(10, 0.8);
        let pose = |n| FrenetPose { s: 3.0, n, psi: 0.0 };
        assert!(!t.check_collision(&pose(0.0), 0.15));
        assert!(t.check_collision(&pose(0.8), 0.0));
        assert!(t.check_collision(&pose(-0.8), 0.0));
        assert!(!t.check_collision(&pose(0.6), 0.15));
        assert!(t.check_collision(&pose(0.7), 0.15));
    }

    #[test]
    fn widths_interpolate_linearly() {
        let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        let t = TrackGeometry::from_points("w", pts, vec![1.0, 2.0, 2.0], vec![0.5, 0.5, 1.5])
            .unwrap();
        assert!((t.left_width_at(0.25) - 1.25).abs() < 1e-12);
        assert!((t.right_width_at(1.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn progress_wraps() {
        let pts: Vec<Vec2> = {
            // rectangle with perimeter 30.7
            let (a, b) = (10.0, 5.35);
            vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(a, 0.0),
                Vec2::new(a, b),
                Vec2::new(0.0, b),
                Vec2::new(0.0, 0.0),
            ]
        };
        let t = TrackGeometry::from_points("rect", pts, vec![1.0; 5], vec![1.0; 5]).unwrap();
        assert!((t.total_length() - 30.7).abs() < 1e-12);
        assert!((t.centerline_progress(5.0, 5.4) - 0.4).abs() < 1e-12);
        assert!((t.centerline_progress(30.5, 0.3) - 0.5).abs() < 1e-9);
        assert!((t.centerline_progress(5.0, 4.8) + 0.2).abs() < 1e-12);
        assert!((t.centerline_progress(0.3, 30.5) + 0.5).abs() < 1e-9);
    }
}
