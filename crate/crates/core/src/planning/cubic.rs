use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

/// Lateral offset profile `f(s) = A s^3 + B s^2 + C s + D` over `[s0, s1]`.
///
/// Evaluation goes through the equivalent polynomial in `u = s - s0`, which
/// stays well conditioned when `s0` is hundreds of metres down the track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicPath {
    pub s0: f64,
    pub s1: f64,
    // local coefficients, lowest order first
    local: [f64; 4],
}

impl CubicPath {
    /// Solves for the cubic through `(s0, n0)` with slope `tan(psi0)` that
    /// reaches `n1` at `s1` parallel to the centerline.
    pub fn solve(s0: f64, n0: f64, psi0: f64, s1: f64, n1: f64) -> Result<Self> {
        if psi0.abs() >= FRAC_PI_2 || !psi0.is_finite() {
            return Err(Error::HeadingDegenerate { psi: psi0 });
        }
        if !(s1 > s0) {
            return Err(Error::Config(format!("path horizon [{s0}, {s1}] is empty")));
        }
        let h = s1 - s0;
        // rows: f(0), f'(0), f(h), f'(h) in the local coordinate
        let mut m = [
            [1.0, 0.0, 0.0, 0.0, n0],
            [0.0, 1.0, 0.0, 0.0, psi0.tan()],
            [1.0, h, h * h, h * h * h, n1],
            [0.0, 1.0, 2.0 * h, 3.0 * h * h, 0.0],
        ];
        let local = solve4(&mut m);
        Ok(Self { s0, s1, local })
    }

    /// Global coefficients `(A, B, C, D)`.
    pub fn coefficients(&self) -> (f64, f64, f64, f64) {
        let [c0, c1, c2, c3] = self.local;
        let s0 = self.s0;
        let a = c3;
        let b = c2 - 3.0 * c3 * s0;
        let c = c1 - 2.0 * c2 * s0 + 3.0 * c3 * s0 * s0;
        let d = c0 - c1 * s0 + c2 * s0 * s0 - c3 * s0 * s0 * s0;
        (a, b, c, d)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let u = s - self.s0;
        let [c0, c1, c2, c3] = self.local;
        ((c3 * u + c2) * u + c1) * u + c0
    }

    pub fn slope(&self, s: f64) -> f64 {
        let u = s - self.s0;
        let [_, c1, c2, c3] = self.local;
        (3.0 * c3 * u + 2.0 * c2) * u + c1
    }
}

/// Gaussian elimination with partial pivoting on an augmented 4x5 system.
fn solve4(m: &mut [[f64; 5]; 4]) -> [f64; 4] {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        m.swap(col, pivot);
        for row in (col + 1)..4 {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..5 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let mut acc = m[row][4];
        for k in (row + 1)..4 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}
