mod common;

use std::f64::consts::FRAC_PI_2;

use common::*;
use frenet_racer::geometry::Vec2;
use frenet_racer::planning::{
    plan, pure_pursuit_steer, velocity_command, velocity_constraint, CubicPath, PlannedTrajectory,
    PlannerConfig,
};
use frenet_racer::track::FrenetPose;
use frenet_racer::vehicle::{step, ControlCommand, VehicleConstraints, VehicleParams, VehicleState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cubic Hermite interpolant with end slopes `m0`, `m1`.
fn hermite(s0: f64, n0: f64, m0: f64, s1: f64, n1: f64, m1: f64, s: f64) -> f64 {
    let h = s1 - s0;
    let t = (s - s0) / h;
    let (t2, t3) = (t * t, t * t * t);
    (2.0 * t3 - 3.0 * t2 + 1.0) * n0 + (t3 - 2.0 * t2 + t) * h * m0 + (-2.0 * t3 + 3.0 * t2) * n1 + (t3 - t2) * h * m1
}

#[test]
fn cubic_boundary_residuals_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let s0 = rng.random_range(0.0..250.0);
        let s1 = s0 + rng.random_range(0.5..5.0);
        let n0 = rng.random_range(-1.5..1.5);
        let n1 = rng.random_range(-1.5..1.5);
        let psi = rng.random_range(-FRAC_PI_2 + 0.01..FRAC_PI_2 - 0.01);
        let c = CubicPath::solve(s0, n0, psi, s1, n1).unwrap();
        let slope_scale = psi.tan().abs().max(1.0);
        worst = worst
            .max((c.eval(s0) - n0).abs())
            .max((c.slope(s0) - psi.tan()).abs() / slope_scale)
            .max((c.eval(s1) - n1).abs())
            .max(c.slope(s1).abs() / slope_scale);
        let s = rng.random_range(s0..s1);
        let oracle = hermite(s0, n0, psi.tan(), s1, n1, 0.0, s);
        worst = worst.max((c.eval(s) - oracle).abs() / slope_scale);
    }
    assert!(worst <= 1e-9, "worst residual {worst}");
}

#[test]
fn global_coefficients_satisfy_the_cubic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let s0 = rng.random_range(0.0..5.0);
        let s1 = s0 + 2.0;
        let (n0, n1) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let psi: f64 = rng.random_range(-1.2..1.2);
        let c = CubicPath::solve(s0, n0, psi, s1, n1).unwrap();
        let (a, b, cc, d) = c.coefficients();
        let f = |s: f64| a * s.powi(3) + b * s * s + cc * s + d;
        let df = |s: f64| 3.0 * a * s * s + 2.0 * b * s + cc;
        assert!((f(s0) - n0).abs() < 1e-9);
        assert!((df(s0) - psi.tan()).abs() < 1e-9);
        assert!((f(s1) - n1).abs() < 1e-9);
        assert!(df(s1).abs() < 1e-9);
    }
}

fn random_pose(rng: &mut ChaCha8Rng, track: &frenet_racer::track::TrackGeometry) -> FrenetPose {
    let s = rng.random_range(0.0..track.total_length());
    let u: f64 = rng.random_range(-1.0..1.0);
    let room = |w: f64| (w - 0.1).max(0.0);
    let n = if u >= 0.0 { u * room(track.left_width_at(s)) } else { u * room(track.right_width_at(s)) };
    FrenetPose {
        s,
        n,
        psi: rng.random_range(-FRAC_PI_2 + 0.05..FRAC_PI_2 - 0.05),
    }
}

#[test]
fn planned_paths_stay_in_corridor() {
    let c = VehicleConstraints::default();
    let cfg = PlannerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in BUNDLED {
        let t = track(name);
        for _ in 0..2500 {
            let pose = random_pose(&mut rng, &t);
            let lateral = rng.random_range(-1.0..=1.0);
            let path = plan(&pose, lateral, 0.0, &t, &c, &cfg).unwrap();
            let mids = path.points.windows(2).map(|w| (w[0] + w[1]) * 0.5);
            for p in path.points.iter().copied().chain(mids) {
                let f = t.to_frenet(p.x, p.y, 0.0).unwrap();
                let w = if f.n >= 0.0 { t.left_width_at(f.s) } else { t.right_width_at(f.s) };
                assert!(f.n.abs() < w, "{name}: point outside corridor at s={}", f.s);
                assert!(boundary_distance(&t, p) > 0.1, "{name}: path within car width of the wall");
            }
        }
    }
}

#[test]
fn pure_pursuit_regulates_lateral_offset() {
    let p = VehicleParams::default();
    let c = VehicleConstraints::default();
    let mut s = VehicleState {
        y: 0.3,
        v: 3.0,
        ..Default::default()
    };
    let mut max_after = 0.0f64;
    while s.x < 8.0 {
        // reference re-anchored at the car, as the env replans every period
        let x0 = s.x;
        let path = PlannedTrajectory {
            points: (0..=40).map(|i| Vec2::new(x0 + i as f64 * 0.05, 0.0)).collect(),
            v_d: 3.0,
        };
        let steer = pure_pursuit_steer(&path, s.x, s.y, s.psi, p.l_f + p.l_r, 0.6, &c);
        let accel = velocity_constraint(velocity_command(3.0, s.v, 1.0, &c), s.v, &c);
        s = step(&s, ControlCommand::new(accel, steer), &p, &c, 0.01).unwrap();
        if s.x >= 5.0 {
            max_after = max_after.max(s.y.abs());
        }
    }
    assert!(max_after < 0.01, "offset after 5 m: {max_after}");
}

#[test]
fn velocity_laws_on_edge_grid() {
    let c = VehicleConstraints::default();
    let vs = [0.0, 2.9, c.v_min_allow, 3.0 + 1e-12, 4.0, 5.0 - 1e-12, c.v_max_allow, 5.1, 20.0];
    let accels = [-c.a_max, -1.0, 0.0, 1.0, c.a_max];
    for &v in &vs {
        for &a in &accels {
            let expected = if v >= 5.0 || v <= 3.0 { 0.0 } else { a };
            assert_eq!(velocity_constraint(a, v, &c), expected, "v={v} a={a}");
        }
        for &vd in &[3.0, 4.0, 5.0] {
            let expected = if vd >= v { 1.0 * 9.51 / 5.0 * (vd - v) } else { 1.0 * 9.51 / 3.0 * (vd - v) };
            assert_eq!(velocity_command(vd, v, 1.0, &c), expected);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn planner_target_scales_linearly_across_width(lat in -1.0f64..=1.0, s in 0.0f64..38.0) {
        let t = track("test_oval");
        let cfg = PlannerConfig::default();
        let c = VehicleConstraints::default();
        let pose = FrenetPose { s, n: 0.0, psi: 0.0 };
        let path = plan(&pose, lat, 1.0, &t, &c, &cfg).unwrap();
        let end = *path.points.last().unwrap();
        // oval: constant half-width 0.8, margin 0.15
        let want = t.to_cartesian(s + 2.0, lat * 0.65);
        prop_assert!((end.x - want.x).abs() < 1e-9 && (end.y - want.y).abs() < 1e-9);
        prop_assert_eq!(path.v_d, 5.0);
    }

    #[test]
    fn pure_pursuit_output_is_bounded(x in -2.0f64..2.0, y in -2.0f64..2.0, h in -3.1f64..3.1) {
        let c = VehicleConstraints::default();
        let path = PlannedTrajectory { points: vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.5), Vec2::new(2.0, 0.0)], v_d: 4.0 };
        let d = pure_pursuit_steer(&path, x, y, h, 0.33, 0.6, &c);
        prop_assert!(d.is_finite() && d.abs() <= 0.4189);
    }
}
