mod common;

use common::*;
use frenet_racer::geometry::{wrap_angle, Vec2};
use frenet_racer::track::{LidarConfig, TrackGeometry};
use frenet_racer::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn bundled_tracks_load_closed_with_expected_lengths() {
    for (name, expected) in [("porto", 30.7), ("barcelona", 236.8), ("monaco", 178.3)] {
        let t = track(name);
        assert!(t.is_closed(), "{name}");
        assert!((t.total_length() - expected).abs() < 0.05, "{name}: {}", t.total_length());
    }
    let oval = track("test_oval");
    assert!((oval.total_length() - (20.0 + 6.0 * std::f64::consts::PI)).abs() < 0.05);
}

/// Random point strictly inside the corridor, generated in Frenet coordinates.
fn corridor_point(t: &TrackGeometry, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let s = rng.random_range(0.0..t.total_length());
    let u: f64 = rng.random_range(-0.98..0.98);
    let n = if u >= 0.0 { u * t.left_width_at(s) } else { u * t.right_width_at(s) };
    (s, n)
}

#[test]
fn frenet_roundtrip_on_bundled_tracks() {
    for name in BUNDLED {
        let t = track(name);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let (s, n) = corridor_point(&t, &mut rng);
            let c = t.to_cartesian(s, n);
            let heading = c.tangent_angle + rng.random_range(-1.0..1.0);
            let f = t.to_frenet(c.x, c.y, heading).unwrap();
            let back = t.to_cartesian(f.s, f.n);
            let err = ((back.x - c.x).powi(2) + (back.y - c.y).powi(2)).sqrt();
            assert!(err <= 1e-6, "{name}: s={s} n={n} err={err}");
            // heading is reported relative to the local tangent
            assert!(wrap_angle(f.psi + back.tangent_angle - heading).abs() < 1e-9);
            // |n| is the distance to the centerline
            let d = centerline_distance(&t, Vec2::new(c.x, c.y));
            assert!((f.n.abs() - d).abs() < 1e-9, "{name}: |n|={} oracle={d}", f.n.abs());
        }
    }
}

#[test]
fn lidar_matches_ray_march_oracle() {
    let cfg = LidarConfig::default();
    for name in BUNDLED {
        let t = track(name);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        for _ in 0..40 {
            let (s, n) = corridor_point(&t, &mut rng);
            let c = t.to_cartesian(s, n * 0.9);
            let heading = c.tangent_angle + rng.random_range(-0.5..0.5);
            let scan = t.lidar_scan(c.x, c.y, heading, &cfg, &mut rng);
            for (r, off) in scan.iter().zip(cfg.beam_offsets()) {
                let oracle = march_ray(&t, Vec2::new(c.x, c.y), heading + off, cfg.max_range);
                worst = worst.max((r - oracle).abs());
            }
        }
        assert!(worst <= 2e-3, "{name}: worst lidar error {worst}");
    }
}

#[test]
fn out_of_corridor_far_away() {
    let t = track("porto");
    let bb = t.bounding_box();
    let p = Vec2::new(bb.max.x + 10.0, bb.max.y + 10.0);
    assert!(matches!(t.to_frenet(p.x, p.y, 0.0), Err(Error::OutOfCorridor { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn progress_matches_arclength_for_small_moves(s in 0.0f64..30.0, ds in -2.0f64..2.0) {
        let t = track("porto");
        let s0 = t.normalize_s(s);
        let s1 = t.normalize_s(s0 + ds);
        prop_assert!((t.centerline_progress(s0, s1) - ds).abs() < 1e-9);
    }

    #[test]
    fn collision_iff_footprint_reaches_boundary(s in 0.0f64..38.0, n in -1.0f64..1.0, hw in 0.0f64..0.3) {
        let t = track("test_oval");
        let c = t.to_cartesian(s, n);
        if let Ok(f) = t.to_frenet(c.x, c.y, c.tangent_angle) {
            let w = if f.n >= 0.0 { t.left_width_at(f.s) } else { t.right_width_at(f.s) };
            prop_assert_eq!(t.check_collision(&f, hw), f.n.abs() + hw >= w);
        }
    }

    #[test]
    fn widths_interpolate_between_samples(i in 0usize..300, frac in 0.0f64..1.0) {
        let t = track("porto");
        let i = i % (t.centerline().len() - 1);
        let s = t.cum_s()[i] + frac * (t.cum_s()[i + 1] - t.cum_s()[i]);
        let (a, b) = (t.w_left()[i], t.w_left()[i + 1]);
        let w = t.left_width_at(s);
        prop_assert!(w >= a.min(b) - 1e-12 && w <= a.max(b) + 1e-12);
    }

    #[test]
    fn parsed_rows_reproduce_samples(rows in prop::collection::vec((0.1f64..0.9, 0.1f64..0.9), 3..6)) {
        // open polyline along a gentle arc
        let mut text = String::from("# x_m,y_m,w_tr_left_m,w_tr_right_m\n");
        for (k, (wl, wr)) in rows.iter().enumerate() {
            text.push_str(&format!("{},{},{wl},{wr}\n", k as f64 * 2.0, (k as f64 * 0.3).sin()));
        }
        let t = TrackGeometry::parse_csv("arc", &text).unwrap();
        prop_assert!(!t.is_closed());
        for (k, (wl, wr)) in rows.iter().enumerate() {
            prop_assert_eq!(t.w_left()[k], *wl);
            prop_assert_eq!(t.w_right()[k], *wr);
        }
    }
}
