mod common;

use std::sync::Arc;

use common::*;
use frenet_racer::env::{Algorithm, EnvSetup, EpisodeStatus, RaceEnv};
use frenet_racer::geometry::Vec2;
use frenet_racer::track::TrackGeometry;
use frenet_racer::vehicle::MismatchSpec;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn straight(len: usize) -> Arc<TrackGeometry> {
    let pts = (0..=len).map(|i| Vec2::new(i as f64, 0.0)).collect();
    Arc::new(TrackGeometry::from_points("straight", pts, vec![0.8; len + 1], vec![0.8; len + 1]).unwrap())
}

#[test]
fn reset_positions_are_uniform_in_arclength() {
    let t = track("porto");
    let mut env = RaceEnv::new(EnvSetup::new(t.clone(), Algorithm::Partial)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut xs = Vec::with_capacity(10_000);
    for _ in 0..10_000 {
        env.reset(&mut rng, &MismatchSpec::nominal()).unwrap();
        assert_eq!(env.status(), EpisodeStatus::Running);
        assert!(env.frenet().n.abs() < 1e-9);
        xs.push(env.frenet().s / t.total_length());
    }
    let d = ks_uniform(xs);
    assert!(d < 0.02, "KS statistic {d}");
}

#[test]
fn partial_agent_holds_centerline_on_straight() {
    let mut env = RaceEnv::new(EnvSetup::new(straight(60), Algorithm::Partial)).unwrap();
    env.reset_at(1.0, 0, &MismatchSpec::nominal()).unwrap();
    let mut worst: f64 = 0.0;
    loop {
        let r = env.step(&[0.0, 0.0]).unwrap();
        if let Some(f) = r.info.frenet {
            worst = worst.max(f.n.abs());
        }
        if r.done {
            assert_eq!(r.info.status, EpisodeStatus::LapComplete);
            break;
        }
    }
    assert!(worst < 0.02, "max |n| {worst}");
}

#[test]
fn lap_accounting_and_reward_stream() {
    let t = track("test_oval");
    let mut env = RaceEnv::new(EnvSetup::new(t.clone(), Algorithm::Partial)).unwrap();
    env.reset_at(0.0, 3, &MismatchSpec::nominal()).unwrap();
    let (mut ret, mut steps, mut prev_distance, mut covered) = (0.0, 0u64, 0.0, 0.0);
    let last = loop {
        let r = env.step(&[0.0, 1.0]).unwrap();
        steps += 1;
        ret += r.reward;
        covered += r.info.progress;
        assert!((r.info.progress - (r.info.distance - prev_distance)).abs() < 1e-12);
        assert_eq!(r.reward, r.info.progress - 0.01);
        prev_distance = r.info.distance;
        if r.done {
            break r;
        }
        assert_eq!(r.info.physics_steps, 10 * steps);
        assert!(r.info.lap_time.is_none());
    };
    assert_eq!(last.info.status, EpisodeStatus::LapComplete);
    assert!(RaceEnv::is_terminal(last.info.status));
    assert_eq!(last.info.distance, t.total_length());
    assert!((covered - t.total_length()).abs() < 1e-6, "{covered}");
    assert_eq!(last.info.lap_time, Some(last.info.physics_steps as f64 * 0.01));
    assert!(last.info.physics_steps > 10 * (steps - 1) && last.info.physics_steps <= 10 * steps);
    assert!((ret - (t.total_length() - 0.01 * steps as f64)).abs() < 1e-6);
    assert_eq!(env.agent_steps(), steps);
}

#[test]
fn timeout_is_not_terminal() {
    let mut setup = EnvSetup::new(straight(60), Algorithm::Partial);
    setup.env.timeout_s = 0.55;
    let mut env = RaceEnv::new(setup).unwrap();
    env.reset_at(1.0, 0, &MismatchSpec::nominal()).unwrap();
    let mut n = 0;
    let last = loop {
        n += 1;
        let r = env.step(&[0.0, 0.0]).unwrap();
        if r.done {
            break r;
        }
    };
    assert_eq!(n, 6);
    assert_eq!(last.info.physics_steps, 55);
    assert_eq!(last.info.status, EpisodeStatus::Timeout);
    assert!(!RaceEnv::is_terminal(EpisodeStatus::Timeout));
    assert!(RaceEnv::is_terminal(EpisodeStatus::Crashed));
}

#[test]
fn noise_is_seeded_and_optional() {
    let t = track("porto");
    let mut env = RaceEnv::new(EnvSetup::new(t, Algorithm::EndToEnd)).unwrap();
    let m = MismatchSpec::nominal();
    let clean = env.reset_at(5.0, 9, &m).unwrap();
    env.set_observation_noise(true);
    let a = env.reset_at(5.0, 9, &m).unwrap();
    let b = env.reset_at(5.0, 9, &m).unwrap();
    let c = env.reset_at(5.0, 10, &m).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_ne!(a, clean);
    let dev: f64 = a.0.iter().zip(&clean.0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(dev < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn observations_stay_normalized(seed in any::<u64>(), which in 0usize..4, e2e in any::<bool>()) {
        let alg = if e2e { Algorithm::EndToEnd } else { Algorithm::Partial };
        let mut env = RaceEnv::new(EnvSetup::new(track(BUNDLED[which]), alg)).unwrap();
        env.set_observation_noise(true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs = env.reset(&mut rng, &MismatchSpec::nominal()).unwrap();
        prop_assert_eq!(obs.0.len(), env.obs_dim());
        for _ in 0..80 {
            let a = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            let r = env.step(&a).unwrap();
            prop_assert_eq!(r.obs.0.len(), 24);
            prop_assert!(r.obs.0.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(r.info.action.iter().all(|v| (-1.0..=1.0).contains(v)));
            prop_assert!(r.reward == -1.0 || r.reward <= r.info.progress);
            prop_assert_eq!(r.done, r.info.status != EpisodeStatus::Running);
            if r.done {
                break;
            }
        }
    }
}
