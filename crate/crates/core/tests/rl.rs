mod common;

use common::*;
use lawshield::forecaster::PolicyTag;
use lawshield::rl::{train, Hyperparams, QTable, QValues};
use lawshield::sim::{run_episode, Mode, RunOptions};
use lawshield::Error;
use rand::Rng;
use sha2::{Digest, Sha256};

const REWARD: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 2.0]];
const GAMMA: f64 = 0.9;

/// Deterministic two-state MDP: action `a` leads to state `a`.
fn value_iteration() -> [[f64; 2]; 2] {
    let mut q = [[0.0f64; 2]; 2];
    for _ in 0..2000 {
        let v = [q[0][0].max(q[0][1]), q[1][0].max(q[1][1])];
        for s in 0..2 {
            for a in 0..2 {
                q[s][a] = REWARD[s][a] + GAMMA * v[a];
            }
        }
    }
    q
}

#[test]
fn tabular_update_converges_on_toy_mdp() {
    let exact = value_iteration();
    let mut q: QValues<u8, 2> = QValues::default();
    let mut rng = seeded(3);
    let mask = [true; 2];
    for _ in 0..50_000 {
        let s = rng.random_range(0..2usize);
        let a = rng.random_range(0..2usize);
        let target = REWARD[s][a] + GAMMA * q.max_value(&(a as u8), &mask);
        q.update(s as u8, a, target, 0.1);
    }
    for s in 0..2 {
        let e = q.get(&(s as u8)).unwrap();
        for a in 0..2 {
            assert!((e.values[a] - exact[s][a]).abs() < 1e-3, "q[{s}][{a}] = {} vs {}", e.values[a], exact[s][a]);
        }
    }
    assert_eq!(q.greedy(&0, &mask), Some(1));
    assert_eq!(q.greedy(&1, &mask), Some(1));
}

fn digest(q: &QTable) -> String {
    Sha256::digest(q.to_text().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn training_is_deterministic_per_seed() {
    let s = scenario("olympic");
    let h = Hyperparams::from_scenario(&s);
    let (a, curve_a) = train(&s, 400, 7, &h).unwrap();
    let (b, curve_b) = train(&s, 400, 7, &h).unwrap();
    assert_eq!(digest(&a), digest(&b));
    assert_eq!(curve_a, curve_b);
    let (c, _) = train(&s, 400, 8, &h).unwrap();
    assert_ne!(digest(&a), digest(&c));
    assert_eq!(QTable::from_text(&a.to_text(), "<mem>").unwrap(), a);
}

#[test]
fn zero_episodes_gives_an_empty_table() {
    let s = scenario("olympic");
    let (q, curve) = train(&s, 0, 1, &Hyperparams::default()).unwrap();
    assert!(q.q.is_empty());
    assert!(curve.is_empty());
}

#[test]
fn bad_hyperparameters_are_rejected() {
    let s = scenario("olympic");
    for h in [
        Hyperparams { alpha: 0.0, ..Default::default() },
        Hyperparams { alpha: 1.5, ..Default::default() },
        Hyperparams { gamma: 1.0, ..Default::default() },
        Hyperparams { epsilon_start: 2.0, ..Default::default() },
    ] {
        assert!(matches!(train(&s, 10, 1, &h), Err(Error::Hyperparameter(_))));
    }
}

#[test]
fn epsilon_schedule() {
    let h = Hyperparams::default();
    assert_eq!(h.epsilon(0, 1000), 1.0);
    assert!((h.epsilon(300, 1000) - 0.525).abs() < 1e-12);
    assert!((h.epsilon(600, 1000) - 0.05).abs() < 1e-12);
    assert!((h.epsilon(999, 1000) - 0.05).abs() < 1e-12);
}

#[test]
fn agent_ignores_the_event_lane() {
    let s = scenario("olympic");
    let q = trained(&s);
    let l = s.load_law().unwrap();
    let r = run_episode(&s, Mode::RlOnly, Some(&q), &l, &RunOptions::default()).unwrap();
    assert!(r.violations > 0);
    assert_eq!(r.count(PolicyTag::Rl), r.trace.len());
    let ctx = s.grounding().unwrap();
    assert!(r.trace.steps.iter().any(|st| ctx.map.is_special(ctx.map.lane_at(st.state.ego.y).unwrap())));
}

#[test]
fn slow_lead_vehicle_is_passed_on_the_left() {
    let s = scenario("olympic");
    let q = trained(&s);
    let l = s.load_law().unwrap();
    let r = run_episode(&s, Mode::RlOnly, Some(&q), &l, &RunOptions::default()).unwrap();
    let ctx = s.grounding().unwrap();
    let first_move = r.decisions.iter().find(|d| d.lat != 0).expect("the agent changes lane");
    assert_eq!(first_move.lat, -1);
    let st = r.trace.steps[first_move.step].state;
    assert!(st.other.x > st.ego.x && st.other.vx < st.ego.vx);
    assert_eq!(ctx.map.lane_at(st.other.y).unwrap(), ctx.map.lane_at(st.ego.y).unwrap());
}
