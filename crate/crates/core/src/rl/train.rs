use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::actions::{action, valid_mask, DEFAULT_ACTION, N_ACTIONS};
use super::encode::{encode_state, Binning};
use super::qtable::{QMeta, QTable};
use crate::error::{Error, Result};
use crate::sim::{OtherScript, RewardWeights, Scenario};
use crate::trajectory::generate;
use crate::world::{collides, LightColor, RoadMap, WorldState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub anneal_fraction: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self { alpha: 0.1, gamma: 0.95, epsilon_start: 1.0, epsilon_end: 0.05, anneal_fraction: 0.6 }
    }
}

impl Hyperparams {
    pub fn from_scenario(s: &Scenario) -> Self {
        let t = &s.training;
        Self {
            alpha: t.alpha,
            gamma: t.gamma,
            epsilon_start: t.epsilon_start,
            epsilon_end: t.epsilon_end,
            anneal_fraction: t.anneal_fraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Hyperparameter(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Hyperparameter(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        let unit = 0.0..=1.0;
        if !unit.contains(&self.epsilon_start) || !unit.contains(&self.epsilon_end) {
            return Err(Error::Hyperparameter("epsilon must lie in [0, 1]".into()));
        }
        if !(self.anneal_fraction > 0.0 && self.anneal_fraction <= 1.0) {
            return Err(Error::Hyperparameter("anneal_fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Exploration rate for episode `e` of `total`.
    pub fn epsilon(&self, e: u64, total: u64) -> f64 {
        let span = (total as f64 * self.anneal_fraction).max(1.0);
        let frac = (e as f64 / span).min(1.0);
        self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac
    }
}

/// One row of the training curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStats {
    pub episode: u64,
    pub epsilon: f64,
    pub total_reward: f64,
    pub decisions: usize,
    pub collided: bool,
    pub states: usize,
}

/// Outcome of tracking one long-term action in the training environment.
struct Transition {
    next: WorldState,
    reward: f64,
    /// Steps actually taken.
    steps: usize,
    terminal: bool,
}

struct Env<'a> {
    map: &'a RoadMap,
    scenario: &'a Scenario,
    script: OtherScript,
    weights: RewardWeights,
    total_steps: usize,
}

impl Env<'_> {
    fn step_reward(&self, prev: &WorldState, s: &WorldState) -> Result<(f64, bool)> {
        let w = &self.weights;
        let dt = self.scenario.planner.dt;
        let mut r = -w.speed * (s.ego.vx - self.scenario.v_ref).abs() * dt;
        let lane = self.map.lane_at(s.ego.y)?;
        if self.map.is_opposing(lane) {
            r -= w.wrong_way * dt;
        }
        let other_lane = self.map.lane_at(s.other.y)?;
        if prev.ego.x < prev.other.x && s.ego.x >= s.other.x && lane > other_lane {
            r -= w.right_pass;
        }
        if let (Some(line), Some(light)) = (self.map.stop_line, &self.map.light) {
            let front = |st: &WorldState| st.ego.x + 0.5 * st.ego.length;
            if front(prev) <= line
                && front(s) > line
                && light.governs(lane)
                && light.color_at(s.time) == LightColor::Red
            {
                r -= w.red_light;
            }
        }
        if collides(&s.ego, &s.other) {
            return Ok((r - w.collision, true));
        }
        Ok((r, false))
    }

    fn apply(&self, s: &WorldState, step: usize, target_index: usize) -> Result<Transition> {
        let params = self.scenario.planner_params();
        let n = params.steps();
        let prediction = self.script.predict(step, n)?;
        let plan = generate(s, action(target_index), self.map, &prediction, &params)?;
        let mut reward = 0.0;
        let mut prev = *s;
        let mut steps = 0;
        for point in &plan.trace[1..] {
            if step + steps >= self.total_steps {
                break;
            }
            steps += 1;
            let (r, hit) = self.step_reward(&prev, &point.state)?;
            reward += r;
            prev = point.state;
            if hit {
                return Ok(Transition { next: prev, reward, steps, terminal: true });
            }
        }
        Ok(Transition { next: prev, reward, steps, terminal: false })
    }
}

fn uniform(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    if half_width > 0.0 {
        rng.random_range(-half_width..=half_width)
    } else {
        0.0
    }
}

/// Semi-Markov tabular Q-learning: each decision commits to a whole
/// long-term action, rewards are summed along it and discounting is per
/// decision. The active law of the scenario is never consulted.
pub fn train(
    scenario: &Scenario,
    episodes: u64,
    seed: u64,
    hyper: &Hyperparams,
) -> Result<(QTable, Vec<EpisodeStats>)> {
    hyper.validate()?;
    let map = scenario.road_map()?;
    let bins = Binning::default();
    let base = scenario.base_script()?;
    let cfg = &scenario.training;
    let total_steps = scenario.total_steps();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = QTable::new(QMeta { seed, episodes, bins });
    let mut curve = Vec::with_capacity(episodes as usize);

    for e in 0..episodes {
        let eps = hyper.epsilon(e, episodes);
        let factor = 1.0 + uniform(&mut rng, cfg.speed_jitter);
        let other_x = scenario.other.x + uniform(&mut rng, cfg.x_jitter);
        let script = base.scaled(factor).with_start(other_x);
        let mut s = scenario.initial_state(&script)?;
        s.ego.x += uniform(&mut rng, cfg.x_jitter);
        s.ego.vx = (s.ego.vx + uniform(&mut rng, cfg.vx_jitter)).clamp(0.0, scenario.speed_limit);
        let env = Env { map: &map, scenario, script, weights: scenario.reward, total_steps };

        let (mut step, mut total, mut decisions, mut collided) = (0, 0.0, 0, false);
        while step < total_steps {
            let key = encode_state(&s, &map, &bins)?;
            let mask = valid_mask(key.ego_lane as usize, map.lane_count());
            let a = if rng.random::<f64>() < eps {
                let valid: Vec<usize> = (0..N_ACTIONS).filter(|&i| mask[i]).collect();
                valid[rng.random_range(0..valid.len())]
            } else {
                table.q.greedy(&key, &mask).unwrap_or(DEFAULT_ACTION)
            };
            let tr = env.apply(&s, step, a)?;
            let mut target = tr.reward;
            if !tr.terminal {
                let next_key = encode_state(&tr.next, &map, &bins)?;
                let next_mask = valid_mask(next_key.ego_lane as usize, map.lane_count());
                target += hyper.gamma * table.q.max_value(&next_key, &next_mask);
            }
            table.q.update(key, a, target, hyper.alpha);
            total += tr.reward;
            decisions += 1;
            step += tr.steps;
            s = tr.next;
            if tr.terminal {
                collided = true;
                break;
            }
        }
        curve.push(EpisodeStats {
            episode: e,
            epsilon: eps,
            total_reward: total,
            decisions,
            collided,
            states: table.q.len(),
        });
    }
    Ok((table, curve))
}

/// Writes the training curve as CSV.
pub fn write_curve<W: std::io::Write>(out: W, curve: &[EpisodeStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Format { path: "<curve>".into(), line: 0, msg: e.to_string() };
    w.write_record(["episode", "epsilon", "total_reward", "decisions", "collided", "states"]).map_err(err)?;
    for c in curve {
        w.write_record([
            c.episode.to_string(),
            c.epsilon.to_string(),
            c.total_reward.to_string(),
            c.decisions.to_string(),
            (c.collided as u8).to_string(),
            c.states.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<curve>", e))
}
