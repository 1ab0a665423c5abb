use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::VehicleState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedSegment {
    /// Start time of the segment (s).
    pub from: f64,
    pub speed: f64,
}

/// Lane-keeping motion of the other vehicle under a piecewise-constant
/// speed profile. It never reacts to the ego, so it is also the exact
/// prediction of its own future.
#[derive(Debug, Clone, PartialEq)]
pub struct OtherScript {
    x0: f64,
    y: f64,
    length: f64,
    width: f64,
    segments: Vec<SpeedSegment>,
    dt: f64,
    end: f64,
}

impl OtherScript {
    pub fn new(
        x0: f64,
        y: f64,
        length: f64,
        width: f64,
        segments: Vec<SpeedSegment>,
        dt: f64,
        end: f64,
    ) -> Result<Self> {
        if segments.first().map(|s| s.from) != Some(0.0) {
            return Err(Error::Config("speed profile must start at t = 0".into()));
        }
        if segments.windows(2).any(|w| !(w[1].from > w[0].from)) {
            return Err(Error::Config("speed segments must have increasing start times".into()));
        }
        if segments.iter().any(|s| !(s.speed >= 0.0) || !s.speed.is_finite()) {
            return Err(Error::Config("speeds must be finite and non-negative".into()));
        }
        Ok(Self { x0, y, length, width, segments, dt, end })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Last time the script is defined for (s).
    pub fn end(&self) -> f64 {
        self.end
    }

    /// Every speed scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for seg in &mut s.segments {
            seg.speed *= factor;
        }
        s
    }

    /// Seeded variation: speeds scaled by `1 + jitter * u`, `u` uniform in [-1, 1].
    pub fn perturbed(&self, seed: u64, jitter: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: f64 = rng.random_range(-1.0..=1.0);
        self.scaled(1.0 + jitter * u)
    }

    pub fn with_start(&self, x0: f64) -> Self {
        Self { x0, ..self.clone() }
    }

    fn speed_at(&self, t: f64) -> f64 {
        self.segments.iter().rev().find(|s| s.from <= t).map_or(0.0, |s| s.speed)
    }

    fn position_at(&self, t: f64) -> f64 {
        let mut x = self.x0;
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.from >= t {
                break;
            }
            let until = self.segments.get(i + 1).map_or(t, |n| n.from.min(t));
            x += seg.speed * (until - seg.from);
        }
        x
    }

    /// State at simulation step `j`, i.e. at time `j * dt`.
    pub fn state_at_step(&self, j: usize) -> Result<VehicleState> {
        let t = j as f64 * self.dt;
        if t > self.end + 1e-9 {
            return Err(Error::ScriptExhausted { end: self.end, requested: t });
        }
        Ok(VehicleState {
            length: self.length,
            width: self.width,
            ..VehicleState::new(self.position_at(t), self.y, self.speed_at(t))
        })
    }

    /// States at steps `from ..= from + steps`.
    pub fn predict(&self, from: usize, steps: usize) -> Result<Vec<VehicleState>> {
        (from..=from + steps).map(|j| self.state_at_step(j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script(segments: Vec<SpeedSegment>) -> OtherScript {
        OtherScript::new(10.0, 5.25, 4.0, 1.8, segments, 0.1, 20.0).unwrap()
    }

    #[test]
    fn constant_speed_advances_linearly() {
        let s = script(vec![SpeedSegment { from: 0.0, speed: 8.0 }]);
        let p = s.predict(0, 30).unwrap();
        assert_eq!(p.len(), 31);
        for (k, v) in p.iter().enumerate() {
            assert!((v.x - (10.0 + 0.8 * k as f64)).abs() < 1e-9);
        }
    }

    #[test]
    fn kink_lands_on_the_right_step() {
        let s = script(vec![SpeedSegment { from: 0.0, speed: 8.0 }, SpeedSegment { from: 1.0, speed: 4.0 }]);
        let p = s.predict(0, 30).unwrap();
        assert_eq!(p[9].vx, 8.0);
        assert_eq!(p[10].vx, 4.0);
        assert!((p[10].x - 18.0).abs() < 1e-9);
        assert!((p[15].x - 20.0).abs() < 1e-9);
    }

    #[test]
    fn overrun_is_an_error() {
        let s = script(vec![SpeedSegment { from: 0.0, speed: 8.0 }]);
        assert!(s.state_at_step(200).is_ok());
        assert!(matches!(s.predict(180, 30), Err(Error::ScriptExhausted { .. })));
    }

    #[test]
    fn perturbation_is_seeded_and_bounded() {
        let s = script(vec![SpeedSegment { from: 0.0, speed: 10.0 }]);
        for seed in 0..50 {
            let a = s.perturbed(seed, 0.2);
            assert_eq!(a, s.perturbed(seed, 0.2));
            let v = a.state_at_step(0).unwrap().vx;
            assert!((8.0..=12.0).contains(&v));
        }
    }

    #[test]
    fn profile_must_start_at_zero() {
        assert!(OtherScript::new(0.0, 0.0, 4.0, 1.8, vec![SpeedSegment { from: 1.0, speed: 1.0 }], 0.1, 5.0).is_err());
    }
}
