use serde::{Deserialize, Serialize};

use super::hermite::HermiteSpec;
use crate::error::{Error, Result};
use crate::world::{Indicator, RoadMap, Target, TraceStep, VehicleState, WorldState};

/// Kinematic limits and timing shared by both policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerParams {
    /// Duration of one long-term action (s).
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    /// Simulation step (s).
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Acceleration that `lon = 1` maps to (m/s²).
    #[serde(default = "default_a_max")]
    pub a_max: f64,
    /// Speed limit (m/s).
    pub v_max: f64,
}

fn default_horizon() -> f64 {
    3.0
}
fn default_dt() -> f64 {
    0.1
}
fn default_a_max() -> f64 {
    3.0
}

impl PlannerParams {
    pub fn new(v_max: f64) -> Self {
        Self { horizon: 3.0, dt: 0.1, a_max: 3.0, v_max }
    }

    /// Number of `dt` intervals in one horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.horizon > 0.0 && self.a_max > 0.0 && self.v_max > 0.0) {
            return Err(Error::Config("planner parameters must be positive".into()));
        }
        let n = self.steps() as f64;
        if (n * self.dt - self.horizon).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "horizon {} is not a whole number of {} s steps",
                self.horizon, self.dt
            )));
        }
        Ok(())
    }
}

/// A target expanded into a sampled ego path paired with the predicted
/// motion of the other vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct LongTermAction {
    pub target: Target,
    pub spec: HermiteSpec,
    /// `steps() + 1` states; the first repeats the starting state.
    pub trace: Vec<TraceStep>,
}

impl LongTermAction {
    pub fn end(&self) -> &WorldState {
        &self.trace.last().expect("generated traces are never empty").state
    }
}

/// Converts a target into world-frame Hermite boundary conditions.
pub fn target_to_world(
    s0: &WorldState,
    target: Target,
    map: &RoadMap,
    params: &PlannerParams,
) -> Result<HermiteSpec> {
    let ego = &s0.ego;
    if !(ego.vx >= 0.0) {
        return Err(Error::Implausible(format!("negative ego speed {}", ego.vx)));
    }
    let lane = map.lane_at(ego.y)? as i64 + target.lat as i64;
    if !map.has_lane(lane) {
        return Err(Error::NoSuchLane(lane));
    }
    let t = params.horizon;
    let accel = target.lon.clamp(-1.0, 1.0) * params.a_max;
    let v1 = (ego.vx + accel * t).clamp(0.0, params.v_max);
    Ok(HermiteSpec {
        p0: [ego.x, ego.y],
        p1: [ego.x + 0.5 * (ego.vx + v1) * t, map.lane_center(lane as usize)?],
        m0: [ego.vx * t, ego.vy * t],
        m1: [v1 * t, 0.0],
    })
}

/// Generates the candidate trace for `target` from `s0`.
///
/// `prediction[k]` is the other vehicle at `s0.time + k * dt`; it must cover
/// the whole horizon. The right (left) indicator is switched on for the whole
/// of a rightward (leftward) lane change.
pub fn generate(
    s0: &WorldState,
    target: Target,
    map: &RoadMap,
    prediction: &[VehicleState],
    params: &PlannerParams,
) -> Result<LongTermAction> {
    let n = params.steps();
    if prediction.len() < n + 1 {
        return Err(Error::PredictionTooShort { have: prediction.len(), need: n + 1 });
    }
    let spec = target_to_world(s0, target, map, params)?;
    let indicator = match target.lat {
        l if l > 0 => Indicator::Right,
        l if l < 0 => Indicator::Left,
        _ => Indicator::Off,
    };
    let continues = indicator == s0.ego.indicator;

    let mut trace = Vec::with_capacity(n + 1);
    trace.push(TraceStep { state: *s0, action: Some(target) });
    for k in 1..=n {
        let u = k as f64 / n as f64;
        let p = spec.eval(u)?;
        let d = spec.derivative(u)?;
        let indicator_time = if continues {
            s0.ego.indicator_time + k as f64 * params.dt
        } else {
            (k - 1) as f64 * params.dt
        };
        let ego = VehicleState {
            x: p[0],
            y: p[1],
            vx: d[0] / params.horizon,
            vy: d[1] / params.horizon,
            indicator,
            indicator_time,
            ..s0.ego
        };
        let state = WorldState { time: s0.time + k as f64 * params.dt, ego, other: prediction[k] };
        trace.push(TraceStep { state, action: Some(target) });
    }
    Ok(LongTermAction { target, spec, trace })
}

/// Lateral acceleration profile of a generated action, one value per step.
pub fn lateral_acceleration(action: &LongTermAction, params: &PlannerParams) -> Vec<f64> {
    let n = action.trace.len().saturating_sub(1).max(1);
    (0..action.trace.len())
        .map(|k| {
            let u = (k as f64 / n as f64).min(1.0);
            action.spec.second_derivative(u).map(|a| a[1]).unwrap_or(0.0)
                / (params.horizon * params.horizon)
        })
        .collect()
}
