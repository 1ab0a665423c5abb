//! Sample-based backup planner: a small fan of targets is expanded into
//! candidates, unsafe and illegal ones are discarded, and the cheapest of the
//! rest is returned.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forecaster::{check, recoverable};
use crate::law::{Failure, LawFile};
use crate::trajectory::{generate, lateral_acceleration, LongTermAction, PlannerParams};
use crate::world::{GroundingContext, RoadMap, Target, TraceStep, VehicleState, WorldState};

/// Sampling, safety and cost settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackupWeights {
    /// Weight of mean speed deviation from `v_ref`.
    pub speed: f64,
    /// Weight of mean absolute lateral acceleration.
    pub smoothness: f64,
    /// Added to the half-length sum when testing separation (m).
    pub margin: f64,
    /// Lateral offset, as a fraction of lane width, below which two vehicles
    /// are considered to share a lane for the separation test.
    pub lateral_band: f64,
    pub samples: usize,
}

impl Default for BackupWeights {
    fn default() -> Self {
        Self { speed: 1.0, smoothness: 0.5, margin: 2.0, lateral_band: 0.8, samples: 8 }
    }
}

const PRIMARY_LEVELS: [f64; 3] = [-1.0, -0.4, 0.2];
const PADDING_LEVELS: [f64; 5] = [-0.7, 0.0, -0.2, 0.5, -0.85];

/// Targets to try from `s0`, in tie-break order. The in-lane full brake is
/// always first.
pub fn sample_targets(s0: &WorldState, map: &RoadMap, n: usize) -> Result<Vec<Target>> {
    let lane = map.lane_at(s0.ego.y)? as i64;
    let grid = [
        (0, PRIMARY_LEVELS[0]),
        (0, PRIMARY_LEVELS[1]),
        (0, PRIMARY_LEVELS[2]),
        (-1, PRIMARY_LEVELS[2]),
        (1, PRIMARY_LEVELS[2]),
        (-1, PRIMARY_LEVELS[1]),
        (1, PRIMARY_LEVELS[1]),
        (-1, PRIMARY_LEVELS[0]),
        (1, PRIMARY_LEVELS[0]),
    ];
    let mut out: Vec<Target> = grid
        .iter()
        .filter(|(lat, _)| map.has_lane(lane + *lat as i64))
        .map(|&(lat, lon)| Target::new(lat, lon))
        .take(n)
        .collect();
    out.extend(PADDING_LEVELS.iter().map(|&lon| Target::new(0, lon)).take(n.saturating_sub(out.len())));
    Ok(out)
}

/// False if at any future step the two centers come closer than the
/// half-length sum plus margin while laterally within the band.
pub fn is_safe(trace: &[TraceStep], lane_width: f64, w: &BackupWeights) -> bool {
    trace.iter().skip(1).all(|st| {
        let (e, o) = (&st.state.ego, &st.state.other);
        let (dx, dy) = (e.x - o.x, e.y - o.y);
        let r = 0.5 * (e.length + o.length) + w.margin;
        dy.abs() >= w.lateral_band * lane_width || dx.hypot(dy) >= r
    })
}

pub fn cost(action: &LongTermAction, v_ref: f64, params: &PlannerParams, w: &BackupWeights) -> f64 {
    let n = action.trace.len() as f64;
    let speed = action.trace.iter().map(|st| (st.state.ego.vx - v_ref).abs()).sum::<f64>() / n;
    let lat = lateral_acceleration(action, params).iter().map(|a| a.abs()).sum::<f64>() / n;
    w.speed * speed + w.smoothness * lat
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub action: LongTermAction,
    pub safe: bool,
    pub recoverable: bool,
    pub legal: bool,
    pub failure: Option<Failure>,
    pub cost: f64,
}

impl Candidate {
    pub fn admissible(&self) -> bool {
        self.safe && self.recoverable && self.legal
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
    pub selected: Option<usize>,
}

impl CandidateSet {
    pub fn new(candidates: Vec<Candidate>) -> Self {
        let selected = select(&candidates);
        Self { candidates, selected }
    }

    pub fn chosen(&self) -> Option<&Candidate> {
        self.selected.map(|i| &self.candidates[i])
    }

    /// The same set with candidate `idx` removed and the selection redone.
    pub fn without(&self, idx: usize) -> Self {
        let mut c = self.candidates.clone();
        c.remove(idx);
        Self::new(c)
    }
}

/// Cheapest admissible candidate; ties go to the earliest.
pub fn select(candidates: &[Candidate]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate().filter(|(_, c)| c.admissible()) {
        if best.is_none_or(|b| c.cost < candidates[b].cost) {
            best = Some(i);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackupPlanner {
    pub weights: BackupWeights,
    pub params: PlannerParams,
    pub v_ref: f64,
}

impl BackupPlanner {
    /// Expands, flags and ranks the sampled targets from the last state of
    /// `history`. `prediction[k]` is the other vehicle `k` steps ahead.
    pub fn plan(
        &self,
        history: &[TraceStep],
        prediction: &[VehicleState],
        law: &LawFile,
        ctx: &GroundingContext,
    ) -> Result<CandidateSet> {
        let s0 = &history.last().expect("history holds at least the initial state").state;
        let map = &ctx.map;
        let mut out = Vec::with_capacity(self.weights.samples);
        for target in sample_targets(s0, map, self.weights.samples)? {
            let action = generate(s0, target, map, prediction, &self.params)?;
            let verdict = check(&action.trace, history, law, ctx)?;
            out.push(Candidate {
                safe: is_safe(&action.trace, map.lane_width, &self.weights),
                recoverable: recoverable(&action.trace, map, self.params.v_max),
                legal: verdict.legal,
                failure: verdict.failure,
                cost: cost(&action, self.v_ref, &self.params, &self.weights),
                action,
            });
        }
        Ok(CandidateSet::new(out))
    }
}
