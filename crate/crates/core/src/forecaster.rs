//! The law-violation forecaster and the hybrid switch.
//!
//! A candidate is judged over the realized history followed by its own
//! future. The RL action is taken when it passes; otherwise the backup
//! planner's choice; otherwise tracking continues along the last approved
//! trajectory.

use crate::backup::{is_safe, BackupPlanner, BackupWeights, CandidateSet};
use crate::error::{Error, Result};
use crate::law::{eval_trace, first_failure, Failure, LawFile};
use crate::trajectory::LongTermAction;
use crate::world::{Grounded, GroundingContext, RoadMap, Target, Trace, TraceStep, VehicleState};

const END_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyTag {
    Rl,
    Backup,
    Buffer,
}

impl PolicyTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyTag::Rl => "rl",
            PolicyTag::Backup => "backup",
            PolicyTag::Buffer => "buffer",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub legal: bool,
    /// Set when illegal; `step` indexes the joined trace.
    pub failure: Option<Failure>,
}

/// Evaluates `law` over `history` followed by `candidate`, whose first step
/// must repeat the last history state.
pub fn check(
    candidate: &[TraceStep],
    history: &[TraceStep],
    law: &LawFile,
    ctx: &GroundingContext,
) -> Result<Verdict> {
    let view = Trace::join(history, candidate)?;
    let g = Grounded::new(view, ctx, &law.constants);
    if eval_trace(&law.formula, &g)? == 1 {
        return Ok(Verdict { legal: true, failure: None });
    }
    Ok(Verdict { legal: false, failure: first_failure(&law.formula, &g)? })
}

/// True when the candidate ends settled at a lane center, with no lateral
/// speed and a legal longitudinal speed.
pub fn recoverable(candidate: &[TraceStep], map: &RoadMap, v_max: f64) -> bool {
    let Some(end) = candidate.last() else { return false };
    let ego = &end.state.ego;
    let Ok(lane) = map.lane_at(ego.y) else { return false };
    let Ok(center) = map.lane_center(lane) else { return false };
    (ego.y - center).abs() < END_TOLERANCE && ego.vy.abs() < END_TOLERANCE && ego.vx >= 0.0 && ego.vx <= v_max + 1e-9
}

/// Why the RL candidate was not taken.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    Illegal(Failure),
    Unsafe,
    Unrecoverable,
}

impl Rejection {
    pub fn describe(&self) -> String {
        match self {
            Rejection::Illegal(f) => f.formula.clone(),
            Rejection::Unsafe => "unsafe".into(),
            Rejection::Unrecoverable => "unrecoverable".into(),
        }
    }

    pub fn step(&self) -> Option<usize> {
        match self {
            Rejection::Illegal(f) => Some(f.step),
            _ => None,
        }
    }
}

/// Record of one call to [`Forecaster::decide`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// Index of the decision state in the realized trace.
    pub step: usize,
    pub tag: PolicyTag,
    /// Target of the trajectory now being tracked.
    pub target: Target,
    pub rl_target: Option<Target>,
    pub rl_rejection: Option<Rejection>,
    pub backup: Option<CandidateSet>,
}

/// The approved trajectory being tracked and the index of the current point.
#[derive(Debug, Clone, PartialEq)]
pub struct Buffer {
    pub action: LongTermAction,
    pub next: usize,
}

impl Buffer {
    pub fn remaining(&self) -> &[TraceStep] {
        &self.action.trace[self.next..]
    }
}

pub struct Forecaster<'a> {
    law: &'a LawFile,
    ctx: &'a GroundingContext,
    v_max: f64,
    rl_safety: Option<BackupWeights>,
    buffer: Option<Buffer>,
}

impl<'a> Forecaster<'a> {
    pub fn new(law: &'a LawFile, ctx: &'a GroundingContext, v_max: f64) -> Self {
        Self { law, ctx, v_max, rl_safety: None, buffer: None }
    }

    /// Also reject RL candidates that fail the backup planner's separation test.
    pub fn with_rl_safety(mut self, weights: BackupWeights) -> Self {
        self.rl_safety = Some(weights);
        self
    }

    pub fn law(&self) -> &LawFile {
        self.law
    }

    pub fn buffer(&self) -> Option<&Buffer> {
        self.buffer.as_ref()
    }

    pub fn vet(&self, candidate: &LongTermAction, history: &[TraceStep]) -> Result<Option<Rejection>> {
        if !recoverable(&candidate.trace, &self.ctx.map, self.v_max) {
            return Ok(Some(Rejection::Unrecoverable));
        }
        if let Some(w) = &self.rl_safety {
            if !is_safe(&candidate.trace, self.ctx.map.lane_width, w) {
                return Ok(Some(Rejection::Unsafe));
            }
        }
        let v = check(&candidate.trace, history, self.law, self.ctx)?;
        Ok(v.failure.map(Rejection::Illegal))
    }

    /// Chooses what to track from the last state of `history`.
    pub fn decide(
        &mut self,
        history: &[TraceStep],
        rl: Option<LongTermAction>,
        backup: Option<(&BackupPlanner, &[VehicleState])>,
    ) -> Result<Decision> {
        let step = history.len().saturating_sub(1);
        let rl_target = rl.as_ref().map(|a| a.target);
        let mut rl_rejection = None;
        if let Some(candidate) = rl {
            match self.vet(&candidate, history)? {
                None => {
                    let target = candidate.target;
                    self.buffer = Some(Buffer { action: candidate, next: 0 });
                    return Ok(Decision { step, tag: PolicyTag::Rl, target, rl_target, rl_rejection, backup: None });
                }
                Some(r) => rl_rejection = Some(r),
            }
        }
        let mut set = None;
        if let Some((planner, prediction)) = backup {
            let s = planner.plan(history, prediction, self.law, self.ctx)?;
            if let Some(chosen) = s.chosen() {
                let target = chosen.action.target;
                self.buffer = Some(Buffer { action: chosen.action.clone(), next: 0 });
                return Ok(Decision {
                    step,
                    tag: PolicyTag::Backup,
                    target,
                    rl_target,
                    rl_rejection,
                    backup: Some(s),
                });
            }
            set = Some(s);
        }
        let buf = match &self.buffer {
            Some(b) if b.next + 1 < b.action.trace.len() => b,
            _ => return Err(Error::BufferExhausted),
        };
        let v = check(buf.remaining(), history, self.law, self.ctx)?;
        if let Some(f) = v.failure {
            return Err(Error::BufferIllegal(format!("{} at step {}", f.formula, f.step)));
        }
        Ok(Decision { step, tag: PolicyTag::Buffer, target: buf.action.target, rl_target, rl_rejection, backup: set })
    }

    /// Replaces the tracked trajectory without any check.
    pub fn load(&mut self, action: LongTermAction) {
        self.buffer = Some(Buffer { action, next: 0 });
    }

    /// Moves to the next point of the tracked trajectory; `None` when it is
    /// used up.
    pub fn advance(&mut self) -> Option<TraceStep> {
        let b = self.buffer.as_mut()?;
        let p = *b.action.trace.get(b.next + 1)?;
        b.next += 1;
        Some(p)
    }

    pub fn remaining_steps(&self) -> usize {
        self.buffer.as_ref().map_or(0, |b| b.action.trace.len() - 1 - b.next)
    }
}
