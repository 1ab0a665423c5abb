use super::{Target, WorldState};
use crate::error::{Error, Result};

/// Alignment tolerance for times and positions when joining traces.
pub const JOIN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub state: WorldState,
    /// Target being tracked from this state, if any.
    pub action: Option<Target>,
}

impl TraceStep {
    pub fn new(state: WorldState) -> Self {
        Self { state, action: None }
    }
}

/// States sampled at a fixed time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt: f64,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn new(dt: f64) -> Self {
        Self { dt, steps: Vec::new() }
    }

    pub fn from_states(dt: f64, states: impl IntoIterator<Item = WorldState>) -> Self {
        Self { dt, steps: states.into_iter().map(TraceStep::new).collect() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<&WorldState> {
        self.steps.last().map(|s| &s.state)
    }

    pub fn state(&self, k: usize) -> &WorldState {
        &self.steps[k].state
    }

    pub fn push(&mut self, step: TraceStep) {
        self.steps.push(step);
    }

    /// Checks that times increase by exactly `dt` (within tolerance).
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("trace time step {} must be positive", self.dt)));
        }
        for w in self.steps.windows(2) {
            let gap = w[1].state.time - w[0].state.time;
            if (gap - self.dt).abs() > JOIN_TOLERANCE {
                return Err(Error::Misaligned(format!(
                    "time {} -> {} is not one step of {}",
                    w[0].state.time, w[1].state.time, self.dt
                )));
            }
        }
        Ok(())
    }

    pub fn view(&self) -> TraceView<'_> {
        TraceView { head: &self.steps, tail: &[] }
    }

    /// Joins a realized prefix with a candidate whose first step repeats the
    /// prefix's last state. Returns a view without copying.
    pub fn join<'a>(prefix: &'a [TraceStep], candidate: &'a [TraceStep]) -> Result<TraceView<'a>> {
        let Some(first) = candidate.first() else {
            return Ok(TraceView { head: prefix, tail: &[] });
        };
        let Some(last) = prefix.last() else {
            return Ok(TraceView { head: candidate, tail: &[] });
        };
        check_anchor(&last.state, &first.state)?;
        Ok(TraceView { head: prefix, tail: &candidate[1..] })
    }

    /// Owned version of [`Trace::join`].
    pub fn concat(prefix: &Trace, candidate: &Trace) -> Result<Trace> {
        if (prefix.dt - candidate.dt).abs() > JOIN_TOLERANCE {
            return Err(Error::DtMismatch { plan: candidate.dt, sim: prefix.dt });
        }
        let view = Trace::join(&prefix.steps, &candidate.steps)?;
        Ok(Trace { dt: prefix.dt, steps: view.iter().copied().collect() })
    }
}

fn check_anchor(a: &WorldState, b: &WorldState) -> Result<()> {
    let diffs = [
        ("time", a.time, b.time),
        ("ego x", a.ego.x, b.ego.x),
        ("ego y", a.ego.y, b.ego.y),
        ("ego vx", a.ego.vx, b.ego.vx),
        ("ego vy", a.ego.vy, b.ego.vy),
        ("other x", a.other.x, b.other.x),
        ("other y", a.other.y, b.other.y),
        ("other vx", a.other.vx, b.other.vx),
    ];
    for (what, u, v) in diffs {
        if !((u - v).abs() <= JOIN_TOLERANCE) {
            return Err(Error::Misaligned(format!("{what} {u} vs {v}")));
        }
    }
    Ok(())
}

/// A read-only concatenation of two step slices.
#[derive(Debug, Clone, Copy)]
pub struct TraceView<'a> {
    head: &'a [TraceStep],
    tail: &'a [TraceStep],
}

impl<'a> TraceView<'a> {
    pub fn len(&self) -> usize {
        self.head.len() + self.tail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self, k: usize) -> &'a TraceStep {
        if k < self.head.len() {
            &self.head[k]
        } else {
            &self.tail[k - self.head.len()]
        }
    }

    pub fn state(&self, k: usize) -> &'a WorldState {
        &self.step(k).state
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a TraceStep> {
        self.head.iter().chain(self.tail.iter())
    }

    /// The first `len` steps.
    pub fn prefix(&self, len: usize) -> TraceView<'a> {
        if len <= self.head.len() {
            TraceView { head: &self.head[..len], tail: &[] }
        } else {
            TraceView { head: self.head, tail: &self.tail[..len - self.head.len()] }
        }
    }
}
