use std::str::FromStr;

use serde::Serialize;

use super::audit::{audit, Audit};
use super::scenario::Scenario;
use super::script::OtherScript;
use crate::backup::{BackupPlanner, CandidateSet};
use crate::error::{Error, Result};
use crate::forecaster::{Decision, Forecaster, PolicyTag, Rejection};
use crate::law::{Failure, LawFile};
use crate::rl::{encode_state, QTable};
use crate::trajectory::generate;
use crate::world::{collides, CsvRow, GroundingContext, Target, Trace, TraceStep, WorldState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// RL agent behind the forecaster, with backup and buffer.
    Shielded,
    /// RL agent alone.
    RlOnly,
    /// Backup planner with buffer, no RL.
    BackupOnly,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Shielded => "shielded",
            Mode::RlOnly => "rl-only",
            Mode::BackupOnly => "backup-only",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shielded" => Ok(Mode::Shielded),
            "rl-only" => Ok(Mode::RlOnly),
            "backup-only" => Ok(Mode::BackupOnly),
            _ => Err(Error::Config(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Seed of the other-vehicle speed perturbation; `None` runs the
    /// scenario as written.
    pub perturbation: Option<u64>,
    /// Keep every backup candidate in the decision log.
    pub dump_candidates: bool,
    /// Apply the backup planner's separation test to RL candidates too.
    pub rl_safety: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { perturbation: None, dump_candidates: false, rl_safety: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateDump {
    pub lat: i8,
    pub lon: f64,
    pub safe: bool,
    pub legal: bool,
    pub recoverable: bool,
    pub cost: f64,
    pub selected: bool,
    pub failure_step: Option<usize>,
    /// Ego `[x, y]` at each sample.
    pub path: Vec<[f64; 2]>,
}

impl CandidateDump {
    fn from_set(set: &CandidateSet) -> Vec<Self> {
        set.candidates
            .iter()
            .enumerate()
            .map(|(i, c)| CandidateDump {
                lat: c.action.target.lat,
                lon: c.action.target.lon,
                safe: c.safe,
                legal: c.legal,
                recoverable: c.recoverable,
                cost: c.cost,
                selected: set.selected == Some(i),
                failure_step: c.failure.as_ref().map(|f| f.step),
                path: c.action.trace.iter().map(|st| [st.state.ego.x, st.state.ego.y]).collect(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionRecord {
    pub step: usize,
    pub time: f64,
    pub policy: &'static str,
    pub lat: i8,
    pub lon: f64,
    pub rl_lat: Option<i8>,
    pub rl_lon: Option<f64>,
    /// Why the RL candidate was rejected, if it was.
    pub veto: Option<String>,
    pub veto_step: Option<usize>,
    pub veto_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<CandidateDump>>,
    #[serde(skip)]
    pub tag: Option<PolicyTag>,
}

impl DecisionRecord {
    fn new(d: &Decision, time: f64, dump: bool) -> Self {
        let path = match &d.rl_rejection {
            Some(Rejection::Illegal(f)) => Some(f.path.clone()),
            _ => None,
        };
        DecisionRecord {
            step: d.step,
            time,
            policy: d.tag.as_str(),
            lat: d.target.lat,
            lon: d.target.lon,
            rl_lat: d.rl_target.map(|t| t.lat),
            rl_lon: d.rl_target.map(|t| t.lon),
            veto: d.rl_rejection.as_ref().map(Rejection::describe),
            veto_step: d.rl_rejection.as_ref().and_then(Rejection::step),
            veto_path: path,
            candidates: if dump { d.backup.as_ref().map(CandidateDump::from_set) } else { None },
            tag: Some(d.tag),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub scenario: String,
    pub law: String,
    pub mode: Mode,
    pub perturbation: Option<u64>,
    pub trace: Trace,
    /// Policy governing the motion out of each step; the last step repeats
    /// the one before it.
    pub tags: Vec<PolicyTag>,
    pub law_ok: Vec<bool>,
    pub violations: usize,
    pub first_violation: Option<usize>,
    pub failure: Option<Failure>,
    pub mean_speed: f64,
    pub completed: bool,
    pub collided: bool,
    pub decisions: Vec<DecisionRecord>,
}

impl EpisodeResult {
    pub fn count(&self, tag: PolicyTag) -> usize {
        self.tags.iter().filter(|t| **t == tag).count()
    }

    pub fn csv_rows(&self, ctx: &GroundingContext) -> Result<Vec<CsvRow>> {
        let mut veto = vec![None; self.trace.len()];
        for d in &self.decisions {
            if d.veto.is_some() {
                veto[d.step] = Some(d);
            }
        }
        self.trace
            .steps
            .iter()
            .enumerate()
            .map(|(k, st)| {
                Ok(CsvRow {
                    state: st.state,
                    ego_lane: ctx.map.lane_at(st.state.ego.y)?,
                    action: st.action,
                    policy: self.tags[k].as_str().to_string(),
                    law_ok: self.law_ok[k],
                    veto_step: veto[k].and_then(|d| d.veto_step),
                    veto_formula: veto[k].and_then(|d| d.veto.clone()).unwrap_or_default(),
                })
            })
            .collect()
    }
}

/// Advances the world by one step with the ego placed exactly on `planned`.
pub fn step(
    world: &WorldState,
    planned: &TraceStep,
    script: &OtherScript,
    dt: f64,
    v_max: f64,
) -> Result<WorldState> {
    if (script.dt() - dt).abs() > 1e-12 {
        return Err(Error::DtMismatch { plan: script.dt(), sim: dt });
    }
    let plan_dt = planned.state.time - world.time;
    if (plan_dt - dt).abs() > 1e-6 {
        return Err(Error::DtMismatch { plan: plan_dt, sim: dt });
    }
    let ego = planned.state.ego;
    if !(ego.vx >= -1e-9 && ego.vx <= v_max + 1e-6) || !ego.x.is_finite() || !ego.y.is_finite() {
        return Err(Error::Implausible(format!("ego speed {} with limit {v_max}", ego.vx)));
    }
    let j = (world.time / dt).round() as usize + 1;
    Ok(WorldState { time: j as f64 * dt, ego, other: script.state_at_step(j)? })
}

/// Runs one episode. `qtable` is required unless `mode` is
/// [`Mode::BackupOnly`].
pub fn run_episode(
    scenario: &Scenario,
    mode: Mode,
    qtable: Option<&QTable>,
    law: &LawFile,
    opts: &RunOptions,
) -> Result<EpisodeResult> {
    let ctx = scenario.grounding()?;
    let params = scenario.planner_params();
    let base = scenario.base_script()?;
    let script = match opts.perturbation {
        Some(seed) => base.perturbed(seed, scenario.variation.speed_jitter),
        None => base,
    };
    let q = match (mode, qtable) {
        (Mode::BackupOnly, _) => None,
        (_, Some(q)) => Some(q),
        (_, None) => return Err(Error::Config(format!("mode {} needs a q-table", mode.as_str()))),
    };
    let s0 = scenario.initial_state(&script)?;
    let init = audit(&[TraceStep::new(s0)], law, &ctx)?;
    if !init.satisfied {
        return Err(Error::Config(format!("initial state of `{}` violates `{}`", scenario.name, law.name)));
    }

    let planner = BackupPlanner { weights: scenario.backup, params, v_ref: scenario.v_ref };
    let mut forecaster = Forecaster::new(law, &ctx, params.v_max);
    if opts.rl_safety {
        forecaster = forecaster.with_rl_safety(scenario.backup);
    }
    let n = params.steps();
    let total = scenario.total_steps();
    let every = scenario.decision_every();

    let mut hist = vec![TraceStep::new(s0)];
    let mut tags: Vec<PolicyTag> = Vec::with_capacity(total + 1);
    let mut decisions = Vec::new();
    let mut current: Option<(PolicyTag, Target)> = None;
    let mut collided = false;

    for k in 0..total {
        if k % every == 0 || forecaster.remaining_steps() == 0 {
            let s = hist[k].state;
            let prediction = script.predict(k, n)?;
            let rl = match q {
                Some(q) => {
                    let key = encode_state(&s, &ctx.map, &q.meta.bins)?;
                    let target = q.act(&key, ctx.map.lane_count());
                    Some(generate(&s, target, &ctx.map, &prediction, &params)?)
                }
                None => None,
            };
            let d = match mode {
                Mode::RlOnly => {
                    let a = rl.expect("rl-only mode has a table");
                    let target = a.target;
                    forecaster.load(a);
                    Decision { step: k, tag: PolicyTag::Rl, target, rl_target: Some(target), rl_rejection: None, backup: None }
                }
                _ => forecaster.decide(&hist, rl, Some((&planner, &prediction)))?,
            };
            log::debug!("t={:.1} {} -> ({}, {})", s.time, d.tag.as_str(), d.target.lat, d.target.lon);
            current = Some((d.tag, d.target));
            decisions.push(DecisionRecord::new(&d, s.time, opts.dump_candidates));
        }
        let (tag, target) = current.expect("a decision precedes the first step");
        hist[k].action = Some(target);
        tags.push(tag);
        let point = forecaster.advance().ok_or(Error::BufferExhausted)?;
        let next = step(&hist[k].state, &point, &script, params.dt, params.v_max)?;
        hist.push(TraceStep::new(next));
        if collides(&next.ego, &next.other) {
            collided = true;
            break;
        }
    }
    if let Some(&last) = tags.last() {
        tags.push(last);
    }

    let trace = Trace { dt: params.dt, steps: hist };
    let Audit { law_ok, violations, first_violation, failure, .. } = audit(&trace.steps, law, &ctx)?;
    let mean_speed = trace.steps.iter().map(|s| s.state.ego.vx).sum::<f64>() / trace.len() as f64;
    Ok(EpisodeResult {
        scenario: scenario.name.clone(),
        law: law.name.clone(),
        mode,
        perturbation: opts.perturbation,
        completed: !collided,
        collided,
        trace,
        tags,
        law_ok,
        violations,
        first_violation,
        failure,
        mean_speed,
        decisions,
    })
}

/// Decision log as pretty-printed JSON.
pub fn decisions_json(decisions: &[DecisionRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(decisions)?)
}
