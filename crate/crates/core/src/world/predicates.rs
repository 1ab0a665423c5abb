use std::collections::BTreeMap;
use std::sync::OnceLock;

use super::{gap_to, Indicator, LightColor, RoadMap, TraceView, WorldState};
use crate::error::{Error, Result};
use crate::law::{AtomRef, Bindings, Signatures, Valuation};

/// Indicator durations are accumulated in `dt` increments; this absorbs the
/// rounding so that 30 steps of 0.1 s count as 3 s.
const DURATION_EPS: f64 = 1e-9;

/// Scenario facts that are not part of the kinematic state.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundingContext {
    pub map: RoadMap,
    /// Whether the ego is a vehicle admitted to special lanes.
    pub ego_prescribed: bool,
}

impl GroundingContext {
    pub fn new(map: RoadMap) -> Self {
        Self { map, ego_prescribed: false }
    }
}

pub type PredicateFn = fn(&Grounded<'_>, usize, &[f64]) -> Result<bool>;

#[derive(Clone, Copy)]
pub struct Predicate {
    pub arity: usize,
    pub eval: PredicateFn,
}

/// Named atoms the law DSL may reference, plus the context variables
/// available inside atom arguments.
#[derive(Clone, Default)]
pub struct PredicateRegistry {
    predicates: BTreeMap<String, Predicate>,
    context_vars: Vec<&'static str>,
}

impl std::fmt::Debug for PredicateRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PredicateRegistry")
            .field("predicates", &self.predicates.keys().collect::<Vec<_>>())
            .field("context_vars", &self.context_vars)
            .finish()
    }
}

impl PredicateRegistry {
    pub fn register(&mut self, name: &str, arity: usize, eval: PredicateFn) {
        self.predicates.insert(name.to_string(), Predicate { arity, eval });
    }

    pub fn get(&self, name: &str) -> Option<&Predicate> {
        self.predicates.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.predicates.keys().map(String::as_str)
    }

    pub fn context_vars(&self) -> &[&'static str] {
        &self.context_vars
    }
}

impl Signatures for PredicateRegistry {
    fn arity(&self, name: &str) -> Option<usize> {
        self.predicates.get(name).map(|p| p.arity)
    }

    fn is_context_var(&self, name: &str) -> bool {
        self.context_vars.contains(&name)
    }
}

/// The registry of driving atoms. Context variable `dv` is the ego's
/// longitudinal speed minus the other vehicle's.
pub fn builtin_registry() -> &'static PredicateRegistry {
    static REGISTRY: OnceLock<PredicateRegistry> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut r = PredicateRegistry { context_vars: vec!["dv"], ..Default::default() };
        r.register("true", 0, |_, _, _| Ok(true));
        r.register("false", 0, |_, _, _| Ok(false));
        r.register("on_special_lane", 0, |g, k, _| {
            let lane = g.ego_lane(k)?;
            Ok(g.ctx.map.is_special(lane))
        });
        r.register("prescribed_vehicle", 0, |g, _, _| Ok(g.ctx.ego_prescribed));
        r.register("exceed_stop_line", 0, |g, k, _| {
            let line = g.ctx.map.stop_line.ok_or(Error::MissingFeature("stop line"))?;
            let ego = &g.state(k).ego;
            Ok(ego.x + 0.5 * ego.length > line)
        });
        r.register("light_red_on_ego_lane", 0, |g, k, _| {
            let light = g.ctx.map.light.as_ref().ok_or(Error::MissingFeature("traffic light"))?;
            let lane = g.ego_lane(k)?;
            Ok(light.governs(lane) && light.color_at(g.state(k).time) == LightColor::Red)
        });
        r.register("cross_right_line", 0, |g, k, _| {
            Ok(k > 0 && g.ego_lane(k)? > g.ego_lane(k - 1)?)
        });
        r.register("cross_left_line", 0, |g, k, _| {
            Ok(k > 0 && g.ego_lane(k)? < g.ego_lane(k - 1)?)
        });
        r.register("indicator_right_ge", 1, |g, k, args| {
            let ego = &g.state(k).ego;
            Ok(ego.indicator == Indicator::Right && ego.indicator_time >= args[0] - DURATION_EPS)
        });
        r.register("indicator_left_ge", 1, |g, k, args| {
            let ego = &g.state(k).ego;
            Ok(ego.indicator == Indicator::Left && ego.indicator_time >= args[0] - DURATION_EPS)
        });
        r.register("gap_gt", 1, |g, k, args| {
            let s = g.state(k);
            Ok(gap_to(&s.ego, &s.other) > args[0])
        });
        r
    })
}

/// A trace grounded in a map and a set of law constants; implements
/// [`Valuation`] for the evaluator.
pub struct Grounded<'a> {
    pub view: TraceView<'a>,
    pub ctx: &'a GroundingContext,
    pub constants: &'a BTreeMap<String, f64>,
    pub registry: &'a PredicateRegistry,
}

impl<'a> Grounded<'a> {
    pub fn new(
        view: TraceView<'a>,
        ctx: &'a GroundingContext,
        constants: &'a BTreeMap<String, f64>,
    ) -> Self {
        Self { view, ctx, constants, registry: builtin_registry() }
    }

    pub fn state(&self, k: usize) -> &'a WorldState {
        self.view.state(k)
    }

    pub fn ego_lane(&self, k: usize) -> Result<usize> {
        self.ctx.map.lane_at(self.state(k).ego.y)
    }
}

struct StepEnv<'a> {
    constants: &'a BTreeMap<String, f64>,
    state: &'a WorldState,
}

impl Bindings for StepEnv<'_> {
    fn lookup(&self, name: &str) -> Option<f64> {
        match name {
            "dv" => Some(self.state.ego.vx - self.state.other.vx),
            _ => self.constants.get(name).copied(),
        }
    }
}

impl Valuation for Grounded<'_> {
    fn len(&self) -> usize {
        self.view.len()
    }

    fn atom(&self, atom: &AtomRef, step: usize) -> Result<bool> {
        if step >= self.view.len() {
            return Err(Error::StepOutOfRange { index: step, len: self.view.len() });
        }
        let pred = self.registry.get(&atom.name).ok_or_else(|| Error::UnknownAtom {
            name: atom.name.clone(),
            line: 0,
            col: 0,
        })?;
        if pred.arity != atom.args.len() {
            return Err(Error::Arity {
                name: atom.name.clone(),
                expected: pred.arity,
                found: atom.args.len(),
                line: 0,
                col: 0,
            });
        }
        let env = StepEnv { constants: self.constants, state: self.state(step) };
        let args: Vec<f64> = atom.args.iter().map(|a| a.eval(&env)).collect::<Result<_>>()?;
        (pred.eval)(self, step, &args)
    }
}
