use crate::error::Result;
use crate::law::{eval_trace, first_failure, labels, Failure, Formula, LawFile};
use crate::world::{Grounded, GroundingContext, Trace, TraceStep};

/// Post-hoc compliance of a realized trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Audit {
    /// Per step: for a law of the form `G(body)`, whether `body` holds
    /// there; otherwise whether the prefix ending there satisfies the law.
    pub law_ok: Vec<bool>,
    pub violations: usize,
    pub first_violation: Option<usize>,
    pub satisfied: bool,
    pub failure: Option<Failure>,
}

pub fn audit(steps: &[TraceStep], law: &LawFile, ctx: &GroundingContext) -> Result<Audit> {
    let view = Trace::join(steps, &[])?;
    let g = Grounded::new(view, ctx, &law.constants);
    let law_ok = match law.formula.as_ref() {
        Formula::Always(body) => labels(body, &g)?,
        f => (1..=steps.len())
            .map(|n| {
                let p = Grounded::new(view.prefix(n), ctx, &law.constants);
                eval_trace(f, &p).map(|v| v == 1)
            })
            .collect::<Result<_>>()?,
    };
    let satisfied = steps.is_empty() || eval_trace(&law.formula, &g)? == 1;
    let failure = if satisfied { None } else { first_failure(&law.formula, &g)? };
    Ok(Audit {
        violations: law_ok.iter().filter(|ok| !**ok).count(),
        first_violation: law_ok.iter().position(|ok| !ok),
        law_ok,
        satisfied,
        failure,
    })
}
