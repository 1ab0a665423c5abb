//! Finite-trace evaluation.
//!
//! Each sub-formula is labelled at every position of the trace in a single
//! backward sweep, so a formula of size `m` costs `O(m * n)` on a trace of
//! length `n`. `Next` is strong: it is false at the last position.

use super::formula::{AtomRef, Formula};
use crate::error::{Error, Result};

/// A finite trace as seen by the evaluator: a length plus atom truth values.
pub trait Valuation {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn atom(&self, atom: &AtomRef, step: usize) -> Result<bool>;
}

/// Truth value of `f` at every position of the trace.
pub fn labels(f: &Formula, v: &dyn Valuation) -> Result<Vec<bool>> {
    let n = v.len();
    Ok(match f {
        Formula::Atom(a) => (0..n).map(|k| v.atom(a, k)).collect::<Result<_>>()?,
        Formula::Not(a) => labels(a, v)?.into_iter().map(|x| !x).collect(),
        Formula::And(a, b) => zip(labels(a, v)?, labels(b, v)?, |x, y| x && y),
        Formula::Or(a, b) => zip(labels(a, v)?, labels(b, v)?, |x, y| x || y),
        Formula::Implies(a, b) => zip(labels(a, v)?, labels(b, v)?, |x, y| !x || y),
        Formula::Next(a) => {
            let la = labels(a, v)?;
            (0..n).map(|k| k + 1 < n && la[k + 1]).collect()
        }
        Formula::Until(a, b) => {
            let (la, lb) = (labels(a, v)?, labels(b, v)?);
            let mut out = vec![false; n];
            let mut later = false;
            for k in (0..n).rev() {
                later = lb[k] || (la[k] && later);
                out[k] = later;
            }
            out
        }
        Formula::Always(a) => {
            let mut out = labels(a, v)?;
            for k in (0..n.saturating_sub(1)).rev() {
                out[k] = out[k] && out[k + 1];
            }
            out
        }
        Formula::Eventually(a) => {
            let mut out = labels(a, v)?;
            for k in (0..n.saturating_sub(1)).rev() {
                out[k] = out[k] || out[k + 1];
            }
            out
        }
    })
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

pub fn eval_at(f: &Formula, v: &dyn Valuation, step: usize) -> Result<bool> {
    if step >= v.len() {
        return Err(Error::StepOutOfRange { index: step, len: v.len() });
    }
    Ok(labels(f, v)?[step])
}

/// `1` if the whole trace satisfies `f`, `0` otherwise.
pub fn eval_trace(f: &Formula, v: &dyn Valuation) -> Result<u8> {
    Ok(eval_at(f, v, 0)? as u8)
}

/// Where and why a formula fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    /// Earliest step at which the culprit sub-formula is false.
    pub step: usize,
    /// Operator path from the root, e.g. `G/->/|`.
    pub path: String,
    /// The culprit sub-formula, printed.
    pub formula: String,
}

/// Explains a false verdict at step 0. Returns `None` when the trace satisfies `f`.
pub fn first_failure(f: &Formula, v: &dyn Valuation) -> Result<Option<Failure>> {
    if v.is_empty() || labels(f, v)?[0] {
        return Ok(None);
    }
    let mut path = Vec::new();
    let (node, step) = descend(f, v, 0, &mut path)?;
    Ok(Some(Failure { step, path: path.join("/"), formula: node.to_string() }))
}

fn descend<'f>(
    f: &'f Formula,
    v: &dyn Valuation,
    step: usize,
    path: &mut Vec<&'static str>,
) -> Result<(&'f Formula, usize)> {
    path.push(f.label());
    match f {
        Formula::Always(a) => {
            let la = labels(a, v)?;
            match (step..v.len()).find(|&k| !la[k]) {
                Some(k) => descend(a, v, k, path),
                None => Ok((f, step)),
            }
        }
        Formula::And(a, b) => {
            if !labels(a, v)?[step] {
                descend(a, v, step, path)
            } else {
                descend(b, v, step, path)
            }
        }
        Formula::Implies(_, b) => descend(b, v, step, path),
        Formula::Next(a) if step + 1 < v.len() => descend(a, v, step + 1, path),
        _ => Ok((f, step)),
    }
}
