//! Law DSL: finite-trace temporal-logic formulas, their concrete syntax and
//! their evaluation.

mod eval;
mod file;
mod formula;
mod parser;

pub use eval::{eval_at, eval_trace, first_failure, labels, Failure, Valuation};
pub use file::LawFile;
pub use formula::{AtomRef, Bindings, Formula, NumExpr};
pub use parser::{parse_formula, Signatures};
