//! Law-adaptive hybrid decision making for simulated self-driving vehicles.
//!
//! Traffic laws are written as finite-trace temporal-logic formulas
//! ([`law`]). A forecaster ([`forecaster`]) checks each long-term action of a
//! tabular Q-learning agent ([`rl`]) against the active law over the realized
//! history plus the planned future, and hands control to a sample-based
//! backup planner ([`backup`]) when the action would break the law. Swapping
//! or re-parameterizing a law needs no retraining.

pub mod backup;
pub mod error;
pub mod forecaster;
pub mod law;
pub mod rl;
pub mod sim;
pub mod trajectory;
pub mod world;

pub use error::{Error, Result};
