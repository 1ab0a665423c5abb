//! Long-term action expansion: target → cubic Hermite path → candidate trace.

mod generator;
mod hermite;

pub use generator::{generate, lateral_acceleration, target_to_world, LongTermAction, PlannerParams};
pub use hermite::{HermiteSpec, Vec2};
