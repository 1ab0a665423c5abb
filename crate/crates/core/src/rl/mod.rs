//! The tabular driving agent. It learns from speed, collision and
//! traffic-light rewards only; the variable law is left to the shield.

mod actions;
mod encode;
mod qtable;
mod train;

pub use actions::{action, action_index, all_actions, valid_mask, DEFAULT_ACTION, LAT_LEVELS, LON_LEVELS, N_ACTIONS};
pub use encode::{encode_state, Binning, StateKey};
pub use qtable::{Entry, QMeta, QTable, QValues};
pub use train::{train, write_curve, EpisodeStats, Hyperparams};
