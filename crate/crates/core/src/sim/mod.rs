//! Deterministic episode engine: scenario files, the scripted other vehicle,
//! exact tracking and the post-hoc audit.

mod audit;
mod episode;
mod scenario;
mod script;
mod svg;

pub use audit::{audit, Audit};
pub use episode::{decisions_json, run_episode, step, CandidateDump, DecisionRecord, EpisodeResult, Mode, RunOptions};
pub use scenario::{
    EgoConfig, MapConfig, OtherConfig, PlannerConfig, RewardWeights, Scenario, TrainingConfig, Variation,
};
pub use script::{OtherScript, SpeedSegment};
pub use svg::render_svg;
