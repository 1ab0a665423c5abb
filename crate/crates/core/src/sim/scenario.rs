use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::script::{OtherScript, SpeedSegment};
use crate::backup::BackupWeights;
use crate::error::{Error, Result};
use crate::law::LawFile;
use crate::trajectory::PlannerParams;
use crate::world::{
    builtin_registry, Direction, GroundingContext, Lane, RoadMap, TrafficLight, VehicleState, WorldState,
};

/// A driving scenario as read from its TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Episode length (s).
    pub duration: f64,
    /// Recommended speed the reward and the backup cost track (m/s).
    pub v_ref: f64,
    pub speed_limit: f64,
    /// Law file, relative to the scenario file.
    pub law: PathBuf,
    #[serde(default)]
    pub ego_prescribed: bool,
    #[serde(default)]
    pub seed: u64,
    pub map: MapConfig,
    pub ego: EgoConfig,
    pub other: OtherConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub backup: BackupWeights,
    #[serde(default)]
    pub reward: RewardWeights,
    #[serde(default)]
    pub training: TrainingConfig,
    #[serde(default)]
    pub variation: Variation,
    /// Directory the scenario was loaded from; relative paths resolve here.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub lanes: usize,
    #[serde(default = "default_lane_width")]
    pub lane_width: f64,
    #[serde(default)]
    pub special_lanes: Vec<usize>,
    #[serde(default)]
    pub opposing_lanes: Vec<usize>,
    #[serde(default)]
    pub stop_line: Option<f64>,
    #[serde(default)]
    pub light: Option<TrafficLight>,
}

fn default_lane_width() -> f64 {
    3.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoConfig {
    pub x: f64,
    pub lane: usize,
    pub vx: f64,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_width")]
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtherConfig {
    pub x: f64,
    pub lane: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    /// Piecewise-constant speed profile; the first segment must start at 0.
    pub speed: Vec<SpeedSegment>,
}

fn default_length() -> f64 {
    4.0
}
fn default_width() -> f64 {
    1.8
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub horizon: f64,
    pub dt: f64,
    pub a_max: f64,
    /// Time between decisions during execution (s).
    pub decision_interval: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { horizon: 3.0, dt: 0.1, a_max: 3.0, decision_interval: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardWeights {
    /// Per second, per m/s of deviation from `v_ref`.
    pub speed: f64,
    pub collision: f64,
    pub red_light: f64,
    /// Per second spent in an opposing lane.
    pub wrong_way: f64,
    /// Once per pass of the other vehicle on its right-hand side.
    pub right_pass: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { speed: 1.0, collision: 100.0, red_light: 100.0, wrong_way: 0.0, right_pass: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingConfig {
    pub episodes: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of episodes over which epsilon is annealed.
    pub anneal_fraction: f64,
    /// Uniform jitter of the initial ego and other positions (m).
    pub x_jitter: f64,
    /// Uniform jitter of the initial ego speed (m/s).
    pub vx_jitter: f64,
    /// Relative jitter of the other vehicle's speed profile.
    pub speed_jitter: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            episodes: 5000,
            alpha: 0.1,
            gamma: 0.95,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            anneal_fraction: 0.6,
            x_jitter: 5.0,
            vx_jitter: 1.0,
            speed_jitter: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Variation {
    /// Relative perturbation of the other vehicle's speeds for seeded runs.
    pub speed_jitter: f64,
}

impl Default for Variation {
    fn default() -> Self {
        Self { speed_jitter: 0.2 }
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s = Self::from_toml(&text).map_err(|e| match e {
            Error::Toml(t) => Error::Format { path: path.display().to_string(), line: 0, msg: t.to_string() },
            other => other,
        })?;
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.road_map()?;
        self.planner_params().validate()?;
        let cfg = |m: String| Err(Error::Config(m));
        if !(self.duration > 0.0) {
            return cfg("duration must be positive".into());
        }
        if !(self.v_ref > 0.0 && self.v_ref <= self.speed_limit) {
            return cfg(format!("v_ref {} must lie in (0, speed_limit]", self.v_ref));
        }
        if self.ego.lane >= self.map.lanes || self.other.lane >= self.map.lanes {
            return cfg("vehicle starts in a lane the map does not have".into());
        }
        if !(0.0..=self.speed_limit).contains(&self.ego.vx) {
            return cfg(format!("ego speed {} outside [0, speed_limit]", self.ego.vx));
        }
        let iv = self.planner.decision_interval / self.planner.dt;
        if !(iv >= 1.0 - 1e-9) || (iv - iv.round()).abs() > 1e-9 {
            return cfg("decision_interval must be a positive multiple of dt".into());
        }
        if self.planner.decision_interval > self.planner.horizon + 1e-9 {
            return cfg("decision_interval cannot exceed the horizon".into());
        }
        if self.backup.samples == 0 {
            return cfg("backup needs at least one sample".into());
        }
        self.base_script()?;
        Ok(())
    }

    pub fn road_map(&self) -> Result<RoadMap> {
        let m = &self.map;
        for &l in m.special_lanes.iter().chain(&m.opposing_lanes) {
            if l >= m.lanes {
                return Err(Error::Config(format!("lane flag refers to missing lane {l}")));
            }
        }
        let lanes = (0..m.lanes)
            .map(|i| Lane {
                special: m.special_lanes.contains(&i),
                direction: if m.opposing_lanes.contains(&i) { Direction::Opposing } else { Direction::Forward },
            })
            .collect();
        let map = RoadMap { lane_width: m.lane_width, lanes, stop_line: m.stop_line, light: m.light.clone() };
        map.validate()?;
        Ok(map)
    }

    pub fn grounding(&self) -> Result<GroundingContext> {
        Ok(GroundingContext { map: self.road_map()?, ego_prescribed: self.ego_prescribed })
    }

    pub fn planner_params(&self) -> PlannerParams {
        PlannerParams {
            horizon: self.planner.horizon,
            dt: self.planner.dt,
            a_max: self.planner.a_max,
            v_max: self.speed_limit,
        }
    }

    pub fn total_steps(&self) -> usize {
        (self.duration / self.planner.dt).round() as usize
    }

    pub fn decision_every(&self) -> usize {
        (self.planner.decision_interval / self.planner.dt).round() as usize
    }

    pub fn law_path(&self) -> PathBuf {
        self.base_dir.join(&self.law)
    }

    pub fn load_law(&self) -> Result<LawFile> {
        LawFile::load(self.law_path(), builtin_registry())
    }

    /// The other vehicle's unperturbed script, long enough to predict a full
    /// horizon from the last step of the episode.
    pub fn base_script(&self) -> Result<OtherScript> {
        let map = RoadMap::uniform(self.map.lanes, self.map.lane_width);
        OtherScript::new(
            self.other.x,
            map.lane_center(self.other.lane)?,
            self.other.length,
            self.other.width,
            self.other.speed.clone(),
            self.planner.dt,
            self.duration + self.planner.horizon,
        )
    }

    pub fn initial_ego(&self) -> Result<VehicleState> {
        let y = RoadMap::uniform(self.map.lanes, self.map.lane_width).lane_center(self.ego.lane)?;
        Ok(VehicleState {
            length: self.ego.length,
            width: self.ego.width,
            ..VehicleState::new(self.ego.x, y, self.ego.vx)
        })
    }

    pub fn initial_state(&self, script: &OtherScript) -> Result<WorldState> {
        Ok(WorldState { time: 0.0, ego: self.initial_ego()?, other: script.state_at_step(0)? })
    }
}
