use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Opposing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Lane {
    #[serde(default)]
    pub special: bool,
    #[serde(default)]
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightColor {
    Green,
    Yellow,
    Red,
}

impl LightColor {
    pub fn code(self) -> u8 {
        match self {
            LightColor::Green => 0,
            LightColor::Yellow => 1,
            LightColor::Red => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightPhase {
    pub color: LightColor,
    pub duration: f64,
}

/// Cyclic signal governing a set of lanes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficLight {
    /// Lanes the signal applies to; empty means every lane.
    #[serde(default)]
    pub lanes: Vec<usize>,
    /// Time into the cycle at t = 0.
    #[serde(default)]
    pub offset: f64,
    pub phases: Vec<LightPhase>,
}

impl TrafficLight {
    pub fn governs(&self, lane: usize) -> bool {
        self.lanes.is_empty() || self.lanes.contains(&lane)
    }

    pub fn color_at(&self, t: f64) -> LightColor {
        let cycle: f64 = self.phases.iter().map(|p| p.duration).sum();
        let mut phase_t = (t + self.offset).rem_euclid(cycle);
        for p in &self.phases {
            if phase_t < p.duration {
                return p.color;
            }
            phase_t -= p.duration;
        }
        self.phases.last().map(|p| p.color).unwrap_or(LightColor::Green)
    }
}

/// Straight multi-lane road. Lane 0 is the leftmost; lateral position `y`
/// grows to the right and lane `i` occupies `[i * w, (i + 1) * w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadMap {
    pub lane_width: f64,
    pub lanes: Vec<Lane>,
    /// Longitudinal position of the stop line (m).
    #[serde(default)]
    pub stop_line: Option<f64>,
    #[serde(default)]
    pub light: Option<TrafficLight>,
}

impl RoadMap {
    pub fn uniform(lane_count: usize, lane_width: f64) -> Self {
        Self {
            lane_width,
            lanes: vec![Lane::default(); lane_count],
            stop_line: None,
            light: None,
        }
    }

    pub fn lane_count(&self) -> usize {
        self.lanes.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lanes.is_empty() || !(self.lane_width > 0.0) {
            return Err(Error::Config("map needs at least one lane of positive width".into()));
        }
        if let Some(light) = &self.light {
            if light.phases.is_empty() || light.phases.iter().any(|p| !(p.duration > 0.0)) {
                return Err(Error::Config("traffic light phases must have positive durations".into()));
            }
            if light.lanes.iter().any(|&l| l >= self.lanes.len()) {
                return Err(Error::Config("traffic light refers to a missing lane".into()));
            }
        }
        Ok(())
    }

    pub fn has_lane(&self, lane: i64) -> bool {
        lane >= 0 && (lane as usize) < self.lanes.len()
    }

    pub fn lane_center(&self, lane: usize) -> Result<f64> {
        if lane >= self.lanes.len() {
            return Err(Error::NoSuchLane(lane as i64));
        }
        Ok((lane as f64 + 0.5) * self.lane_width)
    }

    /// Index of the lane whose half-open band contains `y`.
    pub fn lane_at(&self, y: f64) -> Result<usize> {
        let mut idx = (y / self.lane_width).floor();
        // Division can land one ulp on the wrong side of an edge `i * w`.
        if y < idx * self.lane_width {
            idx -= 1.0;
        } else if y >= (idx + 1.0) * self.lane_width {
            idx += 1.0;
        }
        if !y.is_finite() || idx < 0.0 || idx >= self.lanes.len() as f64 {
            return Err(Error::OffRoad { y });
        }
        Ok(idx as usize)
    }

    pub fn is_special(&self, lane: usize) -> bool {
        self.lanes.get(lane).is_some_and(|l| l.special)
    }

    pub fn is_opposing(&self, lane: usize) -> bool {
        self.lanes.get(lane).is_some_and(|l| l.direction == Direction::Opposing)
    }

    pub fn road_width(&self) -> f64 {
        self.lane_width * self.lanes.len() as f64
    }
}
