//! Kinematic state, road geometry, traces and the atoms that ground law
//! formulas in simulated states.

mod csv;
mod map;
mod predicates;
mod trace;

pub use csv::{read_trace_csv, write_trace_csv, CsvRow, TRACE_COLUMNS};
pub use map::{Direction, Lane, LightColor, LightPhase, RoadMap, TrafficLight};
pub use predicates::{builtin_registry, Grounded, GroundingContext, Predicate, PredicateRegistry};
pub use trace::{Trace, TraceStep, TraceView};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    #[default]
    Off,
    Left,
    Right,
}

impl Indicator {
    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::Off => "off",
            Indicator::Left => "left",
            Indicator::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "off" => Some(Indicator::Off),
            "left" => Some(Indicator::Left),
            "right" => Some(Indicator::Right),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Longitudinal position of the center (m).
    pub x: f64,
    /// Lateral position of the center (m), growing to the right.
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub indicator: Indicator,
    /// How long the indicator has been in its current state (s).
    pub indicator_time: f64,
    pub length: f64,
    pub width: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, vx: f64) -> Self {
        Self {
            x,
            y,
            vx,
            vy: 0.0,
            indicator: Indicator::Off,
            indicator_time: 0.0,
            length: 4.0,
            width: 1.8,
        }
    }

    pub fn lane(&self, map: &RoadMap) -> crate::Result<usize> {
        map.lane_at(self.y)
    }
}

/// Longitudinal bumper-to-bumper gap, floored at zero.
pub fn gap_to(ego: &VehicleState, other: &VehicleState) -> f64 {
    ((ego.x - other.x).abs() - 0.5 * (ego.length + other.length)).max(0.0)
}

/// Footprint overlap of two axis-aligned vehicle boxes.
pub fn collides(a: &VehicleState, b: &VehicleState) -> bool {
    (a.x - b.x).abs() < 0.5 * (a.length + b.length) && (a.y - b.y).abs() < 0.5 * (a.width + b.width)
}

/// Ego plus the single surrounding vehicle at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldState {
    pub time: f64,
    pub ego: VehicleState,
    pub other: VehicleState,
}

/// A long-term action target: lane offset and normalized acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// -1 left, 0 keep, +1 right.
    pub lat: i8,
    /// Normalized longitudinal acceleration in [-1, 1].
    pub lon: f64,
}

impl Target {
    pub const KEEP: Target = Target { lat: 0, lon: 0.0 };

    pub fn new(lat: i8, lon: f64) -> Self {
        Self { lat, lon }
    }
}
