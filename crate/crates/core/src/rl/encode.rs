use crate::error::Result;
use crate::world::{RoadMap, WorldState};

/// Bin widths and clipping ranges of the discretized state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binning {
    pub ego_vx: f64,
    pub rel_x: f64,
    pub rel_x_clip: f64,
    pub rel_vx: f64,
    pub rel_vx_clip: f64,
}

impl Default for Binning {
    fn default() -> Self {
        Self { ego_vx: 2.0, rel_x: 5.0, rel_x_clip: 50.0, rel_vx: 2.0, rel_vx_clip: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey {
    pub ego_lane: u8,
    pub ego_vx: i16,
    /// Other minus ego, longitudinal.
    pub rel_x: i16,
    /// Other minus ego, longitudinal speed.
    pub rel_vx: i16,
    pub other_lane: u8,
    /// Signal colour code when the map has a light.
    pub light: Option<u8>,
}

fn bin(v: f64, width: f64) -> i16 {
    (v / width).floor() as i16
}

pub fn encode_state(s: &WorldState, map: &RoadMap, bins: &Binning) -> Result<StateKey> {
    let rel_x = (s.other.x - s.ego.x).clamp(-bins.rel_x_clip, bins.rel_x_clip);
    let rel_vx = (s.other.vx - s.ego.vx).clamp(-bins.rel_vx_clip, bins.rel_vx_clip);
    Ok(StateKey {
        ego_lane: map.lane_at(s.ego.y)? as u8,
        ego_vx: bin(s.ego.vx, bins.ego_vx),
        rel_x: bin(rel_x, bins.rel_x),
        rel_vx: bin(rel_vx, bins.rel_vx),
        other_lane: map.lane_at(s.other.y)? as u8,
        light: map.light.as_ref().map(|l| l.color_at(s.time).code()),
    })
}
