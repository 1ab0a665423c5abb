use crate::world::Target;

pub const LAT_LEVELS: [i8; 3] = [-1, 0, 1];
pub const LON_LEVELS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
pub const N_ACTIONS: usize = LAT_LEVELS.len() * LON_LEVELS.len();

/// Index of `(0, 0)`: keep lane, hold speed.
pub const DEFAULT_ACTION: usize = 7;

/// The fixed 15-action grid, lateral-major.
pub fn action(index: usize) -> Target {
    Target::new(LAT_LEVELS[index / LON_LEVELS.len()], LON_LEVELS[index % LON_LEVELS.len()])
}

pub fn action_index(t: Target) -> Option<usize> {
    let lat = LAT_LEVELS.iter().position(|&l| l == t.lat)?;
    let lon = LON_LEVELS.iter().position(|&l| l == t.lon)?;
    Some(lat * LON_LEVELS.len() + lon)
}

pub fn all_actions() -> impl Iterator<Item = Target> {
    (0..N_ACTIONS).map(action)
}

/// Which actions keep the ego on a road of `lane_count` lanes.
pub fn valid_mask(ego_lane: usize, lane_count: usize) -> [bool; N_ACTIONS] {
    let mut mask = [false; N_ACTIONS];
    for (i, m) in mask.iter_mut().enumerate() {
        let lane = ego_lane as i64 + action(i).lat as i64;
        *m = lane >= 0 && lane < lane_count as i64;
    }
    mask
}
