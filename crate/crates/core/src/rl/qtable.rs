//! Tabular action values and their text persistence.
//!
//! File layout (one record per line, fields separated by single spaces):
//!
//! ```text
//! lawshield-qtable 1
//! seed <u64>
//! episodes <u64>
//! actions <lat>:<lon> x15
//! bins <ego_vx> <rel_x> <rel_x_clip> <rel_vx> <rel_vx_clip>
//! entries <n>
//! <ego_lane> <ego_vx> <rel_x> <rel_vx> <other_lane> <light|-> <q0..q14> <n0..n14>
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so reading a written
//! table reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::actions::{action, valid_mask, DEFAULT_ACTION, N_ACTIONS};
use super::encode::{Binning, StateKey};
use crate::error::{Error, Result};
use crate::world::Target;

const MAGIC: &str = "lawshield-qtable 1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry<const A: usize> {
    pub values: [f64; A],
    pub visits: [u32; A],
}

impl<const A: usize> Default for Entry<A> {
    fn default() -> Self {
        Self { values: [0.0; A], visits: [0; A] }
    }
}

/// Action values keyed by a discrete state.
#[derive(Debug, Clone, PartialEq)]
pub struct QValues<K: Ord, const A: usize> {
    pub entries: BTreeMap<K, Entry<A>>,
}

impl<K: Ord + Clone, const A: usize> Default for QValues<K, A> {
    fn default() -> Self {
        Self { entries: BTreeMap::new() }
    }
}

impl<K: Ord + Clone, const A: usize> QValues<K, A> {
    pub fn get(&self, key: &K) -> Option<&Entry<A>> {
        self.entries.get(key)
    }

    /// Highest value among the allowed actions; 0 for an unseen state.
    pub fn max_value(&self, key: &K, mask: &[bool; A]) -> f64 {
        match self.entries.get(key) {
            None => 0.0,
            Some(e) => e
                .values
                .iter()
                .zip(mask)
                .filter(|(_, &ok)| ok)
                .map(|(v, _)| *v)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Greedy allowed action; ties go to the lowest index.
    pub fn greedy(&self, key: &K, mask: &[bool; A]) -> Option<usize> {
        let e = self.entries.get(key)?;
        let mut best: Option<usize> = None;
        for i in (0..A).filter(|&i| mask[i]) {
            if best.is_none_or(|b| e.values[i] > e.values[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// One Q-learning step toward `target`.
    pub fn update(&mut self, key: K, action: usize, target: f64, alpha: f64) {
        let e = self.entries.entry(key).or_default();
        e.values[action] += alpha * (target - e.values[action]);
        e.visits[action] = e.visits[action].saturating_add(1);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QMeta {
    pub seed: u64,
    pub episodes: u64,
    pub bins: Binning,
}

/// The trained driving agent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QTable {
    pub meta: QMeta,
    pub q: QValues<StateKey, N_ACTIONS>,
}

impl QTable {
    pub fn new(meta: QMeta) -> Self {
        Self { meta, q: QValues::default() }
    }

    /// Greedy action for `key` on a road with `lane_count` lanes; unseen
    /// states get the keep-lane, hold-speed default.
    pub fn act(&self, key: &StateKey, lane_count: usize) -> Target {
        let mask = valid_mask(key.ego_lane as usize, lane_count);
        action(self.q.greedy(key, &mask).unwrap_or(DEFAULT_ACTION))
    }

    pub fn to_text(&self) -> String {
        let b = &self.meta.bins;
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "seed {}", self.meta.seed);
        let _ = writeln!(s, "episodes {}", self.meta.episodes);
        s.push_str("actions");
        for i in 0..N_ACTIONS {
            let a = action(i);
            let _ = write!(s, " {}:{:?}", a.lat, a.lon);
        }
        s.push('\n');
        let _ = writeln!(
            s,
            "bins {:?} {:?} {:?} {:?} {:?}",
            b.ego_vx, b.rel_x, b.rel_x_clip, b.rel_vx, b.rel_vx_clip
        );
        let _ = writeln!(s, "entries {}", self.q.len());
        for (k, e) in &self.q.entries {
            let light = k.light.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
            let _ = write!(
                s,
                "{} {} {} {} {} {}",
                k.ego_lane, k.ego_vx, k.rel_x, k.rel_vx, k.other_lane, light
            );
            for v in &e.values {
                let _ = write!(s, " {v:?}");
            }
            for n in &e.visits {
                let _ = write!(s, " {n}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str, path: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Format { path: path.into(), line, msg: msg.into() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| lines.next().ok_or_else(|| bad(0, &format!("missing {what}")));

        let (ln, l) = next("header")?;
        if l != MAGIC {
            return Err(bad(ln, "not a lawshield q-table"));
        }
        let field = |(ln, l): (usize, &str), key: &str| -> Result<Vec<String>> {
            let mut it = l.split(' ');
            if it.next() != Some(key) {
                return Err(bad(ln, &format!("expected `{key}`")));
            }
            Ok(it.map(str::to_string).collect())
        };
        let num = |ln: usize, s: &str| s.parse::<f64>().map_err(|_| bad(ln, &format!("bad number `{s}`")));

        let seed_line = next("seed")?;
        let seed = field(seed_line, "seed")?
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(seed_line.0, "bad seed"))?;
        let ep_line = next("episodes")?;
        let episodes = field(ep_line, "episodes")?
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(ep_line.0, "bad episode count"))?;
        let act_line = next("actions")?;
        let acts = field(act_line, "actions")?;
        let expected: Vec<String> =
            (0..N_ACTIONS).map(|i| format!("{}:{:?}", action(i).lat, action(i).lon)).collect();
        if acts != expected {
            return Err(bad(act_line.0, "action grid differs from this build"));
        }
        let bin_line = next("bins")?;
        let bv = field(bin_line, "bins")?;
        if bv.len() != 5 {
            return Err(bad(bin_line.0, "expected five bin parameters"));
        }
        let bins = Binning {
            ego_vx: num(bin_line.0, &bv[0])?,
            rel_x: num(bin_line.0, &bv[1])?,
            rel_x_clip: num(bin_line.0, &bv[2])?,
            rel_vx: num(bin_line.0, &bv[3])?,
            rel_vx_clip: num(bin_line.0, &bv[4])?,
        };
        let ent_line = next("entries")?;
        let count: usize = field(ent_line, "entries")?
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(ent_line.0, "bad entry count"))?;

        let mut q = QValues::default();
        for _ in 0..count {
            let (ln, l) = next("entry")?;
            let f: Vec<&str> = l.split(' ').collect();
            if f.len() != 6 + 2 * N_ACTIONS {
                return Err(bad(ln, "wrong number of fields"));
            }
            let int = |s: &str| s.parse::<i64>().map_err(|_| bad(ln, &format!("bad integer `{s}`")));
            let key = StateKey {
                ego_lane: int(f[0])? as u8,
                ego_vx: int(f[1])? as i16,
                rel_x: int(f[2])? as i16,
                rel_vx: int(f[3])? as i16,
                other_lane: int(f[4])? as u8,
                light: if f[5] == "-" { None } else { Some(int(f[5])? as u8) },
            };
            let mut e = Entry::<N_ACTIONS>::default();
            for i in 0..N_ACTIONS {
                let v = num(ln, f[6 + i])?;
                if !v.is_finite() {
                    return Err(bad(ln, "non-finite value"));
                }
                e.values[i] = v;
                e.visits[i] = int(f[6 + N_ACTIONS + i])? as u32;
            }
            q.entries.insert(key, e);
        }
        if let Some((ln, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(bad(ln, &format!("trailing content `{l}`")));
        }
        Ok(QTable { meta: QMeta { seed, episodes, bins }, q })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(lane: u8) -> StateKey {
        StateKey { ego_lane: lane, ego_vx: 7, rel_x: -3, rel_vx: 1, other_lane: 1, light: None }
    }

    #[test]
    fn unseen_state_gets_default() {
        let t = QTable::default();
        assert_eq!(t.act(&key(1), 3), Target::KEEP);
    }

    #[test]
    fn ties_go_to_lowest_valid_index() {
        let mut t = QTable::default();
        t.q.entries.insert(key(1), Entry { values: [1.0; N_ACTIONS], visits: [1; N_ACTIONS] });
        assert_eq!(t.act(&key(1), 3), action(0));
        // lane 0 cannot go further left: indices 0..5 are masked
        t.q.entries.insert(key(0), Entry { values: [1.0; N_ACTIONS], visits: [1; N_ACTIONS] });
        assert_eq!(t.act(&key(0), 3), action(5));
    }

    #[test]
    fn masked_max_ignores_invalid_actions() {
        let mut q = QValues::<u8, 3>::default();
        q.update(0, 0, -5.0, 1.0);
        q.update(0, 1, -2.0, 1.0);
        assert_eq!(q.max_value(&0, &[true, true, false]), -2.0);
        assert_eq!(q.max_value(&0, &[true, true, true]), 0.0);
        assert_eq!(q.max_value(&9, &[true, true, true]), 0.0);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(QTable::from_text("hello\n", "x").is_err());
        let mut text = QTable::default().to_text();
        text = text.replace("entries 0", "entries 1");
        assert!(QTable::from_text(&text, "x").is_err());
    }

    fn arb_key() -> impl Strategy<Value = StateKey> {
        (0u8..4, -2i16..12, -10i16..11, -5i16..6, 0u8..4, proptest::option::of(0u8..3)).prop_map(
            |(ego_lane, ego_vx, rel_x, rel_vx, other_lane, light)| StateKey {
                ego_lane,
                ego_vx,
                rel_x,
                rel_vx,
                other_lane,
                light,
            },
        )
    }

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(
            seed in any::<u64>(),
            rows in proptest::collection::vec(
                (arb_key(), proptest::array::uniform15(-1e6f64..1e6), proptest::array::uniform15(any::<u32>())),
                0..20,
            )
        ) {
            let mut t = QTable::new(QMeta { seed, episodes: 3, bins: Binning::default() });
            for (k, values, visits) in rows {
                t.q.entries.insert(k, Entry { values, visits });
            }
            let back = QTable::from_text(&t.to_text(), "mem").unwrap();
            prop_assert_eq!(back.to_text(), t.to_text());
            for (k, e) in &t.q.entries {
                let b = &back.q.entries[k];
                for i in 0..N_ACTIONS {
                    prop_assert_eq!(b.values[i].to_bits(), e.values[i].to_bits());
                }
            }
        }
    }
}
