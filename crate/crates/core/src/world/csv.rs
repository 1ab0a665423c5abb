//! Trace CSV export and import.
//!
//! The first thirteen columns are fixed; the trailing columns carry what an
//! offline audit needs to rebuild the states plus the per-decision veto log.

use std::io::{Read, Write};

use super::{Indicator, Target, VehicleState, WorldState};
use crate::error::{Error, Result};

pub const TRACE_COLUMNS: [&str; 18] = [
    "t",
    "ego_x",
    "ego_y",
    "ego_vx",
    "ego_vy",
    "ego_lane",
    "other_x",
    "other_vx",
    "indicator",
    "action_lat",
    "action_lon",
    "policy",
    "law_ok",
    "other_y",
    "other_vy",
    "indicator_time",
    "veto_step",
    "veto_formula",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub state: WorldState,
    pub ego_lane: usize,
    pub action: Option<Target>,
    pub policy: String,
    pub law_ok: bool,
    /// Earliest failing step (absolute trace index) of a vetoed candidate.
    pub veto_step: Option<usize>,
    pub veto_formula: String,
}

pub fn write_trace_csv<W: Write>(out: W, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS).map_err(csv_err)?;
    for r in rows {
        let s = &r.state;
        let (lat, lon) = match r.action {
            Some(a) => (a.lat.to_string(), a.lon.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            s.time.to_string(),
            s.ego.x.to_string(),
            s.ego.y.to_string(),
            s.ego.vx.to_string(),
            s.ego.vy.to_string(),
            r.ego_lane.to_string(),
            s.other.x.to_string(),
            s.other.vx.to_string(),
            s.ego.indicator.as_str().to_string(),
            lat,
            lon,
            r.policy.clone(),
            (r.law_ok as u8).to_string(),
            s.other.y.to_string(),
            s.other.vy.to_string(),
            s.ego.indicator_time.to_string(),
            r.veto_step.map(|v| v.to_string()).unwrap_or_default(),
            r.veto_formula.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Reads a trace written by [`write_trace_csv`]. Vehicle dimensions are not
/// part of the file and are taken from `ego_dims` / `other_dims`.
pub fn read_trace_csv<R: Read>(
    input: R,
    ego_dims: (f64, f64),
    other_dims: (f64, f64),
) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.len() < 13 || headers.iter().zip(TRACE_COLUMNS).any(|(h, c)| h != c) {
        return Err(Error::Schema(format!(
            "expected columns {}, found {}",
            TRACE_COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (oy, ovy, itime) = (col("other_y"), col("other_vy"), col("indicator_time"));
    let (vstep, vform) = (col("veto_step"), col("veto_formula"));

    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(csv_err)?;
        let field = |idx: usize| rec.get(idx).unwrap_or("");
        let num = |idx: usize| -> Result<f64> {
            field(idx).trim().parse::<f64>().map_err(|_| Error::Format {
                path: "<trace>".into(),
                line,
                msg: format!("column `{}` is not a number: `{}`", headers[idx].to_string(), field(idx)),
            })
        };
        let opt_num = |idx: Option<usize>| -> Result<f64> {
            match idx {
                Some(i) if !field(i).trim().is_empty() => num(i),
                _ => Ok(0.0),
            }
        };
        let bad = |msg: String| Error::Format { path: "<trace>".into(), line, msg };

        let indicator =
            Indicator::parse(field(8).trim()).ok_or_else(|| bad(format!("bad indicator `{}`", field(8))))?;
        let action = if field(9).trim().is_empty() {
            None
        } else {
            let lat = field(9).trim().parse::<i8>().map_err(|_| bad("bad action_lat".into()))?;
            Some(Target::new(lat, num(10)?))
        };
        let law_ok = match field(12).trim() {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("law_ok must be 0 or 1, got `{other}`"))),
        };
        let ego = VehicleState {
            x: num(1)?,
            y: num(2)?,
            vx: num(3)?,
            vy: num(4)?,
            indicator,
            indicator_time: opt_num(itime)?,
            length: ego_dims.0,
            width: ego_dims.1,
        };
        let other = VehicleState {
            x: num(6)?,
            y: opt_num(oy)?,
            vx: num(7)?,
            vy: opt_num(ovy)?,
            indicator: Indicator::Off,
            indicator_time: 0.0,
            length: other_dims.0,
            width: other_dims.1,
        };
        let ego_lane = field(5).trim().parse::<usize>().map_err(|_| bad("bad ego_lane".into()))?;
        let veto_step = match vstep {
            Some(i) if !field(i).trim().is_empty() => {
                Some(field(i).trim().parse::<usize>().map_err(|_| bad("bad veto_step".into()))?)
            }
            _ => None,
        };
        rows.push(CsvRow {
            state: WorldState { time: num(0)?, ego, other },
            ego_lane,
            action,
            policy: field(11).trim().to_string(),
            law_ok,
            veto_step,
            veto_formula: vform.map(|i| field(i).to_string()).unwrap_or_default(),
        });
    }
    Ok(rows)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Schema(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64) -> CsvRow {
        let mut ego = VehicleState::new(1.5, 5.25, 12.25);
        ego.indicator = Indicator::Right;
        ego.indicator_time = 0.30000000000000004;
        CsvRow {
            state: WorldState { time: t, ego, other: VehicleState::new(40.0, 5.25, 8.0) },
            ego_lane: 1,
            action: Some(Target::new(1, 0.2)),
            policy: "backup".into(),
            law_ok: true,
            veto_step: Some(17),
            veto_formula: "gap_gt(max(d_min, (d0 - (tau * dv))))".into(),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = vec![row(0.0), row(0.1)];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        let back = read_trace_csv(buf.as_slice(), (4.0, 1.8), (4.0, 1.8)).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn wrong_header_is_schema_error() {
        let text = "t,ego_x\n0,1\n";
        assert!(matches!(read_trace_csv(text.as_bytes(), (4.0, 1.8), (4.0, 1.8)), Err(Error::Schema(_))));
    }

    #[test]
    fn bad_cell_reports_line() {
        let rows = vec![row(0.0)];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap().replace(",12.25,", ",fast,");
        match read_trace_csv(text.as_bytes(), (4.0, 1.8), (4.0, 1.8)) {
            Err(Error::Format { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
