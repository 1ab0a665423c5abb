use std::collections::BTreeMap;

use lawshield::law::{eval_at, parse_formula};
use lawshield::trajectory::{generate, PlannerParams};
use lawshield::world::{
    builtin_registry, collides, gap_to, read_trace_csv, write_trace_csv, CsvRow, Grounded, GroundingContext,
    Indicator, RoadMap, Target, Trace, TraceStep, VehicleState, WorldState,
};
use lawshield::Error;
use proptest::prelude::*;

fn atom_at(steps: &[TraceStep], ctx: &GroundingContext, src: &str, consts: &[(&str, f64)], k: usize) -> lawshield::Result<bool> {
    let c: BTreeMap<String, f64> = consts.iter().map(|(n, v)| (n.to_string(), *v)).collect();
    let f = parse_formula(src, builtin_registry(), &c)?;
    let view = Trace::join(steps, &[])?;
    eval_at(&f, &Grounded::new(view, ctx, &c), k)
}

fn single(ego: VehicleState, other: VehicleState) -> Vec<TraceStep> {
    vec![TraceStep::new(WorldState { time: 0.0, ego, other })]
}

#[test]
fn indicator_for_exactly_three_seconds_counts() {
    let ctx = GroundingContext::new(RoadMap::uniform(2, 3.5));
    let mut ego = VehicleState::new(0.0, 1.75, 10.0);
    ego.indicator = Indicator::Right;
    for _ in 0..30 {
        ego.indicator_time += 0.1;
    }
    assert!((ego.indicator_time - 3.0).abs() < 1e-12);
    let other = VehicleState::new(50.0, 5.25, 10.0);
    assert!(atom_at(&single(ego, other), &ctx, "indicator_right_ge(3.0)", &[], 0).unwrap());
    ego.indicator_time = 3.0 - 1e-12;
    assert!(atom_at(&single(ego, other), &ctx, "indicator_right_ge(3.0)", &[], 0).unwrap());
    ego.indicator_time = 2.9;
    assert!(!atom_at(&single(ego, other), &ctx, "indicator_right_ge(3.0)", &[], 0).unwrap());
    ego.indicator = Indicator::Left;
    ego.indicator_time = 10.0;
    assert!(!atom_at(&single(ego, other), &ctx, "indicator_right_ge(3.0)", &[], 0).unwrap());
}

#[test]
fn gap_equal_to_threshold_is_not_enough() {
    let ctx = GroundingContext::new(RoadMap::uniform(2, 3.5));
    let ego = VehicleState::new(20.0, 5.25, 10.0);
    let other = VehicleState::new(4.0, 5.25, 10.0);
    assert_eq!(gap_to(&ego, &other), 12.0);
    let steps = single(ego, other);
    assert!(!atom_at(&steps, &ctx, "gap_gt(d_min)", &[("d_min", 12.0)], 0).unwrap());
    assert!(atom_at(&steps, &ctx, "gap_gt(d_min)", &[("d_min", 11.99)], 0).unwrap());
}

#[test]
fn missing_stop_line_is_an_error() {
    let ctx = GroundingContext::new(RoadMap::uniform(1, 3.5));
    let steps = single(VehicleState::new(0.0, 1.75, 5.0), VehicleState::new(50.0, 1.75, 5.0));
    assert!(matches!(
        atom_at(&steps, &ctx, "exceed_stop_line", &[], 0),
        Err(Error::MissingFeature(_))
    ));
    assert!(matches!(
        atom_at(&steps, &ctx, "light_red_on_ego_lane", &[], 0),
        Err(Error::MissingFeature(_))
    ));
}

#[test]
fn crossing_fires_once_per_generated_lane_change() {
    let map = RoadMap::uniform(3, 3.5);
    let ctx = GroundingContext::new(map.clone());
    let params = PlannerParams::new(20.0);
    let other = VehicleState::new(80.0, 8.75, 10.0);
    let prediction: Vec<_> = (0..=params.steps()).map(|_| other).collect();
    for (lane, lat) in [(0usize, 1i8), (1, 1), (1, 0), (2, -1)] {
        let s0 = WorldState { time: 0.0, ego: VehicleState::new(0.0, map.lane_center(lane).unwrap(), 12.0), other };
        let a = generate(&s0, Target::new(lat, 0.0), &map, &prediction, &params).unwrap();
        let count = |atom: &str| {
            (0..a.trace.len()).filter(|&k| atom_at(&a.trace, &ctx, atom, &[], k).unwrap()).count()
        };
        assert_eq!(count("cross_right_line"), usize::from(lat > 0), "lane {lane} lat {lat}");
        assert_eq!(count("cross_left_line"), usize::from(lat < 0), "lane {lane} lat {lat}");
    }
}

#[test]
fn csv_rejects_foreign_header() {
    let err = read_trace_csv("a,b,c\n1,2,3\n".as_bytes(), (4.0, 1.8), (4.0, 1.8)).unwrap_err();
    assert!(matches!(err, Error::Schema(_)));
}

fn arb_vehicle() -> impl Strategy<Value = VehicleState> {
    (-1e3f64..1e3, 0.0f64..10.0, 0.0f64..30.0, -2.0f64..2.0, 0..3usize, 0.0f64..5.0).prop_map(
        |(x, y, vx, vy, ind, it)| VehicleState {
            vy,
            indicator: [Indicator::Off, Indicator::Left, Indicator::Right][ind],
            indicator_time: it,
            ..VehicleState::new(x, y, vx)
        },
    )
}

fn arb_row() -> impl Strategy<Value = CsvRow> {
    (
        0.0f64..100.0,
        arb_vehicle(),
        arb_vehicle(),
        0..3usize,
        proptest::option::of((-1i8..=1, -1.0f64..=1.0)),
        "[a-z]{0,8}",
        any::<bool>(),
        proptest::option::of(0usize..1000),
        "[ -~]{0,30}",
    )
        .prop_map(|(time, ego, other, lane, action, policy, law_ok, veto_step, veto_formula)| CsvRow {
            state: WorldState { time, ego, other: VehicleState { indicator: Indicator::Off, indicator_time: 0.0, ..other } },
            ego_lane: lane,
            action: action.map(|(l, o)| Target::new(l, o)),
            policy,
            law_ok,
            veto_step,
            veto_formula,
        })
}

proptest! {
    #[test]
    fn lane_of_center_is_identity(n in 1usize..8, w in 2.0f64..5.0) {
        let map = RoadMap::uniform(n, w);
        for i in 0..n {
            prop_assert_eq!(map.lane_at(map.lane_center(i).unwrap()).unwrap(), i);
            prop_assert_eq!(map.lane_at(i as f64 * w).unwrap(), i);
        }
        prop_assert!(map.lane_at(n as f64 * w).is_err());
        prop_assert!(map.lane_center(n).is_err());
    }

    #[test]
    fn gap_is_symmetric_and_non_negative(a in arb_vehicle(), b in arb_vehicle()) {
        let g = gap_to(&a, &b);
        prop_assert!(g >= 0.0);
        prop_assert_eq!(g, gap_to(&b, &a));
        if g > 0.0 {
            prop_assert!(!collides(&a, &b));
        }
    }

    #[test]
    fn csv_round_trip(rows in proptest::collection::vec(arb_row(), 0..12)) {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        let back = read_trace_csv(buf.as_slice(), (4.0, 1.8), (4.0, 1.8)).unwrap();
        prop_assert_eq!(back, rows);
    }
}
