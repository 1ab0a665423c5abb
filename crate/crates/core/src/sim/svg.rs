use std::fmt::Write as _;

use super::episode::EpisodeResult;
use crate::forecaster::PolicyTag;
use crate::world::RoadMap;

const PX_PER_M: f64 = 4.0;
const PAD: f64 = 20.0;

fn tag_color(tag: PolicyTag) -> &'static str {
    match tag {
        PolicyTag::Rl => "#1f77b4",
        PolicyTag::Backup => "#2ca02c",
        PolicyTag::Buffer => "#d62728",
    }
}

/// Top-down drawing of the road, the realized ego path colored by policy,
/// the other vehicle's path, and any dumped candidate fans.
pub fn render_svg(result: &EpisodeResult, map: &RoadMap) -> String {
    let xs = result
        .trace
        .steps
        .iter()
        .flat_map(|s| [s.state.ego.x, s.state.other.x])
        .chain(result.decisions.iter().flat_map(|d| d.candidates.iter().flatten().flat_map(|c| c.path.iter().map(|p| p[0]))));
    let (x_min, x_max) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (x_min, x_max) = if x_min.is_finite() { (x_min - 10.0, x_max + 10.0) } else { (0.0, 100.0) };
    let px = |x: f64| PAD + (x - x_min) * PX_PER_M;
    let py = |y: f64| PAD + y * PX_PER_M * 2.0;
    let width = px(x_max) + PAD;
    let height = py(map.road_width()) + PAD;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="#fafafa"/>"##);
    for (i, lane) in map.lanes.iter().enumerate() {
        let y0 = py(i as f64 * map.lane_width);
        let h = py((i + 1) as f64 * map.lane_width) - y0;
        let fill = if lane.special { "#fff3c4" } else if map.is_opposing(i) { "#f0e0e0" } else { "#e8e8e8" };
        let _ = writeln!(s, r#"<rect x="{:.1}" y="{y0:.1}" width="{:.1}" height="{h:.1}" fill="{fill}"/>"#, px(x_min), px(x_max) - px(x_min));
    }
    for i in 0..=map.lane_count() {
        let y = py(i as f64 * map.lane_width);
        let dash = if i == 0 || i == map.lane_count() { "" } else { r#" stroke-dasharray="8,6""# };
        let _ = writeln!(s, r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#888"{dash}/>"##, px(x_min), px(x_max));
    }
    if let Some(line) = map.stop_line {
        let _ = writeln!(s, r##"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="#d62728" stroke-width="3"/>"##, px(line), py(0.0), py(map.road_width()));
    }
    for d in &result.decisions {
        for c in d.candidates.iter().flatten() {
            let pts: Vec<String> = c.path.iter().map(|p| format!("{:.1},{:.1}", px(p[0]), py(p[1]))).collect();
            let (stroke, dash) = match (c.selected, c.safe, c.legal) {
                (true, _, _) => ("#2ca02c", ""),
                (_, false, _) => ("#e6b800", r#" stroke-dasharray="4,3""#),
                (_, _, false) => ("#d62728", r#" stroke-dasharray="2,3""#),
                _ => ("#9e9e9e", ""),
            };
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1"{dash}/>"#, pts.join(" "));
        }
    }
    let other: Vec<String> =
        result.trace.steps.iter().map(|st| format!("{:.1},{:.1}", px(st.state.other.x), py(st.state.other.y))).collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#555" stroke-width="2"/>"##, other.join(" "));
    for (w, tag) in result.trace.steps.windows(2).zip(&result.tags) {
        let (a, b) = (&w[0].state.ego, &w[1].state.ego);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{}" stroke-width="3"/>"#,
            px(a.x),
            py(a.y),
            px(b.x),
            py(b.y),
            tag_color(*tag)
        );
    }
    if let Some(k) = result.first_violation {
        let e = &result.trace.steps[k].state.ego;
        let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="6" fill="none" stroke="#d62728" stroke-width="2"/>"##, px(e.x), py(e.y));
    }
    let _ = writeln!(
        s,
        r##"<text x="{PAD}" y="14" font-family="monospace" font-size="12" fill="#333">{} / {} / {}: violations {}</text>"##,
        result.scenario,
        result.law,
        result.mode.as_str(),
        result.violations
    );
    s.push_str("</svg>\n");
    s
}
