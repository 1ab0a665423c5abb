use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};
use lawshield::backup::BackupPlanner;
use lawshield::law::eval_trace;
use lawshield::rl::{train, Hyperparams};
use lawshield::sim::{run_episode, Mode, RunOptions, Scenario};
use lawshield::trajectory::generate;
use lawshield::world::{Grounded, Target, Trace, TraceStep};

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/{name}.toml"));
    Scenario::load(path).unwrap()
}

fn engine(c: &mut Criterion) {
    let s = scenario("overtaking");
    let law = s.load_law().unwrap();
    let ctx = s.grounding().unwrap();
    let params = s.planner_params();
    let script = s.base_script().unwrap();
    let s0 = s.initial_state(&script).unwrap();
    let prediction = script.predict(0, params.steps()).unwrap();
    let q = train(&s, s.training.episodes, s.seed, &Hyperparams::from_scenario(&s)).unwrap().0;
    let episode = run_episode(&s, Mode::Shielded, Some(&q), &law, &RunOptions::default()).unwrap();

    c.bench_function("law/eval_full_episode", |b| {
        let view = Trace::join(&episode.trace.steps, &[]).unwrap();
        b.iter(|| eval_trace(&law.formula, &Grounded::new(view, &ctx, &law.constants)).unwrap())
    });
    c.bench_function("trajectory/generate", |b| {
        b.iter(|| generate(black_box(&s0), Target::new(1, 0.2), &ctx.map, &prediction, &params).unwrap())
    });
    c.bench_function("backup/plan", |b| {
        let planner = BackupPlanner { weights: s.backup, params, v_ref: s.v_ref };
        let hist = [TraceStep::new(s0)];
        b.iter(|| planner.plan(black_box(&hist), &prediction, &law, &ctx).unwrap())
    });
    c.bench_function("sim/run_episode_shielded", |b| {
        b.iter(|| run_episode(&s, Mode::Shielded, Some(&q), &law, &RunOptions::default()).unwrap())
    });
    let mut g = c.benchmark_group("rl");
    g.sample_size(10);
    g.bench_function("train_500", |b| {
        b.iter(|| train(&s, 500, black_box(1), &Hyperparams::from_scenario(&s)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, engine);
criterion_main!(benches);
