use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lawshield::forecaster::PolicyTag;
use lawshield::law::LawFile;
use lawshield::rl::{self, Hyperparams, QTable};
use lawshield::sim::{self, EpisodeResult, Mode, RunOptions, Scenario};
use lawshield::world::{builtin_registry, read_trace_csv, write_trace_csv, GroundingContext, Trace, TraceStep};
use lawshield::Error;
use rayon::prelude::*;

const EXIT_VIOLATION: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "lawshield", version, about = "Law-adaptive shielded driving agent")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a Q-table on a scenario.
    Train(TrainArgs),
    /// Run one episode (or a seeded batch).
    Run(RunArgs),
    /// Audit a recorded trace against one or more laws.
    CheckTrace(CheckArgs),
    /// Draw a recorded trace as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Defaults to the scenario's training.episodes.
    #[arg(long)]
    episodes: Option<u64>,
    /// Defaults to the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for qtable.txt and curve.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Law file; defaults to the one named by the scenario.
    #[arg(long)]
    law: Option<PathBuf>,
    /// Rebind a law constant, e.g. `--set d_min=20`. Repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    qtable: Option<PathBuf>,
    #[arg(long, default_value = "shielded", value_parser = ["shielded", "rl-only", "backup-only"])]
    mode: String,
    /// Seed of the other-vehicle speed perturbation. Without it the scenario
    /// runs as written.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write episode.svg.
    #[arg(long)]
    render: bool,
    /// Include every backup candidate in decisions.json.
    #[arg(long)]
    dump_candidates: bool,
    /// Run N perturbed episodes, seeds seed..seed+N, in parallel.
    #[arg(long)]
    batch: Option<u64>,
}

#[derive(Args)]
struct CheckArgs {
    trace: PathBuf,
    /// Supplies the map and vehicle sizes.
    #[arg(long)]
    scenario: PathBuf,
    /// Repeatable; defaults to the scenario's law.
    #[arg(long)]
    law: Vec<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    trace: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LAWSHIELD_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.cmd {
        Command::Train(a) => cmd_train(a),
        Command::Run(a) => cmd_run(a),
        Command::CheckTrace(a) => cmd_check_trace(a),
        Command::Render(a) => cmd_render(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

type CmdResult = Result<u8, Error>;

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })
}

fn cmd_train(a: TrainArgs) -> CmdResult {
    let scenario = Scenario::load(&a.scenario)?;
    let episodes = a.episodes.unwrap_or(scenario.training.episodes);
    let seed = a.seed.unwrap_or(scenario.seed);
    if episodes == 0 {
        log::warn!("zero episodes: writing an empty table");
        eprintln!("warning: zero episodes, the table is empty");
    }
    let (table, curve) = rl::train(&scenario, episodes, seed, &Hyperparams::from_scenario(&scenario))?;
    ensure_dir(&a.out)?;
    table.save(a.out.join("qtable.txt"))?;
    rl::write_curve(create(&a.out.join("curve.csv"))?, &curve)?;
    let tail = &curve[curve.len().saturating_sub(100)..];
    let mean = if tail.is_empty() { 0.0 } else { tail.iter().map(|c| c.total_reward).sum::<f64>() / tail.len() as f64 };
    println!(
        "trained {} episodes (seed {seed}): {} states, mean return of last {} episodes {mean:.2}",
        episodes,
        table.q.len(),
        tail.len()
    );
    Ok(0)
}

fn parse_set(s: &str) -> Result<(String, f64), Error> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got `{s}`")))?;
    let v = v.trim().parse().map_err(|_| Error::Config(format!("`{v}` is not a number")))?;
    Ok((k.trim().to_string(), v))
}

fn load_law(scenario: &Scenario, law: Option<&Path>, set: &[String]) -> Result<LawFile, Error> {
    let mut law = match law {
        Some(p) => LawFile::load(p, builtin_registry())?,
        None => scenario.load_law()?,
    };
    for s in set {
        let (k, v) = parse_set(s)?;
        law = law.rebind_constant(&k, v)?;
    }
    Ok(law)
}

fn summary(r: &EpisodeResult) -> String {
    format!(
        "{} [{} | {}]{}: {} steps, violations {}, first violation {}, mean speed {:.2} m/s, rl/backup/buffer steps {}/{}/{}{}",
        r.scenario,
        r.law,
        r.mode.as_str(),
        r.perturbation.map(|s| format!(" seed {s}")).unwrap_or_default(),
        r.trace.len(),
        r.violations,
        r.first_violation.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
        r.mean_speed,
        r.count(PolicyTag::Rl),
        r.count(PolicyTag::Backup),
        r.count(PolicyTag::Buffer),
        if r.collided { ", COLLISION" } else { "" }
    )
}

fn cmd_run(a: RunArgs) -> CmdResult {
    let scenario = Scenario::load(&a.scenario)?;
    let law = load_law(&scenario, a.law.as_deref(), &a.set)?;
    let mode: Mode = a.mode.parse()?;
    let table = match &a.qtable {
        Some(p) => Some(QTable::load(p)?),
        None if mode == Mode::BackupOnly => None,
        None => return Err(Error::Config(format!("--qtable is required in {} mode", mode.as_str()))),
    };
    let ctx = scenario.grounding()?;

    if let Some(n) = a.batch {
        let base = a.seed.unwrap_or(scenario.seed);
        let results: Vec<Result<EpisodeResult, Error>> = (base..base + n)
            .into_par_iter()
            .map(|seed| {
                let opts = RunOptions { perturbation: Some(seed), ..RunOptions::default() };
                sim::run_episode(&scenario, mode, table.as_ref(), &law, &opts)
            })
            .collect();
        let results: Vec<EpisodeResult> = results.into_iter().collect::<Result<_, _>>()?;
        let mut rows = String::from("seed,violations,first_violation,collided,mean_speed,rl_steps,backup_steps,buffer_steps\n");
        for r in &results {
            rows.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.perturbation.unwrap_or_default(),
                r.violations,
                r.first_violation.map(|k| k.to_string()).unwrap_or_default(),
                r.collided as u8,
                r.mean_speed,
                r.count(PolicyTag::Rl),
                r.count(PolicyTag::Backup),
                r.count(PolicyTag::Buffer)
            ));
        }
        if let Some(out) = &a.out {
            ensure_dir(out)?;
            write(&out.join("batch.csv"), &rows)?;
        }
        let bad = results.iter().filter(|r| r.violations > 0).count();
        let crashes = results.iter().filter(|r| r.collided).count();
        println!("{n} episodes: {bad} with violations, {crashes} with collisions");
        return Ok(if bad > 0 { EXIT_VIOLATION } else { 0 });
    }

    let opts = RunOptions { perturbation: a.seed, dump_candidates: a.dump_candidates, ..RunOptions::default() };
    let r = sim::run_episode(&scenario, mode, table.as_ref(), &law, &opts)?;
    println!("{}", summary(&r));
    if let Some(f) = &r.failure {
        println!("first failing sub-formula at step {}: {} (path {})", f.step, f.formula, f.path);
    }
    if let Some(out) = &a.out {
        ensure_dir(out)?;
        write_trace_csv(create(&out.join("trace.csv"))?, &r.csv_rows(&ctx)?)?;
        write(&out.join("decisions.json"), &sim::decisions_json(&r.decisions)?)?;
        if a.render {
            write(&out.join("episode.svg"), &sim::render_svg(&r, &ctx.map))?;
        }
    }
    Ok(if r.violations > 0 { EXIT_VIOLATION } else { 0 })
}

fn read_trace(path: &Path, scenario: &Scenario) -> Result<(Trace, Vec<lawshield::world::CsvRow>), Error> {
    let file = File::open(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    let rows = read_trace_csv(
        file,
        (scenario.ego.length, scenario.ego.width),
        (scenario.other.length, scenario.other.width),
    )
    .map_err(|e| match e {
        Error::Format { line, msg, .. } => Error::Format { path: path.display().to_string(), line, msg },
        other => other,
    })?;
    let steps: Vec<TraceStep> = rows.iter().map(|r| TraceStep { state: r.state, action: r.action }).collect();
    let trace = Trace { dt: scenario.planner.dt, steps };
    trace.validate()?;
    Ok((trace, rows))
}

fn cmd_check_trace(a: CheckArgs) -> CmdResult {
    let scenario = Scenario::load(&a.scenario)?;
    let ctx: GroundingContext = scenario.grounding()?;
    let (trace, _) = read_trace(&a.trace, &scenario)?;
    let laws = if a.law.is_empty() {
        vec![scenario.load_law()?]
    } else {
        a.law.iter().map(|p| LawFile::load(p, builtin_registry())).collect::<Result<_, _>>()?
    };
    let mut any_violation = false;
    for law in &laws {
        let audit = sim::audit(&trace.steps, law, &ctx)?;
        let consts: Vec<String> = law.constants.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let consts = if consts.is_empty() { String::new() } else { format!(" ({})", consts.join(", ")) };
        if audit.satisfied {
            println!("{}{consts}: satisfied", law.name);
        } else {
            any_violation = true;
            let f = audit.failure.as_ref();
            println!(
                "{}{consts}: violated, {} failing step(s), first at step {}; sub-formula {} (path {})",
                law.name,
                audit.violations,
                f.map(|f| f.step).or(audit.first_violation).unwrap_or_default(),
                f.map(|f| f.formula.as_str()).unwrap_or("-"),
                f.map(|f| f.path.as_str()).unwrap_or("-"),
            );
        }
    }
    Ok(if any_violation { EXIT_VIOLATION } else { 0 })
}

fn cmd_render(a: RenderArgs) -> CmdResult {
    let scenario = Scenario::load(&a.scenario)?;
    let ctx = scenario.grounding()?;
    let law = scenario.load_law()?;
    let (trace, rows) = read_trace(&a.trace, &scenario)?;
    let tags = rows
        .iter()
        .map(|r| match r.policy.as_str() {
            "rl" => Ok(PolicyTag::Rl),
            "backup" => Ok(PolicyTag::Backup),
            "buffer" => Ok(PolicyTag::Buffer),
            other => Err(Error::Schema(format!("unknown policy `{other}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let audit = sim::audit(&trace.steps, &law, &ctx)?;
    let mean_speed = trace.steps.iter().map(|s| s.state.ego.vx).sum::<f64>() / trace.len().max(1) as f64;
    let result = EpisodeResult {
        scenario: scenario.name.clone(),
        law: law.name.clone(),
        mode: Mode::Shielded,
        perturbation: None,
        tags,
        law_ok: audit.law_ok,
        violations: audit.violations,
        first_violation: audit.first_violation,
        failure: audit.failure,
        mean_speed,
        completed: true,
        collided: false,
        decisions: Vec::new(),
        trace,
    };
    write(&a.out, &sim::render_svg(&result, &ctx.map))?;
    Ok(0)
}
