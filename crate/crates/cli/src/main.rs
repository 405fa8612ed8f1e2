use std::fs;
use std::io::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

use dateline::benchgen::{gen_cushing, BenchType, GadgetSpec};
use dateline::domain::{parse_domain_with, validate_domain, Domain};
use dateline::encoder::{encode, ObjectiveKind};
use dateline::search::{find_plan, Limits, Plan, SearchOutcome, SearchReport};
use dateline::solver::SolverConfig;
use dateline::theory::{default_copy_cap, default_horizon, instantiate};
use dateline::validator::validate_plan;

const EXIT_FOUND: u8 = 0;
const EXIT_EXHAUSTED: u8 = 1;
const EXIT_LIMIT: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "dateline",
    version,
    about = "Temporal planning with interval-logic datelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a gadget benchmark domain.
    Gen(GenArgs),
    /// Encode a domain at a fixed number of stages and dump the model.
    Encode(EncodeArgs),
    /// Search for a plan, write it, and print a run record.
    Solve(SolveArgs),
    /// Check a plan against a domain.
    Validate(ValidateArgs),
    /// Run a gadget sweep and append run records to a CSV file.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct GadgetArgs {
    /// Gadget type: I, II or III.
    #[arg(long = "type")]
    kind: BenchType,
    /// Stack height (types II and III).
    #[arg(long)]
    height: Option<u32>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    gadget: GadgetArgs,
    #[arg(long)]
    copies: u32,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct IoArgs {
    /// Reject unknown keys in input documents.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    strict_io: bool,
}

#[derive(Args)]
struct EncodeArgs {
    domain: PathBuf,
    /// Number of stages.
    #[arg(long)]
    n: u32,
    #[arg(long)]
    max_copies: Option<u32>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, default_value = "none")]
    objective: ObjectiveKind,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 20)]
    max_n: u32,
    #[arg(long)]
    max_copies: Option<u32>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long, default_value = "none")]
    objective: ObjectiveKind,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 300.0)]
    time_budget: f64,
    /// Randomizes value order when non-zero.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probe N = 1, 2, 4, ... instead of every N.
    #[arg(long)]
    geometric_n: bool,
}

impl SearchArgs {
    fn limits(&self) -> Result<(Limits, SolverConfig)> {
        if !(self.time_budget.is_finite() && self.time_budget > 0.0) {
            bail!("--time-budget must be a positive number of seconds");
        }
        let budget = Duration::from_secs_f64(self.time_budget);
        let limits = Limits {
            max_n: self.max_n,
            copy_cap: self.max_copies,
            horizon: self.horizon,
            time_budget: Some(budget),
            geometric: self.geometric_n,
        };
        let cfg = SolverConfig {
            time_budget: Some(budget),
            seed: self.seed,
            ..SolverConfig::default()
        };
        Ok((limits, cfg))
    }
}

#[derive(Args)]
struct SolveArgs {
    domain: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    /// Plan file; defaults to the domain path with a `.plan.json` extension.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Print the timing diagram to standard error.
    #[arg(long)]
    diagram: bool,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct ValidateArgs {
    domain: PathBuf,
    plan: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    gadget: GadgetArgs,
    /// Copy range such as `1..5`, or a single count.
    #[arg(long, value_parser = parse_range)]
    copies: RangeInclusive<u32>,
    /// Height range for types II and III.
    #[arg(long = "heights", value_parser = parse_range)]
    heights: Option<RangeInclusive<u32>>,
    /// CSV file the records are appended to.
    #[arg(long)]
    csv: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    search: SearchArgs,
}

fn parse_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let lo: u32 = lo.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
    let hi: u32 = hi.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
    if lo > hi {
        return Err(format!("empty range `{s}`"));
    }
    Ok(lo..=hi)
}

/// One line of benchmark output. Field order is the CSV column order.
#[derive(Debug, Clone, Serialize)]
struct RunRecord {
    instance: String,
    #[serde(rename = "type")]
    kind: Option<BenchType>,
    copies: Option<u32>,
    height: Option<u32>,
    n_found: Option<u32>,
    bool_vars: usize,
    int_vars: usize,
    nodes: u64,
    wall_ms: u128,
    objective: Option<String>,
    verdict: String,
}

const CSV_HEADER: [&str; 11] = [
    "instance",
    "type",
    "copies",
    "height",
    "n_found",
    "bool_vars",
    "int_vars",
    "nodes",
    "wall_ms",
    "objective",
    "verdict",
];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_domain(path: &Path, io: &IoArgs) -> Result<Domain> {
    let d = parse_domain_with(&read(path)?, io.strict_io)
        .with_context(|| format!("malformed domain {}", path.display()))?;
    let diags = validate_domain(&d);
    if !diags.is_empty() {
        for diag in &diags {
            eprintln!("{diag}");
        }
        bail!(
            "domain {} violates {} invariant(s)",
            path.display(),
            diags.len()
        );
    }
    Ok(d)
}

fn gadget_spec(g: &GadgetArgs, copies: u32) -> GadgetSpec {
    GadgetSpec {
        kind: g.kind,
        copies,
        height: g.height,
        durations: Default::default(),
    }
}

fn cmd_gen(a: GenArgs) -> Result<u8> {
    let spec = gadget_spec(&a.gadget, a.copies);
    let d = gen_cushing(&spec)?;
    let text = d.to_json();
    match a.out {
        Some(p) => write(&p, &text)?,
        None => println!("{text}"),
    }
    Ok(0)
}

fn cmd_encode(a: EncodeArgs) -> Result<u8> {
    let d = load_domain(&a.domain, &a.io)?;
    let k = a.max_copies.unwrap_or_else(|| default_copy_cap(a.n));
    let h = a.horizon.unwrap_or_else(|| default_horizon(&d, a.n));
    let shape = instantiate(&d, a.n, k, h)?;
    let text = encode(&shape, a.objective).export();
    match a.out {
        Some(p) => write(&p, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

/// Runs the search and summarizes it as a record plus the plan to write.
fn run(
    instance: String,
    d: &Domain,
    s: &SearchArgs,
) -> Result<(RunRecord, Option<Plan>, SearchReport)> {
    let (limits, cfg) = s.limits()?;
    let started = Instant::now();
    let report = find_plan(d, s.objective, &limits, &cfg)?;
    let wall_ms = started.elapsed().as_millis();
    let last = report.probes.last();
    let (n_found, plan, verdict) = match &report.outcome {
        SearchOutcome::Found { plan, n, .. } => {
            let v = if validate_plan(d, plan).is_valid() {
                "valid"
            } else {
                "invalid"
            };
            (Some(*n), Some(plan.clone()), v.to_string())
        }
        SearchOutcome::ExhaustedN => (None, None, "exhausted".into()),
        SearchOutcome::ResourceLimit { incumbent, .. } => (None, incumbent.clone(), "limit".into()),
    };
    let rec = RunRecord {
        instance,
        kind: None,
        copies: None,
        height: None,
        n_found,
        bool_vars: last.map_or(0, |p| p.bool_vars),
        int_vars: last.map_or(0, |p| p.int_vars),
        nodes: report.nodes(),
        wall_ms,
        objective: plan
            .as_ref()
            .and_then(|p| p.objective)
            .map(|c| c.to_string()),
        verdict,
    };
    Ok((rec, plan, report))
}

fn cmd_solve(a: SolveArgs) -> Result<u8> {
    let d = load_domain(&a.domain, &a.io)?;
    let instance = a
        .domain
        .file_stem()
        .map_or_else(|| "domain".into(), |s| s.to_string_lossy().into_owned());
    let (rec, plan, report) = run(instance, &d, &a.search)?;
    let out = a
        .out
        .unwrap_or_else(|| a.domain.with_extension("plan.json"));
    if let Some(p) = &plan {
        write(&out, &p.to_json())?;
    }
    if a.diagram {
        if let SearchOutcome::Found { diagram, .. } = &report.outcome {
            eprint!("{}", diagram.render());
        }
    }
    println!("{}", serde_json::to_string(&rec)?);
    Ok(match report.outcome {
        SearchOutcome::Found { .. } => EXIT_FOUND,
        SearchOutcome::ExhaustedN => {
            eprintln!("no plan with at most {} stages", a.search.max_n);
            EXIT_EXHAUSTED
        }
        SearchOutcome::ResourceLimit { n, reason, .. } => {
            eprintln!("resource limit at n = {n}: {reason}");
            EXIT_LIMIT
        }
    })
}

fn cmd_validate(a: ValidateArgs) -> Result<u8> {
    let d = load_domain(&a.domain, &a.io)?;
    let plan = Plan::from_json(&read(&a.plan)?)
        .with_context(|| format!("malformed plan {}", a.plan.display()))?;
    let report = validate_plan(&d, &plan);
    if a.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    Ok(if report.is_valid() { 0 } else { 1 })
}

fn cmd_bench(a: BenchArgs) -> Result<u8> {
    let heights: Vec<Option<u32>> = match (a.gadget.kind, &a.heights, a.gadget.height) {
        (BenchType::I, None, None) => vec![None],
        (BenchType::I, _, _) => bail!("type I takes no height"),
        (_, Some(r), None) => r.clone().map(Some).collect(),
        (_, None, Some(h)) => vec![Some(h)],
        (_, Some(_), Some(_)) => bail!("give either --height or --heights"),
        (_, None, None) => bail!("types II and III need --height or --heights"),
    };
    // Every gadget action runs exactly once.
    let mut search = a.search.clone();
    search.max_copies.get_or_insert(1);
    search.limits()?;
    let mut specs = Vec::new();
    for h in &heights {
        for m in a.copies.clone() {
            let spec = match h {
                Some(h) => GadgetSpec::stacked(a.gadget.kind, m, *h),
                None => GadgetSpec::type_i(m),
            };
            specs.push((spec, gen_cushing(&spec)?));
        }
    }

    let results: Vec<Mutex<Option<Result<RunRecord>>>> =
        specs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..a.jobs.clamp(1, specs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((spec, d)) = specs.get(i) else { break };
                let r = run(spec.instance_id(), d, &search).map(|(mut rec, _, _)| {
                    rec.kind = Some(spec.kind);
                    rec.copies = Some(spec.copies);
                    rec.height = spec.height;
                    rec
                });
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });

    let fresh = fs::metadata(&a.csv).map_or(true, |m| m.len() == 0);
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&a.csv)
        .with_context(|| format!("cannot open {}", a.csv.display()))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    if fresh {
        w.write_record(CSV_HEADER)?;
    }
    let mut all_valid = true;
    for slot in results {
        let rec = slot.into_inner().unwrap().expect("every instance ran")?;
        all_valid &= rec.verdict == "valid";
        eprintln!(
            "{} n={} verdict={} {} ms",
            rec.instance,
            rec.n_found.map_or("-".into(), |n| n.to_string()),
            rec.verdict,
            rec.wall_ms
        );
        w.serialize(&rec)?;
    }
    w.flush()?;
    std::io::stderr().flush().ok();
    Ok(if all_valid { 0 } else { 1 })
}
