use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mcsplit::bench::{
    dataset_root, emit_cactus, parse_manifest, run_suite, solved_counts, write_cactus, write_records, InstanceRecord,
    RunStatus, SuiteOptions,
};
use mcsplit::core::heuristics::{DeadEndPolicy, Jump, OrderStrategy};
use mcsplit::core::oracle::verify;
use mcsplit::core::{Graph, Status};
use mcsplit::format::{read_graph, write_graph, Format};
use mcsplit::portfolio::{run_portfolio, serve_engine_request, PortfolioConfig};
use mcsplit::{run_engine, Deadline, EngineSpec};

const EXIT_TIMEOUT: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "mcsplit", version, about = "Maximum common induced subgraph solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one pair of graphs.
    Solve(SolveArgs),
    /// Run engines over a manifest of instance pairs.
    Bench(BenchArgs),
    /// Write a random graph.
    Gen(GenArgs),
    #[command(hide = true)]
    RunEngine,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Off,
    Degree,
    Components,
    #[value(alias = "block-triangular")]
    Block,
}

#[derive(Clone, Copy, ValueEnum)]
enum JumpArg {
    Off,
    #[value(name = "plus1", alias = "plus-one")]
    PlusOne,
    #[value(alias = "doubling")]
    Double,
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// recursive, parallel or iterative; the presets goal-directed,
    /// bound-jump and restarts are accepted too.
    #[arg(long, default_value = "recursive")]
    engine: String,
    #[arg(long)]
    goal_directed: bool,
    #[arg(long, value_enum)]
    order: Option<OrderArg>,
    /// Dead-end trigger: `off`, `abs:N` recursions or `rel:X` times the mean.
    #[arg(long)]
    deadend: Option<String>,
    #[arg(long, value_enum)]
    jump: Option<JumpArg>,
    /// Randomised restarts: `off` or `seed:N`.
    #[arg(long)]
    restarts: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    part_level: Option<usize>,
    /// 32-bit frames for the iterative engine.
    #[arg(long)]
    wide: bool,
}

#[derive(Args)]
struct SolveArgs {
    g: PathBuf,
    h: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    /// Race the engines of this TOML file instead.
    #[arg(long)]
    portfolio: Option<PathBuf>,
    #[arg(long, default_value = "mivia")]
    format: Format,
    /// Append a CSV record of the run.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print the full result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Lines of `file_g file_h category`.
    #[arg(long)]
    manifest: PathBuf,
    /// Engine presets to run; repeatable.
    #[arg(long = "engine", default_value = "recursive")]
    engines: Vec<String>,
    #[arg(long, default_value_t = 10.0)]
    budget: f64,
    #[arg(long, default_value = "mivia")]
    format: Format,
    /// Directory manifest paths are relative to (overridden by MCS_DATASET_ROOT).
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    cactus: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    concurrency: usize,
}

#[derive(Args)]
struct GenArgs {
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    directed: bool,
    /// Attach labels drawn from this many values.
    #[arg(long)]
    labels: Option<u32>,
    #[arg(long, default_value = "mivia")]
    format: Format,
    #[arg(long, short)]
    out: PathBuf,
}

fn seconds(s: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(s).with_context(|| format!("invalid number of seconds: {s}"))
}

fn parse_deadend(s: &str) -> Result<Option<DeadEndPolicy>> {
    if s == "off" {
        return Ok(None);
    }
    if let Some(x) = s.strip_prefix("rel:") {
        return Ok(Some(DeadEndPolicy::Relative(x.parse().context("dead-end multiplier")?)));
    }
    let n = s.strip_prefix("abs:").unwrap_or(s);
    Ok(Some(DeadEndPolicy::Absolute(n.parse().context("dead-end recursion count")?)))
}

fn parse_restarts(s: &str) -> Result<Option<u64>> {
    if s == "off" {
        return Ok(None);
    }
    let seed = s.strip_prefix("seed:").unwrap_or(s);
    Ok(Some(seed.parse().context("restart seed")?))
}

impl EngineArgs {
    fn spec(&self) -> Result<EngineSpec> {
        let mut spec = EngineSpec::preset(&self.engine)?;
        let h = &mut spec.heuristics;
        h.goal_directed |= self.goal_directed;
        if let Some(o) = self.order {
            h.order = match o {
                OrderArg::Off => None,
                OrderArg::Degree => Some(OrderStrategy::DegreeDesc),
                OrderArg::Components => Some(OrderStrategy::ComponentsThenDegree),
                OrderArg::Block => Some(OrderStrategy::BlockTriangular),
            };
        }
        if let Some(d) = &self.deadend {
            h.deadend = parse_deadend(d)?;
        }
        if let Some(j) = self.jump {
            h.jump = match j {
                JumpArg::Off => None,
                JumpArg::PlusOne => Some(Jump::PlusOne),
                JumpArg::Double => Some(Jump::Doubling),
            };
        }
        if let Some(r) = &self.restarts {
            h.restarts = parse_restarts(r)?;
        }
        h.workers = self.workers.or(h.workers);
        h.part_level = self.part_level.or(h.part_level);
        h.wide |= self.wide;
        spec.validate()?;
        Ok(spec)
    }
}

fn exit_for(status: Status) -> ExitCode {
    match status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::Timeout | Status::Cancelled => ExitCode::from(EXIT_TIMEOUT),
    }
}

fn print_mapping(pairs: &[(usize, usize)]) {
    let text: Vec<String> = pairs.iter().map(|(v, u)| format!("{v}->{u}")).collect();
    println!("mapping: {}", text.join(" "));
}

fn append_csv(path: &Path, record: &InstanceRecord) -> Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let file = File::options().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    w.serialize(record)?;
    w.flush()?;
    Ok(())
}

fn solve_cmd(args: SolveArgs) -> Result<ExitCode> {
    let g = read_graph(&args.g, args.format).with_context(|| format!("reading {}", args.g.display()))?;
    let h = read_graph(&args.h, args.format).with_context(|| format!("reading {}", args.h.display()))?;
    let budget = args.budget.map(seconds).transpose()?;
    let (engine_id, result) = if let Some(cfg) = &args.portfolio {
        let text = std::fs::read_to_string(cfg).with_context(|| format!("reading {}", cfg.display()))?;
        let config = PortfolioConfig::from_toml(&text, budget.unwrap_or(Duration::MAX))?;
        let r = run_portfolio(&g, &h, &config)?;
        if args.json {
            println!("{}", serde_json::to_string_pretty(&r)?);
        } else {
            println!("winner: {}", r.winner.as_deref().unwrap_or("none"));
            for e in &r.engines {
                println!("  {:<16} {:?} size={:?} wall={:.3}s", e.id, e.status, e.size, e.wall.as_secs_f64());
            }
        }
        let solved = mcsplit::core::SolveResult {
            mapping: r.mapping,
            status: r.status,
            stats: Default::default(),
            elapsed: r.wall,
            seed: None,
        };
        ("portfolio".to_string(), solved)
    } else {
        let spec = args.engine.spec()?;
        let r = run_engine(&g, &h, &spec, &Deadline::new(budget))?;
        if args.json {
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        (spec.id, r)
    };
    if !verify(&g, &h, &result.mapping)? {
        bail!("internal error: the returned mapping is not a common induced subgraph");
    }
    if !args.json {
        println!("status: {}", result.status.as_str());
        println!("size: {}", result.size());
        println!("time: {:.6}s", result.elapsed.as_secs_f64());
        println!("recursions: {}", result.stats.recursions);
        print_mapping(result.mapping.pairs());
    }
    if let Some(path) = &args.csv {
        let stem = |p: &Path| p.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let record = InstanceRecord {
            pair_id: format!("{}~{}", stem(&args.g), stem(&args.h)),
            category: String::new(),
            n_g: Some(g.n()),
            n_h: Some(h.n()),
            engine: engine_id,
            status: RunStatus::from(result.status),
            size: Some(result.size()),
            wall_seconds: result.elapsed.as_secs_f64(),
            cpu_seconds: mcsplit::bench::cpu_time().as_secs_f64(),
            recursions: result.stats.recursions,
            seed: result.seed,
        };
        append_csv(path, &record)?;
    }
    Ok(exit_for(result.status))
}

fn bench_cmd(args: BenchArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.manifest)
        .with_context(|| format!("reading manifest {}", args.manifest.display()))?;
    let fallback = match &args.root {
        Some(r) => r.clone(),
        None => args.manifest.parent().map_or_else(PathBuf::new, Path::to_path_buf),
    };
    let instances = parse_manifest(&text, &dataset_root(&fallback), args.format)?;
    let engines: Vec<EngineSpec> = args.engines.iter().map(|e| EngineSpec::preset(e)).collect::<Result<_, _>>()?;
    let options = SuiteOptions { budget: seconds(args.budget)?, concurrency: args.concurrency.max(1) };
    let records = run_suite(&instances, &engines, options);
    match &args.csv {
        Some(p) => write_records(File::create(p)?, &records)?,
        None => write_records(std::io::stdout().lock(), &records)?,
    }
    if let Some(p) = &args.cactus {
        write_cactus(File::create(p)?, &emit_cactus(&records))?;
    }
    for (engine, solved) in solved_counts(&records) {
        eprintln!("{engine}: {solved}/{} solved", instances.len());
    }
    let errors = records.iter().filter(|r| r.status == RunStatus::Error).count();
    Ok(if errors > 0 { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS })
}

fn gen_cmd(args: GenArgs) -> Result<ExitCode> {
    if !(0.0..=1.0).contains(&args.density) {
        bail!("density must lie in [0, 1]");
    }
    let mut g = if args.directed {
        Graph::random_directed(args.n, args.density, args.seed)
    } else {
        Graph::random(args.n, args.density, args.seed)
    };
    if let Some(k) = args.labels {
        g = g.with_random_labels(k.max(1), args.seed.wrapping_add(1));
    }
    write_graph(&args.out, &g, args.format)?;
    Ok(ExitCode::SUCCESS)
}

fn run_engine_cmd() -> Result<ExitCode> {
    let mut input = String::new();
    std::io::stdin().read_to_string(&mut input)?;
    let reply = serve_engine_request(&input);
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, &reply)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Gen(a) => gen_cmd(a),
        Command::RunEngine => run_engine_cmd(),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_ERROR)
    })
}
