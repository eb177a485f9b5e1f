mod brute;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pfsp_core::explorer::{
    default_explorers, default_threads, timeline_csv, ExplorerPool, Incumbent, PoolConfig,
};
use pfsp_core::heuristic::{insertion_local_search, neh, SearchBudget};
use pfsp_core::instance::{generate_taillard, taillard_seed, Instance, Layout, Schedule, Time};
use pfsp_core::workunit::Interval;
use pfsp_dist::checkpoint::{Checkpoint, Fingerprint};
use pfsp_dist::coordinator::{Coordinator, CoordinatorConfig};
use pfsp_dist::transport::{TcpCoordinator, TcpWorker};
use pfsp_dist::worker::{run_worker, WorkerConfig};

/// Exit status of a run that proved the reported schedule optimal.
const PROVED: u8 = 0;
const FAILED: u8 = 1;
/// The whole tree was explored and nothing beat the initial bound.
const NO_IMPROVEMENT: u8 = 2;
/// Stopped by the time limit before the tree was exhausted.
const INTERRUPTED: u8 = 3;

#[derive(Parser)]
#[command(name = "pfsp", version, about = "Exact permutation flow-shop solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance with a local explorer pool.
    Solve(SolveArgs),
    /// Serve work units to workers over TCP.
    Coordinator(CoordinatorArgs),
    /// Explore work units handed out by a coordinator.
    Worker(WorkerArgs),
    /// Write a Taillard-style random instance.
    Generate(GenerateArgs),
    /// Enumerate every schedule of a small instance.
    Bruteforce(BruteArgs),
    /// Time a solve for several pool sizes.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Instance file: a line `n m`, then the processing times.
    #[arg(long, short = 'i', required_unless_present = "taillard")]
    instance: Option<PathBuf>,
    /// The file lists one row per machine (the published Taillard layout)
    /// instead of one row per job.
    #[arg(long)]
    machine_major: bool,
    /// Built-in Taillard instance, e.g. ta001.
    #[arg(long, conflicts_with = "instance")]
    taillard: Option<String>,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        if let Some(name) = &self.taillard {
            let (n, m, seed) =
                taillard_seed(name).with_context(|| format!("unknown Taillard instance {name}"))?;
            return Ok(generate_taillard(n, m, seed)?.with_label(name.clone()));
        }
        let path = self.instance.as_ref().expect("required by clap");
        let layout = if self.machine_major {
            Layout::MachineMajor
        } else {
            Layout::JobMajor
        };
        Instance::load(path, layout).with_context(|| format!("reading {}", path.display()))
    }
}

#[derive(Args, Clone)]
struct PoolArgs {
    /// Explorers in the pool (default: twice the hardware threads).
    #[arg(long, short = 'k')]
    explorers: Option<usize>,
    /// OS threads running the explorers (default: min(explorers, hardware)).
    #[arg(long)]
    threads: Option<usize>,
    /// Steps per explorer between synchronisation points.
    #[arg(long, default_value_t = 1024)]
    batch: usize,
    /// Write per-explorer activity samples as CSV.
    #[arg(long)]
    timeline_out: Option<PathBuf>,
    /// Sampling period of the timeline in milliseconds.
    #[arg(long, default_value_t = 100)]
    timeline_ms: u64,
}

impl PoolArgs {
    fn config(&self) -> PoolConfig {
        let explorers = self.explorers.unwrap_or_else(default_explorers).max(1);
        PoolConfig {
            explorers,
            threads: self.threads.unwrap_or_else(|| default_threads(explorers)).max(1),
            batch: self.batch.max(1),
            prune: true,
            census: false,
            timeline_every: self
                .timeline_out
                .as_ref()
                .map(|_| Duration::from_millis(self.timeline_ms)),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    pool: PoolArgs,
    /// Upper bound to start from; only strictly better schedules are sought.
    #[arg(long)]
    initial_ub: Option<Time>,
    /// Start from the NEH + local search makespan.
    #[arg(long)]
    ub_from_heuristic: bool,
    /// Stop after this many seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Also write the statistics block to this file.
    /// Also write the statistics block to this file.
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Args)]
struct CoordinatorArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:7878")]
    listen: String,
    /// Number of workers that must report END before exiting.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Upper bound to start from; only strictly better schedules are sought.
    #[arg(long)]
    initial_ub: Option<Time>,
    /// Global checkpoint file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Seconds between global checkpoints.
    #[arg(long, default_value_t = 60.0)]
    checkpoint_every: f64,
    /// Resume from this checkpoint instead of starting at [0, n!).
    #[arg(long)]
    restore: Option<PathBuf>,
    /// Also write the statistics block to this file.
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Args)]
struct WorkerArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    pool: PoolArgs,
    /// Coordinator address.
    #[arg(long, default_value = "127.0.0.1:7878")]
    connect: String,
    /// Worker id carried in work requests.
    #[arg(long, default_value_t = 0)]
    id: u32,
    /// Seconds between periodic work-unit checkpoints.
    #[arg(long, default_value_t = 30.0)]
    checkpoint_every: f64,
    /// Run local-search agents next to the pool.
    #[arg(long)]
    hybrid: bool,
    /// Local-search agents in hybrid mode.
    #[arg(long, default_value_t = 1)]
    heuristic_agents: usize,
    /// Also write the statistics block to this file.
    #[arg(long)]
    stats_out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of jobs.
    #[arg(long, required_unless_present = "taillard")]
    jobs: Option<usize>,
    /// Number of machines.
    #[arg(long, required_unless_present = "taillard")]
    machines: Option<usize>,
    /// Generator seed in [1, 2^31 - 2].
    #[arg(long, default_value_t = 1)]
    seed: u32,
    /// Regenerate a published Taillard instance, e.g. ta021.
    #[arg(long, conflicts_with_all = ["jobs", "machines"])]
    taillard: Option<String>,
    /// One row per machine instead of one row per job.
    #[arg(long)]
    machine_major: bool,
    /// Output file (default: stdout).
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BruteArgs {
    #[command(flatten)]
    instance: InstanceArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Pool sizes to compare, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    explorers: Vec<usize>,
    /// Steps per explorer between synchronisation points.
    #[arg(long, default_value_t = 1024)]
    batch: usize,
    /// Fixed upper bound; use the optimum to measure a fixed tree.
    #[arg(long)]
    initial_ub: Option<Time>,
}

/// `key=value` lines.
#[derive(Default)]
struct Stats(String);

impl Stats {
    fn put(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        writeln!(self.0, "{key}={value}").unwrap();
        self
    }

    fn emit(&self, file: Option<&Path>) -> Result<()> {
        print!("{}", self.0);
        std::io::stdout().flush()?;
        if let Some(path) = file {
            std::fs::write(path, &self.0).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn secs(s: f64) -> Duration {
    Duration::from_secs_f64(s.max(0.0))
}

fn heuristic_bound(inst: &Instance) -> Schedule {
    insertion_local_search(inst, &neh(inst), SearchBudget::iterations(1000), 0)
}

struct SolveResult {
    best: Time,
    schedule: Option<Vec<u32>>,
    completed: bool,
    pool: pfsp_core::explorer::PoolStats,
    elapsed: Duration,
}

fn run_pool(
    inst: Arc<Instance>,
    config: PoolConfig,
    ub: Time,
    limit: Option<Duration>,
    timeline_out: Option<&Path>,
) -> Result<SolveResult> {
    let started = Instant::now();
    let incumbent = Arc::new(Incumbent::new(ub));
    let n = inst.jobs();
    let mut pool = ExplorerPool::new(inst, config, incumbent.clone())?;
    pool.assign(&[Interval::full(n)])?;
    while !pool.is_exhausted() {
        if limit.is_some_and(|l| started.elapsed() >= l) {
            break;
        }
        pool.run_round()?;
    }
    if let Some(path) = timeline_out {
        std::fs::write(path, timeline_csv(pool.timeline()))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(SolveResult {
        best: incumbent.value(),
        schedule: incumbent.best().map(|(_, p)| p),
        completed: pool.is_exhausted(),
        pool: pool.stats(),
        elapsed: started.elapsed(),
    })
}

fn one_based(perm: &[u32]) -> String {
    perm.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(",")
}

fn cmd_solve(args: SolveArgs) -> Result<u8> {
    let inst = Arc::new(args.instance.load()?);
    let mut ub = args.initial_ub.unwrap_or(Time::MAX);
    let mut heuristic = None;
    if args.ub_from_heuristic {
        let h = heuristic_bound(&inst);
        let cmax = h.cmax.expect("evaluated");
        if cmax < ub {
            ub = cmax;
            heuristic = Some(h);
        }
    }
    let config = args.pool.config();
    let r = run_pool(
        inst.clone(),
        config.clone(),
        ub,
        args.time_limit.map(secs),
        args.pool.timeline_out.as_deref(),
    )?;

    let schedule = r.schedule.clone().or_else(|| heuristic.map(|h| h.perm));
    let status = match (r.completed, &schedule) {
        (false, _) => INTERRUPTED,
        (true, Some(_)) => PROVED,
        (true, None) => NO_IMPROVEMENT,
    };
    let mut s = Stats::default();
    s.put("instance", inst.label())
        .put("jobs", inst.jobs())
        .put("machines", inst.machines())
        .put("explorers", config.explorers)
        .put("threads", config.threads)
        .put("initial_ub", if ub == Time::MAX { "none".into() } else { ub.to_string() });
    match &schedule {
        Some(p) => s.put("best", inst.makespan(p)?).put("schedule", one_based(p)),
        None => s.put("best", "none").put("schedule", ""),
    };
    let status_text = match status {
        PROVED => "optimal",
        NO_IMPROVEMENT => "no improving solution; initial UB is optimal-or-lower",
        _ => "time limit reached",
    };
    let wall = r.elapsed.as_secs_f64();
    s.put("status", status_text)
        .put("nodes", r.pool.decomposed)
        .put("leaves", r.pool.leaves)
        .put("improvements", r.pool.improvements)
        .put("local_steals", r.pool.steals)
        .put("rounds", r.pool.rounds)
        .put("wall_ms", r.elapsed.as_millis())
        .put("nodes_per_sec", format!("{:.0}", r.pool.decomposed as f64 / wall.max(1e-9)));
    s.emit(args.stats_out.as_deref())?;
    Ok(status)
}

fn cmd_coordinator(args: CoordinatorArgs) -> Result<u8> {
    let inst = args.instance.load()?;
    let fingerprint = Fingerprint::of(&inst);
    let mut config = CoordinatorConfig::new(args.workers.max(1));
    config.checkpoint_path = args.checkpoint.clone();
    config.checkpoint_every = secs(args.checkpoint_every);
    let initial_ub = args.initial_ub.unwrap_or(Time::MAX);
    let mut coord = match &args.restore {
        Some(path) => {
            let mut cp = Checkpoint::load(path, &fingerprint)
                .with_context(|| format!("restoring {}", path.display()))?;
            if initial_ub < cp.best {
                cp.best = initial_ub;
                cp.schedule.clear();
            }
            Coordinator::restore(cp, config)?
        }
        None => Coordinator::new(fingerprint, vec![Interval::full(inst.jobs())], initial_ub, config)?,
    };
    let mut transport = TcpCoordinator::bind(&args.listen)
        .with_context(|| format!("binding {}", args.listen))?;
    println!("listening on {}", transport.local_addr());
    std::io::stdout().flush()?;

    let report = coord.run(&mut transport)?;
    let mut s = Stats::default();
    s.put("instance", inst.label()).put("workers", args.workers);
    if report.best == Time::MAX {
        s.put("best", "none");
    } else {
        s.put("best", report.best);
    }
    s.put("schedule", one_based(&report.schedule))
        .put("nodes", report.stats.nodes)
        .put("work_requests", report.stats.work_requests)
        .put("global_steals", report.stats.steals)
        .put("checkpoints", report.stats.checkpoints)
        .put("wall_ms", report.elapsed.as_millis());
    s.emit(args.stats_out.as_deref())?;
    Ok(if report.schedule.is_empty() {
        NO_IMPROVEMENT
    } else {
        PROVED
    })
}

fn cmd_worker(args: WorkerArgs) -> Result<u8> {
    let inst = Arc::new(args.instance.load()?);
    let mut config = WorkerConfig::new(args.id, args.pool.config());
    config.checkpoint_every = secs(args.checkpoint_every);
    if args.hybrid {
        config.heuristic_agents = args.heuristic_agents;
    }
    let transport = TcpWorker::connect(&args.connect)
        .with_context(|| format!("connecting to coordinator at {}", args.connect))?;
    let report = run_worker(transport, inst, config)?;
    let mut s = Stats::default();
    s.put("worker", args.id);
    if report.best == Time::MAX {
        s.put("best", "none");
    } else {
        s.put("best", report.best);
    }
    s.put("nodes", report.pool.decomposed)
        .put("leaves", report.pool.leaves)
        .put("local_steals", report.pool.steals)
        .put("requests", report.requests)
        .put("updates", report.updates)
        .put("wall_ms", report.elapsed.as_millis());
    s.emit(args.stats_out.as_deref())?;
    Ok(PROVED)
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let inst = match &args.taillard {
        Some(name) => {
            let (n, m, seed) =
                taillard_seed(name).with_context(|| format!("unknown Taillard instance {name}"))?;
            generate_taillard(n, m, seed)?
        }
        None => generate_taillard(args.jobs.unwrap(), args.machines.unwrap(), args.seed)?,
    };
    let layout = if args.machine_major {
        Layout::MachineMajor
    } else {
        Layout::JobMajor
    };
    let text = inst.to_text(layout);
    match &args.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(PROVED)
}

fn cmd_bruteforce(args: BruteArgs) -> Result<u8> {
    let inst = args.instance.load()?;
    if inst.jobs() > brute::MAX_JOBS {
        bail!(
            "refusing to enumerate {}! schedules; brute force is limited to {} jobs",
            inst.jobs(),
            brute::MAX_JOBS
        );
    }
    let started = Instant::now();
    let (best, perm) = brute::brute_force(&inst);
    let mut s = Stats::default();
    s.put("instance", inst.label())
        .put("jobs", inst.jobs())
        .put("machines", inst.machines())
        .put("best", best)
        .put("schedule", one_based(&perm))
        .put("wall_ms", started.elapsed().as_millis());
    s.emit(None)?;
    Ok(PROVED)
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    let inst = Arc::new(args.instance.load()?);
    let ub = args.initial_ub.unwrap_or(Time::MAX);
    let mut base = None;
    for &k in &args.explorers {
        let config = PoolConfig {
            explorers: k.max(1),
            threads: default_threads(k.max(1)),
            batch: args.batch.max(1),
            ..PoolConfig::default()
        };
        let r = run_pool(inst.clone(), config.clone(), ub, None, None)?;
        let wall = r.elapsed.as_secs_f64();
        let base_wall = *base.get_or_insert(wall);
        println!(
            "explorers={k} threads={} best={} nodes={} wall_ms={} speedup={:.2}",
            config.threads,
            if r.best == Time::MAX { "none".into() } else { r.best.to_string() },
            r.pool.decomposed,
            r.elapsed.as_millis(),
            base_wall / wall.max(1e-9)
        );
    }
    Ok(PROVED)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Coordinator(a) => cmd_coordinator(a),
        Command::Worker(a) => cmd_worker(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Bruteforce(a) => cmd_bruteforce(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(FAILED)
        }
    }
}
