use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use siso_bench::dataset::{self, Synthetic};
use siso_bench::report::DEFAULT_WARMUP_MS;
use siso_bench::stream::Listener;
use siso_bench::{assess_sustainable, stream_workload, Monitor, ProcSampler, ProfileKind, RunReport, WorkloadProfile};

#[derive(Parser)]
#[command(name = "siso-bench", version, about = "Workload streamer and latency monitor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve a paced workload to clients connecting on each endpoint.
    Stream(StreamArgs),
    /// Accept the engine's timestamped output and report latency.
    Monitor(MonitorArgs),
    /// Write a synthetic flow and speed dataset.
    GenData(GenArgs),
    /// Print the highest sustainable rate over a set of run reports.
    Assess {
        reports: Vec<PathBuf>,
    },
}

#[derive(clap::Args)]
struct StreamArgs {
    /// constant, burst or join.
    #[arg(long)]
    profile: ProfileKind,
    /// Records per second over all endpoints; between bursts for `burst`.
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    burst_size: u64,
    /// Seconds between burst starts.
    #[arg(long, default_value_t = 0.0)]
    burst_period: f64,
    /// Seconds.
    #[arg(long)]
    duration: f64,
    #[arg(long)]
    flow: PathBuf,
    #[arg(long)]
    speed: Option<PathBuf>,
    /// `tcp://host:port` or `ws://host:port`; repeat for one per dataset.
    #[arg(long = "endpoint", required = true)]
    endpoints: Vec<String>,
    /// Seconds to wait for the engine to connect.
    #[arg(long, default_value_t = 60.0)]
    accept_timeout: f64,
}

#[derive(clap::Args)]
struct MonitorArgs {
    /// Address to accept the engine's output on, `tcp://host:port`.
    #[arg(long)]
    input: String,
    #[arg(long)]
    report: PathBuf,
    /// Dump raw samples as CSV.
    #[arg(long)]
    raw: Option<PathBuf>,
    /// Seconds excluded from the start of the percentiles.
    #[arg(long, default_value_t = DEFAULT_WARMUP_MS as f64 / 1000.0)]
    warmup: f64,
    /// Offered rate the run is judged against.
    #[arg(long)]
    rate: Option<f64>,
    /// Sample CPU and memory of this process once a second.
    #[arg(long)]
    engine_pid: Option<u32>,
    /// Stop reading after this many seconds.
    #[arg(long)]
    limit: Option<f64>,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, default_value_t = Synthetic::default().rows)]
    rows: usize,
    #[arg(long, default_value_t = Synthetic::default().lanes)]
    lanes: usize,
    #[arg(long, default_value_t = Synthetic::default().seed)]
    seed: u64,
    #[arg(long)]
    flow: PathBuf,
    #[arg(long)]
    speed: PathBuf,
}

fn secs(s: f64, what: &str) -> anyhow::Result<Duration> {
    Duration::try_from_secs_f64(s).with_context(|| format!("{what}: {s} is not a duration"))
}

fn stream(args: StreamArgs) -> anyhow::Result<()> {
    let profile = WorkloadProfile {
        kind: args.profile,
        rate: args.rate,
        burst_size: args.burst_size,
        burst_period: secs(args.burst_period, "--burst-period")?,
        duration: secs(args.duration, "--duration")?,
        flow: args.flow,
        speed: args.speed,
    };
    profile.validate()?;
    if args.profile == ProfileKind::Join && args.endpoints.len() != 2 {
        bail!("the join profile needs two endpoints");
    }
    let listeners = args
        .endpoints
        .iter()
        .map(|e| Listener::bind(e))
        .collect::<Result<Vec<_>, _>>()?;
    let urls: Vec<String> = listeners.iter().map(Listener::url).collect();
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "ready {}", urls.join(" "))?;
    stdout.flush()?;
    let stats = stream_workload(&profile, &listeners, secs(args.accept_timeout, "--accept-timeout")?)?;
    writeln!(stdout, "{}", serde_json::to_string(&stats)?)?;
    Ok(())
}

fn monitor(args: MonitorArgs) -> anyhow::Result<()> {
    let Some(addr) = args.input.strip_prefix("tcp://") else {
        bail!("--input must be tcp://host:port");
    };
    let listener = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "ready tcp://{}", listener.local_addr()?)?;
    stdout.flush()?;
    let limit = args.limit.map(|l| secs(l, "--limit")).transpose()?;

    let (stream, _) = listener.accept()?;
    let sampler = args
        .engine_pid
        .map(|pid| ProcSampler::spawn(pid, Duration::from_secs(1)));
    let mut monitor = Monitor::default();
    monitor.read_from(std::io::BufReader::with_capacity(1 << 16, stream), limit)?;
    let resources = sampler.map(ProcSampler::finish).unwrap_or_default();

    let warmup_ms = (args.warmup * 1000.0) as i64;
    let mut report = RunReport::build(&monitor.samples, monitor.dropped, warmup_ms, args.rate);
    report.resources = resources;
    let file = File::create(&args.report).with_context(|| format!("creating {}", args.report.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &report)?;
    if let Some(raw) = &args.raw {
        let file = File::create(raw).with_context(|| format!("creating {}", raw.display()))?;
        monitor.write_csv(BufWriter::new(file))?;
    }
    writeln!(
        stdout,
        "samples={} dropped={} p50={} p90={} p99={} max={} throughput={:.1} sustainable={}",
        report.samples,
        report.dropped,
        report.p50_ms,
        report.p90_ms,
        report.p99_ms,
        report.max_ms,
        report.throughput,
        report.sustainable
    )?;
    Ok(())
}

fn gen_data(args: GenArgs) -> anyhow::Result<()> {
    let (flow, speed) = dataset::synthesize(Synthetic {
        rows: args.rows,
        lanes: args.lanes,
        seed: args.seed,
    });
    dataset::write(&args.flow, &flow).with_context(|| format!("writing {}", args.flow.display()))?;
    dataset::write(&args.speed, &speed).with_context(|| format!("writing {}", args.speed.display()))?;
    Ok(())
}

fn assess(paths: Vec<PathBuf>) -> anyhow::Result<()> {
    let mut reports = Vec::new();
    for path in &paths {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let report: RunReport =
            serde_json::from_reader(std::io::BufReader::new(file)).with_context(|| format!("{}", path.display()))?;
        reports.push(report);
    }
    let rates: std::collections::BTreeSet<u64> = reports.iter().filter_map(|r| r.target_rate).map(f64::to_bits).collect();
    if rates.len() < 2 {
        bail!("need runs at two or more distinct rates");
    }
    match assess_sustainable(&reports) {
        Some(rate) => println!("{rate}"),
        None => println!("none"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Stream(args) => stream(args),
        Command::Monitor(args) => monitor(args),
        Command::GenData(args) => gen_data(args),
        Command::Assess { reports } => assess(reports),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
