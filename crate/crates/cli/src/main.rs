use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use siso_core::ingest::{FieldFormat, TimePolicy};
use siso_core::mapping::{compile_plan, parse_mapping_with, validate_plan, ParseOptions, Severity};
use siso_core::runtime::{parse_sink, run_pipeline_until, RuntimeConfig, DEFAULT_QUEUE_CAPACITY};
use siso_core::statement::{OutputFormat, DEFAULT_BASE_IRI};
use siso_core::window::{LatePolicy, WindowParams};
use siso_core::Endpoint;

#[derive(Parser)]
#[command(name = "siso", version, about = "Streaming RDF generation from RML mappings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mapping until its sources close or the process is interrupted.
    Run(RunArgs),
    /// Print the compiled operator graph of a mapping.
    Explain(MappingArgs),
}

#[derive(clap::Args)]
struct MappingArgs {
    /// Mapping document (Turtle).
    #[arg(short, long)]
    mapping: PathBuf,
    /// Namespace of the streaming join vocabulary.
    #[arg(long)]
    rmls_namespace: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ntriples,
    NquadsTs,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeModeArg {
    Arrival,
    Field,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimeFormatArg {
    EpochMs,
    Hms,
}

#[derive(Clone, Copy, ValueEnum)]
enum LateArg {
    Drop,
    Join,
}

#[derive(clap::Args)]
struct RunArgs {
    #[command(flatten)]
    mapping: MappingArgs,
    /// Instances of item generation, windows and statement generation.
    #[arg(short, long, default_value_t = NonZeroUsize::MIN)]
    parallelism: NonZeroUsize,
    /// `stdout`, `tcp://host:port` or a file path.
    #[arg(short, long, default_value = "stdout")]
    output: String,
    #[arg(long, value_enum, default_value = "ntriples")]
    format: Format,
    #[arg(long, default_value = DEFAULT_BASE_IRI)]
    base_iri: String,
    /// Initial window interval.
    #[arg(long, value_name = "MS")]
    window_interval: Option<u64>,
    #[arg(long, value_name = "MS")]
    window_min: Option<u64>,
    #[arg(long, value_name = "MS")]
    window_max: Option<u64>,
    /// Total cost above which a window shrinks.
    #[arg(long)]
    cost_upper: Option<f64>,
    /// Total cost below which a window grows.
    #[arg(long)]
    cost_lower: Option<f64>,
    #[arg(long)]
    limit_parent: Option<f64>,
    #[arg(long)]
    limit_child: Option<f64>,
    #[arg(long, value_enum, default_value = "arrival")]
    time_mode: TimeModeArg,
    /// Attribute holding the event time in field mode.
    #[arg(long)]
    time_field: Option<String>,
    #[arg(long, value_enum, default_value = "epoch-ms")]
    time_format: TimeFormatArg,
    /// What a window does with items older than its start.
    #[arg(long, value_enum, default_value = "drop")]
    late_items: LateArg,
    #[arg(long, default_value_t = DEFAULT_QUEUE_CAPACITY)]
    queue_capacity: usize,
    /// Read a source from another endpoint: `TARGET=ENDPOINT`, where TARGET
    /// is the target written in the mapping.
    #[arg(long = "source", value_name = "TARGET=ENDPOINT")]
    sources: Vec<String>,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn config_error(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn load_plan(args: &MappingArgs) -> Result<siso_core::mapping::MappingPlan, Failure> {
    let text = std::fs::read_to_string(&args.mapping)
        .with_context(|| format!("reading {}", args.mapping.display()))
        .map_err(config_error)?;
    let options = match &args.rmls_namespace {
        Some(ns) => ParseOptions::with_rmls_namespace(ns.clone()),
        None => ParseOptions::default(),
    };
    let plan = parse_mapping_with(&text, &options)
        .with_context(|| format!("{}", args.mapping.display()))
        .map_err(config_error)?;
    for finding in validate_plan(&plan).findings {
        if finding.severity == Severity::Warn {
            eprintln!("warning: {}", finding.message);
        }
    }
    Ok(plan)
}

fn build_config(args: &RunArgs) -> anyhow::Result<RuntimeConfig> {
    let defaults = WindowParams::default();
    let window = WindowParams {
        initial_interval_ms: args.window_interval.unwrap_or(defaults.initial_interval_ms),
        min_interval_ms: args.window_min.unwrap_or(defaults.min_interval_ms),
        max_interval_ms: args.window_max.unwrap_or(defaults.max_interval_ms),
        cost_upper: args.cost_upper.unwrap_or(defaults.cost_upper),
        cost_lower: args.cost_lower.unwrap_or(defaults.cost_lower),
        initial_limit_parent: args.limit_parent.unwrap_or(defaults.initial_limit_parent),
        initial_limit_child: args.limit_child.unwrap_or(defaults.initial_limit_child),
    };
    let time_policy = match args.time_mode {
        TimeModeArg::Arrival => TimePolicy::arrival(),
        TimeModeArg::Field => {
            let field = args
                .time_field
                .clone()
                .ok_or_else(|| anyhow!("--time-mode field needs --time-field"))?;
            let format = match args.time_format {
                TimeFormatArg::EpochMs => FieldFormat::EpochMs,
                TimeFormatArg::Hms => FieldFormat::ClockHms,
            };
            TimePolicy::field(field, format)
        }
    };
    let mut source_overrides = std::collections::HashMap::new();
    for spec in &args.sources {
        let (target, endpoint) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("--source `{spec}`: expected TARGET=ENDPOINT"))?;
        let endpoint: Endpoint = endpoint.parse().with_context(|| format!("--source `{spec}`"))?;
        source_overrides.insert(target.to_string(), endpoint);
    }
    let config = RuntimeConfig {
        parallelism: args.parallelism,
        window,
        base_iri: args.base_iri.clone(),
        output: parse_sink(&args.output)?,
        format: match args.format {
            Format::Ntriples => OutputFormat::NTriples,
            Format::NquadsTs => OutputFormat::NQuadsTs,
        },
        time_policy,
        late_policy: match args.late_items {
            LateArg::Drop => LatePolicy::Drop,
            LateArg::Join => LatePolicy::Join,
        },
        queue_capacity: args.queue_capacity,
        source_overrides,
        ..RuntimeConfig::default()
    };
    config.validate()?;
    Ok(config)
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let plan = load_plan(&args.mapping)?;
    let plan = compile_plan(&plan).map_err(config_error)?;
    let config = build_config(&args).map_err(config_error)?;
    for target in config.source_overrides.keys() {
        if !plan.sources.iter().any(|s| &s.target == target) {
            return Err(config_error(anyhow!("--source: no source with target `{target}`")));
        }
    }

    let stop = Arc::new(AtomicBool::new(false));
    {
        let stop = stop.clone();
        let result = ctrlc::set_handler(move || {
            // A second interrupt gives up on draining.
            if stop.swap(true, Ordering::Relaxed) {
                std::process::exit(130);
            }
        });
        if let Err(e) = result {
            eprintln!("warning: no interrupt handler: {e}");
        }
    }

    match run_pipeline_until(&plan, &config, stop) {
        Ok(summary) => {
            eprint!("{summary}");
            Ok(())
        }
        // Runtime errors already carry their cause in their message.
        Err(e) => Err(Failure {
            code: e.exit_code() as u8,
            error: anyhow!("{e}"),
        }),
    }
}

fn explain(args: MappingArgs) -> Result<(), Failure> {
    let plan = load_plan(&args)?;
    let plan = compile_plan(&plan).map_err(config_error)?;
    print!("{}", plan.explain());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Explain(args) => explain(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
