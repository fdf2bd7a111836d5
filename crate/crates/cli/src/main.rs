//! `lbsn`: runs the check-in analysis pipeline stage by stage or end to end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lbsn_core::pipeline::{run_stages, PipelineConfig, PipelineError, Stage};
use lbsn_core::synth::{generate, write_config, ScenarioConfig, SynthError};

const LOG_ENV: &str = "LBSN_LOG";

#[derive(Debug, Parser)]
#[command(name = "lbsn", version, about = "Tourist/resident analytics over check-in data")]
#[command(after_help = "Log verbosity is read from the LBSN_LOG environment variable (e.g. LBSN_LOG=info).")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate and normalize the raw check-in and venue files.
    IngestCheck(StageArgs),
    /// Assign home cities and label every check-in tourist or resident.
    Classify(StageArgs),
    /// Interval, routine, venue and category tables per city and class.
    Behavior(StageArgs),
    /// Mean displacement and radius of gyration per user.
    Mobility(StageArgs),
    /// Venue-by-hour graphs and centrality rankings.
    Graph(StageArgs),
    /// Topic-model mobility profiles.
    Profiles(StageArgs),
    /// Run every stage in order.
    All(StageArgs),
    /// Generate a synthetic scenario with ground truth.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct StageArgs {
    /// Pipeline config file (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Override the residence threshold in days.
    #[arg(long)]
    threshold_days: Option<i64>,
    /// Override the topic-model seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Scenario config file (TOML); built-in scenario when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving the scenario files.
    #[arg(long)]
    out: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        let code = match e {
            SynthError::Config(_) => 1,
            SynthError::Io { .. } => 3,
        };
        Failure {
            code,
            message: format!("stage synth failed: {e}"),
        }
    }
}

fn load_config(args: &StageArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = PipelineConfig::from_path(&args.config)?;
    if let Some(t) = args.threshold_days {
        cfg.threshold_days = t;
    }
    if let Some(s) = args.seed {
        cfg.lda.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_pipeline_command(args: &StageArgs, stages: &[Stage]) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    let manifest = run_stages(&cfg, stages)?;
    println!("wrote {}", manifest.display());
    Ok(())
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: 3,
        message: format!("stage synth failed: cannot write {}: {e}", path.display()),
    })
}

/// Pipeline config pointing at the files of a freshly generated scenario.
fn scenario_pipeline_toml(cfg: &ScenarioConfig) -> String {
    format!(
        "checkins = \"checkins.csv\"\n\
         venues = \"venues.csv\"\n\
         ground_truth = \"ground_truth.csv\"\n\
         output_dir = \"report\"\n\
         threshold_days = {}\n",
        cfg.threshold_days
    )
}

fn run_synth(args: &SynthArgs) -> Result<(), Failure> {
    let mut cfg = match &args.config {
        Some(p) => ScenarioConfig::from_path(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let scenario = generate(&cfg)?;
    scenario.write_to(&args.out)?;
    let mut text = Vec::new();
    write_config(&mut text, &cfg).expect("writing to memory");
    write_file(&args.out.join("scenario.toml"), &text)?;
    write_file(&args.out.join("pipeline.toml"), scenario_pipeline_toml(&cfg).as_bytes())?;
    println!(
        "wrote {} check-ins, {} venues and {} users to {}",
        scenario.checkins.len(),
        scenario.venues.len(),
        scenario.truth.len(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::IngestCheck(a) => run_pipeline_command(a, &[Stage::Ingest]),
        Command::Classify(a) => run_pipeline_command(a, &[Stage::Classify]),
        Command::Behavior(a) => run_pipeline_command(a, &[Stage::Behavior]),
        Command::Mobility(a) => run_pipeline_command(a, &[Stage::Mobility]),
        Command::Graph(a) => run_pipeline_command(a, &[Stage::Graph]),
        Command::Profiles(a) => run_pipeline_command(a, &[Stage::Profiles]),
        Command::All(a) => run_pipeline_command(a, &Stage::ALL),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
