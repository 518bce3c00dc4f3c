mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use viewscope::casestudy::FixtureSet;
use viewscope::predictor::PredictorError;

#[derive(Debug, Parser)]
#[command(
    name = "viewscope",
    version,
    about = "Window-view features, view quality scoring and satisfaction prediction"
)]
pub struct Cli {
    /// Master seed; overrides the `seed` in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (a directory for `train`). Defaults to stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// TOML file with training and importance hyperparameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ray-cast scene files into the 23 window-view variables.
    Cast {
        #[arg(required = true)]
        scenes: Vec<PathBuf>,
        /// Override the viewpoint resolution, e.g. 732x488.
        #[arg(long, value_parser = parse_resolution)]
        resolution: Option<(u32, u32)>,
    },
    /// Content, access and quality index from features, layers or a case-study set.
    Framework(commands::FrameworkArgs),
    /// Trim, aggregate, split, train and select one model per label.
    Train {
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Error matrix and residuals for a case-study set.
    Compare {
        #[arg(long, value_parser = parse_set)]
        set: FixtureSet,
        /// Directory of trained models to use instead of the printed predictor column.
        #[arg(long)]
        models: Option<PathBuf>,
        /// Also write per-image residuals as CSV.
        #[arg(long)]
        residuals: Option<PathBuf>,
    },
    /// Permutation feature importance of a model file or a model directory.
    Pfi {
        model: PathBuf,
        #[arg(long)]
        responses: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Shuffles per feature; defaults to the config value.
        #[arg(long)]
        repetitions: Option<usize>,
    },
}

fn parse_resolution(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let px = |v: &str| v.trim().parse::<u32>().ok().filter(|&n| n > 0);
    match (px(w), px(h)) {
        (Some(w), Some(h)) => Ok((w, h)),
        _ => Err(format!("expected positive WIDTHxHEIGHT, got `{s}`")),
    }
}

fn parse_set(s: &str) -> Result<FixtureSet, String> {
    s.parse::<FixtureSet>().map_err(|e| e.to_string())
}

/// 3 when there were too few rows to train or score, 2 for anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let too_few = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<PredictorError>(),
            Some(PredictorError::TooFewRows { .. })
        )
    });
    if too_few {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    let result = match &cli.command {
        Command::Cast { scenes, resolution } => commands::cast(&cli, scenes, *resolution),
        Command::Framework(args) => commands::framework(&cli, args),
        Command::Train { responses, features } => commands::train(&cli, responses, features),
        Command::Compare { set, models, residuals } => {
            commands::compare(&cli, *set, models.as_deref(), residuals.as_deref())
        }
        Command::Pfi {
            model,
            responses,
            features,
            repetitions,
        } => commands::pfi(&cli, model, responses, features, *repetitions),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
