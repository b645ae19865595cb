use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use corisk::commands;
use corisk::config::{Mode, RunConfig};
use corisk::error::Result;

#[derive(Parser)]
#[command(
    name = "corisk",
    version,
    about = "Corporate risk disclosure pipeline: fetch filings, score crisis language, build weekly industry indices"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, default_value = "corisk.toml")]
    config: PathBuf,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the fetch mode (live or fixture).
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Override the start date (YYYY-MM-DD).
    #[arg(long, global = true)]
    since: Option<String>,
    /// Override the end date (YYYY-MM-DD).
    #[arg(long, global = true)]
    until: Option<String>,
    /// Override the random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the negative-word lexicon path.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List filings in the date range and cache their documents.
    Fetch,
    /// Score cached filings: mentions, negativity, topic hits.
    Analyze,
    /// Aggregate filing metrics into weekly industry indices.
    Index,
    /// Cross-correlate the negativity series against a price series.
    Correlate,
    /// Fit topic models over crisis sentences and pick K by coherence.
    Topics,
    /// Run fetch, analyze, index, correlate, and topics in order.
    All,
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = RunConfig::load(&cli.config)?;
    if let Some(out) = &cli.out {
        config.paths.out = out.clone();
    }
    if let Some(mode) = &cli.mode {
        config.mode = Mode::parse(mode)?;
    }
    if let Some(since) = &cli.since {
        config.since = since.clone();
    }
    if let Some(until) = &cli.until {
        config.until = Some(until.clone());
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(lexicon) = &cli.lexicon {
        config.paths.lexicon = Some(lexicon.clone());
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<Vec<String>> {
    let config = resolve_config(cli)?;
    match cli.command {
        Command::Fetch => Ok(vec![commands::cmd_fetch(&config)?]),
        Command::Analyze => Ok(vec![commands::cmd_analyze(&config)?]),
        Command::Index => Ok(vec![commands::cmd_index(&config)?]),
        Command::Correlate => Ok(vec![commands::cmd_correlate(&config)?]),
        Command::Topics => Ok(vec![commands::cmd_topics(&config)?]),
        Command::All => commands::cmd_all(&config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(&cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
