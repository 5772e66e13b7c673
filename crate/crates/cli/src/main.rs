use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::Parser;
use cosetpack_cli::{run, CliError, ExperimentConfig, COMMANDS};

#[derive(Parser, Debug)]
#[command(
    name = "cosetpack",
    version,
    about = "Coset packing, Stallings graphs, median graphs and relative metrics",
    after_help = format!("Commands: {}", COMMANDS.join(", "))
)]
struct Args {
    /// Subcommand; may instead be given as `command` in the config.
    command: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Element budget for ball enumeration.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

fn load(args: &Args) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let (mut cfg, base) = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (ExperimentConfig::from_json(&text)?, base)
        }
        None => (ExperimentConfig::default(), PathBuf::new()),
    };
    if let Some(c) = &args.command {
        if let Some(cc) = &cfg.command {
            if cc != c {
                return Err(CliError::Config(format!(
                    "command `{c}` disagrees with the config's `{cc}`"
                )));
            }
        }
        cfg.command = Some(c.clone());
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.budget.is_some() {
        cfg.budget = args.budget;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if args.no_timestamp {
        cfg.no_timestamp = Some(true);
    }
    Ok((cfg, base))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = load(&args).and_then(|(cfg, base)| {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).ok();
        run(&cfg, &base, now).map(|r| (r, cfg.out))
    });
    match outcome {
        Ok((report, out)) => match emit(report.text(), out.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e:#}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
