//! Batch front end: one experiment config in, one deterministic report out.

pub mod config;

mod commands;

use std::path::Path;

use serde_json::{json, Value};

pub use config::{ExperimentConfig, Source};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] cosetpack::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cosetpack::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Malformed(_) | E::UnknownLetter(_) | E::BadWord(_)) => 2,
            CliError::Core(E::Refused(_) | E::Unsupported(_)) => 3,
            CliError::Core(E::Budget { .. }) => 4,
            CliError::Core(E::Consistency(_)) | CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "refusal",
            4 => "budget",
            _ => "internal",
        }
    }

    /// The machine-readable error object.
    pub fn to_json(&self) -> Value {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
    }
}

/// A finished report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Report {
    Json(String),
    Csv(String),
}

impl Report {
    pub fn text(&self) -> &str {
        match self {
            Report::Json(s) | Report::Csv(s) => s,
        }
    }
}

/// Every subcommand, for `--help` and validation.
pub const COMMANDS: &[&str] = &[
    "ball",
    "dist",
    "geodesic",
    "coset-dist",
    "packing-profile",
    "normal-count",
    "transfer-check",
    "stallings.fold",
    "stallings.member",
    "stallings.dcs",
    "stallings.fiber",
    "stallings.height",
    "stallings.width",
    "stallings.commensurator",
    "cube.verify-median",
    "cube.median",
    "cube.interval",
    "cube.hull",
    "cube.hyperplanes",
    "cube.delta",
    "cube.helly",
    "cube.dual",
    "cube.dimension",
    "cube.packing-check",
    "rel.dist",
    "rel.saturation",
    "rel.transition",
    "rel.sigma",
    "rel.constants",
    "rel.packing",
];

/// Runs `cfg`; relative paths inside it resolve against `base`.
/// `timestamp` is the value embedded unless the config disables it.
pub fn run(cfg: &ExperimentConfig, base: &Path, timestamp: Option<u64>) -> Result<Report, CliError> {
    let command = cfg
        .command
        .clone()
        .ok_or_else(|| CliError::Config("no command given".into()))?;
    if !COMMANDS.contains(&command.as_str()) {
        return Err(CliError::Config(format!("unknown command `{command}`")));
    }
    let hash = cfg.hash();
    let timestamp = if cfg.no_timestamp.unwrap_or(false) { None } else { timestamp };
    let out = commands::dispatch(&command, cfg, base)?;
    Ok(match out {
        commands::Output::Json { certified, result } => {
            let mut doc = json!({
                "command": command,
                "config_hash": hash,
                "certified": certified,
                "result": result,
            });
            if let Some(t) = timestamp {
                doc["timestamp"] = json!(t);
            }
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            Report::Json(s)
        }
        commands::Output::Csv { header, rows } => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut head: Vec<String> = header.iter().map(|s| s.to_string()).collect();
            head.push("config_hash".into());
            if timestamp.is_some() {
                head.push("timestamp".into());
            }
            w.write_record(&head).map_err(csv_err)?;
            for row in rows {
                let mut rec = row;
                rec.push(hash.clone());
                if let Some(t) = timestamp {
                    rec.push(t.to_string());
                }
                w.write_record(&rec).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            Report::Csv(String::from_utf8(bytes).expect("csv is utf-8"))
        }
    })
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}
