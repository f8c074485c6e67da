//! Append-only experiment log, one JSON object per line.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use hirank::config::SessionConfig;
use hirank::variety::hex;

#[derive(Serialize)]
struct ExperimentRecord<'a> {
    command: String,
    args: Vec<String>,
    config_hash: String,
    config: &'a SessionConfig,
    output_sha256: String,
    output: &'a Value,
    wall_secs: f64,
    version: &'static str,
}

pub fn append(path: &Path, command: &str, cfg: &SessionConfig, output: &Value, wall: Duration) -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let canonical = serde_json::to_string(output)?;
    let rec = ExperimentRecord {
        command: command.to_string(),
        args,
        config_hash: cfg.hash(),
        config: cfg,
        output_sha256: hex(&Sha256::digest(canonical.as_bytes())),
        output,
        wall_secs: wall.as_secs_f64(),
        version: env!("CARGO_PKG_VERSION"),
    };
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{}", serde_json::to_string(&rec)?)?;
    Ok(())
}
