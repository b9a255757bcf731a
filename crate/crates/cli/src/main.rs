mod args;
mod commands;
mod store;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::Parser;
use serde_json::{json, Value};

use pcf_besov::Error;

use args::{Cli, Command};
use store::{sha256_hex, sidecar, write_atomic, Cache, Part};

const SUMMARY_SUFFIX: &str = "summary.json";

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::LevelTooLarge { .. }) => 3,
        Some(Error::SolverFailure(_) | Error::EigSolverFailure(_) | Error::FixedPointDivergence(_)) => 4,
        Some(Error::Io(_)) | None => 1,
        Some(_) => 2,
    }
}

/// Everything that determines the artifact bytes.
fn cache_key(cmd: &Command, descriptor_json: &str) -> Result<String> {
    let function = match cmd {
        Command::BesovNorm(a) => a.function.as_ref().map(|p| std::fs::read(p).map(|b| sha256_hex(&b))).transpose()?,
        _ => None,
    };
    let material = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "args": cmd,
        "descriptor": descriptor_json,
        "function_sha256": function,
    });
    Ok(sha256_hex(serde_json::to_string(&material)?.as_bytes()))
}

fn execute(cmd: &Command) -> Result<()> {
    let start = Instant::now();
    let common = cmd.common();
    let desc = commands::load_descriptor(common)?;
    let descriptor_json = desc.to_json();
    let key = cache_key(cmd, &descriptor_json)?;
    let cache = Cache::open(common.cache_dir.as_deref(), common.no_cache);

    let cached = cache.as_ref().and_then(|c| c.load(&key));
    let hit = cached.is_some();
    let (parts, summary) = match cached {
        Some(mut parts) => {
            let pos = parts.iter().position(|p| p.suffix == SUMMARY_SUFFIX);
            let summary = pos.map(|i| parts.remove(i)).and_then(|p| serde_json::from_slice(&p.bytes).ok());
            (parts, summary.unwrap_or(Value::Null))
        }
        None => {
            let out = commands::run(cmd, &desc)?;
            if let Some(c) = &cache {
                let mut all = out.parts.clone();
                all.push(Part { suffix: SUMMARY_SUFFIX.into(), bytes: serde_json::to_vec(&out.summary)? });
                if let Err(e) = c.store(&key, &all) {
                    eprintln!("warning: cache write failed: {e:#}");
                }
            }
            (out.parts, out.summary)
        }
    };

    eprintln!("{}", serde_json::to_string(&summary)?);
    let Some(out) = &common.out else {
        std::io::stdout().write_all(&parts[0].bytes)?;
        return Ok(());
    };
    let mut artifacts = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let path = if i == 0 { out.clone() } else { sidecar(out, &part.suffix) };
        write_atomic(&path, &part.bytes)?;
        artifacts.push(json!({"path": path, "sha256": sha256_hex(&part.bytes), "bytes": part.bytes.len()}));
    }
    let manifest = json!({
        "tool": "pcf",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cmd.name(),
        "argv": std::env::args().collect::<Vec<_>>(),
        "arguments": cmd,
        "descriptor": serde_json::from_str::<Value>(&descriptor_json)?,
        "descriptor_sha256": sha256_hex(descriptor_json.as_bytes()),
        "seed": cmd.seed(),
        "cache_key": key,
        "cache_hit": hit,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "artifacts": artifacts,
        "summary": summary,
    });
    write_atomic(&sidecar(out, "manifest.json"), (serde_json::to_string_pretty(&manifest)? + "\n").as_bytes())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
