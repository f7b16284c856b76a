// Copyright 2026 The robq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

mod config;
mod scenarios;
mod table;

use config::{Config, ConfigError};
use scenarios::Scenario;

/// Runs one seeded scenario and writes its CSV tables.
///
/// Worker threads default to the number of CPUs; set ROBQ_WORKERS to bound them.
#[derive(Parser, Debug)]
#[command(name = "robq", version)]
struct Args {
    scenario: Scenario,
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path prefix; the main table goes to `<prefix>.csv` and the
    /// trial-0 oracle, when there is one, to `<prefix>_oracle.cfg`.
    #[arg(long)]
    out: PathBuf,
    /// `key=value` overrides applied after the file.
    overrides: Vec<String>,
}

fn workers() -> Result<Option<usize>, ConfigError> {
    match std::env::var("ROBQ_WORKERS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError {
                field: "ROBQ_WORKERS".into(),
                message: format!("`{v}` is not a positive integer"),
            }),
        },
    }
}

fn output_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    if !suffix.is_empty() {
        name.push("_");
        name.push(suffix);
    }
    name.push(".csv");
    PathBuf::from(name)
}

fn run(args: Args) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    for kv in &args.overrides {
        cfg.apply_override(kv)?;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    let outputs = pool.install(|| scenarios::run(args.scenario, &cfg))?;
    if args.scenario.uses_oracle() {
        let path = output_path(&args.out, "oracle").with_extension("cfg");
        let spec = cfg.recipe()?.build(0)?;
        std::fs::write(&path, config::format_oracle_spec(&spec))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    for o in outputs {
        let path = output_path(&args.out, o.suffix);
        o.table.write(&path)?;
        eprintln!("wrote {} ({} rows)", path.display(), o.table.rows.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
