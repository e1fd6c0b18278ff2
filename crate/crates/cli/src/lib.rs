//! Command-line driver for `susy-ep`: run configurations, the five
//! pipelines, and their CSV/JSON artifacts.
//!
//! Every run writes into its output directory:
//!
//! * one CSV (and/or JSON array) per table, e.g. `rigidity.csv`, `fits.csv`;
//! * structured documents such as `synthesis.json` or `jordan.json`;
//! * `config.json`, the fully resolved configuration, reloadable as-is;
//! * `meta.json`, the configuration echo plus tool version, timestamp and notes.
//!
//! Only `meta.json` varies between identical runs.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::path::PathBuf;

use serde_json::json;

pub use commands::{run, RunOutput};
pub use config::RunConfig;
pub use error::CliError;

use table::{write_file, write_json};

/// Run `cfg` on a pool of `cfg.threads` workers (or rayon's default).
pub fn run_with_threads(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage { reason: e.to_string() })?
            .install(|| run(cfg)),
        None => run(cfg),
    }
}

/// Write every artifact of `out` under `cfg.output`, in a fixed order.
/// Returns the paths written.
pub fn write_outputs(cfg: &RunConfig, out: &RunOutput) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.clone(),
        reason: e.to_string(),
    })?;
    let mut written = Vec::new();
    for (stem, table) in &out.tables {
        if cfg.format.csv() {
            let path = dir.join(format!("{stem}.csv"));
            write_file(&path, &table.to_csv())?;
            written.push(path);
        }
        if cfg.format.json() {
            let path = dir.join(format!("{stem}.json"));
            write_json(&path, &table.to_json())?;
            written.push(path);
        }
    }
    for (stem, doc) in &out.documents {
        let path = dir.join(format!("{stem}.json"));
        write_json(&path, doc)?;
        written.push(path);
    }
    let config_path = dir.join("config.json");
    write_file(&config_path, &(serde_json::to_string_pretty(cfg).expect("serializable") + "\n"))?;
    written.push(config_path);

    let meta_path = dir.join("meta.json");
    let files: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let meta = json!({
        "tool": "susy-ep",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": chrono::Utc::now().to_rfc3339(),
        "config": cfg,
        "files": files,
        "notes": out.notes,
    });
    write_json(&meta_path, &meta)?;
    written.push(meta_path);
    Ok(written)
}

/// Run and write.
pub fn execute(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let out = run_with_threads(cfg)?;
    write_outputs(cfg, &out)
}
