//! `bench`: run the experiment grid and write the dataset.

use std::path::PathBuf;

use bayesbench_core::harness::{run_experiment, write_csv, ExperimentConfig};
use bayesbench_core::{Error, Result};
use clap::Args;
use serde_json::json;

use crate::artifacts::OutDir;

#[derive(Args)]
pub struct BenchArgs {
    /// Experiment grid description (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for runs.csv and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Master seed, overriding the config when set.
    #[arg(long, env = "BAYESBENCH_SEED")]
    seed: Option<u64>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

pub fn run(args: BenchArgs) -> Result<()> {
    let text = crate::artifacts::read_to_string(&args.config)?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::parse(args.config.display().to_string(), e.to_string()))?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }

    let out = OutDir::create(&args.out, args.force)?;
    let csv_path = out.slot("runs.csv")?;
    let manifest_slot = out.slot("manifest.json")?;

    let dataset = run_experiment(&config)?;
    write_csv(&dataset, &csv_path)?;
    let manifest = json!({
        "command": "bench",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.master_seed,
        "timing": config.timing,
        "rows": dataset.records.len(),
        "config": config,
    });
    let mut manifest_text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::validation(format!("serializing manifest: {e}")))?;
    manifest_text.push('\n');
    std::fs::write(&manifest_slot, manifest_text).map_err(|e| Error::io(&manifest_slot, e))?;

    println!(
        "wrote {} rows to {} (seed {})",
        dataset.records.len(),
        csv_path.display(),
        config.master_seed
    );
    Ok(())
}
