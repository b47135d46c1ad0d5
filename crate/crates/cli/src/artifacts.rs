//! Filesystem layout shared by the subcommands.
//!
//! A fit directory contains `draws.csv` (chain, iteration, one column per
//! parameter), `diagnostics.json` (convergence gate results and per-chain
//! sampler stats), `fit.json` (the fit spec, data path, and derived
//! summaries), and `summary.md`.

use std::fs;
use std::path::{Path, PathBuf};

use bayesbench_core::fit::{FitRow, FitSpec};
use bayesbench_core::modelcheck::{InformativenessEntry, WaicSummary};
use bayesbench_core::sampler::{ChainStats, PosteriorDraws, SamplerConfig};
use bayesbench_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DRAWS_FILE: &str = "draws.csv";
pub const META_FILE: &str = "fit.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";
pub const SUMMARY_FILE: &str = "summary.md";

/// An output directory that refuses to clobber files unless forced.
pub struct OutDir {
    path: PathBuf,
    force: bool,
}

impl OutDir {
    pub fn create(path: &Path, force: bool) -> Result<Self> {
        fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
        Ok(OutDir {
            path: path.to_path_buf(),
            force,
        })
    }

    /// Resolve a file slot, refusing to overwrite without `--force`.
    pub fn slot(&self, name: &str) -> Result<PathBuf> {
        let p = self.path.join(name);
        if p.exists() && !self.force {
            return Err(Error::validation(format!(
                "{} already exists; pass --force to overwrite",
                p.display()
            )));
        }
        Ok(p)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let p = self.slot(name)?;
        fs::write(&p, contents).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::validation(format!("serializing {name}: {e}")))?;
        text.push('\n');
        self.write(name, &text)
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

/// Everything about a saved fit except the draws themselves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitMeta {
    pub version: String,
    /// Dataset path as passed to `fit`.
    pub data: String,
    pub spec: FitSpec,
    /// Sampler configuration actually used.
    pub sampler: SamplerConfig,
    /// Algorithm labels in `a_{label}` parameter order.
    pub algorithms: Vec<String>,
    pub warnings: Vec<String>,
    pub waic: WaicSummary,
    pub informativeness: Vec<InformativenessEntry>,
    pub failures: Vec<String>,
}

/// Convergence results persisted next to the draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub divergences: usize,
    pub max_depth_hits: usize,
    pub failures: Vec<String>,
    pub chain_stats: Vec<ChainStats>,
    pub parameters: Vec<ParamDiagnostics>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamDiagnostics {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub rhat: f64,
    pub ess: f64,
}

pub fn draws_to_csv(draws: &PosteriorDraws) -> String {
    let mut out = String::from("chain,iteration");
    for name in &draws.names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (c, chain) in draws.draws.iter().enumerate() {
        for (i, draw) in chain.iter().enumerate() {
            out.push_str(&format!("{c},{i}"));
            for v in draw {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
    }
    out
}

pub fn draws_from_csv(path: &Path, chain_stats: Vec<ChainStats>) -> Result<PosteriorDraws> {
    let text = read_to_string(path)?;
    let loc = |msg: String| Error::parse(path.display().to_string(), msg);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| loc("empty draws file".into()))?;
    let mut cols = header.split(',');
    if cols.next() != Some("chain") || cols.next() != Some("iteration") {
        return Err(loc("header must start with chain,iteration".into()));
    }
    let names: Vec<String> = cols.map(str::to_string).collect();
    if names.is_empty() {
        return Err(loc("no parameter columns".into()));
    }

    let mut draws: Vec<Vec<Vec<f64>>> = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let mut fields = line.split(',');
        let chain: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| loc(format!("line {lineno}: bad chain index")))?;
        fields
            .next()
            .ok_or_else(|| loc(format!("line {lineno}: missing iteration")))?;
        let row: Vec<f64> = fields
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| loc(format!("line {lineno}: {e}")))?;
        if row.len() != names.len() {
            return Err(loc(format!(
                "line {lineno}: expected {} values, got {}",
                names.len(),
                row.len()
            )));
        }
        if chain == draws.len() {
            draws.push(Vec::new());
        }
        if chain + 1 != draws.len() {
            return Err(loc(format!("line {lineno}: chains must be contiguous")));
        }
        draws[chain].push(row);
    }
    if draws.is_empty() {
        return Err(loc("no draws".into()));
    }
    let n = draws[0].len();
    if draws.iter().any(|c| c.len() != n) {
        return Err(loc("chains have unequal lengths".into()));
    }
    if chain_stats.len() != draws.len() {
        return Err(loc(format!(
            "diagnostics describe {} chains, draws contain {}",
            chain_stats.len(),
            draws.len()
        )));
    }
    Ok(PosteriorDraws {
        names,
        draws,
        chain_stats,
    })
}

/// A fit directory loaded back into memory.
pub struct SavedFit {
    pub meta: FitMeta,
    pub diagnostics: Diagnostics,
    pub draws: PosteriorDraws,
}

pub fn load_fit(dir: &Path) -> Result<SavedFit> {
    let need = |name: &str| -> Result<PathBuf> {
        let p = dir.join(name);
        if p.exists() {
            Ok(p)
        } else {
            Err(Error::validation(format!(
                "missing fit artifact: {}",
                p.display()
            )))
        }
    };
    let meta: FitMeta = read_json(&need(META_FILE)?)?;
    let diagnostics: Diagnostics = read_json(&need(DIAGNOSTICS_FILE)?)?;
    let draws = draws_from_csv(&need(DRAWS_FILE)?, diagnostics.chain_stats.clone())?;
    if draws.names.len() != diagnostics.parameters.len() {
        return Err(Error::validation(format!(
            "{}: diagnostics and draws disagree on the parameter count",
            dir.display()
        )));
    }
    Ok(SavedFit {
        meta,
        diagnostics,
        draws,
    })
}

pub fn markdown_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::from("|");
    for h in header {
        out.push(' ');
        out.push_str(h);
        out.push_str(" |");
    }
    out.push_str("\n|");
    for _ in header {
        out.push_str(" --- |");
    }
    out.push('\n');
    for row in rows {
        out.push('|');
        for cell in row {
            out.push(' ');
            out.push_str(cell);
            out.push_str(" |");
        }
        out.push('\n');
    }
    out
}

pub fn fmt(x: f64) -> String {
    format!("{x:.3}")
}

/// Posterior summary table: Parameter, Mean, HPD low, HPD high, plus the
/// ratio column (OR/HR) when the model has one.
pub fn summary_table(rows: &[FitRow], ratio: Option<&str>) -> String {
    let mut header = vec!["Parameter", "Mean", "HPD low", "HPD high"];
    if let Some(label) = ratio {
        header.push(label);
    }
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                r.parameter.clone(),
                fmt(r.mean),
                fmt(r.hpd_low),
                fmt(r.hpd_high),
            ];
            if ratio.is_some() {
                row.push(r.ratio.map(fmt).unwrap_or_default());
            }
            row
        })
        .collect();
    markdown_table(&header, &body)
}
