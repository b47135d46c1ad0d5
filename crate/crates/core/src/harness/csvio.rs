//! CSV persistence for run datasets.
//!
//! One row per run, fixed column order, with the epsilon grid encoded in the
//! `solved_*` / `feval_*` column names. An unsolved threshold leaves its
//! `feval` field empty. Floats are written in shortest round-trip form, so
//! write-then-read reproduces a dataset exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::optim::AlgorithmId;

use super::{Dataset, RunRecord};

const FIXED_PREFIX: [&str; 8] = [
    "algorithm",
    "benchmark",
    "dimension",
    "noise",
    "budget_per_dim",
    "repetition",
    "delta_f",
    "euclid",
];

/// Column token for an epsilon: the shorter of its plain and exponent
/// renderings, preferring plain on ties ("1", "0.1", "1e-3", "1e-6").
pub(crate) fn epsilon_token(e: f64) -> String {
    let plain = format!("{e}");
    let exp = format!("{e:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

fn header(epsilons: &[f64]) -> Vec<String> {
    let mut cols: Vec<String> = FIXED_PREFIX.iter().map(|s| s.to_string()).collect();
    for &e in epsilons {
        cols.push(format!("solved_{}", epsilon_token(e)));
    }
    for &e in epsilons {
        cols.push(format!("feval_{}", epsilon_token(e)));
    }
    cols.push("cpu_seconds".to_string());
    cols
}

pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let render = |fields: &[String]| fields.join(",");
    writeln!(out, "{}", render(&header(&dataset.epsilons))).map_err(|e| Error::io(path, e))?;
    for r in &dataset.records {
        let mut fields: Vec<String> = vec![
            r.algorithm.to_string(),
            r.benchmark.clone(),
            r.dimension.to_string(),
            r.noise.to_string(),
            r.budget_per_dim.to_string(),
            r.repetition.to_string(),
            r.delta_f.to_string(),
            r.euclid.to_string(),
        ];
        for &s in &r.solved_at {
            fields.push(if s { "true" } else { "false" }.to_string());
        }
        for fv in &r.solve_feval {
            fields.push(fv.map(|v| v.to_string()).unwrap_or_default());
        }
        fields.push(r.cpu_seconds.to_string());
        writeln!(out, "{}", render(&fields)).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let loc = path.display().to_string();
    let mut lines = text.lines();
    let head_line = lines
        .next()
        .ok_or_else(|| Error::parse(&loc, "empty file"))?;
    let cols: Vec<&str> = head_line.split(',').collect();
    let epsilons = parse_header(&loc, &cols)?;
    let n_eps = epsilons.len();
    let n_cols = cols.len();

    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_cols {
            return Err(Error::parse(
                &loc,
                format!("line {lineno}: expected {n_cols} fields, found {}", fields.len()),
            ));
        }
        let field = |k: usize| -> &str { fields[k] };
        let colname = |k: usize| -> &str { cols[k] };
        macro_rules! parse_col {
            ($k:expr, $ty:ty) => {
                field($k).parse::<$ty>().map_err(|_| {
                    Error::parse(
                        &loc,
                        format!(
                            "line {lineno}: column `{}`: could not parse `{}`",
                            colname($k),
                            field($k)
                        ),
                    )
                })?
            };
        }
        let algorithm = parse_col!(0, AlgorithmId);
        let benchmark = field(1).to_string();
        let dimension = parse_col!(2, usize);
        let noise = parse_col!(3, f64);
        let budget_per_dim = parse_col!(4, usize);
        let repetition = parse_col!(5, usize);
        let delta_f = parse_col!(6, f64);
        let euclid = parse_col!(7, f64);
        let mut solved_at = Vec::with_capacity(n_eps);
        for k in 8..8 + n_eps {
            solved_at.push(parse_col!(k, bool));
        }
        let mut solve_feval = Vec::with_capacity(n_eps);
        for (j, k) in (8 + n_eps..8 + 2 * n_eps).enumerate() {
            if field(k).is_empty() {
                solve_feval.push(None);
            } else {
                let v = parse_col!(k, usize);
                if !solved_at[j] {
                    return Err(Error::parse(
                        &loc,
                        format!(
                            "line {lineno}: column `{}`: feval present but run is unsolved",
                            colname(k)
                        ),
                    ));
                }
                solve_feval.push(Some(v));
            }
        }
        let cpu_seconds = parse_col!(n_cols - 1, f64);
        records.push(RunRecord {
            algorithm,
            benchmark,
            dimension,
            noise,
            budget_per_dim,
            repetition,
            delta_f,
            euclid,
            solved_at,
            solve_feval,
            cpu_seconds,
        });
    }
    Ok(Dataset { epsilons, records })
}

/// Validate the header and recover the epsilon grid from its column names.
fn parse_header(loc: &str, cols: &[&str]) -> Result<Vec<f64>> {
    for (k, expected) in FIXED_PREFIX.iter().enumerate() {
        if cols.get(k).copied() != Some(*expected) {
            return Err(Error::parse(
                loc,
                format!(
                    "header column {} should be `{expected}`, found `{}`",
                    k + 1,
                    cols.get(k).copied().unwrap_or("<missing>")
                ),
            ));
        }
    }
    if cols.last().copied() != Some("cpu_seconds") {
        return Err(Error::parse(loc, "header must end with `cpu_seconds`"));
    }
    let middle = &cols[FIXED_PREFIX.len()..cols.len() - 1];
    if middle.is_empty() || middle.len() % 2 != 0 {
        return Err(Error::parse(
            loc,
            "header must hold matching solved_*/feval_* column pairs",
        ));
    }
    let n_eps = middle.len() / 2;
    let mut epsilons = Vec::with_capacity(n_eps);
    for k in 0..n_eps {
        let solved = middle[k];
        let feval = middle[n_eps + k];
        let token = solved.strip_prefix("solved_").ok_or_else(|| {
            Error::parse(loc, format!("expected a solved_* column, found `{solved}`"))
        })?;
        if feval.strip_prefix("feval_") != Some(token) {
            return Err(Error::parse(
                loc,
                format!("column `{feval}` does not match `{solved}`"),
            ));
        }
        let e: f64 = token
            .parse()
            .map_err(|_| Error::parse(loc, format!("bad epsilon token `{token}`")))?;
        if epsilon_token(e) != token {
            return Err(Error::parse(loc, format!("non-canonical epsilon token `{token}`")));
        }
        epsilons.push(e);
    }
    Ok(epsilons)
}
