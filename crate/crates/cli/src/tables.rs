//! CSV schemas for tail and scan tables.

use std::io::Read;

use anyhow::{bail, Context, Result};
use hexloop::analysis::ScanPoint;
use hexloop::mcmc::TailEstimate;
use serde::{Deserialize, Serialize};

pub const TAIL_HEADER: [&str; 4] = ["k", "estimate", "stderr", "n_samples"];
pub const SCAN_HEADER: [&str; 5] = ["n", "x", "c", "ci", "annotations"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub k: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub n_samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: f64,
    pub x: f64,
    /// Empty when the point could not be fitted.
    pub c: Option<f64>,
    /// `lo:hi`, empty without a fit.
    pub ci: String,
    pub annotations: String,
}

pub enum Table {
    Tail(Vec<TailRow>),
    Scan(Vec<ScanRow>),
}

pub fn tail_rows(tail: &TailEstimate) -> Vec<TailRow> {
    (0..=tail.k_max())
        .map(|k| TailRow { k, estimate: tail.estimates[k], stderr: tail.stderr[k], n_samples: tail.n_samples })
        .collect()
}

pub fn scan_row(p: &ScanPoint) -> ScanRow {
    let mut notes = vec![format!("inv_sqrt3={:.6}", p.inv_sqrt3), format!("threshold={:.6}", p.threshold)];
    if let Some(xc) = p.x_c {
        notes.push(format!("x_c={xc:.6}"));
    }
    notes.push(format!("faces={}", p.faces));
    match (&p.fit, &p.error) {
        (Some(f), _) => {
            notes.push(format!("decays={}", f.decays));
            notes.push(format!("k_range={}-{}", f.k_range.0, f.k_range.1));
        }
        (None, Some(e)) => notes.push(format!("error={e}")),
        (None, None) => {}
    }
    ScanRow {
        n: p.n,
        x: p.x,
        c: p.fit.as_ref().map(|f| f.rate),
        ci: p.fit.as_ref().map_or(String::new(), |f| format!("{}:{}", f.ci.0, f.ci.1)),
        annotations: notes.join(";"),
    }
}

pub fn write_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().context("flushing csv")
}

/// Reads a tail or scan table, deciding by its header.
pub fn read_table(input: impl Read) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header == TAIL_HEADER {
        let rows = r.deserialize().collect::<Result<Vec<TailRow>, _>>().context("schema error in tail table")?;
        if rows.is_empty() {
            bail!("schema error: tail table has no rows");
        }
        Ok(Table::Tail(rows))
    } else if header == SCAN_HEADER {
        let rows = r.deserialize().collect::<Result<Vec<ScanRow>, _>>().context("schema error in scan table")?;
        Ok(Table::Scan(rows))
    } else {
        bail!(
            "schema error: header {:?} matches neither the tail ({}) nor the scan ({}) schema",
            header.join(","),
            TAIL_HEADER.join(","),
            SCAN_HEADER.join(",")
        )
    }
}

/// One `n x` pair per line; blank lines and `#` comments are skipped.
pub fn parse_grid(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut grid = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        let [n, x] = nums[..] else {
            bail!("grid line {}: expected `n x`, got {line:?}", i + 1);
        };
        let parse = |s: &str| s.parse::<f64>().with_context(|| format!("grid line {}: bad number {s:?}", i + 1));
        grid.push((parse(n)?, parse(x)?));
    }
    Ok(grid)
}
