use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::manifest::ConstructionFamily;
use crate::metrics::NeiF1Matrix;

/// A rectangular train × eval table. Rows and columns are sorted by family
/// name.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTable {
    pub rows: Vec<ConstructionFamily>,
    pub cols: Vec<ConstructionFamily>,
    pub values: Vec<Vec<f64>>,
}

fn by_name(mut v: Vec<ConstructionFamily>) -> Vec<ConstructionFamily> {
    v.sort_by_key(|f| f.as_str());
    v.dedup();
    v
}

/// Checks the cell set is rectangular and lays it out. Columns are the
/// union of every row's evaluation families.
pub fn render_matrix(matrix: &NeiF1Matrix) -> Result<MatrixTable, ReportError> {
    let rows = by_name(matrix.trains().collect());
    if rows.is_empty() {
        return Err(ReportError::Empty("matrix"));
    }
    let cols = by_name(matrix.cells.values().flat_map(|r| r.keys().copied()).collect());
    let values = rows
        .iter()
        .map(|&row| {
            cols.iter().map(|&col| matrix.get(row, col).ok_or(ReportError::MissingCell { row, col })).collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(MatrixTable { rows, cols, values })
}

impl MatrixTable {
    /// Fixed-width text with three decimals; matched cells carry a `*`.
    pub fn to_text(&self) -> String {
        let first = self.rows.iter().map(|f| f.as_str().len()).max().unwrap_or(0).max("train \\ eval".len());
        let widths: Vec<usize> = self.cols.iter().map(|c| c.as_str().len().max(6)).collect();
        let mut out = format!("{:<first$}", "train \\ eval");
        for (c, w) in self.cols.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", c.as_str());
        }
        out.push('\n');
        for (row, vals) in self.rows.iter().zip(&self.values) {
            let _ = write!(out, "{:<first$}", row.as_str());
            for ((col, v), w) in self.cols.iter().zip(vals).zip(&widths) {
                let mark = if col == row { "*" } else { " " };
                let _ = write!(out, "  {:>w$}", format!("{v:.3}{mark}"), w = w + 1);
            }
            out.push('\n');
        }
        out.push_str("* matched construction\n");
        out
    }

    /// Full-precision CSV: `train,<eval columns...>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("train");
        for c in &self.cols {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (row, vals) in self.rows.iter().zip(&self.values) {
            out.push_str(row.as_str());
            for v in vals {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn get(&self, row: ConstructionFamily, col: ConstructionFamily) -> Option<f64> {
        let r = self.rows.iter().position(|&f| f == row)?;
        let c = self.cols.iter().position(|&f| f == col)?;
        Some(self.values[r][c])
    }

    pub fn to_nei_f1_matrix(&self) -> NeiF1Matrix {
        let mut m = NeiF1Matrix::default();
        for (row, vals) in self.rows.iter().zip(&self.values) {
            for (col, v) in self.cols.iter().zip(vals) {
                m.insert(*row, *col, *v);
            }
        }
        m
    }
}

fn family(what: &str, s: &str) -> Result<ConstructionFamily, ReportError> {
    s.parse().map_err(|_| ReportError::Table { what: what.into(), detail: format!("unknown construction {s:?}") })
}

/// Reads back [`MatrixTable::to_csv`].
pub fn parse_matrix_csv(text: &str) -> Result<MatrixTable, ReportError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let cols = header.iter().skip(1).map(|c| family("matrix header", c)).collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        rows.push(family("matrix row", &rec[0])?);
        values.push(
            rec.iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>().map_err(|e| ReportError::Table { what: "matrix cell".into(), detail: e.to_string() })
                })
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    Ok(MatrixTable { rows, cols, values })
}

/// One per-seed cell as written by the probe matrix runner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCellRow {
    pub train: String,
    pub eval: String,
    pub seed: u64,
    pub accuracy: f64,
    pub nei_f1: f64,
    #[serde(default)]
    pub macro_f1: Option<f64>,
}

/// Parses a per-seed cell CSV. A row without both construction tags is
/// refused, so an untagged number never reaches a rendered table.
pub fn parse_cells_csv(text: &str) -> Result<Vec<(ConstructionFamily, ConstructionFamily, MatrixCellRow)>, ReportError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize::<MatrixCellRow>().enumerate() {
        let rec = rec?;
        if rec.train.trim().is_empty() || rec.eval.trim().is_empty() {
            return Err(ReportError::MissingConstruction { line: i + 2 });
        }
        out.push((family("cells", &rec.train)?, family("cells", &rec.eval)?, rec));
    }
    Ok(out)
}

/// Seed-mean NEI-F1 per (train, eval) from parsed cells.
pub fn mean_matrix(cells: &[(ConstructionFamily, ConstructionFamily, MatrixCellRow)]) -> NeiF1Matrix {
    let mut sums: BTreeMap<(ConstructionFamily, ConstructionFamily), (f64, usize)> = BTreeMap::new();
    for (t, e, r) in cells {
        let s = sums.entry((*t, *e)).or_default();
        s.0 += r.nei_f1;
        s.1 += 1;
    }
    let mut m = NeiF1Matrix::default();
    for ((t, e), (sum, n)) in sums {
        m.insert(t, e, sum / n as f64);
    }
    m
}
