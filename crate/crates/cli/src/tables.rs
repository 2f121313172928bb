//! Recomputation of the published normalized-gap tables.

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;

use gaplab_core::gap::{gap_report, normalized_gap};
use gaplab_core::model::tridiag_eigenvalues;
use gaplab_core::{ModelParams, SolveOptions};

use crate::args::Scheme;
use crate::output::{num, sig, Report};
use crate::{CliError, Result};

const DATA: &str = include_str!("../data/published_tables.toml");

/// Interval count of the published finite-difference computation.
pub const PUBLISHED_INTERVALS: usize = 1000;

#[derive(Debug, Clone, Deserialize)]
pub struct TableData {
    pub version: u32,
    pub curvature: f64,
    pub d_table: DTable,
    pub n_table: NTable,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DTable {
    pub title: String,
    pub dimensions: Vec<u32>,
    pub rows: Vec<DRow>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DRow {
    #[serde(rename = "D")]
    pub d: f64,
    pub values: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct NTable {
    pub title: String,
    #[serde(rename = "D")]
    pub d: f64,
    pub tolerance: f64,
    pub rows: Vec<NRow>,
    pub exact: NRow,
}

#[derive(Debug, Clone, Deserialize)]
pub struct NRow {
    pub n: u32,
    pub value: f64,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

pub fn load() -> Result<TableData> {
    let t: TableData = toml::from_str(DATA).map_err(|e| CliError::Data(e.to_string()))?;
    if t.d_table.rows.iter().any(|r| r.values.len() != t.d_table.dimensions.len()) {
        return Err(CliError::Data("row width does not match the dimension list".into()));
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub table: &'static str,
    pub n: u32,
    pub d: f64,
    pub reference: f64,
    pub computed: f64,
    pub tolerance: f64,
}

impl Cell {
    pub fn delta(&self) -> f64 {
        self.computed - self.reference
    }
    pub fn within_tolerance(&self) -> bool {
        self.delta().abs() <= self.tolerance
    }
}

/// Normalized gap of the `K`-model under the given scheme.
pub fn normalized(p: &ModelParams, scheme: Scheme) -> Result<f64> {
    Ok(match scheme {
        Scheme::Converged => gap_report(p, &SolveOptions::default())?.normalized_gap,
        Scheme::Published => {
            let [l1, l2] = tridiag_eigenvalues(p, PUBLISHED_INTERVALS - 1)?;
            normalized_gap(p.d, l2 - l1)
        }
    })
}

pub fn reproduce(scheme: Scheme) -> Result<Vec<Cell>> {
    let t = load()?;
    let mut tasks: Vec<(&'static str, u32, f64, f64, f64)> = Vec::new();
    for row in &t.d_table.rows {
        for (&n, &v) in t.d_table.dimensions.iter().zip(&row.values) {
            tasks.push(("D-table", n, row.d, v, row.tolerance));
        }
    }
    for row in &t.n_table.rows {
        tasks.push(("n-table", row.n, t.n_table.d, row.value, row.tolerance.unwrap_or(t.n_table.tolerance)));
    }
    if scheme == Scheme::Converged {
        let e = &t.n_table.exact;
        tasks.push(("n-table exact", e.n, t.n_table.d, e.value, e.tolerance.unwrap_or(t.n_table.tolerance)));
    }
    tasks
        .par_iter()
        .map(|&(table, n, d, reference, tolerance)| {
            let p = ModelParams::new(n, t.curvature, d)?;
            Ok(Cell { table, n, d, reference, computed: normalized(&p, scheme)?, tolerance })
        })
        .collect()
}

pub fn report(cells: &[Cell], scheme: Scheme) -> Report {
    let mut rep = Report::new(["table", "n", "D", "published", "computed", "delta", "tolerance", "status"]);
    for c in cells {
        rep.push(vec![
            c.table.to_string(),
            c.n.to_string(),
            sig(c.d),
            sig(c.reference),
            sig(c.computed),
            sig(c.delta()),
            sig(c.tolerance),
            if c.within_tolerance() { "ok" } else { "exceeds" }.to_string(),
        ]);
    }
    let scheme_name = match scheme {
        Scheme::Converged => "converged",
        Scheme::Published => "published",
    };
    let failures = cells.iter().filter(|c| !c.within_tolerance()).count();
    if let Some(e) = cells.iter().find(|c| c.table == "n-table exact") {
        if let Some(p) = cells.iter().find(|c| c.table == "n-table" && c.n == e.n) {
            rep.notes.push(format!(
                "n = {}: converged value is {} to {}; the published {} is off by {}, rounding in the published computation",
                e.n,
                sig(e.reference),
                sig(e.delta().abs()),
                sig(p.reference),
                sig(p.reference - e.computed),
            ));
        }
    }
    rep.notes.push(format!("scheme: {scheme_name}; {failures} of {} cells exceed tolerance", cells.len()));
    rep.json = json!({
        "scheme": scheme_name,
        "failures": failures,
        "cells": cells.iter().map(|c| json!({
            "table": c.table,
            "n": c.n,
            "D": num(c.d),
            "published": num(c.reference),
            "computed": num(c.computed),
            "delta": num(c.delta()),
            "tolerance": num(c.tolerance),
            "within_tolerance": c.within_tolerance(),
        })).collect::<Vec<_>>(),
    });
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn data_file_parses() {
        let t = load().unwrap();
        assert_eq!(t.version, 1);
        assert_eq!(t.d_table.rows.len(), 7);
        assert_eq!(t.n_table.rows.len(), 8);
        assert_eq!(t.d_table.rows[4].values[0], 2.3138191920);
        assert_eq!(t.n_table.rows[6].value, 3.25303530);
    }

    #[test]
    fn published_scheme_reproduces_cells() {
        let p = ModelParams::new(2, 1.0, 1.5).unwrap();
        let v = normalized(&p, Scheme::Published).unwrap();
        assert!((v - 2.9940610569).abs() < 1e-8, "{v}");
    }
}
