//! Preset runs compared against the embedded reference tables.

use hausdim::{bracket_dimension, family_mesh, highorder_dimension, DomainMode, MapFamily, SolverOptions};
use serde::Deserialize;

use crate::report::{Num, TableReport, TableRow};
use crate::CliError;

const DATA: &str = include_str!("../data/reference_tables.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tables {
    pub table1: BracketTable<CfRow>,
    pub table2: EstimateTable,
    pub table3: BracketTable<CantorRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketTable<R> {
    pub rounding: f64,
    pub rows: Vec<R>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfRow {
    pub set: String,
    pub digits: Vec<f64>,
    pub h: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorRow {
    pub a: f64,
    pub h: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateTable {
    pub rows: Vec<EstimateRow>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateRow {
    pub set: String,
    pub digits: Vec<f64>,
    pub degree: usize,
    pub h: f64,
    pub value: f64,
    pub tol: f64,
}

pub fn load() -> Tables {
    toml::from_str(DATA).expect("embedded reference tables are well formed")
}

fn bracket_row(
    label: String,
    family: &MapFamily<f64>,
    h: f64,
    reference: (f64, f64),
    rounding: f64,
    domain: DomainMode,
    opts: &SolverOptions<f64>,
) -> Result<TableRow, CliError> {
    let mesh = family_mesh(family, h, domain)?;
    let b = bracket_dimension(family, &mesh, opts)?;
    let (lo, hi) = (reference.0 - rounding, reference.1 + rounding);
    Ok(TableRow {
        label,
        h: Num(h),
        lower: Num(b.s_lower),
        upper: Num(b.s_upper),
        reference_lower: Num(reference.0),
        reference_upper: Num(reference.1),
        pass: b.certified && b.intersects(lo, hi),
    })
}

fn finish(table: &str, scale: f64, criterion: &str, rows: Vec<TableRow>) -> TableReport {
    let all_pass = rows.iter().all(|r| r.pass);
    TableReport { table: table.into(), scale: Num(scale), criterion: criterion.into(), rows, all_pass }
}

pub fn table1(scale: f64, domain: DomainMode, opts: &SolverOptions<f64>) -> Result<TableReport, CliError> {
    let t = load().table1;
    let mut rows = Vec::with_capacity(t.rows.len());
    for r in &t.rows {
        let f = MapFamily::mobius(&r.digits)?;
        rows.push(bracket_row(r.set.clone(), &f, r.h * scale, (r.lower, r.upper), t.rounding, domain, opts)?);
    }
    Ok(finish("table1", scale, "certified bracket intersects the reference bracket", rows))
}

/// Degree-`d` estimates; the mesh widths are fixed, so `scale` is not applied.
pub fn table2(domain: DomainMode, opts: &SolverOptions<f64>) -> Result<TableReport, CliError> {
    let t = load().table2;
    let mut rows = Vec::with_capacity(t.rows.len());
    for r in &t.rows {
        let f = MapFamily::mobius(&r.digits)?;
        let mesh = family_mesh(&f, r.h, domain)?;
        let e = highorder_dimension(&f, &mesh, r.degree, opts.root_tol, (opts.s_min, opts.s_max))?;
        rows.push(TableRow {
            label: format!("{} degree {}", r.set, r.degree),
            h: Num(r.h),
            lower: Num(e.s),
            upper: Num(e.s),
            reference_lower: Num(r.value),
            reference_upper: Num(r.value),
            pass: (e.s - r.value).abs() <= r.tol,
        });
    }
    Ok(finish("table2", 1.0, "estimate within the row tolerance of the reference value", rows))
}

pub fn table3(scale: f64, domain: DomainMode, opts: &SolverOptions<f64>) -> Result<TableReport, CliError> {
    let t = load().table3;
    let mut rows = Vec::with_capacity(t.rows.len());
    for r in &t.rows {
        let f = MapFamily::cantor(r.a)?;
        rows.push(bracket_row(format!("a={}", r.a), &f, r.h * scale, (r.lower, r.upper), t.rounding, domain, opts)?);
    }
    Ok(finish("table3", scale, "certified bracket intersects the reference bracket", rows))
}
