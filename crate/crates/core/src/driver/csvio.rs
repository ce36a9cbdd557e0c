use std::fs::File;
use std::path::Path;

use crate::engine::{ErrorSeries, StatSeries};
use crate::{Error, Result};

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

/// Seventeen significant digits: enough to recover every `f64` exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn stats_header(dim: usize, cumulants: bool) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=dim).map(|i| format!("mean_{i}")));
    h.extend((1..=dim).map(|i| format!("var_{i}")));
    if cumulants {
        h.extend((1..=6).map(|i| format!("k{i}")));
    }
    h
}

pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,mean_1..mean_d,var_1..var_d[,k1..k6]`.
pub fn write_stats(path: &Path, s: &StatSeries) -> Result<()> {
    let header = stats_header(s.dim, s.cumulants.is_some());
    let rows: Vec<Vec<String>> = (0..s.times.len())
        .map(|i| {
            let mut r = vec![fmt_f64(s.times[i])];
            r.extend(s.mean[i].iter().chain(&s.variance[i]).map(|&v| fmt_f64(v)));
            if let Some(c) = &s.cumulants {
                r.extend(c[i].iter().map(|&v| fmt_f64(v)));
            }
            r
        })
        .collect();
    write_table(path, &header, &rows)
}

pub const DIAGNOSTICS_HEADER: [&str; 11] = [
    "t_j",
    "cond_A",
    "l1_objective",
    "residual",
    "node_count",
    "lp_iters",
    "fallbacks",
    "clamps",
    "forcing_nodes",
    "groups",
    "max_group_nodes",
];

/// One row per restart; `fallbacks` counts the recovery steps taken.
pub fn write_diagnostics(path: &Path, s: &StatSeries) -> Result<()> {
    let header: Vec<String> = DIAGNOSTICS_HEADER.iter().map(|h| h.to_string()).collect();
    let rows: Vec<Vec<String>> = s
        .restarts
        .iter()
        .map(|r| {
            let d = &r.diagnostics;
            vec![
                fmt_f64(r.t),
                fmt_f64(d.cond_a),
                fmt_f64(d.l1_objective),
                fmt_f64(d.residual),
                d.node_count.to_string(),
                d.lp_iterations.to_string(),
                d.fallbacks.len().to_string(),
                r.clamps.to_string(),
                r.forcing_nodes.to_string(),
                d.groups.to_string(),
                d.max_group_nodes.to_string(),
            ]
        })
        .collect();
    write_table(path, &header, &rows)
}

/// `t,eps_mean_1..,eps_var_1..`.
pub fn write_errors(path: &Path, e: &ErrorSeries) -> Result<()> {
    let dim = e.mean.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|i| format!("eps_mean_{i}")));
    header.extend((1..=dim).map(|i| format!("eps_var_{i}")));
    let rows: Vec<Vec<String>> = (0..e.times.len())
        .map(|i| {
            let mut r = vec![fmt_f64(e.times[i])];
            r.extend(e.mean[i].iter().chain(&e.variance[i]).map(|&v| fmt_f64(v)));
            r
        })
        .collect();
    write_table(path, &header, &rows)
}

/// Reads a numeric CSV back as `(header, rows)`.
pub fn read_numeric(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(File::open(path)?);
    let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("non-numeric field `{f}`"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
