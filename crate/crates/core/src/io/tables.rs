//! CSV files. Numbers are written in shortest round-trip form, so reading a
//! file back reproduces every value bit for bit.

use std::path::Path;

use super::IoError;
use crate::analysis::NamedDuals;
use crate::model::{DispatchPlan, MarketData, PLAN_COLUMNS};
use crate::scenarios::{InventoryMatrixResult, SweepResult};

pub const MARKET_HEADER: [&str; 6] = ["hour", "pi_g", "pi_r", "pi_c", "e", "l"];

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, IoError> {
    csv::Writer::from_path(path).map_err(|e| IoError::table(path, e.to_string()))
}

fn put(
    w: &mut csv::Writer<std::fs::File>,
    path: &Path,
    row: impl IntoIterator<Item = String>,
) -> Result<(), IoError> {
    w.write_record(row.into_iter().collect::<Vec<_>>())
        .map_err(|e| IoError::table(path, e.to_string()))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<(), IoError> {
    w.flush().map_err(|e| IoError::io(path, e))
}

/// Reads the rows of `path` after checking the header is exactly `header`.
fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IoError::table(path, e.to_string()))?;
    let found = r
        .headers()
        .map_err(|e| IoError::table(path, e.to_string()))?
        .clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(IoError::table(
            path,
            format!(
                "header must be `{}`, found `{}`",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    r.records()
        .map(|rec| rec.map_err(|e| IoError::table(path, e.to_string())))
        .collect()
}

fn number(path: &Path, line: usize, column: &str, s: &str) -> Result<f64, IoError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(IoError::table(
            path,
            format!("line {line}: column {column}: `{s}` is not a finite number"),
        )),
    }
}

/// Parses the hour column and checks it counts up by one from its first
/// value.
fn hours(path: &Path, rows: &[csv::StringRecord]) -> Result<(), IoError> {
    let mut first = None;
    for (i, rec) in rows.iter().enumerate() {
        let line = i + 2;
        let h: i64 = rec[0].parse().map_err(|_| {
            IoError::table(
                path,
                format!("line {line}: hour `{}` is not an integer", &rec[0]),
            )
        })?;
        let start = *first.get_or_insert(h);
        if h != start + i as i64 {
            return Err(IoError::table(
                path,
                format!(
                    "line {line}: hour {h} breaks the sequence (expected {})",
                    start + i as i64
                ),
            ));
        }
    }
    Ok(())
}

/// Reads `hour,pi_g,pi_r,pi_c,e,l`. Hours must be consecutive and increasing.
pub fn read_market_csv(path: &Path) -> Result<MarketData, IoError> {
    let rows = read_rows(path, &MARKET_HEADER)?;
    hours(path, &rows)?;
    let mut data = MarketData::flat(0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, rec) in rows.iter().enumerate() {
        let v = |c: usize| number(path, i + 2, MARKET_HEADER[c], &rec[c]);
        data.pi_g.push(v(1)?);
        data.pi_r.push(v(2)?);
        data.pi_c.push(v(3)?);
        data.e.push(v(4)?);
        data.l.push(v(5)?);
    }
    Ok(data)
}

/// Writes market data with one-based hours.
pub fn write_market_csv(path: &Path, data: &MarketData) -> Result<(), IoError> {
    let mut w = writer(path)?;
    put(&mut w, path, MARKET_HEADER.map(String::from))?;
    for t in 0..data.len() {
        let row = std::iter::once((t + 1).to_string())
            .chain(data.series().into_iter().map(|(_, s)| s[t].to_string()));
        put(&mut w, path, row)?;
    }
    finish(w, path)
}

/// Writes the 15 plan series, one row per hour.
pub fn write_plan_csv(path: &Path, plan: &DispatchPlan) -> Result<(), IoError> {
    let mut w = writer(path)?;
    put(
        &mut w,
        path,
        std::iter::once("hour".to_string()).chain(PLAN_COLUMNS.iter().map(|c| c.to_string())),
    )?;
    let cols = plan.columns();
    for t in 0..plan.horizon() {
        let row = std::iter::once((t + 1).to_string()).chain(cols.iter().map(|c| c[t].to_string()));
        put(&mut w, path, row)?;
    }
    finish(w, path)
}

/// Reads a file written by [`write_plan_csv`]. Whether the plan was netted is
/// not stored in the file and must be supplied.
pub fn read_plan_csv(path: &Path, netted: bool) -> Result<DispatchPlan, IoError> {
    let header: Vec<&str> = std::iter::once("hour").chain(PLAN_COLUMNS).collect();
    let rows = read_rows(path, &header)?;
    hours(path, &rows)?;
    let mut cols: [Vec<f64>; 15] = Default::default();
    for (i, rec) in rows.iter().enumerate() {
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(number(path, i + 2, PLAN_COLUMNS[c], &rec[c + 1])?);
        }
    }
    Ok(DispatchPlan::from_columns(cols, netted)?)
}

/// Per-hour equality multipliers, with the scalar RPS and quota multipliers
/// repeated on every row.
pub fn write_duals_csv(path: &Path, duals: &NamedDuals) -> Result<(), IoError> {
    let mut w = writer(path)?;
    let header = [
        "hour", "lambda_g", "lambda_r", "lambda_c", "omega", "nu_r", "nu_c", "mu", "delta",
    ];
    put(&mut w, path, header.map(String::from))?;
    for t in 0..duals.lambda_g.len() {
        let vals = [
            duals.lambda_g[t],
            duals.lambda_r[t],
            duals.lambda_c[t],
            duals.omega[t],
            duals.nu_r[t],
            duals.nu_c[t],
            duals.mu,
            duals.delta,
        ];
        put(
            &mut w,
            path,
            std::iter::once((t + 1).to_string()).chain(vals.iter().map(f64::to_string)),
        )?;
    }
    finish(w, path)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// One row per grid point; failed points keep their value and error text.
pub fn write_sweep_csv(path: &Path, sweep: &SweepResult) -> Result<(), IoError> {
    let mut w = writer(path)?;
    let header = [
        sweep.param.name(),
        "rev_g",
        "rev_r",
        "rev_c",
        "cost_g",
        "profit",
        "mu",
        "delta",
        "error",
    ];
    put(&mut w, path, header.map(String::from))?;
    for p in &sweep.points {
        let mut row = vec![p.value.to_string()];
        match &p.breakdown {
            Some(b) => row.extend(b.components().iter().map(|(_, v)| v.to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        row.push(opt(p.mu));
        row.push(opt(p.delta));
        row.push(p.error.clone().unwrap_or_default());
        put(&mut w, path, row)?;
    }
    finish(w, path)
}

pub fn write_matrix_csv(path: &Path, m: &InventoryMatrixResult) -> Result<(), IoError> {
    let mut w = writer(path)?;
    let header = [
        "cell",
        "rev_g",
        "rev_r",
        "rev_c",
        "cost_g",
        "profit",
        "improvement_pct",
        "mu",
        "delta",
    ];
    put(&mut w, path, header.map(String::from))?;
    for c in &m.cells {
        let row = std::iter::once(c.cell.name().to_string())
            .chain(
                c.breakdown
                    .components()
                    .into_iter()
                    .map(|(_, v)| v.to_string()),
            )
            .chain(
                [c.improvement, c.mu, c.delta]
                    .into_iter()
                    .map(|v| v.to_string()),
            );
        put(&mut w, path, row)?;
    }
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{synth_data, SynthSpec};

    #[test]
    fn market_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let d = synth_data(&SynthSpec {
            horizon: 48,
            ..SynthSpec::default()
        });
        write_market_csv(&p, &d).unwrap();
        assert_eq!(read_market_csv(&p).unwrap(), d);
    }

    #[test]
    fn non_monotone_hours_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(
            &p,
            "hour,pi_g,pi_r,pi_c,e,l\n1,60,20,40,10,5\n3,60,20,40,10,5\n2,60,20,40,10,5\n",
        )
        .unwrap();
        let err = read_market_csv(&p).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("hour 3"), "{err}");
    }

    #[test]
    fn wrong_header_or_value_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(&p, "hour,pi_g,pi_r,pi_c,l,e\n1,60,20,40,10,5\n").unwrap();
        assert!(read_market_csv(&p)
            .unwrap_err()
            .to_string()
            .contains("header"));
        std::fs::write(&p, "hour,pi_g,pi_r,pi_c,e,l\n1,60,x,40,10,5\n").unwrap();
        assert!(read_market_csv(&p)
            .unwrap_err()
            .to_string()
            .contains("pi_r"));
        std::fs::write(&p, "hour,pi_g,pi_r,pi_c,e,l\n1,60,20,40,10\n").unwrap();
        assert!(read_market_csv(&p).is_err());
    }
}
