//! CSV formats for point dumps and simulation output.
//!
//! Reals are written with 17 significant digits so that every `f64` survives
//! a write/read round trip unchanged.

use std::io::{Read, Write};

use crate::error::{domain, Error, Result};
use crate::geometry::DiskPoint;
use crate::montecarlo::{TailRow, TrialRecord};

pub const POINTS_HEADER: [&str; 2] = ["x", "y"];
pub const TRIALS_HEADER: [&str; 6] = ["N", "trial", "H", "T", "hull_size", "micros"];
pub const ECDF_HEADER: [&str; 3] = ["t", "F_emp", "F_limit"];
pub const TAIL_HEADER: [&str; 6] = ["epsilon", "draws", "hits", "probability", "std_error", "predicted"];

/// `x` in scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(e: impl std::fmt::Display) -> Error {
    domain("csv", e.to_string())
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    Ok(w)
}

pub fn write_points<W: Write>(out: W, points: &[DiskPoint<f64>]) -> Result<()> {
    let mut w = writer(out, &POINTS_HEADER)?;
    for p in points {
        w.write_record([fmt17(p.x), fmt17(p.y)]).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads an `x,y` point file. Points must lie in the closed unit disk.
pub fn read_points<R: Read>(input: R) -> Result<Vec<DiskPoint<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().map_err(io_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != POINTS_HEADER {
        return Err(domain("csv", format!("expected header `x,y`, found `{}`", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut points = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(io_err)?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| domain("csv", format!("row {}: missing column", row + 1)))?
                .parse::<f64>()
                .map_err(|e| domain("csv", format!("row {}: {e}", row + 1)))
        };
        let (x, y) = (parse(0)?, parse(1)?);
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite(format!("row {}", row + 1)));
        }
        points.push(DiskPoint::in_disk(x, y)?);
    }
    Ok(points)
}

/// `micros` stays empty unless the records carry timings.
pub fn write_trials<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = writer(out, &TRIALS_HEADER)?;
    for r in records {
        w.write_record([
            r.sample_size.to_string(),
            r.trial_index.to_string(),
            fmt17(r.h),
            fmt17(r.t),
            r.hull_size.to_string(),
            r.wall_micros.map(|m| m.to_string()).unwrap_or_default(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_ecdf<W: Write>(out: W, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut w = writer(out, &ECDF_HEADER)?;
    for &(t, f_emp, f_limit) in rows {
        w.write_record([fmt17(t), fmt17(f_emp), fmt17(f_limit)]).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_tail<W: Write>(out: W, rows: &[TailRow]) -> Result<()> {
    let mut w = writer(out, &TAIL_HEADER)?;
    for r in rows {
        w.write_record([
            fmt17(r.epsilon),
            r.draws.to_string(),
            r.hits.to_string(),
            fmt17(r.probability),
            fmt17(r.standard_error),
            fmt17(r.predicted),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
