//! CSV output with round-trip exact floats.

use std::io::{self, Write};

use crate::grid::GridFunction;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Writes `x_1..x_d,re,im`, one row per grid sample in row-major order.
pub fn write_grid_function_csv<W: Write>(f: &GridFunction, out: W) -> io::Result<()> {
    let grid = f.grid();
    let dim = grid.dim();
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (1..=dim).map(|j| format!("x_{j}")).chain(["re".into(), "im".into()]).collect();
    w.write_record(&header).map_err(into_io)?;
    for (i, v) in f.values().iter().enumerate() {
        let x = grid.coords(&grid.steps_at(i));
        w.write_record(x[..dim].iter().chain([&v.re, &v.im]).map(|&c| format_float(c))).map_err(into_io)?;
    }
    w.flush()
}

/// Writes a header row followed by numeric rows.
pub fn write_table<W: Write>(header: &[&str], rows: &[Vec<f64>], out: W) -> io::Result<()> {
    let rows: Vec<Vec<String>> = rows.iter().map(|row| row.iter().map(|&c| format_float(c)).collect()).collect();
    write_records(header, &rows, out)
}

/// Writes preformatted fields, for tables mixing integers, flags and floats.
pub fn write_records<W: Write>(header: &[&str], rows: &[Vec<String>], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(into_io)?;
    for row in rows {
        w.write_record(row).map_err(into_io)?;
    }
    w.flush()
}

/// Keeps the original `io::ErrorKind` (e.g. a broken pipe) visible to callers.
fn into_io(e: csv::Error) -> io::Error {
    if !e.is_io_error() {
        return io::Error::other(e);
    }
    match e.into_kind() {
        csv::ErrorKind::Io(inner) => inner,
        kind => io::Error::other(format!("{kind:?}")),
    }
}
