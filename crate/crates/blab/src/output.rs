//! CSV tables and the binary grid format.
//!
//! Binary grid: 16-byte header (n as u64 LE, L as f64 LE) followed by n²
//! (re, im) pairs of f64 LE in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use blab_core::cantor::IntervalSet;
use blab_core::quadrature::QuadratureRule;
use blab_core::solver::GridField;
use num_complex::Complex64;

use crate::error::{BlabError, Result};
use crate::json::fmt17;

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

/// Rows of strings under a header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        fmt17(x)
    } else {
        String::from("nan")
    }
}

/// One row per interval: lo_num, lo_den, hi_num, hi_den.
pub fn interval_rows(set: &IntervalSet) -> Result<Vec<Vec<String>>> {
    Ok(set
        .intervals()?
        .into_iter()
        .map(|iv| {
            vec![
                iv.lo.numer().to_string(),
                iv.lo.denom().to_string(),
                iv.hi.numer().to_string(),
                iv.hi.denom().to_string(),
            ]
        })
        .collect())
}

pub fn write_intervals(path: &Path, set: &IntervalSet) -> Result<()> {
    write_table(path, &["lo_num", "lo_den", "hi_num", "hi_den"], &interval_rows(set)?)
}

pub fn write_rule(path: &Path, rule: &QuadratureRule) -> Result<()> {
    let rows: Vec<Vec<String>> = rule
        .nodes()
        .into_iter()
        .map(|(p, w)| vec![num(p.z.re), num(p.z.im), num(w)])
        .collect();
    write_table(path, &["re", "im", "weight"], &rows)
}

/// Grid samples as re, im, value_re, value_im.
pub fn write_grid_csv(path: &Path, g: &GridField) -> Result<()> {
    let n = g.n();
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let z = g.point(i, j);
            let v = g.get(i, j);
            rows.push(vec![num(z.re), num(z.im), num(v.re), num(v.im)]);
        }
    }
    write_table(path, &["re", "im", "value_re", "value_im"], &rows)
}

pub fn write_points(path: &Path, pts: &[Complex64]) -> Result<()> {
    let rows: Vec<Vec<String>> = pts.iter().map(|z| vec![num(z.re), num(z.im)]).collect();
    write_table(path, &["re", "im"], &rows)
}

pub fn write_grid_binary(path: &Path, g: &GridField) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(g.n() as u64).to_le_bytes())?;
    w.write_all(&g.half_width().to_le_bytes())?;
    for v in g.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid_binary(path: &Path) -> Result<GridField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b8)?;
    let half_width = f64::from_le_bytes(b8);
    let count = n
        .checked_mul(n)
        .ok_or_else(|| BlabError::Config(format!("{}: grid size {n} overflows", path.display())))?;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        values.push(Complex64::new(re, f64::from_le_bytes(b8)));
    }
    Ok(GridField::new(n, half_width, values)?)
}
