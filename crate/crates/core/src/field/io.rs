//! Text interchange formats for tensor fields and masks.
//!
//! Tensor field (`DTF1`):
//!
//! ```text
//! DTF1 <width> <height> <m> <z>
//! a11 a22 a33 a12 a13 a23        # one line per pixel, row-major
//! ```
//!
//! Mask (`MSK1`):
//!
//! ```text
//! MSK1 <width> <height>
//! 0110...                        # one row of 0/1 characters per grid row
//! ```
//!
//! Floats are written in shortest round-trip scientific notation, so a
//! write/read cycle reproduces every coefficient bit-for-bit.

use std::io::{BufRead, Write};

use super::{Mask, TensorField};
use crate::error::{Error, Result};
use crate::spd::{n_coeffs, SpdTensor, SymMat};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

/// Writes a tensor field in `DTF1` format.
pub fn write_dtf<W: Write>(field: &TensorField, mut out: W) -> Result<()> {
    writeln!(
        out,
        "DTF1 {} {} {} {:e}",
        field.width(),
        field.height(),
        field.dim(),
        field.z()
    )?;
    for t in field.tensors() {
        let line: Vec<String> = t.matrix().coeffs().iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Reads a `DTF1` tensor field; every tensor must be SPD inside the header's log-ball.
pub fn read_dtf<R: BufRead>(input: R) -> Result<TensorField> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("DTF1") {
        return Err(parse_err(1, format!("expected 'DTF1' header, found '{header}'")));
    }
    let width: usize = parse_num(toks.next(), 1, "width")?;
    let height: usize = parse_num(toks.next(), 1, "height")?;
    let dim: usize = parse_num(toks.next(), 1, "matrix size")?;
    let z: f64 = parse_num(toks.next(), 1, "z")?;
    if toks.next().is_some() {
        return Err(parse_err(1, "trailing tokens in header"));
    }
    if width == 0 || height == 0 || dim == 0 {
        return Err(parse_err(1, "dimensions must be positive"));
    }
    if !(z > 0.0 && z.is_finite()) {
        return Err(parse_err(1, format!("z must be positive, got {z}")));
    }

    let k = n_coeffs(dim);
    let mut tensors = Vec::with_capacity(width * height);
    for (lineno, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if tensors.len() == width * height {
            return Err(parse_err(lineno, "more pixel lines than the header declares"));
        }
        let coeffs = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("invalid number '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != k {
            return Err(parse_err(
                lineno,
                format!("expected {k} coefficients, found {}", coeffs.len()),
            ));
        }
        let m = SymMat::from_coeffs(dim, &coeffs).map_err(|e| parse_err(lineno, e.to_string()))?;
        let t = SpdTensor::with_bound(m, z).map_err(|e| parse_err(lineno, e.to_string()))?;
        tensors.push(t);
    }
    if tensors.len() != width * height {
        return Err(parse_err(
            tensors.len() + 2,
            format!("expected {} pixel lines, found {}", width * height, tensors.len()),
        ));
    }
    TensorField::new(width, height, z, tensors)
}

pub fn write_mask<W: Write>(mask: &Mask, mut out: W) -> Result<()> {
    writeln!(out, "MSK1 {} {}", mask.width(), mask.height())?;
    for row in mask.as_slice().chunks(mask.width()) {
        let s: String = row.iter().map(|b| if *b { '1' } else { '0' }).collect();
        writeln!(out, "{s}")?;
    }
    Ok(())
}

/// Reads a `MSK1` mask. At least one pixel must carry data.
pub fn read_mask<R: BufRead>(input: R) -> Result<Mask> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("MSK1") {
        return Err(parse_err(1, format!("expected 'MSK1' header, found '{header}'")));
    }
    let width: usize = parse_num(toks.next(), 1, "width")?;
    let height: usize = parse_num(toks.next(), 1, "height")?;
    let mut data = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (lineno, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if rows == height {
            return Err(parse_err(lineno, "more rows than the header declares"));
        }
        if line.chars().count() != width {
            return Err(parse_err(
                lineno,
                format!("expected {width} characters, found {}", line.len()),
            ));
        }
        for ch in line.chars() {
            match ch {
                '0' => data.push(false),
                '1' => data.push(true),
                other => return Err(parse_err(lineno, format!("invalid mask character '{other}'"))),
            }
        }
        rows += 1;
    }
    if rows != height {
        return Err(parse_err(rows + 2, format!("expected {height} rows, found {rows}")));
    }
    let mask = Mask::new(width, height, data)?;
    mask.require_data()?;
    Ok(mask)
}
