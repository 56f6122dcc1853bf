//! `DWI1` text format.
//!
//! ```text
//! DWI1 <width> <height> <k> <b> <a0>
//! gx gy gz                       # k direction lines
//! v v v ...                      # k blocks of <height> lines with <width> values
//! ```
//!
//! Blank lines are ignored.

use std::io::{BufRead, Write};

use super::{Direction, DwiSet};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn numbers<T: std::str::FromStr>(line: &str, lineno: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(lineno, format!("invalid number '{t}'")))
        })
        .collect()
}

pub fn write_dwi<W: Write>(dwis: &DwiSet, mut out: W) -> Result<()> {
    writeln!(
        out,
        "DWI1 {} {} {} {:e} {:e}",
        dwis.width(),
        dwis.height(),
        dwis.directions().len(),
        dwis.b_value(),
        dwis.a0()
    )?;
    for g in dwis.directions() {
        writeln!(out, "{:e} {:e} {:e}", g[0], g[1], g[2])?;
    }
    for img in dwis.images() {
        for row in img.chunks(dwis.width()) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
    }
    Ok(())
}

pub fn read_dwi<R: BufRead>(input: R) -> Result<DwiSet> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let mut last = 1;
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, l)) => {
                last = n;
                Ok((n, l?))
            }
            None => Err(parse_err(last + 1, format!("unexpected end of file, expected {what}"))),
        }
    };

    let (_, header) = next("header")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.first() != Some(&"DWI1") {
        return Err(parse_err(1, format!("expected 'DWI1' header, found '{header}'")));
    }
    if toks.len() != 6 {
        return Err(parse_err(1, "header needs width, height, k, b and a0"));
    }
    let dims: Vec<usize> = numbers(&toks[1..4].join(" "), 1)?;
    let scalars: Vec<f64> = numbers(&toks[4..].join(" "), 1)?;
    let (width, height, k) = (dims[0], dims[1], dims[2]);

    let mut directions: Vec<Direction> = Vec::with_capacity(k);
    for _ in 0..k {
        let (n, line) = next("direction")?;
        let v: Vec<f64> = numbers(&line, n)?;
        if v.len() != 3 {
            return Err(parse_err(
                n,
                format!("expected 3 direction components, found {}", v.len()),
            ));
        }
        directions.push([v[0], v[1], v[2]]);
    }
    let mut images = Vec::with_capacity(k);
    for _ in 0..k {
        let mut img = Vec::with_capacity(width * height);
        for _ in 0..height {
            let (n, line) = next("image row")?;
            let v: Vec<f64> = numbers(&line, n)?;
            if v.len() != width {
                return Err(parse_err(n, format!("expected {width} values, found {}", v.len())));
            }
            img.extend(v);
        }
        images.push(img);
    }
    if let Ok((n, _)) = next("end of file") {
        return Err(parse_err(n, "trailing data after the last image"));
    }
    DwiSet::new(width, height, directions, scalars[0], scalars[1], images)
}
