//! Plain-text tensor files.
//!
//! ```text
//! m n p
//! i j k re im
//! ...
//! ```
//!
//! The header is followed by exactly `m*n*p` entry lines with one-based
//! indices. Blank lines and lines starting with `#` are ignored. Rendering
//! uses shortest round-trip float formatting, so `parse(render(t)) == t`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor3, TensorShape};

pub fn render(t: &DenseTensor3) -> String {
    let TensorShape { m, n, p } = t.shape();
    let mut out = format!("{m} {n} {p}\n");
    for k in 0..p {
        for i in 0..m {
            for j in 0..n {
                let z = t.at(i, j, k);
                let _ = writeln!(out, "{} {} {} {} {}", i + 1, j + 1, k + 1, z.re, z.im);
            }
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn fields<const N: usize>(line_no: usize, text: &str) -> Result<[&str; N]> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    parts
        .try_into()
        .map_err(|v: Vec<&str>| parse_err(line_no, format!("expected {N} fields, found {}", v.len())))
}

fn parse_usize(line_no: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| parse_err(line_no, format!("invalid integer {s:?}")))
}

fn parse_f64(line_no: usize, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(line_no, format!("invalid number {s:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line_no, format!("non-finite value {s:?}")));
    }
    Ok(v)
}

pub fn parse(text: &str) -> Result<DenseTensor3> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header `m n p`"))?;
    let [m, n, p] = fields::<3>(hline, header)?;
    let shape = TensorShape::new(
        parse_usize(hline, m)?,
        parse_usize(hline, n)?,
        parse_usize(hline, p)?,
    )
    .map_err(|e| parse_err(hline, e.to_string()))?;

    let mut entries: Vec<Option<Complex64>> = vec![None; shape.len()];
    let mut last_line = hline;
    for (line_no, text) in lines {
        last_line = line_no;
        let [i, j, k, re, im] = fields::<5>(line_no, text)?;
        let (i, j, k) = (
            parse_usize(line_no, i)?,
            parse_usize(line_no, j)?,
            parse_usize(line_no, k)?,
        );
        if !(1..=shape.m).contains(&i) || !(1..=shape.n).contains(&j) || !(1..=shape.p).contains(&k) {
            return Err(parse_err(line_no, format!("index ({i}, {j}, {k}) outside {shape}")));
        }
        let slot = &mut entries[((k - 1) * shape.m + (i - 1)) * shape.n + (j - 1)];
        if slot.is_some() {
            return Err(parse_err(line_no, format!("duplicate entry ({i}, {j}, {k})")));
        }
        *slot = Some(Complex64::new(parse_f64(line_no, re)?, parse_f64(line_no, im)?));
    }

    let found = entries.iter().filter(|e| e.is_some()).count();
    if found != shape.len() {
        return Err(parse_err(
            last_line,
            format!("expected {} entries for {shape}, found {found}", shape.len()),
        ));
    }
    DenseTensor3::new(shape, entries.into_iter().map(Option::unwrap).collect())
}

pub fn read_file(path: impl AsRef<Path>) -> Result<DenseTensor3> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn write_file(path: impl AsRef<Path>, t: &DenseTensor3) -> Result<()> {
    std::fs::write(path, render(t))?;
    Ok(())
}
