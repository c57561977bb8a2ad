//! Coordinate-format text files for the pencil matrices.

use crate::error::{Error, Result};
use crate::spectra::{CsrMatrix, HermitianPencil, C64};
use std::io::{BufRead, Write};

pub const HEADER: &str = "%%HermitianPencil";

pub fn write_matrix(mut w: impl Write, a: &CsrMatrix, h: f64, name: &str) -> std::io::Result<()> {
    writeln!(w, "{HEADER} h={h}")?;
    writeln!(w, "% {name} coordinate complex, 1-based, all entries stored")?;
    writeln!(w, "{} {} {}", a.nrows, a.ncols, a.nnz())?;
    for r in 0..a.nrows {
        for (c, v) in a.row(r) {
            writeln!(w, "{} {} {:.16e} {:.16e}", r + 1, c + 1, v.re, v.im)?;
        }
    }
    Ok(())
}

/// Reads a matrix written by [`write_matrix`]; returns it with the recorded `h`.
pub fn read_matrix(r: impl BufRead) -> Result<(CsrMatrix, f64)> {
    let mut lines = r.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?
        .map_err(Error::Io)?;
    let h = first
        .strip_prefix(HEADER)
        .and_then(|rest| rest.trim().strip_prefix("h="))
        .and_then(|s| s.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::Parse(format!("expected '{HEADER} h=<h>', found '{first}'")))?;
    let mut body = lines
        .map_while(|l| l.ok())
        .filter(|l| !l.starts_with('%') && !l.trim().is_empty());
    let dims = body.next().ok_or_else(|| Error::Parse("missing size line".into()))?;
    let d: Vec<usize> = dims
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad size line '{dims}'"))))
        .collect::<Result<_>>()?;
    if d.len() != 3 {
        return Err(Error::Parse(format!("bad size line '{dims}'")));
    }
    let mut triplets = Vec::with_capacity(d[2]);
    for line in body.by_ref().take(d[2]) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse(format!("bad entry '{line}'"));
        if f.len() != 4 {
            return Err(bad());
        }
        let i: usize = f[0].parse().map_err(|_| bad())?;
        let j: usize = f[1].parse().map_err(|_| bad())?;
        if i == 0 || j == 0 || i > d[0] || j > d[1] {
            return Err(bad());
        }
        let re: f64 = f[2].parse().map_err(|_| bad())?;
        let im: f64 = f[3].parse().map_err(|_| bad())?;
        triplets.push((i - 1, j - 1, C64::new(re, im)));
    }
    if triplets.len() != d[2] {
        return Err(Error::Parse(format!("expected {} entries, found {}", d[2], triplets.len())));
    }
    Ok((CsrMatrix::from_triplets(d[0], d[1], &triplets), h))
}

pub fn write_pencil(pencil: &HermitianPencil, k: impl Write, m: impl Write) -> std::io::Result<()> {
    write_matrix(k, &pencil.k, pencil.h, "K")?;
    write_matrix(m, &pencil.m, pencil.h, "M")
}

pub fn read_pencil(k: impl BufRead, m: impl BufRead) -> Result<HermitianPencil> {
    let (k, hk) = read_matrix(k)?;
    let (m, hm) = read_matrix(m)?;
    if hk != hm {
        return Err(Error::Parse(format!("K and M record different h: {hk} vs {hm}")));
    }
    if k.hermitian_defect() > 0.0 || m.hermitian_defect() > 0.0 {
        return Err(Error::Parse("pencil matrices are not Hermitian".into()));
    }
    let n = k.nrows;
    HermitianPencil::new(k, m, (0..n).map(Some).collect(), hk)
}
