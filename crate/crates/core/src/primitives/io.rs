//! Matrix text format.
//!
//! ```text
//! rows cols hermitian_flag
//! i j re im
//! ...
//! ```
//!
//! Indices are zero-based, `re`/`im` are hexadecimal floating-point literals
//! (`0x1.8p+1`), which round-trip bit for bit. Decimal literals are accepted
//! on input. Missing entries are zero; with the Hermitian flag set, an entry
//! given only on one side of the diagonal is mirrored. Lines starting with
//! `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fparith::{Fp, FpMatrix, FpScalar};

fn parse_value(tok: &str, line: usize) -> Result<Fp> {
    if let Ok(v) = Fp::from_hex(tok) {
        return Ok(v);
    }
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Fp::from_f64_exact(v)),
        _ => Err(Error::Parse(format!("line {line}: bad number `{tok}`"))),
    }
}

pub fn parse_matrix(text: &str) -> Result<(FpMatrix, bool)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 {
        return Err(Error::Parse(format!(
            "line {ln}: header must be `rows cols hermitian_flag`"
        )));
    }
    let num = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Parse(format!("line {ln}: bad header value `{s}`")))
    };
    let (rows, cols) = (num(h[0])?, num(h[1])?);
    let herm = match h[2] {
        "0" | "false" => false,
        "1" | "true" => true,
        other => {
            return Err(Error::Parse(format!(
                "line {ln}: bad hermitian flag `{other}`"
            )))
        }
    };
    let mut m = FpMatrix::zeros(rows, cols);
    let mut seen = vec![false; rows * cols];
    for (ln, line) in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 4 {
            return Err(Error::Parse(format!("line {ln}: expected `i j re im`")));
        }
        let i: usize = t[0]
            .parse()
            .map_err(|_| Error::Parse(format!("line {ln}: bad row index")))?;
        let j: usize = t[1]
            .parse()
            .map_err(|_| Error::Parse(format!("line {ln}: bad column index")))?;
        if i >= rows || j >= cols {
            return Err(Error::Parse(format!(
                "line {ln}: index ({i}, {j}) outside {rows}x{cols}"
            )));
        }
        m.set(i, j, FpScalar::new(parse_value(t[2], ln)?, parse_value(t[3], ln)?));
        seen[i * cols + j] = true;
    }
    if herm {
        if rows != cols {
            return Err(Error::Parse("hermitian flag on a non-square matrix".into()));
        }
        for i in 0..rows {
            for j in 0..cols {
                if !seen[i * cols + j] && seen[j * cols + i] {
                    m.set(i, j, m.get(j, i).conj());
                }
            }
        }
        if !m.is_hermitian() {
            return Err(Error::Parse(
                "matrix flagged hermitian is not exactly hermitian".into(),
            ));
        }
    }
    Ok((m, herm))
}

pub fn format_matrix(m: &FpMatrix, hermitian: bool) -> String {
    let mut s = format!("{} {} {}\n", m.rows(), m.cols(), hermitian as u8);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m.get(i, j);
            let _ = writeln!(s, "{i} {j} {} {}", z.re.to_hex(), z.im.to_hex());
        }
    }
    s
}

/// CSV with hexadecimal values plus decimal shadow columns.
pub fn format_csv(m: &FpMatrix) -> String {
    let mut s = String::from("i,j,re,im,re_decimal,im_decimal\n");
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m.get(i, j);
            let (a, b) = z.to_f64();
            let _ = writeln!(s, "{i},{j},{},{},{a:e},{b:e}", z.re.to_hex(), z.im.to_hex());
        }
    }
    s
}

pub fn read_matrix(path: &Path) -> Result<(FpMatrix, bool)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn write_matrix(path: &Path, m: &FpMatrix, hermitian: bool) -> Result<()> {
    let body = if path.extension().is_some_and(|e| e == "csv") {
        format_csv(m)
    } else {
        format_matrix(m, hermitian)
    };
    std::fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
