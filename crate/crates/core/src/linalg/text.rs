//! Plain-text matrix format.
//!
//! A header line `rows cols`, then `rows·cols` whitespace-separated tokens in
//! row-major order. Each token is `re+imj` or `re-imj`, for example
//! `1.5e0-2.5e-1j`. Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::dense::CMat;
use crate::C64;

pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:e}{}{:e}j", z.re, sign, z.im.abs())
}

pub fn parse_complex(tok: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("malformed complex token `{tok}`"));
    let body = tok.strip_suffix('j').ok_or_else(bad)?;
    let bytes = body.as_bytes();
    // Split at the last sign that is neither leading nor part of an exponent.
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

pub fn format_matrix(m: &CMat) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|&z| format_complex(z)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<CMat> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what} in header")))?
            .parse()
            .map_err(|_| Error::Parse(format!("invalid {what} in header")))
    };
    let rows = dim("rows")?;
    let cols = dim("cols")?;
    let data = tokens.map(parse_complex).collect::<Result<Vec<_>>>()?;
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            rows * cols,
            data.len()
        )));
    }
    CMat::from_row_major(rows, cols, data)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &CMat) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<CMat> {
    parse_matrix(&std::fs::read_to_string(path)?)
}
