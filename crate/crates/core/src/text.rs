//! Plain-text fixture format.
//!
//! A matrix is a header line `m n` followed by `m` lines of `n`
//! whitespace-separated decimals. A vector is a header line `n` followed by
//! one value per line. Values are written with round-trip precision.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::SensingMatrix;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_usize(line: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} `{tok}`")))
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("invalid value `{tok}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(line, format!("non-finite value `{tok}`")))
    }
}

pub fn read_matrix(text: &str) -> Result<SensingMatrix> {
    let mut lines = numbered_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let mut toks = header.split_whitespace();
    let m = parse_usize(hl, toks.next(), "row count")?;
    let n = parse_usize(hl, toks.next(), "column count")?;
    if toks.next().is_some() {
        return Err(parse_err(hl, "header must be `m n`"));
    }
    let mut entries = Vec::with_capacity(m * n);
    for _ in 0..m {
        let (ln, row) = lines
            .next()
            .ok_or_else(|| parse_err(hl, format!("expected {m} rows")))?;
        let before = entries.len();
        for tok in row.split_whitespace() {
            entries.push(parse_f64(ln, tok)?);
        }
        if entries.len() - before != n {
            return Err(parse_err(ln, format!("expected {n} values, found {}", entries.len() - before)));
        }
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after matrix"));
    }
    SensingMatrix::from_row_major(m, n, &entries)
}

pub fn write_matrix(phi: &SensingMatrix) -> String {
    let mut out = format!("{} {}\n", phi.rows(), phi.cols());
    for i in 0..phi.rows() {
        for j in 0..phi.cols() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:?}", phi.get(i, j));
        }
        out.push('\n');
    }
    out
}

pub fn read_vector(text: &str) -> Result<Vec<f64>> {
    let mut lines = numbered_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let n = parse_usize(hl, Some(header), "length")?;
    let values = lines
        .map(|(ln, l)| parse_f64(ln, l))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != n {
        return Err(parse_err(hl, format!("expected {n} values, found {}", values.len())));
    }
    Ok(values)
}

pub fn write_vector(v: &[f64]) -> String {
    let mut out = format!("{}\n", v.len());
    for x in v {
        let _ = writeln!(out, "{x:?}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_sensing_matrix;
    use proptest::prelude::*;

    #[test]
    fn parses_small_fixture() {
        let phi = read_matrix("2 3\n1 0 0.5\n0 1 -2.5e-1\n").unwrap();
        assert_eq!((phi.rows(), phi.cols()), (2, 3));
        assert_eq!(phi.get(1, 2), -0.25);
        assert_eq!(read_vector("2\n3\n0\n").unwrap(), vec![3.0, 0.0]);
    }

    #[test]
    fn reports_offending_line() {
        match read_matrix("2 3\n1 0 0.5\n0 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read_vector("2\n1\nx\n"), Err(Error::Parse { line: 3, .. })));
        assert!(read_vector("3\n1\n").is_err());
    }

    proptest! {
        #[test]
        fn matrix_round_trip(seed in any::<u64>(), m in 1usize..6, extra in 1usize..6) {
            let phi = gen_sensing_matrix(m, m + extra, seed % 2 == 0, seed).unwrap();
            let back = read_matrix(&write_matrix(&phi)).unwrap();
            for i in 0..phi.rows() {
                for j in 0..phi.cols() {
                    prop_assert!((phi.get(i, j) - back.get(i, j)).abs() <= 1e-12);
                }
            }
        }
    }
}
