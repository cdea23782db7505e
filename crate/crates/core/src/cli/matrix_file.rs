//! Text matrix format: a `d n` header, then `d` rows of `n` entries, each an
//! integer or a rational `p/q`.

use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::types::Matrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("line {line}, column {column}: bad header: {message}")]
    Header {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: matrix row {row} has {found} entries, expected {expected}")]
    TokenCount {
        line: usize,
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: found {found} matrix rows, expected {expected}")]
    RowCount {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}, column {column}: zero denominator in {token:?}")]
    ZeroDenominator {
        line: usize,
        column: usize,
        token: String,
    },

    #[error("line {line}, column {column}: {token:?} is not an integer or p/q rational")]
    NonNumeric {
        line: usize,
        column: usize,
        token: String,
    },

    #[error("line {line}, column {column}: scaled entry does not fit in 64 bits")]
    Overflow { line: usize, column: usize },
}

/// An integer matrix obtained by clearing denominators, with the factor used.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedMatrix {
    pub matrix: Matrix,
    /// LCM of all denominators; every input entry was multiplied by it.
    pub scale: BigInt,
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

/// Splits a line into tokens with 1-based columns.
fn tokens(line: &str, line_no: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line
        .char_indices()
        .chain(std::iter::once((line.len(), ' ')))
    {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    line: line_no,
                    column: s + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

fn parse_rational(tok: &Token<'_>) -> Result<(BigInt, BigInt), ParseError> {
    let non_numeric = || ParseError::NonNumeric {
        line: tok.line,
        column: tok.column,
        token: tok.text.to_string(),
    };
    let int = |s: &str| -> Result<BigInt, ParseError> {
        let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(non_numeric());
        }
        s.parse::<BigInt>().map_err(|_| non_numeric())
    };
    let (num, den) = match tok.text.split_once('/') {
        None => (int(tok.text)?, BigInt::one()),
        Some((p, q)) => (int(p)?, int(q)?),
    };
    if den.is_zero() {
        return Err(ParseError::ZeroDenominator {
            line: tok.line,
            column: tok.column,
            token: tok.text.to_string(),
        });
    }
    let g = num.gcd(&den);
    let (mut num, mut den) = (num / &g, den / &g);
    if den.is_negative() {
        num = -num;
        den = -den;
    }
    Ok((num, den))
}

fn header_dim(tok: Option<&Token<'_>>, line: usize, what: &str) -> Result<usize, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::Header {
        line,
        column: 1,
        message: format!("missing {what}"),
    })?;
    match tok.text.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(ParseError::Header {
            line,
            column: tok.column,
            message: format!("{what} must be a positive integer, got {:?}", tok.text),
        }),
    }
}

/// Parses matrix text. Blank lines are skipped everywhere.
pub fn parse_matrix_str(text: &str) -> Result<ParsedMatrix, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let Some((hline, header)) = lines.next() else {
        return Err(ParseError::Header {
            line: 1,
            column: 1,
            message: "empty input".into(),
        });
    };
    let htoks = tokens(header, hline);
    let rows = header_dim(htoks.first(), hline, "row count")?;
    let cols = header_dim(htoks.get(1), hline, "column count")?;
    if let Some(extra) = htoks.get(2) {
        return Err(ParseError::Header {
            line: hline,
            column: extra.column,
            message: format!("unexpected token {:?}", extra.text),
        });
    }

    let mut values = Vec::with_capacity(rows * cols);
    let mut positions = Vec::with_capacity(rows * cols);
    let mut last_line = hline;
    for r in 0..rows {
        let Some((lno, line)) = lines.next() else {
            return Err(ParseError::RowCount {
                line: last_line,
                expected: rows,
                found: r,
            });
        };
        last_line = lno;
        let toks = tokens(line, lno);
        if toks.len() != cols {
            return Err(ParseError::TokenCount {
                line: lno,
                row: r + 1,
                expected: cols,
                found: toks.len(),
            });
        }
        for tok in &toks {
            values.push(parse_rational(tok)?);
            positions.push((tok.line, tok.column));
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(ParseError::RowCount {
            line: lno,
            expected: rows,
            found: rows + 1,
        });
    }

    let scale = values
        .iter()
        .fold(BigInt::one(), |acc, (_, den)| acc.lcm(den));
    let mut entries = Vec::with_capacity(values.len());
    for ((num, den), &(line, column)) in values.iter().zip(&positions) {
        let v = num * (&scale / den);
        entries.push(v.to_i64().ok_or(ParseError::Overflow { line, column })?);
    }
    let matrix = Matrix::new(rows, cols, entries).expect("dimensions checked");
    Ok(ParsedMatrix { matrix, scale })
}

pub fn parse_matrix(path: &Path) -> Result<ParsedMatrix, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_matrix_str(&text)
}

/// Writes an integer matrix in the same format.
pub fn serialize_matrix(a: &Matrix) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for r in 0..a.rows() {
        let row = a.row(r);
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let p = parse_matrix_str("2 2\n1 0\n0 1\n").unwrap();
        assert_eq!(p.matrix, Matrix::identity(2).unwrap());
        assert_eq!(p.scale, BigInt::one());
    }

    #[test]
    fn rationals_are_cleared() {
        let p = parse_matrix_str("1 2\n1/2 1/3\n").unwrap();
        assert_eq!(p.matrix, Matrix::from_rows(&[[3, 2]]).unwrap());
        assert_eq!(p.scale, BigInt::from(6));
        let p = parse_matrix_str("1 3\n-2/4 3/-6 4\n").unwrap();
        assert_eq!(p.matrix, Matrix::from_rows(&[[-1, -1, 8]]).unwrap());
        assert_eq!(p.scale, BigInt::from(2));
    }

    #[test]
    fn short_row() {
        let e = parse_matrix_str("2 2\n1 0\n0\n").unwrap_err();
        assert_eq!(
            e,
            ParseError::TokenCount {
                line: 3,
                row: 2,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(
            parse_matrix_str("2\n1\n"),
            Err(ParseError::Header { line: 1, .. })
        ));
        assert!(matches!(
            parse_matrix_str("0 2\n"),
            Err(ParseError::Header { .. })
        ));
        assert_eq!(
            parse_matrix_str("1 2\n1 2/0\n").unwrap_err(),
            ParseError::ZeroDenominator {
                line: 2,
                column: 3,
                token: "2/0".into()
            }
        );
        assert_eq!(
            parse_matrix_str("1 2\n  1 x\n").unwrap_err(),
            ParseError::NonNumeric {
                line: 2,
                column: 5,
                token: "x".into()
            }
        );
        assert!(matches!(
            parse_matrix_str("1 1\n1/\n"),
            Err(ParseError::NonNumeric { .. })
        ));
        assert!(matches!(
            parse_matrix_str("1 1\n99999999999999999999\n"),
            Err(ParseError::Overflow { line: 2, column: 1 })
        ));
        assert!(matches!(
            parse_matrix_str("2 1\n1\n"),
            Err(ParseError::RowCount { found: 1, .. })
        ));
        assert!(matches!(
            parse_matrix_str("1 1\n1\n2\n"),
            Err(ParseError::RowCount { .. })
        ));
    }

    #[test]
    fn round_trip() {
        let a = Matrix::from_rows(&[[1, -2, 3], [0, 40, -5]]).unwrap();
        let text = serialize_matrix(&a);
        let p = parse_matrix_str(&text).unwrap();
        assert_eq!(p.matrix, a);
        assert_eq!(serialize_matrix(&p.matrix), text);
    }
}
