//! Plain-text matrix files.
//!
//! ```text
//! # min.19.1.1.7
//! 2 4
//! 2 2 1 3
//! 1 0 2 2
//! ```
//!
//! A header `k n`, then `k` rows of `n` space-separated digits in `0..=3`.
//! Lines starting with `#` are comments. Blank lines are skipped.

use crate::error::{Error, Result};
use crate::matrix::{GenMatrix, MAX_GENERATORS};

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based starting column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(s, t)| (line[..s].chars().count() + 1, t))
        .collect()
}

fn parse_dimension(line: usize, column: usize, token: &str, what: &str) -> Result<usize> {
    if !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_error(
            line,
            column,
            format!("{what} must be a non-negative integer, found `{token}`"),
        ));
    }
    token
        .parse()
        .map_err(|_| parse_error(line, column, format!("{what} `{token}` is out of range")))
}

/// Parses a matrix file.
pub fn parse_matrix(text: &str) -> Result<GenMatrix> {
    let mut header: Option<(usize, usize)> = None;
    let mut rows: Vec<Vec<u8>> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        if raw.starts_with('#') || raw.trim().is_empty() {
            continue;
        }
        let toks = tokens(raw);
        let Some((k, n)) = header else {
            if toks.len() != 2 {
                let column = toks.get(2).map_or(1, |t| t.0);
                return Err(parse_error(line_no, column, "header must be `k n`"));
            }
            let k = parse_dimension(line_no, toks[0].0, toks[0].1, "k")?;
            let n = parse_dimension(line_no, toks[1].0, toks[1].1, "n")?;
            if k == 0 {
                return Err(parse_error(line_no, toks[0].0, "k must be positive"));
            }
            if n == 0 {
                return Err(parse_error(line_no, toks[1].0, "n must be positive"));
            }
            if k > MAX_GENERATORS {
                return Err(parse_error(
                    line_no,
                    toks[0].0,
                    format!("k = {k} exceeds the limit of {MAX_GENERATORS} generators"),
                ));
            }
            header = Some((k, n));
            continue;
        };
        if rows.len() == k {
            return Err(parse_error(
                line_no,
                toks[0].0,
                format!("expected {k} rows, found extra data"),
            ));
        }
        let mut row = Vec::with_capacity(n);
        for (j, &(column, tok)) in toks.iter().enumerate() {
            if j == n {
                return Err(parse_error(
                    line_no,
                    column,
                    format!("row has more than {n} entries"),
                ));
            }
            match tok.as_bytes() {
                [d @ b'0'..=b'3'] => row.push(d - b'0'),
                _ => {
                    return Err(parse_error(
                        line_no,
                        column,
                        format!("expected a digit 0-3, found `{tok}`"),
                    ))
                }
            }
        }
        if row.len() < n {
            let column = raw.trim_end().chars().count() + 1;
            return Err(parse_error(
                line_no,
                column,
                format!("row has {} entries, expected {n}", row.len()),
            ));
        }
        rows.push(row);
    }
    match header {
        None => Err(parse_error(last_line.max(1), 1, "missing header `k n`")),
        Some((k, _)) if rows.len() < k => Err(parse_error(
            last_line + 1,
            1,
            format!("expected {k} rows, found {}", rows.len()),
        )),
        Some(_) => GenMatrix::from_codes(&rows),
    }
}

/// Serializes a matrix; `parse_matrix` inverts this exactly.
pub fn serialize_matrix(a: &GenMatrix) -> String {
    let mut out = format!("{} {}\n", a.k(), a.n());
    for row in a.codes() {
        let digits: Vec<String> = row.iter().map(u8::to_string).collect();
        out.push_str(&digits.join(" "));
        out.push('\n');
    }
    out
}
