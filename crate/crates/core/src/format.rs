//! Strict text serialization of arrays.
//!
//! ```text
//! #CPDA v1
//! H 5
//! r 3
//! F 5
//! K 10
//! cols 1-2-3 1-2-4 ... 3-4-5
//! 5 6 7 8 9 10 * * * *
//! ...
//! ```
//!
//! Tokens are separated by exactly one space and the file ends with a single
//! newline. Anything else is rejected.

use std::fmt::Write as _;

use crate::combinat::RelaySet;
use crate::model::{Entry, ModelError, PdaArray};

const MAGIC: &str = "#CPDA v1";
const HEADER_LINES: usize = 6;

/// Serializes an array with integer symbols. Row labels are not stored.
pub fn write_array(array: &PdaArray<u32>) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(out, "H {}", array.h());
    let _ = writeln!(out, "r {}", array.r());
    let _ = writeln!(out, "F {}", array.f());
    let _ = writeln!(out, "K {}", array.k());
    out.push_str("cols");
    for label in array.col_labels() {
        let _ = write!(out, " {label}");
    }
    out.push('\n');
    for row in array.rows() {
        let mut first = true;
        for e in row {
            if !first {
                out.push(' ');
            }
            first = false;
            match e {
                Entry::Star => out.push('*'),
                Entry::Symbol(s) => {
                    let _ = write!(out, "{s}");
                }
            }
        }
        out.push('\n');
    }
    out
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Canonical decimal: no sign, no leading zeros.
fn parse_decimal(token: &str) -> Option<usize> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if token.len() > 1 && token.starts_with('0') {
        return None;
    }
    token.parse().ok()
}

/// Splits on single spaces, returning each token with its 1-based column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in line.char_indices() {
        if c == ' ' {
            out.push((start + 1, &line[start..i]));
            start = i + 1;
        }
    }
    out.push((start + 1, &line[start..]));
    out
}

fn header_value(lines: &[&str], idx: usize, key: &str) -> Result<usize, ModelError> {
    let line_no = idx + 1;
    let line = lines
        .get(idx)
        .ok_or_else(|| parse_error(line_no, 1, format!("missing \"{key} <int>\" header")))?;
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| parse_error(line_no, 1, format!("expected \"{key} <int>\"")))?;
    parse_decimal(rest)
        .ok_or_else(|| parse_error(line_no, key.len() + 2, format!("invalid integer {rest:?}")))
}

pub fn read_array(text: &str) -> Result<PdaArray<u32>, ModelError> {
    let body = text.strip_suffix('\n').ok_or_else(|| {
        let line = text.split('\n').count();
        parse_error(line, 1, "missing trailing newline")
    })?;
    let lines: Vec<&str> = body.split('\n').collect();

    if lines[0] != MAGIC {
        return Err(parse_error(1, 1, format!("expected {MAGIC:?}")));
    }
    let h = header_value(&lines, 1, "H")?;
    let r = header_value(&lines, 2, "r")?;
    let f = header_value(&lines, 3, "F")?;
    let k = header_value(&lines, 4, "K")?;

    let cols_line = *lines
        .get(5)
        .ok_or_else(|| parse_error(6, 1, "missing \"cols\" line"))?;
    let mut col_tokens = tokens(cols_line).into_iter();
    match col_tokens.next() {
        Some((_, "cols")) => {}
        _ => return Err(parse_error(6, 1, "expected \"cols\"")),
    }
    let mut labels = Vec::with_capacity(k);
    for (column, tok) in col_tokens {
        let label: RelaySet = tok
            .parse()
            .map_err(|e| parse_error(6, column, format!("column label: {e}")))?;
        labels.push(label);
    }
    if labels.len() != k {
        return Err(ModelError::Dimension(format!(
            "header declares K = {k} but cols line has {} labels",
            labels.len()
        )));
    }

    let row_lines = &lines[HEADER_LINES.min(lines.len())..];
    if row_lines.len() != f {
        return Err(ModelError::Dimension(format!(
            "header declares F = {f} but found {} rows",
            row_lines.len()
        )));
    }
    let mut rows = Vec::with_capacity(f);
    for (j, line) in row_lines.iter().enumerate() {
        let line_no = HEADER_LINES + j + 1;
        let toks = if line.is_empty() && k == 0 {
            Vec::new()
        } else {
            tokens(line)
        };
        if toks.len() != k {
            return Err(ModelError::Dimension(format!(
                "row {} (line {line_no}) has {} entries, expected {k}",
                j + 1,
                toks.len()
            )));
        }
        let mut row = Vec::with_capacity(k);
        for (column, tok) in toks {
            let entry = if tok == "*" {
                Entry::Star
            } else {
                match parse_decimal(tok).and_then(|v| u32::try_from(v).ok()) {
                    Some(v) if v > 0 => Entry::Symbol(v),
                    _ => {
                        return Err(parse_error(
                            line_no,
                            column,
                            format!("row {}: invalid entry {tok:?}", j + 1),
                        ))
                    }
                }
            };
            row.push(entry);
        }
        rows.push(row);
    }
    PdaArray::new(h, r, labels, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{construction2, Construction2Params};
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn example_serialization() {
        let text = write_array(&fixtures::example1());
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(&lines[..5], ["#CPDA v1", "H 5", "r 3", "F 5", "K 10"]);
        assert_eq!(
            lines[5],
            "cols 1-2-3 1-2-4 1-2-5 1-3-4 1-3-5 1-4-5 2-3-4 2-3-5 2-4-5 3-4-5"
        );
        assert_eq!(lines[6], "5 6 7 8 9 10 * * * *");
        assert_eq!(lines.len(), 11);
        assert!(text.ends_with("* 5 6 8\n"));
        assert_eq!(read_array(&text).unwrap(), fixtures::example1());
        assert_eq!(write_array(&read_array(&text).unwrap()), text);
    }

    #[test]
    fn malformed_token_names_the_row() {
        let text = write_array(&fixtures::example1())
            .replace("2 3 4 * * * 8 9 10 *", "2 x7 4 * * * 8 9 10 *");
        let err = read_array(&text).unwrap_err();
        match &err {
            ModelError::Parse {
                line,
                column,
                message,
            } => {
                assert_eq!(*line, 8);
                assert_eq!(*column, 3);
                assert!(message.contains("row 2"), "{message}");
                assert!(message.contains("x7"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn strictness() {
        let good = write_array(&fixtures::example1());
        // trailing newline
        assert!(read_array(good.trim_end()).is_err());
        // extra blank line
        assert!(read_array(&format!("{good}\n")).is_err());
        // doubled space
        assert!(read_array(&good.replacen("H 5", "H  5", 1)).is_err());
        // trailing space in a row
        assert!(read_array(&good.replacen("* * * *\n", "* * * * \n", 1)).is_err());
        // CRLF
        assert!(read_array(&good.replace('\n', "\r\n")).is_err());
        // zero symbol
        assert!(read_array(&good.replacen("5 6 7", "0 6 7", 1)).is_err());
        // bad magic
        assert!(read_array(&good.replacen("v1", "v2", 1)).is_err());
    }

    #[test]
    fn dimension_and_label_errors() {
        let good = write_array(&fixtures::example1());
        assert!(matches!(
            read_array(&good.replacen("F 5", "F 4", 1)),
            Err(ModelError::Dimension(_))
        ));
        assert!(matches!(
            read_array(&good.replacen("K 10", "K 11", 1)),
            Err(ModelError::Dimension(_))
        ));
        assert!(matches!(
            read_array(&good.replacen("5 6 7 8 9 10 * * * *", "5 6 7 8 9 10 * * *", 1)),
            Err(ModelError::Dimension(_))
        ));
        assert!(matches!(
            read_array(&good.replacen("1-2-4", "1-2-3", 1)),
            Err(ModelError::DuplicateLabel(_))
        ));
        assert!(matches!(
            read_array(&good.replacen("1-2-4", "1-2", 1)),
            Err(ModelError::Label { .. })
        ));
        assert!(matches!(
            read_array(&good.replacen("1-2-4", "2-1-4", 1)),
            Err(ModelError::Parse { line: 6, .. })
        ));
    }

    #[test]
    fn construction2_roundtrip() {
        let p = Construction2Params::new(5, 2, 2, 1).unwrap();
        let a = construction2(&p).canonical_relabel();
        let text = write_array(&a);
        let back = read_array(&text).unwrap();
        assert_eq!(back.rows(), a.rows());
        assert_eq!(back.col_labels(), a.col_labels());
        assert_eq!(write_array(&back), text);
    }

    fn arb_array() -> impl Strategy<Value = PdaArray<u32>> {
        (2usize..=7)
            .prop_flat_map(|h| (Just(h), 1..h))
            .prop_flat_map(|(h, r)| {
                let labels = crate::combinat::enumerate_subsets(h, r).unwrap();
                let k = labels.len();
                (
                    Just((h, r, labels)),
                    prop::collection::vec(
                        prop::collection::vec(prop::option::of(1u32..50), k),
                        0..6,
                    ),
                )
            })
            .prop_map(|((h, r, labels), rows)| {
                let rows = rows
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|c| c.map_or(Entry::Star, Entry::Symbol))
                            .collect()
                    })
                    .collect();
                PdaArray::new(h, r, labels, rows).unwrap()
            })
    }

    proptest! {
        #[test]
        fn read_inverts_write(a in arb_array()) {
            let text = write_array(&a);
            let back = read_array(&text).unwrap();
            prop_assert_eq!(&back, &a);
            prop_assert_eq!(write_array(&back), text);
        }
    }
}
