//! Text formats for match lists and fundamental matrices.
//!
//! A match file has one correspondence per line:
//!
//! ```text
//! u1 v1 u2 v2 q1 q2 alpha1 alpha2 [quality [label]]
//! ```
//!
//! Fields are whitespace separated, `#` starts a comment, and blank lines
//! are ignored. Every row must have the same number of columns. A label of
//! −1 marks an outlier; other labels name planes.
//!
//! An F file holds the nine entries of F in row-major order, separated by
//! any whitespace, with the same comment rules.

use std::fmt::Write as _;

use thiserror::Error;

use crate::affine::{SiftCorrespondence, SiftFeature};
use crate::epipolar::FundamentalMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("line {line}: {got} columns, expected {expected} as on earlier rows")]
    MixedColumns { line: usize, got: usize, expected: usize },
    #[error("{0}")]
    Content(String),
}

/// One row of a match file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRecord {
    pub corr: SiftCorrespondence,
    pub quality: Option<f64>,
    pub label: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchList {
    pub records: Vec<MatchRecord>,
}

impl MatchList {
    pub fn correspondences(&self) -> Vec<SiftCorrespondence> {
        self.records.iter().map(|r| r.corr).collect()
    }

    /// Qualities when every row carries one.
    pub fn qualities(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.quality).collect()
    }

    /// Labels when every row carries one.
    pub fn labels(&self) -> Option<Vec<i64>> {
        self.records.iter().map(|r| r.label).collect()
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

fn number(line: usize, field: &str, name: &str) -> Result<f64, FormatError> {
    let x: f64 = field.parse().map_err(|_| FormatError::Line {
        line,
        message: format!("{name}: cannot parse {field:?} as a number"),
    })?;
    if !x.is_finite() {
        return Err(FormatError::Line {
            line,
            message: format!("{name} must be finite, got {field}"),
        });
    }
    Ok(x)
}

/// Parses a match file. Angles are read in radians unless `degrees`.
pub fn parse_match_list(text: &str, degrees: bool) -> Result<MatchList, FormatError> {
    const NAMES: [&str; 8] = ["u1", "v1", "u2", "v2", "q1", "q2", "alpha1", "alpha2"];
    let mut records = Vec::new();
    let mut columns = None;
    for (line, body) in content_lines(text) {
        let fields: Vec<&str> = body.split_whitespace().collect();
        if !(8..=10).contains(&fields.len()) {
            return Err(FormatError::Line {
                line,
                message: format!("expected 8 to 10 columns, got {}", fields.len()),
            });
        }
        match columns {
            None => columns = Some(fields.len()),
            Some(expected) if expected != fields.len() => {
                return Err(FormatError::MixedColumns {
                    line,
                    got: fields.len(),
                    expected,
                })
            }
            _ => {}
        }
        let mut v = [0.0; 8];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = number(line, fields[k], NAMES[k])?;
        }
        let angle = |a: f64| if degrees { a.to_radians() } else { a };
        let feature = |u, v, q, a| {
            SiftFeature::new(u, v, q, angle(a)).map_err(|e| FormatError::Line {
                line,
                message: e.to_string(),
            })
        };
        let first = feature(v[0], v[1], v[4], v[6])?;
        let second = feature(v[2], v[3], v[5], v[7])?;
        let quality = fields.get(8).map(|f| number(line, f, "quality")).transpose()?;
        let label = fields
            .get(9)
            .map(|f| {
                f.parse::<i64>().map_err(|_| FormatError::Line {
                    line,
                    message: format!("label: cannot parse {f:?} as an integer"),
                })
            })
            .transpose()?;
        records.push(MatchRecord {
            corr: SiftCorrespondence::new(first, second),
            quality,
            label,
        });
    }
    Ok(MatchList { records })
}

/// Writes a match list that [`parse_match_list`] reads back exactly.
///
/// Quality and label columns are written when every record has them; a
/// label without a quality is written with quality 0.
pub fn write_match_list(list: &MatchList, degrees: bool) -> String {
    let with_label = !list.records.is_empty() && list.records.iter().all(|r| r.label.is_some());
    let with_quality = with_label || (!list.records.is_empty() && list.records.iter().all(|r| r.quality.is_some()));
    let mut out = String::from("# u1 v1 u2 v2 q1 q2 alpha1 alpha2");
    if with_quality {
        out.push_str(" quality");
    }
    if with_label {
        out.push_str(" label");
    }
    out.push_str(if degrees { "  (angles in degrees)\n" } else { "  (angles in radians)\n" });
    let angle = |a: f64| if degrees { a.to_degrees() } else { a };
    for r in &list.records {
        let (a, b) = (&r.corr.first, &r.corr.second);
        let _ = write!(
            out,
            "{} {} {} {} {} {} {} {}",
            a.pos.x,
            a.pos.y,
            b.pos.x,
            b.pos.y,
            a.scale,
            b.scale,
            angle(a.orientation),
            angle(b.orientation)
        );
        if with_quality {
            let _ = write!(out, " {}", r.quality.unwrap_or(0.0));
        }
        if with_label {
            let _ = write!(out, " {}", r.label.expect("checked above"));
        }
        out.push('\n');
    }
    out
}

/// Parses the nine row-major entries of F.
pub fn parse_fundamental(text: &str) -> Result<FundamentalMatrix, FormatError> {
    let mut values = Vec::with_capacity(9);
    for (line, body) in content_lines(text) {
        for field in body.split_whitespace() {
            values.push(number(line, field, "entry")?);
        }
    }
    let entries: [f64; 9] = values
        .as_slice()
        .try_into()
        .map_err(|_| FormatError::Content(format!("expected 9 entries, got {}", values.len())))?;
    FundamentalMatrix::from_row_major(entries).map_err(|e| FormatError::Content(e.to_string()))
}

pub fn write_fundamental(f: &FundamentalMatrix) -> String {
    let m = f.row_major();
    let mut out = String::from("# fundamental matrix, row-major\n");
    for row in m.chunks(3) {
        let _ = writeln!(out, "{:e} {:e} {:e}", row[0], row[1], row[2]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row() {
        let l = parse_match_list("0 0 5 0 1 2 0 0\n", false).unwrap();
        assert_eq!(l.records.len(), 1);
        assert_eq!(l.records[0].corr.relative_scale(), 2.0);
        assert_eq!(l.qualities(), None);
    }

    #[test]
    fn comments_and_blank_lines() {
        let l = parse_match_list("# comment\n\n1 2 3 4 1 1 0 0 # trailing\n", false).unwrap();
        assert_eq!(l.records.len(), 1);
        assert_eq!(l.records[0].corr.second.pos.y, 4.0);
    }

    #[test]
    fn zero_scale_names_the_line() {
        let err = parse_match_list("# header\n0 0 5 0 0 2 0 0\n", false).unwrap_err();
        assert!(matches!(err, FormatError::Line { line: 2, .. }), "{err}");
    }

    #[test]
    fn mixed_columns_rejected() {
        let err = parse_match_list("0 0 5 0 1 2 0 0\n0 0 5 0 1 2 0 0 0.5\n", false).unwrap_err();
        assert_eq!(
            err,
            FormatError::MixedColumns {
                line: 2,
                got: 9,
                expected: 8
            }
        );
    }

    #[test]
    fn malformed_number() {
        let err = parse_match_list("0 0 5 x 1 2 0 0\n", false).unwrap_err();
        assert!(err.to_string().starts_with("line 1: v2"));
    }

    #[test]
    fn degrees_flag() {
        let l = parse_match_list("0 0 0 0 1 1 90 180\n", true).unwrap();
        assert!((l.records[0].corr.first.orientation - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn labels_and_qualities() {
        let l = parse_match_list("0 0 5 0 1 2 0 0 0.7 3\n1 1 5 0 1 2 0 0 0.2 -1\n", false).unwrap();
        assert_eq!(l.labels(), Some(vec![3, -1]));
        assert_eq!(l.qualities(), Some(vec![0.7, 0.2]));
        let back = parse_match_list(&write_match_list(&l, false), false).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn fundamental_round_trip() {
        let f = FundamentalMatrix::from_row_major([0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]).unwrap();
        let text = write_fundamental(&f);
        let back = parse_fundamental(&text).unwrap();
        assert!((back.matrix() - f.matrix()).norm() < 1e-15);
        assert!(parse_fundamental("1 2 3\n4 5 6 # eight\n7 8\n").is_err());
    }
}
