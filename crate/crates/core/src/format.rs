//! Matrix file formats.
//!
//! JSON: `{"dim": n, "space": {"kind": "lp"|"ck"|"seq", "p": .., "a": .., "b": ..}, "rows": [[..], ..]}`.
//! `space` is optional and defaults to `ℓ²`; `p` defaults to 2 and `[a, b]`
//! to `[0, 1]`. An `lp` space may carry explicit `weights` instead of the
//! midpoint grid on `[a, b]`.
//!
//! Plain text: one row per line, entries separated by whitespace or commas;
//! blank lines and lines starting with `#` are skipped. The space is `ℓ²`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operators::{Operator, OperatorError, SpaceKind, SpaceSemantics};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("input is empty")]
    Empty,
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("line {line}: cannot parse {token:?} as a number")]
    Number { line: usize, token: String },
    #[error("row {row} has {got} entries, expected {expected}")]
    Ragged {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("declared dim {declared} but found {rows} rows")]
    Dim { declared: usize, rows: usize },
    #[error("unknown space kind {0:?} (expected lp, ck or seq)")]
    Kind(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceSpec {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MatrixFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    space: Option<SpaceSpec>,
    rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

/// Parses either format; input starting with `{` is read as JSON.
pub fn parse_operator(input: &str) -> Result<Operator, FormatError> {
    let trimmed = input.trim_start();
    if trimmed.is_empty() {
        return Err(FormatError::Empty);
    }
    if trimmed.starts_with('{') {
        parse_json(trimmed)
    } else {
        parse_text(input)
    }
}

fn check_rows(rows: &[Vec<f64>]) -> Result<(), FormatError> {
    if rows.is_empty() {
        return Err(FormatError::Empty);
    }
    let n = rows.len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(FormatError::Ragged {
                row: i,
                got: r.len(),
                expected: n,
            });
        }
    }
    Ok(())
}

fn parse_json(input: &str) -> Result<Operator, FormatError> {
    let file: MatrixFile =
        serde_json::from_str(input).map_err(|e| FormatError::Json(e.to_string()))?;
    check_rows(&file.rows)?;
    let n = file.rows.len();
    if let Some(dim) = file.dim {
        if dim != n {
            return Err(FormatError::Dim {
                declared: dim,
                rows: n,
            });
        }
    }
    let space = match &file.space {
        None => SpaceSemantics::sequence(2.0, n),
        Some(spec) => space_from_spec(spec, n)?,
    };
    let op = Operator::from_dense(&file.rows, space)?;
    Ok(match file.label {
        Some(label) => op.with_label(label),
        None => op,
    })
}

fn space_from_spec(spec: &SpaceSpec, n: usize) -> Result<SpaceSemantics, FormatError> {
    let p = spec.p.unwrap_or(2.0);
    let (a, b) = (spec.a.unwrap_or(0.0), spec.b.unwrap_or(1.0));
    Ok(match spec.kind.as_str() {
        "lp" => match &spec.weights {
            Some(w) => SpaceSemantics::new(SpaceKind::LpGrid { p, weights: w.clone() }, n, None)?,
            None => SpaceSemantics::lp_midpoint(p, a, b, n)?,
        },
        "ck" => SpaceSemantics::ck_grid(a, b, n)?,
        "seq" => SpaceSemantics::new(SpaceKind::Sequence { p }, n, None)?,
        other => return Err(FormatError::Kind(other.to_string())),
    })
}

fn parse_text(input: &str) -> Result<Operator, FormatError> {
    let mut rows = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>().map_err(|_| FormatError::Number {
                    line: lineno + 1,
                    token: t.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    check_rows(&rows)?;
    let n = rows.len();
    Ok(Operator::from_dense(&rows, SpaceSemantics::sequence(2.0, n))?)
}

fn spec_of(space: &SpaceSemantics) -> SpaceSpec {
    match &space.kind {
        SpaceKind::Sequence { p } => SpaceSpec {
            kind: "seq".into(),
            p: Some(*p),
            a: None,
            b: None,
            weights: None,
        },
        SpaceKind::CkGrid => {
            let coords = space.coords.as_deref().unwrap_or(&[]);
            SpaceSpec {
                kind: "ck".into(),
                p: None,
                a: coords.first().copied(),
                b: coords.last().copied(),
                weights: None,
            }
        }
        SpaceKind::LpGrid { p, weights } => {
            let midpoint = space.coords.as_ref().and_then(|c| {
                let n = c.len();
                let a = c[0] - weights[0] / 2.0;
                let b = c[n - 1] + weights[n - 1] / 2.0;
                SpaceSemantics::lp_midpoint(*p, a, b, n)
                    .ok()
                    .filter(|s| s.weights() == *weights)
                    .map(|_| (a, b))
            });
            match midpoint {
                Some((a, b)) => SpaceSpec {
                    kind: "lp".into(),
                    p: Some(*p),
                    a: Some(a),
                    b: Some(b),
                    weights: None,
                },
                None => SpaceSpec {
                    kind: "lp".into(),
                    p: Some(*p),
                    a: None,
                    b: None,
                    weights: Some(weights.clone()),
                },
            }
        }
    }
}

/// JSON value in the ingestion format, readable by [`parse_operator`].
pub fn operator_to_json(op: &Operator) -> serde_json::Value {
    let file = MatrixFile {
        dim: Some(op.dim()),
        space: Some(spec_of(op.space())),
        rows: op.rows(),
        label: Some(op.label().to_string()),
    };
    serde_json::to_value(file).expect("matrix file serialises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::doubly_stochastic_strip;

    #[test]
    fn plain_text_identity() {
        let op = parse_operator("1 0\n0 1\n").unwrap();
        assert_eq!(op.dim(), 2);
        assert_eq!(op.entry(0, 0), 1.0);
        assert_eq!(op.space().tag(), SpaceSemantics::sequence(2.0, 2).tag());
    }

    #[test]
    fn plain_text_comments_and_commas() {
        let op = parse_operator("# two-cycle\n0, 1\n\n1, 0\n").unwrap();
        assert_eq!(op.entry(0, 1), 1.0);
    }

    #[test]
    fn empty_inputs_are_errors() {
        assert_eq!(parse_operator("").unwrap_err(), FormatError::Empty);
        assert_eq!(parse_operator("  \n# only a comment\n").unwrap_err(), FormatError::Empty);
        assert_eq!(parse_operator(r#"{"rows": []}"#).unwrap_err(), FormatError::Empty);
    }

    #[test]
    fn negative_entry_reports_position() {
        let err = parse_operator("1 -0.5\n0 1").unwrap_err();
        assert!(err.to_string().starts_with("NegativeEntry at (0,1)"), "{err}");
    }

    #[test]
    fn ragged_and_garbage() {
        assert!(matches!(parse_operator("1 0\n1"), Err(FormatError::Ragged { .. })));
        assert!(matches!(parse_operator("1 x\n0 1"), Err(FormatError::Number { line: 1, .. })));
        assert!(matches!(parse_operator("{ nope"), Err(FormatError::Json(_))));
        assert!(matches!(
            parse_operator(r#"{"dim": 3, "rows": [[1]]}"#),
            Err(FormatError::Dim { .. })
        ));
        assert!(matches!(
            parse_operator(r#"{"space": {"kind": "xx"}, "rows": [[1]]}"#),
            Err(FormatError::Kind(_))
        ));
    }

    #[test]
    fn json_spaces() {
        let lp = parse_operator(r#"{"dim":2,"space":{"kind":"lp","p":1,"a":0,"b":2},"rows":[[0.5,0.5],[0.5,0.5]]}"#)
            .unwrap();
        assert_eq!(lp.space().weights(), vec![1.0, 1.0]);
        let ck = parse_operator(r#"{"space":{"kind":"ck","a":-1,"b":1},"rows":[[1,0,0],[0,1,0],[0,0,1]]}"#)
            .unwrap();
        assert_eq!(ck.space().coords.as_deref(), Some(&[-1.0, 0.0, 1.0][..]));
        let seq = parse_operator(r#"{"space":{"kind":"seq","p":3},"rows":[[1]]}"#).unwrap();
        assert_eq!(seq.space().exponent(), 3.0);
    }

    #[test]
    fn json_round_trip() {
        let strip = doubly_stochastic_strip(12, 0.3).unwrap();
        let text = operator_to_json(&strip).to_string();
        let back = parse_operator(&text).unwrap();
        assert_eq!(back.matrix(), strip.matrix());
        assert_eq!(back.space().weights(), strip.space().weights());
        assert_eq!(back.label(), strip.label());
    }
}
