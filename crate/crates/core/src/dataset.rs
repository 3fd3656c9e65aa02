//! Text formats.
//!
//! Datasets hold one point per line, `x1 ... xd label [weight]`. Queries
//! hold one box per line, `lo hi` for each axis with `-inf` and `inf` for
//! open ends. Answers are written one per line as `queryId k label:weight
//! ...`, entries in color id order. Blank lines and anything after `#` are
//! ignored on input.

use std::collections::HashMap;
use std::fmt::{Display, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::types::{BoxQuery, ColorId, ColoredPoint, FrequencyList, Interval, TextWeight};

/// Points plus the label of every color id. Ids are handed out in order of
/// first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<W> {
    pub dims: usize,
    pub points: Vec<ColoredPoint<W>>,
    pub labels: Vec<String>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_coord(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad number {tok:?}"),
    })?;
    if v.is_nan() {
        return Err(Error::Parse {
            line,
            message: "NaN is not a coordinate".into(),
        });
    }
    Ok(v)
}

impl<W: TextWeight> Dataset<W>
where
    <W as FromStr>::Err: Display,
{
    pub fn new(dims: usize) -> Self {
        Dataset {
            dims,
            points: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn parse(text: &str, dims: usize) -> Result<Self> {
        if dims == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let mut ds = Dataset::new(dims);
        let mut ids: HashMap<String, ColorId> = HashMap::new();
        for (line, tokens) in content_lines(text) {
            if tokens.len() != dims + 1 && tokens.len() != dims + 2 {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "expected {dims} coordinates, a label and an optional weight, got {} fields",
                        tokens.len()
                    ),
                });
            }
            let mut coords = Vec::with_capacity(dims);
            for tok in &tokens[..dims] {
                let v = parse_coord(tok, line)?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("coordinate {tok} is not finite"),
                    });
                }
                coords.push(v);
            }
            let label = tokens[dims];
            let next = ColorId(ds.labels.len() as u32);
            let color = *ids.entry(label.to_string()).or_insert_with(|| {
                ds.labels.push(label.to_string());
                next
            });
            let weight = match tokens.get(dims + 1) {
                None => W::default_point(),
                Some(tok) => tok.parse().map_err(|e: <W as FromStr>::Err| Error::Parse {
                    line,
                    message: e.to_string(),
                })?,
            };
            ds.points.push(ColoredPoint::new(coords, color, weight));
        }
        Ok(ds)
    }

    /// Adds a point, assigning an id to a new label.
    pub fn push(&mut self, coords: Vec<f64>, label: &str, weight: W) {
        let color = match self.labels.iter().position(|l| l == label) {
            Some(i) => ColorId(i as u32),
            None => {
                self.labels.push(label.to_string());
                ColorId(self.labels.len() as u32 - 1)
            }
        };
        self.points.push(ColoredPoint::new(coords, color, weight));
    }

    pub fn label(&self, c: ColorId) -> &str {
        &self.labels[c.index()]
    }

    /// Writes the dataset; the weight column is left out when every weight
    /// equals the default.
    pub fn to_text(&self) -> String {
        let with_weights = self.points.iter().any(|p| p.weight != W::default_point());
        let mut out = String::new();
        for p in &self.points {
            for c in &p.coords {
                write!(out, "{c} ").unwrap();
            }
            out.push_str(self.label(p.color));
            if with_weights {
                write!(out, " {}", p.weight).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// One answer stream line.
    pub fn format_answer(&self, query_id: u32, answer: &FrequencyList<W>) -> String {
        format_answer_with(query_id, answer, |c| self.label(c).to_string())
    }
}

/// Answer line with colors written by `label`.
pub fn format_answer_with<W: TextWeight>(
    query_id: u32,
    answer: &FrequencyList<W>,
    label: impl Fn(ColorId) -> String,
) -> String {
    let entries = answer.sorted();
    let mut out = format!("{query_id} {}", entries.len());
    for (c, w) in entries {
        write!(out, " {}:{w}", label(c)).unwrap();
    }
    out
}

/// Splits an answer line into its id and `(label, weight)` entries.
pub fn parse_answer_line<W: TextWeight>(line: &str) -> Result<(u32, Vec<(String, W)>)>
where
    <W as FromStr>::Err: Display,
{
    let bad = |m: String| Error::MalformedInput(format!("{m} in answer line {line:?}"));
    let mut tokens = line.split_whitespace();
    let id = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("missing query id".into()))?;
    let k: usize = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("missing entry count".into()))?;
    let mut entries = Vec::with_capacity(k);
    for tok in tokens {
        let (label, w) = tok.rsplit_once(':').ok_or_else(|| bad(format!("entry {tok:?}")))?;
        let w = w.parse().map_err(|e: <W as FromStr>::Err| bad(e.to_string()))?;
        entries.push((label.to_string(), w));
    }
    if entries.len() != k {
        return Err(bad(format!("{} entries, count says {k}", entries.len())));
    }
    Ok((id, entries))
}

/// Reads one box per line; the line order gives the query ids.
pub fn parse_queries(text: &str, dims: usize) -> Result<Vec<BoxQuery>> {
    let mut out = Vec::new();
    for (line, tokens) in content_lines(text) {
        if tokens.len() != 2 * dims {
            return Err(Error::Parse {
                line,
                message: format!("expected {} bounds, got {}", 2 * dims, tokens.len()),
            });
        }
        let mut bounds = Vec::with_capacity(dims);
        for pair in tokens.chunks(2) {
            bounds.push(Interval::new(parse_coord(pair[0], line)?, parse_coord(pair[1], line)?));
        }
        let q = BoxQuery::new(bounds);
        q.validate().map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push(q);
    }
    Ok(out)
}

pub fn format_query(q: &BoxQuery) -> String {
    let mut out = String::new();
    for (i, b) in q.bounds.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{} {}", b.lo, b.hi).unwrap();
    }
    out
}

pub fn queries_to_text(queries: &[BoxQuery]) -> String {
    queries.iter().map(|q| format_query(q) + "\n").collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Count, MaxWeight};

    #[test]
    fn dataset_roundtrip() {
        let text = "# two colors\n1 2 red\n3.5 -4 blue 5\n\n0 0 red # trailing\n";
        let ds: Dataset<Count> = Dataset::parse(text, 2).unwrap();
        assert_eq!(ds.labels, vec!["red", "blue"]);
        assert_eq!(ds.points.len(), 3);
        assert_eq!(ds.points[1].weight, Count(5));
        assert_eq!(ds.points[2].color, ColorId(0));
        let again: Dataset<Count> = Dataset::parse(&ds.to_text(), 2).unwrap();
        assert_eq!(again, ds);
    }

    #[test]
    fn dataset_errors_carry_line() {
        let e = Dataset::<Count>::parse("1 2 a\n1 b\n", 2).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = Dataset::<Count>::parse("1 inf a\n", 2).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = Dataset::<Count>::parse("1 1 a 0\n", 2).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        assert!(Dataset::<MaxWeight>::parse("1 1 a -7\n", 2).is_ok());
    }

    #[test]
    fn query_roundtrip() {
        let qs = parse_queries("-inf 3 2 inf\n# c\n1 4 -inf inf\n", 2).unwrap();
        assert_eq!(qs[0].bounds[0], Interval::at_most(3.0));
        assert_eq!(qs[0].bounds[1], Interval::at_least(2.0));
        assert_eq!(qs[1].bounds[1], Interval::FULL);
        assert_eq!(parse_queries(&queries_to_text(&qs), 2).unwrap(), qs);
        assert!(matches!(
            parse_queries("5 1 0 1\n", 2),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_queries("1 2 3\n", 2).is_err());
    }

    #[test]
    fn answer_lines() {
        let ds: Dataset<Count> = Dataset::parse("0 x\n1 y\n", 1).unwrap();
        let ans: FrequencyList<Count> =
            [(ColorId(1), Count(2)), (ColorId(0), Count(3))].into_iter().collect();
        let line = ds.format_answer(4, &ans);
        assert_eq!(line, "4 2 x:3 y:2");
        let (id, entries) = parse_answer_line::<Count>(&line).unwrap();
        assert_eq!(id, 4);
        assert_eq!(entries, vec![("x".to_string(), Count(3)), ("y".to_string(), Count(2))]);
        assert_eq!(ds.format_answer(0, &FrequencyList::new()), "0 0");
        assert!(parse_answer_line::<Count>("1 2 x:1").is_err());
    }
}
