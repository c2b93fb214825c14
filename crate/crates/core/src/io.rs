//! Point-set ingestion and emission.
//!
//! JSON documents look like `{"p": 1.5, "cells": [..], "points": [[..], ..]}`.
//! CSV files hold one point per row with one column per cell; an optional row
//! whose first field is `measure` supplies the cell measures (all one
//! otherwise), and `p` comes from the caller. Numbers are parsed with Rust's
//! correctly rounded, locale-independent float parser.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::SimplexWeights;
use crate::space::{Point, PointSet, WeightedSpace};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSetDocument {
    pub p: f64,
    pub cells: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl PointSetDocument {
    pub fn from_set(set: &PointSet) -> Self {
        Self {
            p: set.space().p(),
            cells: set.space().cells().to_vec(),
            points: set.points().iter().map(|x| x.coeffs().to_vec()).collect(),
        }
    }

    pub fn into_set(self) -> Result<PointSet> {
        let space = WeightedSpace::new(self.p, self.cells)?;
        PointSet::new(space, self.points.into_iter().map(Point::new).collect())
    }
}

pub fn parse_json(text: &str) -> Result<PointSet> {
    let doc: PointSetDocument = serde_json::from_str(text)?;
    doc.into_set()
}

fn parse_number(field: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("row {row}, column {col}: '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("row {row}, column {col}: non-finite value")));
    }
    Ok(v)
}

pub fn parse_csv(text: &str, p: f64) -> Result<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut measures: Option<Vec<f64>> = None;
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.get(0) == Some("measure") {
            if measures.is_some() {
                return Err(Error::Parse("more than one 'measure' row".into()));
            }
            measures = Some(
                record
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(c, f)| parse_number(f, row + 1, c + 1))
                    .collect::<Result<_>>()?,
            );
            continue;
        }
        let coeffs = record
            .iter()
            .enumerate()
            .map(|(c, f)| parse_number(f, row + 1, c + 1))
            .collect::<Result<Vec<f64>>>()?;
        points.push(Point::new(coeffs));
    }
    let dim = points.first().map(Point::dim).ok_or(Error::EmptySet)?;
    let cells = measures.unwrap_or_else(|| vec![1.0; dim]);
    PointSet::new(WeightedSpace::new(p, cells)?, points)
}

/// Reads a point set, choosing the format by extension (`.csv` needs `p`).
pub fn read_point_set(path: &Path, p: Option<f64>) -> Result<PointSet> {
    let text = std::fs::read_to_string(path)?;
    let is_csv = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let p = p.ok_or_else(|| {
            Error::InvalidArgument("CSV input carries no exponent; pass --p".into())
        })?;
        parse_csv(&text, p)
    } else {
        let set = parse_json(&text)?;
        match p {
            Some(p) if p != set.space().p() => {
                let space = WeightedSpace::new(p, set.space().cells().to_vec())?;
                PointSet::new(space, set.points().to_vec())
            }
            _ => Ok(set),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WeightsDocument {
    Bare(Vec<f64>),
    Wrapped { weights: Vec<f64> },
}

/// Reads weights from a JSON array or `{"weights": [...]}`.
pub fn read_weights(path: &Path) -> Result<SimplexWeights> {
    let text = std::fs::read_to_string(path)?;
    let raw = match serde_json::from_str::<WeightsDocument>(&text)? {
        WeightsDocument::Bare(w) | WeightsDocument::Wrapped { weights: w } => w,
    };
    SimplexWeights::new(raw)
}

pub fn to_csv(set: &PointSet) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_writer(Vec::new());
    let mut measure = vec!["measure".to_string()];
    measure.extend(set.space().cells().iter().map(|m| format!("{m:?}")));
    writer.write_record(&measure)?;
    for pt in set.points() {
        writer.write_record(pt.coeffs().iter().map(|x| format!("{x:?}")))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let text = r#"{"p": 1.5, "cells": [0.5, 0.25], "points": [[1, 2.5], [-0.1, 3e-3]]}"#;
        let set = parse_json(text).unwrap();
        assert_eq!(set.space().p(), 1.5);
        assert_eq!(set.get(1).coeffs(), &[-0.1, 0.003]);
        let back = serde_json::to_string(&PointSetDocument::from_set(&set)).unwrap();
        assert_eq!(parse_json(&back).unwrap(), set);
    }

    #[test]
    fn json_rejects_invalid_spaces() {
        assert!(parse_json(r#"{"p": 1.0, "cells": [1], "points": [[0]]}"#).is_err());
        assert!(parse_json(r#"{"p": 2.0, "cells": [1], "points": []}"#).is_err());
        assert!(parse_json(r#"{"p": 2.0, "cells": [1], "points": [[0, 1]]}"#).is_err());
        assert!(parse_json(r#"{"p": 2.0, "cells": [1]}"#).is_err());
    }

    #[test]
    fn csv_with_and_without_measures() {
        let set = parse_csv("1, 0\n0, 1\n", 2.0).unwrap();
        assert_eq!(set.space().cells(), &[1.0, 1.0]);
        assert_eq!(set.len(), 2);

        let set = parse_csv("# header comment\nmeasure,0.5,0.5\n1,0\n0,1\n", 3.0).unwrap();
        assert_eq!(set.space().cells(), &[0.5, 0.5]);

        assert!(parse_csv("1,x\n", 2.0).is_err());
        assert!(parse_csv("1,2\n3\n", 2.0).is_err());
        assert!(parse_csv("", 2.0).is_err());
        assert!(parse_csv("1,inf\n", 2.0).is_err());
    }

    #[test]
    fn csv_emission_round_trips() {
        let set = parse_csv("measure,0.1,2\n0.1,-7\n1e-5,3\n", 1.7).unwrap();
        let text = to_csv(&set).unwrap();
        assert_eq!(parse_csv(&text, 1.7).unwrap(), set);
    }
}
