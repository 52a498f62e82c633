//! Dataset loading and JSON serialization.
//!
//! Two dataset formats are supported. `csv` rows hold the attribute values
//! followed by the label in the last column. `sparse` lines hold the label
//! followed by `index:value` pairs with 1-based attribute indices; missing
//! attributes are zero. Labels may use either the `-1/1` or the `0/1`
//! convention, but not both in one file.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::learners::VoteModel;
use crate::types::{Dataset, Example};

/// On-disk dataset layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Sparse,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "sparse" => Ok(Format::Sparse),
            other => Err(Error::InvalidInput {
                context: format!("unknown dataset format {other:?}; expected csv or sparse"),
            }),
        }
    }
}

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Raw label as read, before resolving the labeling convention.
fn parse_label(token: &str, line: u64) -> Result<i8> {
    let value: f64 = token
        .trim()
        .parse()
        .map_err(|_| parse_error(line, format!("label {token:?} is not a number")))?;
    if value == 1.0 {
        Ok(1)
    } else if value == -1.0 {
        Ok(-1)
    } else if value == 0.0 {
        Ok(0)
    } else {
        Err(parse_error(
            line,
            format!("label {value} is not in {{-1, 0, 1}}"),
        ))
    }
}

fn parse_feature(token: &str, line: u64) -> Result<f64> {
    let value: f64 = token
        .trim()
        .parse()
        .map_err(|_| parse_error(line, format!("feature value {token:?} is not a number")))?;
    if !value.is_finite() {
        return Err(parse_error(line, format!("feature value {value} is not finite")));
    }
    Ok(value)
}

/// Resolves the 0/1 versus -1/1 labeling convention over a whole file:
/// zeros become -1, and mixing both conventions is an error.
fn resolve_labels(rows: &mut [(u64, Vec<f64>, i8)]) -> Result<()> {
    let zero_line = rows.iter().find(|(_, _, y)| *y == 0).map(|(l, _, _)| *l);
    let has_minus = rows.iter().any(|(_, _, y)| *y == -1);
    if let Some(line) = zero_line {
        if has_minus {
            return Err(parse_error(
                line,
                "labels mix the 0/1 and -1/1 conventions in one file",
            ));
        }
        for (_, _, y) in rows.iter_mut() {
            if *y == 0 {
                *y = -1;
            }
        }
    }
    Ok(())
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

fn load_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::InvalidInput {
                context: format!("csv open failed: {other:?}"),
            },
        })?;
    let mut rows: Vec<(u64, Vec<f64>, i8)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_error(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() < 2 {
            return Err(parse_error(
                line,
                format!("row has {} fields; need at least one attribute and a label", record.len()),
            ));
        }
        let mut features = Vec::with_capacity(record.len() - 1);
        for token in record.iter().take(record.len() - 1) {
            features.push(parse_feature(token, line)?);
        }
        let label = parse_label(&record[record.len() - 1], line)?;
        if let Some((first_line, first, _)) = rows.first() {
            if features.len() != first.len() {
                return Err(parse_error(
                    line,
                    format!(
                        "row has {} attributes but line {} has {}",
                        features.len(),
                        first_line,
                        first.len()
                    ),
                ));
            }
        }
        rows.push((line, features, label));
    }
    finish(path, rows)
}

fn load_sparse(path: &Path) -> Result<Dataset> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows: Vec<(u64, Vec<(usize, f64)>, i8)> = Vec::new();
    let mut width = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let text = line?;
        let mut tokens = text.split_whitespace();
        let Some(first) = tokens.next() else {
            continue; // blank line
        };
        let label = parse_label(first, line_no)?;
        let mut pairs: Vec<(usize, f64)> = Vec::new();
        for token in tokens {
            let Some((idx, val)) = token.split_once(':') else {
                return Err(parse_error(
                    line_no,
                    format!("expected index:value, got {token:?}"),
                ));
            };
            let index: usize = idx.parse().map_err(|_| {
                parse_error(line_no, format!("attribute index {idx:?} is not a positive integer"))
            })?;
            if index == 0 {
                return Err(parse_error(line_no, "attribute indices are 1-based"));
            }
            if pairs.iter().any(|(j, _)| *j == index) {
                return Err(parse_error(
                    line_no,
                    format!("duplicate attribute index {index}"),
                ));
            }
            pairs.push((index, parse_feature(val, line_no)?));
            width = width.max(index);
        }
        rows.push((line_no, pairs, label));
    }
    if width == 0 && !rows.is_empty() {
        return Err(parse_error(
            rows[0].0,
            "no attribute indices found in the whole file",
        ));
    }
    let dense = rows
        .into_iter()
        .map(|(line, pairs, label)| {
            let mut features = vec![0.0; width];
            for (index, value) in pairs {
                features[index - 1] = value;
            }
            (line, features, label)
        })
        .collect();
    finish(path, dense)
}

fn finish(path: &Path, mut rows: Vec<(u64, Vec<f64>, i8)>) -> Result<Dataset> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    resolve_labels(&mut rows)?;
    let examples = rows
        .into_iter()
        .map(|(_, features, label)| Example::new(features, label))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(dataset_name(path), examples)
}

/// Loads a dataset; its name is the file stem.
pub fn load_dataset(path: impl AsRef<Path>, format: Format) -> Result<Dataset> {
    match format {
        Format::Csv => load_csv(path.as_ref()),
        Format::Sparse => load_sparse(path.as_ref()),
    }
}

/// Pretty-printed JSON with a trailing newline; output is byte-stable for
/// identical values.
pub fn write_json_file(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn read_json_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let file = File::open(path)?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })
}

/// Loads a model and checks the posterior covers the doubled voter set.
pub fn load_model(path: impl AsRef<Path>) -> Result<VoteModel> {
    let model: VoteModel = read_json_file(path)?;
    let expected = 2 * model.voters.half_count();
    if model.posterior.len() != expected {
        return Err(Error::WeightCountMismatch {
            expected,
            got: model.posterior.len(),
        });
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn write_temp(content: &str, suffix: &str) -> tempfile::NamedTempFile {
        let file = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        std::fs::write(file.path(), content).unwrap();
        file
    }

    #[test]
    fn csv_round_trip_with_both_label_conventions() {
        let file = write_temp("0.5,1.5,-1\n1.0,2.0,1\n", ".csv");
        let data = load_dataset(file.path(), Format::Csv).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.feature_count(), 2);
        assert_eq!(data.labels().collect::<Vec<_>>(), vec![-1, 1]);

        let file = write_temp("0.5,0\n1.0,1\n", ".csv");
        let data = load_dataset(file.path(), Format::Csv).unwrap();
        assert_eq!(data.labels().collect::<Vec<_>>(), vec![-1, 1]);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let file = write_temp("0.5,1\nx,1\n", ".csv");
        match load_dataset(file.path(), Format::Csv) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("\"x\""), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let file = write_temp("0.5,2\n", ".csv");
        match load_dataset(file.path(), Format::Csv) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("label 2"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let file = write_temp("0.5,1\n0.5,0\n", ".csv");
        match load_dataset(file.path(), Format::Csv) {
            Err(Error::Parse { line, .. }) => {
                // -1 never appears, but 1-and-0 files resolve zeros, so this
                // mix is legal; reaching here would be a bug.
                panic!("0/1 convention with explicit 1 should load, line {line}")
            }
            Ok(data) => assert_eq!(data.labels().collect::<Vec<_>>(), vec![1, -1]),
            other => panic!("unexpected {other:?}"),
        }
        let file = write_temp("0.5,-1\n0.5,0\n", ".csv");
        match load_dataset(file.path(), Format::Csv) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("mix"), "{message}");
            }
            other => panic!("expected convention-mix error, got {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let file = write_temp("0.5,1.5,-1\n1.0,1\n", ".csv");
        assert!(matches!(
            load_dataset(file.path(), Format::Csv),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn sparse_densifies_and_validates() {
        let file = write_temp("1 1:0.5 3:2.0\n-1 2:1.0\n\n1 1:-1.0\n", ".txt");
        let data = load_dataset(file.path(), Format::Sparse).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.feature_count(), 3);
        assert_abs_diff_eq!(data.examples()[0].features[2], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(data.examples()[1].features[0], 0.0, epsilon = 1e-15);

        let file = write_temp("1 1:0.5 1:2.0\n", ".txt");
        match load_dataset(file.path(), Format::Sparse) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("duplicate"), "{message}");
            }
            other => panic!("expected duplicate-index error, got {other:?}"),
        }
        let file = write_temp("1 0:0.5\n", ".txt");
        assert!(matches!(
            load_dataset(file.path(), Format::Sparse),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn empty_files_are_rejected() {
        let file = write_temp("", ".csv");
        assert!(matches!(
            load_dataset(file.path(), Format::Csv),
            Err(Error::EmptyDataset)
        ));
        let file = write_temp("\n\n", ".txt");
        assert!(matches!(
            load_dataset(file.path(), Format::Sparse),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.json");
        let value = crate::types::MarginSummary {
            mu1: 0.25,
            mu2: 0.5,
            variance: 0.4375,
            gibbs_risk: 0.375,
            disagreement: 0.25,
            joint_error: 0.125,
            joint_success: 0.625,
            bayes_risk: 0.1,
            c_bound: Some(0.875),
        };
        write_json_file(&path, &value).unwrap();
        let first = std::fs::read(&path).unwrap();
        assert_eq!(first.last(), Some(&b'\n'));
        write_json_file(&path, &value).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
        let back: crate::types::MarginSummary = read_json_file(&path).unwrap();
        assert_eq!(back, value);
    }

    #[test]
    fn malformed_json_reports_its_line() {
        let file = write_temp("{\n  \"mu1\": oops\n}\n", ".json");
        match read_json_file::<crate::types::MarginSummary>(file.path()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn model_files_validate_weight_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(
            &path,
            r#"{
  "voters": { "kind": "explicit", "outputs": [[1.0, -1.0]], "compression": 0 },
  "posterior": [0.5, 0.5]
}
"#,
        )
        .unwrap();
        assert!(matches!(
            load_model(&path),
            Err(Error::WeightCountMismatch { expected: 4, got: 2 })
        ));
    }
}
