use std::collections::HashMap;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;

use super::Dataset;
use crate::error::{Error, Result};

/// Which CSV column carries the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl Default for LabelColumn {
    fn default() -> Self {
        LabelColumn::Name("label".into())
    }
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Purely numeric strings are column indices; anything else is a header
    /// name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.trim().to_string()),
        })
    }
}

impl std::fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabelColumn::Name(n) => f.write_str(n),
            LabelColumn::Index(i) => write!(f, "{i}"),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    read_csv(file, &name, label_column)
        .map_err(|e| match e {
            Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
            other => other,
        })
}

pub(crate) fn read_csv<R: std::io::Read>(
    reader: R,
    name: &str,
    label_column: &LabelColumn,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Data(format!("cannot read header: {e}")))?
        .clone();
    let label_idx = match label_column {
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => {
            return Err(Error::Data(format!(
                "label column {i} out of range ({} columns)",
                headers.len()
            )))
        }
        LabelColumn::Name(n) => headers
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| Error::Data(format!("label column `{n}` not found in header")))?,
    };
    let n_features = headers.len() - 1;
    if n_features == 0 {
        return Err(Error::Data("no feature columns".into()));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut class_ids: HashMap<String, usize> = HashMap::new();
    let mut class_names = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        // Row numbers in diagnostics are 1-based file lines (header is line 1).
        let line = r + 2;
        let record = record.map_err(|e| Error::Data(format!("line {line}: {e}")))?;
        if record.len() != headers.len() {
            return Err(Error::Data(format!(
                "line {line}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        for (c, cell) in record.iter().enumerate() {
            if c == label_idx {
                if cell.is_empty() {
                    return Err(Error::Data(format!(
                        "line {line}, column `{}`: missing label",
                        &headers[c]
                    )));
                }
                let next = class_names.len();
                let id = *class_ids.entry(cell.to_string()).or_insert_with(|| {
                    class_names.push(cell.to_string());
                    next
                });
                labels.push(id);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                let what = if cell.is_empty() { "missing value" } else { "non-numeric value" };
                Error::Data(format!(
                    "line {line}, column `{}`: {what} `{cell}`",
                    &headers[c]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "line {line}, column `{}`: non-finite value `{cell}`",
                    &headers[c]
                )));
            }
            values.push(v);
        }
    }
    if labels.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    let features = Array2::from_shape_vec((labels.len(), n_features), values)
        .expect("row lengths validated");
    Dataset::new(name, features, labels, class_names)
}

/// Writes a dataset in the ingestion format, features as `f0..fN` and the
/// class name in a trailing `label` column.
pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let to_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut header: Vec<String> = (0..dataset.n_features()).map(|f| format!("f{f}")).collect();
    header.push("label".into());
    w.write_record(&header).map_err(to_err)?;
    for (row, &label) in dataset.features().rows().into_iter().zip(dataset.labels()) {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(dataset.class_names()[label].clone());
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
