//! CSV dataset ingestion.
//!
//! The first row names the columns. One column holds labels (any string);
//! every other column is a numeric feature, taken in file order. Label ids
//! follow first appearance.

use std::path::Path;

use mixent::{Dataset, PointSet};

use crate::CliError;

/// A parsed CSV dataset with its column names.
#[derive(Debug, Clone)]
pub struct CsvDataset {
    pub dataset: Dataset,
    pub feature_names: Vec<String>,
    pub label_column: String,
}

impl CsvDataset {
    /// `(label string, id)` pairs in id order.
    pub fn label_mapping(&self) -> Vec<(String, u32)> {
        self.dataset.label_names().unwrap_or_default().iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect()
    }
}

pub fn ingest_csv(path: &Path, label_column: Option<&str>) -> Result<CsvDataset, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    ingest_reader(file, label_column).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn ingest_reader<R: std::io::Read>(reader: R, label_column: Option<&str>) -> Result<CsvDataset, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> =
        rdr.headers().map_err(|e| CliError::Input(format!("header: {e}")))?.iter().map(str::to_owned).collect();
    if headers.len() < 2 {
        return Err(CliError::Input("need at least one feature column and one label column".into()));
    }
    let label_idx = match label_column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Input(format!("label column '{name}' not found")))?,
        None => headers.len() - 1,
    };
    let feature_names: Vec<String> =
        headers.iter().enumerate().filter(|&(i, _)| i != label_idx).map(|(_, h)| h.clone()).collect();

    let mut coords = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        // Data rows are numbered from 1; the header is row 0.
        let row = row + 1;
        let record = record.map_err(|e| CliError::Input(format!("row {row}: {e}")))?;
        if record.len() != headers.len() {
            return Err(CliError::Input(format!("row {row}: {} fields, header has {}", record.len(), headers.len())));
        }
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                let id = match names.iter().position(|n| n == cell) {
                    Some(id) => id,
                    None => {
                        names.push(cell.to_owned());
                        names.len() - 1
                    }
                };
                labels.push(id as u32);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Input(format!("row {row}, column '{}': '{cell}' is not a number", headers[col]))
            })?;
            if !v.is_finite() {
                return Err(CliError::Input(format!(
                    "row {row}, column '{}': non-finite value '{cell}'",
                    headers[col]
                )));
            }
            coords.push(v);
        }
    }
    if labels.len() < 2 {
        return Err(CliError::Input(format!("need at least 2 data rows, got {}", labels.len())));
    }
    let features = PointSet::new(coords, feature_names.len()).map_err(CliError::from)?;
    let m = names.len();
    let dataset = Dataset::new(features, labels, m)?.with_label_names(names)?;
    Ok(CsvDataset { dataset, feature_names, label_column: headers[label_idx].clone() })
}

/// Writes a dataset as CSV with columns `x1..xd` and `y`, values in shortest
/// round-trip form.
pub fn write_csv(dataset: &Dataset) -> String {
    let mut out = String::new();
    let d = dataset.dim();
    for j in 1..=d {
        out.push_str(&format!("x{j},"));
    }
    out.push_str("y\n");
    for i in 0..dataset.len() {
        for &v in dataset.features().point(i) {
            out.push_str(&format!("{v:?},"));
        }
        out.push_str(&dataset.label_name(dataset.labels()[i]));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_fixture() {
        let text = "x1,y\n0.0,a\n1.0,b\n2.5,a\n10.0,b\n";
        let ds = ingest_reader(text.as_bytes(), Some("y")).unwrap();
        assert_eq!(ds.dataset.features().as_slice(), &[0.0, 1.0, 2.5, 10.0]);
        assert_eq!(ds.dataset.labels(), &[0, 1, 0, 1]);
        assert_eq!(ds.label_mapping(), vec![("a".to_string(), 0), ("b".to_string(), 1)]);
        assert_eq!(ds.feature_names, vec!["x1"]);
    }

    #[test]
    fn label_column_anywhere() {
        let text = "cls,u,v\nq,1,2\nr,3,4\nq,5,6\n";
        let ds = ingest_reader(text.as_bytes(), Some("cls")).unwrap();
        assert_eq!(ds.dataset.features().as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(ds.feature_names, vec!["u", "v"]);
    }

    #[test]
    fn nan_cell_names_row_and_column() {
        let text = "x1,x2,y\n0,1,a\n2,NaN,b\n";
        let err = ingest_reader(text.as_bytes(), Some("y")).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("x2"), "{err}");
    }

    #[test]
    fn validation_errors() {
        assert!(ingest_reader("x1,y\n0,a\n".as_bytes(), Some("y")).is_err());
        assert!(ingest_reader("x1,y\n0,a\n1,b\n".as_bytes(), Some("z")).is_err());
        let err = ingest_reader("x1,y\n0,a\nfoo,b\n".as_bytes(), None).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("'foo'"), "{err}");
    }

    #[test]
    fn single_label_alphabet() {
        let ds = ingest_reader("x1,y\n0,a\n1,a\n2,a\n".as_bytes(), Some("y")).unwrap();
        assert_eq!(ds.dataset.num_labels(), 1);
    }

    #[test]
    fn write_then_read() {
        let ds = ingest_reader("x1,x2,y\n0.1,-3,b\n1e-7,2.5,a\n".as_bytes(), None).unwrap();
        let again = ingest_reader(write_csv(&ds.dataset).as_bytes(), None).unwrap();
        assert_eq!(again.dataset, ds.dataset);
    }
}
