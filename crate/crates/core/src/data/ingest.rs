//! CSV parsing against a schema.

use std::path::Path;

use super::schema::{ColumnKind, FeatureSchema};
use super::DataError;

/// One parsed row: numeric and categorical values in schema order, the
/// binary label, and the attack category (None for normal rows).
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRecord {
    pub numeric: Vec<f64>,
    pub categorical: Vec<String>,
    pub label: bool,
    pub category: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub rows_read: usize,
    /// Rows dropped for malformed, missing, or non-finite values.
    pub rows_dropped: usize,
}

/// Parse a CSV file. Malformed rows (wrong field count, unparseable or
/// non-finite numerics, empty required fields) are dropped and counted;
/// infinities count as missing values.
pub fn parse_csv(
    path: &Path,
    schema: &FeatureSchema,
) -> Result<(Vec<ParsedRecord>, IngestStats), DataError> {
    schema.validate()?;
    let file = std::fs::File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::MissingFile(path.to_path_buf())
        } else {
            DataError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(true)
        .from_reader(file);

    if schema.has_header {
        let headers = reader.headers().map_err(|e| DataError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        for (position, column) in schema.columns.iter().enumerate() {
            let actual = headers.get(position).unwrap_or("").trim();
            if !actual.eq_ignore_ascii_case(column.name.trim()) {
                return Err(DataError::HeaderMismatch {
                    path: path.to_path_buf(),
                    position,
                    expected: column.name.clone(),
                    actual: actual.to_string(),
                });
            }
        }
    }

    let mut stats = IngestStats::default();
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| DataError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        stats.rows_read += 1;
        match parse_row(&row, schema) {
            Some(record) => records.push(record),
            None => stats.rows_dropped += 1,
        }
    }
    Ok((records, stats))
}

fn parse_row(row: &csv::StringRecord, schema: &FeatureSchema) -> Option<ParsedRecord> {
    if row.len() != schema.columns.len() {
        return None;
    }
    let mut numeric = Vec::new();
    let mut categorical = Vec::new();
    let mut label_raw = String::new();
    let mut category_raw: Option<String> = None;
    for (value, column) in row.iter().zip(&schema.columns) {
        let value = value.trim();
        match column.kind {
            ColumnKind::Numeric => {
                let parsed: f64 = value.parse().ok()?;
                if !parsed.is_finite() {
                    return None;
                }
                numeric.push(parsed);
            }
            ColumnKind::Categorical => {
                if value.is_empty() {
                    return None;
                }
                categorical.push(value.to_string());
            }
            ColumnKind::Label => {
                if value.is_empty() {
                    return None;
                }
                label_raw = value.to_string();
            }
            ColumnKind::AttackCategory => category_raw = Some(value.to_string()),
            ColumnKind::Drop => {}
        }
    }
    let label = !label_raw.eq_ignore_ascii_case(&schema.normal_label);
    let category = if !label {
        None
    } else {
        match category_raw {
            // The label value doubles as the category when no dedicated
            // column exists (or it is empty).
            Some(c) if !c.is_empty() => Some(c),
            _ => Some(label_raw),
        }
    };
    Some(ParsedRecord {
        numeric,
        categorical,
        label,
        category,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::Column;
    use std::io::Write;

    fn schema() -> FeatureSchema {
        FeatureSchema {
            dataset_id: "tiny".into(),
            has_header: true,
            normal_label: "normal".into(),
            columns: vec![
                Column {
                    name: "proto".into(),
                    kind: ColumnKind::Categorical,
                },
                Column {
                    name: "bytes".into(),
                    kind: ColumnKind::Numeric,
                },
                Column {
                    name: "id".into(),
                    kind: ColumnKind::Drop,
                },
                Column {
                    name: "class".into(),
                    kind: ColumnKind::Label,
                },
            ],
        }
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_valid_rows_in_order() {
        let f = write_csv("proto,bytes,id,class\ntcp,10,a,normal\nudp,20,b,dos\nicmp,5,c,probe\n");
        let (records, stats) = parse_csv(f.path(), &schema()).unwrap();
        assert_eq!(stats.rows_read, 3);
        assert_eq!(stats.rows_dropped, 0);
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].categorical, vec!["tcp"]);
        assert_eq!(records[0].numeric, vec![10.0]);
        assert!(!records[0].label);
        assert_eq!(records[0].category, None);
        assert!(records[1].label);
        assert_eq!(records[1].category.as_deref(), Some("dos"));
    }

    #[test]
    fn drops_malformed_rows_with_count() {
        let f = write_csv(
            "proto,bytes,id,class\ntcp,notanumber,a,normal\ntcp,inf,b,dos\ntcp,7,c,normal\ntcp,8,d\n",
        );
        let (records, stats) = parse_csv(f.path(), &schema()).unwrap();
        assert_eq!(stats.rows_read, 4);
        assert_eq!(stats.rows_dropped, 3);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].numeric, vec![7.0]);
    }

    #[test]
    fn empty_data_section_is_fine() {
        let f = write_csv("proto,bytes,id,class\n");
        let (records, stats) = parse_csv(f.path(), &schema()).unwrap();
        assert!(records.is_empty());
        assert_eq!(stats.rows_read, 0);
    }

    #[test]
    fn header_mismatch_is_an_error() {
        let f = write_csv("wrong,bytes,id,class\ntcp,1,a,normal\n");
        assert!(matches!(
            parse_csv(f.path(), &schema()),
            Err(DataError::HeaderMismatch { position: 0, .. })
        ));
    }

    #[test]
    fn missing_file_is_named() {
        let err = parse_csv(Path::new("/nonexistent/file.csv"), &schema());
        assert!(matches!(err, Err(DataError::MissingFile(_))));
    }

    #[test]
    fn headerless_schema_reads_positionally() {
        let mut s = schema();
        s.has_header = false;
        let f = write_csv("tcp,10,a,normal\n");
        let (records, _) = parse_csv(f.path(), &s).unwrap();
        assert_eq!(records.len(), 1);
    }
}
