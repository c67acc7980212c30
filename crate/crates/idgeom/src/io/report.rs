//! The keyed metric report: one row per document or cloud, one column per
//! metric, JSON as the canonical form and flat CSV alongside for plotting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    /// Hash of the run configuration, for provenance.
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub id: String,
    /// Set when the underlying document or cloud has fewer than the length
    /// gate's points; short rows are excluded from correlation defaults.
    pub short: bool,
    pub values: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: ReportMetadata,
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(metadata: ReportMetadata, columns: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &columns {
            if !seen.insert(c) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate column name '{c}'"
                )));
            }
        }
        Ok(Self {
            metadata,
            columns,
            rows: Vec::new(),
        })
    }

    /// Append a row; missing columns become null, non-finite values are
    /// nulled, and unknown columns are rejected.
    pub fn push_row(
        &mut self,
        id: impl Into<String>,
        short: bool,
        values: BTreeMap<String, Option<f64>>,
    ) -> Result<()> {
        for key in values.keys() {
            if !self.columns.iter().any(|c| c == key) {
                return Err(Error::InvalidArgument(format!(
                    "value for unknown column '{key}'"
                )));
            }
        }
        let mut row = BTreeMap::new();
        for c in &self.columns {
            let v = values
                .get(c)
                .copied()
                .flatten()
                .filter(|v| v.is_finite());
            row.insert(c.clone(), v);
        }
        self.rows.push(ReportRow {
            id: id.into(),
            short,
            values: row,
        });
        Ok(())
    }

    /// A metric column in row order, or `None` if the column is unknown.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        if !self.columns.iter().any(|c| c == name) {
            return None;
        }
        Some(
            self.rows
                .iter()
                .map(|r| r.values.get(name).copied().flatten())
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Report =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        report.validate()?;
        Ok(report)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c) {
                return Err(Error::Parse(format!("duplicate column '{c}'")));
            }
        }
        for row in &self.rows {
            if row.values.len() != self.columns.len()
                || !self.columns.iter().all(|c| row.values.contains_key(c))
            {
                return Err(Error::Parse(format!(
                    "row '{}' does not carry exactly the declared columns",
                    row.id
                )));
            }
        }
        Ok(())
    }

    /// Flat CSV: id, short, then one column per metric; nulls are empty
    /// cells. Formatting is deterministic, so identical reports produce
    /// identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,short");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&csv_escape(&row.id));
            out.push(',');
            out.push_str(if row.short { "true" } else { "false" });
            for c in &self.columns {
                out.push(',');
                if let Some(v) = row.values.get(c).copied().flatten() {
                    out.push_str(&format!("{v}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Short hex hash of a serializable configuration, recorded in report
/// metadata so reruns can be matched to their settings.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> ReportMetadata {
        ReportMetadata {
            config_hash: "abc".into(),
            seed: 7,
            version: "0.0.0".into(),
        }
    }

    fn values(pairs: &[(&str, Option<f64>)]) -> BTreeMap<String, Option<f64>> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect()
    }

    #[test]
    fn rows_share_column_set() {
        let mut r = Report::new(meta(), vec!["a".into(), "b".into()]).unwrap();
        r.push_row("x", false, values(&[("a", Some(1.0))])).unwrap();
        assert_eq!(r.rows[0].values["b"], None);
        assert!(r
            .push_row("y", false, values(&[("zzz", Some(1.0))]))
            .is_err());
    }

    #[test]
    fn non_finite_values_are_nulled() {
        let mut r = Report::new(meta(), vec!["a".into()]).unwrap();
        r.push_row("x", false, values(&[("a", Some(f64::NAN))]))
            .unwrap();
        assert_eq!(r.rows[0].values["a"], None);
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new(meta(), vec!["m".into()]).unwrap();
        r.push_row("doc1", true, values(&[("m", Some(0.5))])).unwrap();
        let parsed = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(parsed, r);
    }

    #[test]
    fn from_json_validates() {
        let bad = r#"{"metadata":{"config_hash":"x","seed":1,"version":"0"},
                      "columns":["a"],
                      "rows":[{"id":"r","short":false,"values":{"b":1.0}}]}"#;
        assert!(Report::from_json(bad).is_err());
        assert!(Report::from_json("not json").is_err());
    }

    #[test]
    fn csv_layout() {
        let mut r = Report::new(meta(), vec!["m".into(), "n".into()]).unwrap();
        r.push_row("plain", false, values(&[("m", Some(1.5)), ("n", None)]))
            .unwrap();
        r.push_row("has,comma", true, values(&[("m", Some(2.0)), ("n", Some(3.0))]))
            .unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "id,short,m,n");
        assert_eq!(lines[1], "plain,false,1.5,");
        assert_eq!(lines[2], "\"has,comma\",true,2,3");
    }

    #[test]
    fn duplicate_columns_rejected() {
        assert!(Report::new(meta(), vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn config_hash_is_stable() {
        #[derive(Serialize)]
        struct C {
            x: u32,
        }
        assert_eq!(config_hash(&C { x: 1 }), config_hash(&C { x: 1 }));
        assert_ne!(config_hash(&C { x: 1 }), config_hash(&C { x: 2 }));
        assert_eq!(config_hash(&C { x: 1 }).len(), 16);
    }
}
