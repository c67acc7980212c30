//! Numeric CSV matrices: comma-separated floats, one row per line, optional
//! header row (detected by failing to parse as numbers), rectangular.

use ndarray::Array2;

use crate::error::{Error, Result};

pub fn parse_csv_matrix(text: &str) -> Result<Array2<f64>> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !l.trim().is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::Parse("no rows".into()));
    }

    let mut start = 0;
    if parse_row(lines[0]).is_none() {
        // First line is a header.
        start = 1;
        if lines.len() == 1 {
            return Err(Error::Parse("header row without data".into()));
        }
    }

    let mut values = Vec::new();
    let mut cols = 0usize;
    for (offset, line) in lines[start..].iter().enumerate() {
        let row = parse_row(line).ok_or_else(|| {
            Error::Parse(format!(
                "line {}: non-numeric field",
                start + offset + 1
            ))
        })?;
        if cols == 0 {
            cols = row.len();
        } else if row.len() != cols {
            return Err(Error::Parse(format!(
                "line {}: expected {cols} fields, got {}",
                start + offset + 1,
                row.len()
            )));
        }
        values.extend(row);
    }
    if cols == 0 {
        return Err(Error::Parse("rows have no fields".into()));
    }
    let rows = values.len() / cols;
    Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_row(line: &str) -> Option<Vec<f64>> {
    let mut out = Vec::new();
    for field in line.split(',') {
        out.push(field.trim().parse::<f64>().ok()?);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn parses_plain_matrix() {
        let m = parse_csv_matrix("1,2,3\n4,5,6\n").unwrap();
        assert_eq!(m, array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
    }

    #[test]
    fn skips_header() {
        let m = parse_csv_matrix("x,y\n1.5,-2\n0,3e2\n").unwrap();
        assert_eq!(m, array![[1.5, -2.0], [0.0, 300.0]]);
    }

    #[test]
    fn handles_crlf_and_whitespace() {
        let m = parse_csv_matrix("1 , 2\r\n3,4\r\n").unwrap();
        assert_eq!(m, array![[1.0, 2.0], [3.0, 4.0]]);
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(matches!(
            parse_csv_matrix("1,2\n3\n"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn rejects_bad_fields_past_header() {
        assert!(parse_csv_matrix("1,2\n3,oops\n").is_err());
    }

    #[test]
    fn rejects_empty_and_header_only() {
        assert!(parse_csv_matrix("").is_err());
        assert!(parse_csv_matrix("a,b\n").is_err());
    }
}
