//! Plain-text matrices: one row per line, whitespace-separated decimals.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{io_err, CliError, CliResult};

pub fn parse_matrix(text: &str, path: &Path) -> CliResult<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "no data".into(),
        });
    }
    let ncols = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

pub fn read_matrix(path: &Path) -> CliResult<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_matrix(&text, path)
}

/// A vector file may hold one value per line or all values on one line.
pub fn read_vector(path: &Path) -> CliResult<DVector<f64>> {
    let m = read_matrix(path)?;
    Ok(DVector::from_iterator(m.len(), m.transpose().iter().copied()))
}

pub fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{}", cells.join(" "));
    }
    s
}

pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> CliResult<()> {
    std::fs::write(path, format_matrix(m)).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -2.5, 3e-9, 0.1, 0.0, 7.0]);
        let back = parse_matrix(&format_matrix(&m), Path::new("m")).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_rows_rejected() {
        let e = parse_matrix("1 2\n3\n", Path::new("r.txt")).unwrap_err();
        assert!(e.to_string().contains("r.txt:2"));
        assert!(parse_matrix("\n# only comments\n", Path::new("e")).is_err());
    }
}
