//! Plain-text input readers: float-per-line vectors and dense correlation
//! matrices with an `n` header line.

use std::path::Path;

use mtsim::gaussian::CorrelationMatrix;

use crate::error::{CliError, CliResult};

fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_float(token: &str, path: &Path, line: usize) -> CliResult<f64> {
    token.parse::<f64>().map_err(|_| {
        CliError::usage(format!(
            "{} line {line}: `{token}` is not a number",
            path.display()
        ))
    })
}

/// Reads a vector file: one float per line, blank lines and `#` comment
/// lines skipped.
pub fn read_floats(path: &Path) -> CliResult<Vec<f64>> {
    let text = read_to_string(path)?;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        values.push(parse_float(line, path, idx + 1)?);
    }
    if values.is_empty() {
        return Err(CliError::usage(format!(
            "{} contains no values",
            path.display()
        )));
    }
    Ok(values)
}

/// Reads a correlation matrix: first non-comment line is `n`, followed by
/// `n` rows of `n` whitespace-separated entries.
pub fn read_matrix(path: &Path) -> CliResult<CorrelationMatrix> {
    let text = read_to_string(path)?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::usage(format!("{} is empty", path.display())))?;
    let n: usize = header.parse().map_err(|_| {
        CliError::usage(format!(
            "{}: first line must be the dimension n, got `{header}`",
            path.display()
        ))
    })?;

    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n {
        let (line_no, row) = lines.next().ok_or_else(|| {
            CliError::usage(format!(
                "{}: expected {n} matrix rows after the header",
                path.display()
            ))
        })?;
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != n {
            return Err(CliError::usage(format!(
                "{} line {line_no}: expected {n} entries, got {}",
                path.display(),
                entries.len()
            )));
        }
        for token in entries {
            data.push(parse_float(token, path, line_no)?);
        }
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(CliError::usage(format!(
            "{} line {line_no}: trailing content after the {n}×{n} matrix",
            path.display()
        )));
    }
    Ok(CorrelationMatrix::new(n, data)?)
}
