//! Bit-exact CSV output: full-precision scientific notation, fixed column
//! order, header row, LF line endings, atomic write-temp-then-rename.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, EXIT_CONFIG};

/// 17 fractional digits round-trip any f64 exactly.
pub fn num(v: f64) -> String {
    format!("{v:.17e}")
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path
        .parent()
        .ok_or_else(|| CliError::new(EXIT_CONFIG, "output path has no parent directory"))?;
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("output")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_atomic(path, &out)
}

/// Like [`write_csv`] but with string cells (used for the sweep summary
/// whose slope column may be empty).
pub fn write_csv_cells(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, &out)
}

pub fn read_csv(path: &Path) -> Result<CsvTable, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::new(EXIT_CONFIG, format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|cell| {
                if cell.is_empty() {
                    Ok(f64::NAN)
                } else {
                    cell.parse::<f64>().map_err(|e| {
                        CliError::new(
                            EXIT_CONFIG,
                            format!(
                                "{} line {}: bad number `{cell}`: {e}",
                                path.display(),
                                idx + 2
                            ),
                        )
                    })
                }
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}
