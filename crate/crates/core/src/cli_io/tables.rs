//! CSV ingestion and atomic file output.
//!
//! Floats are serialized with 17 significant digits so that write-then-read
//! round-trips reproduce the exact f64 values.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::synth_control::Panel;

/// A rectangular numeric table with named columns.
#[derive(Debug, Clone)]
pub struct TabularData {
    pub headers: Vec<String>,
    /// Row-major cells, one inner vector per observation.
    pub rows: Vec<Vec<f64>>,
}

impl TabularData {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Data(format!(
                "column {name:?} not found; file has: {}",
                self.headers.join(", ")
            ))
        })
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[index]).collect()
    }

    /// Extracts named columns as a matrix, in the order given.
    pub fn select(&self, names: &[&str]) -> Result<DMatrix<f64>> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n))
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(self.rows.len(), idx.len(), |r, c| {
            self.rows[r][idx[c]]
        }))
    }
}

fn read_records(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() {
        return Err(Error::Data(format!("{}: empty header row", path.display())));
    }
    let mut records = Vec::new();
    for record in reader.records() {
        records.push(record.map_err(|e| csv_error(path, e))?);
    }
    if records.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    Ok((headers, records))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!("is_io_error guarantees an io kind"),
        }
    } else {
        Error::Data(format!("{}: {e}", path.display()))
    }
}

fn parse_cell(path: &Path, row: usize, col: &str, cell: &str) -> Result<f64> {
    let value: f64 = cell.parse().map_err(|_| {
        Error::Data(format!(
            "{}: row {}, column {col:?}: cannot parse {cell:?} as a number",
            path.display(),
            row + 2
        ))
    })?;
    if !value.is_finite() {
        return Err(Error::Data(format!(
            "{}: row {}, column {col:?}: non-finite value {cell:?}",
            path.display(),
            row + 2
        )));
    }
    Ok(value)
}

/// Reads a fully numeric CSV with a header row.
pub fn read_tabular(path: &Path) -> Result<TabularData> {
    let (headers, records) = read_records(path)?;
    let rows = records
        .iter()
        .enumerate()
        .map(|(r, record)| {
            headers
                .iter()
                .enumerate()
                .map(|(c, name)| {
                    let cell = record.get(c).unwrap_or("");
                    parse_cell(path, r, name, cell)
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(TabularData { headers, rows })
}

/// Reads a wide-format panel: first column holds unit names, remaining
/// columns are periods in time order.
pub fn read_panel_wide(path: &Path, target_unit: &str, pre_periods: usize) -> Result<Panel> {
    let (headers, records) = read_records(path)?;
    if headers.len() < 2 {
        return Err(Error::Data(format!(
            "{}: wide panel needs a unit column plus at least one period",
            path.display()
        )));
    }
    let periods = headers.len() - 1;
    let mut names = Vec::with_capacity(records.len());
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(records.len());
    for (r, record) in records.iter().enumerate() {
        let unit = record.get(0).unwrap_or("").to_string();
        if unit.is_empty() {
            return Err(Error::Data(format!(
                "{}: row {}: empty unit name",
                path.display(),
                r + 2
            )));
        }
        if names.contains(&unit) {
            return Err(Error::Data(format!(
                "{}: unit {unit:?} appears twice",
                path.display()
            )));
        }
        let row = (0..periods)
            .map(|c| {
                let cell = record.get(c + 1).unwrap_or("");
                parse_cell(path, r, &headers[c + 1], cell)
            })
            .collect::<Result<Vec<f64>>>()?;
        names.push(unit);
        values.push(row);
    }
    assemble_panel(path, names, values, target_unit, pre_periods)
}

/// Reads a long-format panel with exactly three columns: unit, period,
/// value. Periods must be numeric and every (unit, period) pair present
/// exactly once; units keep their first-appearance order.
pub fn read_panel_long(path: &Path, target_unit: &str, pre_periods: usize) -> Result<Panel> {
    let (headers, records) = read_records(path)?;
    if headers.len() != 3 {
        return Err(Error::Data(format!(
            "{}: long panel needs exactly unit, period, value columns; got {}",
            path.display(),
            headers.len()
        )));
    }
    let mut period_values: Vec<f64> = Vec::new();
    let mut units: Vec<String> = Vec::new();
    let mut cells: Vec<(usize, f64, f64)> = Vec::new();
    for (r, record) in records.iter().enumerate() {
        let unit = record.get(0).unwrap_or("").to_string();
        if unit.is_empty() {
            return Err(Error::Data(format!(
                "{}: row {}: empty unit name",
                path.display(),
                r + 2
            )));
        }
        let period = parse_cell(path, r, &headers[1], record.get(1).unwrap_or(""))?;
        let value = parse_cell(path, r, &headers[2], record.get(2).unwrap_or(""))?;
        let u = match units.iter().position(|n| n == &unit) {
            Some(u) => u,
            None => {
                units.push(unit);
                units.len() - 1
            }
        };
        if !period_values.contains(&period) {
            period_values.push(period);
        }
        cells.push((u, period, value));
    }
    period_values.sort_by(|a, b| a.partial_cmp(b).expect("finite periods"));
    let periods = period_values.len();
    let mut grid: Vec<Vec<Option<f64>>> = vec![vec![None; periods]; units.len()];
    for (u, period, value) in cells {
        let t = period_values
            .iter()
            .position(|&p| p == period)
            .expect("period was recorded");
        if grid[u][t].is_some() {
            return Err(Error::Data(format!(
                "{}: unit {:?} has two values for period {period}",
                path.display(),
                units[u]
            )));
        }
        grid[u][t] = Some(value);
    }
    let values = grid
        .into_iter()
        .zip(&units)
        .map(|(row, unit)| {
            row.into_iter()
                .enumerate()
                .map(|(t, v)| {
                    v.ok_or_else(|| {
                        Error::Data(format!(
                            "{}: unit {unit:?} is missing period {}",
                            path.display(),
                            period_values[t]
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    assemble_panel(path, units, values, target_unit, pre_periods)
}

fn assemble_panel(
    path: &Path,
    names: Vec<String>,
    values: Vec<Vec<f64>>,
    target_unit: &str,
    pre_periods: usize,
) -> Result<Panel> {
    let periods = values.first().map_or(0, Vec::len);
    if pre_periods == 0 || pre_periods > periods {
        return Err(Error::Config(format!(
            "pre_periods must be in 1..={periods}, got {pre_periods}"
        )));
    }
    let target = names
        .iter()
        .position(|n| n == target_unit)
        .ok_or_else(|| {
            Error::Data(format!(
                "{}: target unit {target_unit:?} not found; units: {}",
                path.display(),
                names.join(", ")
            ))
        })?;
    let mut order = vec![target];
    order.extend((0..names.len()).filter(|&u| u != target));
    let outcomes = DMatrix::from_fn(names.len(), periods, |r, t| values[order[r]][t]);
    let ordered_names: Vec<String> = order.iter().map(|&u| names[u].clone()).collect();
    Panel::new(
        outcomes,
        pre_periods,
        periods - pre_periods,
        Some(ordered_names),
    )
}

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes bytes to a sibling temp file and renames it into place, so readers
/// never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut temp = PathBuf::from(path);
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    temp.set_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&temp, bytes).map_err(|e| Error::io(&temp, e))?;
    fs::rename(&temp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Renders rows to CSV text and writes them atomically.
/// Quotes a field when it contains a delimiter, quote, or line break, so
/// free-text cells (provenance details, user column names) stay one field.
fn csv_field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

fn csv_line(fields: impl Iterator<Item = String>, text: &mut String) {
    let mut first = true;
    for field in fields {
        if !first {
            text.push(',');
        }
        first = false;
        text.push_str(&field);
    }
    text.push('\n');
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::new();
    csv_line(header.iter().map(|h| csv_field(h)), &mut text);
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        csv_line(row.iter().map(|f| csv_field(f)), &mut text);
    }
    atomic_write(path, text.as_bytes())
}
