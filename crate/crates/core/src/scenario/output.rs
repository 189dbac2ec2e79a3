//! CSV tables and density snapshots.

use std::fs;
use std::path::Path;

use super::ScenarioError;
use crate::phase_space::{GridDensity, GridSpec};

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(headers: &[S]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<(), ScenarioError> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&x| format_float(x)).collect::<Vec<_>>());
        write_records(path, &self.headers, rows)
    }

    pub fn read(path: &Path) -> Result<Self, ScenarioError> {
        let bad = |reason: String| ScenarioError::Format {
            path: path.to_path_buf(),
            reason,
        };
        let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => ScenarioError::io(path, io),
            other => bad(format!("{other:?}")),
        })?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| bad(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut table = Table {
            headers,
            rows: Vec::new(),
        };
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let row = record
                .iter()
                .map(|cell| {
                    cell.parse::<f64>()
                        .map_err(|_| bad(format!("row {}: `{cell}` is not a number", line + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }
}

/// Writes string records under a header row.
pub(crate) fn write_records<H, I, R, S>(path: &Path, headers: &[H], rows: I) -> Result<(), ScenarioError>
where
    H: AsRef<str>,
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => ScenarioError::io(path, io),
        other => ScenarioError::Format {
            path: path.to_path_buf(),
            reason: format!("{other:?}"),
        },
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(headers.iter().map(|h| h.as_ref())).map_err(to_err)?;
    for row in rows {
        w.write_record(row).map_err(to_err)?;
    }
    w.flush().map_err(|e| ScenarioError::io(path, e))
}

/// Writes a density snapshot: four header lines followed by one row of
/// `np` values per `q` node.
///
/// ```text
/// # density t=0.5
/// q_range,-12.0,12.0
/// p_range,-12.0,12.0
/// resolution,512,512
/// ```
pub fn write_snapshot(path: &Path, t: f64, density: &GridDensity) -> Result<(), ScenarioError> {
    let g = density.spec();
    let mut text = String::with_capacity(g.len() * 24 + 128);
    text.push_str(&format!("# density t={}\n", format_float(t)));
    text.push_str(&format!("q_range,{},{}\n", format_float(g.q_min), format_float(g.q_max)));
    text.push_str(&format!("p_range,{},{}\n", format_float(g.p_min), format_float(g.p_max)));
    text.push_str(&format!("resolution,{},{}\n", g.nq, g.np));
    for row in density.values().chunks(g.np) {
        let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| ScenarioError::io(path, e))
}

/// Reads a snapshot written by [`write_snapshot`], returning its time and
/// density.
pub fn read_snapshot(path: &Path) -> Result<(f64, GridDensity), ScenarioError> {
    let text = fs::read_to_string(path).map_err(|e| ScenarioError::io(path, e))?;
    let bad = |reason: &str| ScenarioError::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut lines = text.lines();
    let t = lines
        .next()
        .and_then(|l| l.strip_prefix("# density t="))
        .and_then(|s| s.parse::<f64>().ok())
        .ok_or_else(|| bad("missing `# density t=` line"))?;
    let mut pair = |key: &str| -> Result<(String, String), ScenarioError> {
        let line = lines.next().ok_or_else(|| bad("truncated header"))?;
        let mut parts = line.split(',');
        if parts.next() != Some(key) {
            return Err(bad(&format!("expected `{key}` line")));
        }
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => Ok((a.to_string(), b.to_string())),
            _ => Err(bad(&format!("`{key}` needs two values"))),
        }
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number in header"));
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad("bad resolution"));
    let (q0, q1) = pair("q_range")?;
    let (p0, p1) = pair("p_range")?;
    let (nq, np) = pair("resolution")?;
    let spec = GridSpec::new((num(&q0)?, num(&q1)?), (num(&p0)?, num(&p1)?), int(&nq)?, int(&np)?)?;
    let mut values = Vec::with_capacity(spec.len());
    for line in lines {
        for cell in line.split(',') {
            values.push(cell.parse::<f64>().map_err(|_| bad("bad density value"))?);
        }
    }
    if values.len() != spec.len() {
        return Err(bad("value count does not match resolution"));
    }
    Ok((t, GridDensity::new(spec, values)?))
}
