//! CSV and JSON reading and writing.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every f64 exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::ObservationSet;
use crate::grid::SamplePath;
use crate::model::ProcessBundle;

/// 17-significant-digit scientific formatting.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads observations from a CSV file with (at least) columns `t` and `c`.
pub fn load_observations(path: &Path, beta: f64) -> Result<ObservationSet> {
    let text = fs::read_to_string(path)?;
    parse_observations(&text, beta)
}

/// Parses observation CSV text; see [`load_observations`].
pub fn parse_observations(text: &str, beta: f64) -> Result<ObservationSet> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing column `{name}` (header must contain t,c)"),
        })
    };
    let (ti, ci) = (column("t")?, column("c")?);
    let mut times = Vec::new();
    let mut concentrations = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = record.get(i).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing `{name}` field"),
            })?;
            raw.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{raw}` is not a number in column `{name}`"),
            })
        };
        times.push(field(ti, "t")?);
        concentrations.push(field(ci, "c")?);
    }
    ObservationSet::new(times, concentrations, beta)
}

/// Observation CSV text with header `t,c`.
pub fn observations_csv(obs: &ObservationSet) -> String {
    let mut s = String::from("t,c\n");
    for (t, c) in obs.times.iter().zip(&obs.concentrations) {
        s.push_str(&fmt17(*t));
        s.push(',');
        s.push_str(&fmt17(*c));
        s.push('\n');
    }
    s
}

pub fn write_observations(path: &Path, obs: &ObservationSet) -> Result<()> {
    write_text(path, &observations_csv(obs))
}

/// Path CSV text with header `t,value`.
pub fn path_csv(path: &SamplePath) -> String {
    let mut s = String::from("t,value\n");
    for (t, v) in path.points() {
        s.push_str(&fmt17(t));
        s.push(',');
        s.push_str(&fmt17(v));
        s.push('\n');
    }
    s
}

/// Bundle CSV text with header `t,bh,bh_theta,x,c`.
pub fn bundle_csv(b: &ProcessBundle) -> String {
    let mut s = String::from("t,bh,bh_theta,x,c\n");
    for i in 0..b.grid.len() {
        let row = [
            b.grid.time(i),
            b.bh.values[i],
            b.bh_theta.values[i],
            b.x.values[i],
            b.c.values[i],
        ];
        let cells: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// CSV text from a header and rows of numbers.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Reads numeric CSV rows (with a header line) into vectors.
pub fn load_points(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|raw| {
                raw.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{raw}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
