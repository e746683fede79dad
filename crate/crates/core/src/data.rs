//! Input parsing: one numeric CSV column, price-to-return transforms, sweep
//! grid specifications and raw little-endian `f64` buffers.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::Sample;

/// Upper bound on the number of points a grid specification may expand to.
pub const MAX_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnSelector {
    Name(String),
    /// Zero-based.
    Index(usize),
}

impl FromStr for ColumnSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty column selector".into()));
        }
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.to_string()),
        })
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Name(n) => f.write_str(n),
            ColumnSelector::Index(i) => write!(f, "{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnData {
    pub values: Vec<f64>,
    /// Data rows whose selected cell was missing or not a finite number.
    pub skipped: usize,
    pub has_header: bool,
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads one column of a comma-separated file with an optional header row.
///
/// A header is recognised when the column is selected by name, or when the
/// first row's selected cell is not numeric.
pub fn read_column<R: Read>(reader: R, column: &ColumnSelector) -> Result<ColumnData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let first = match records.next() {
        None => return Err(Error::Parse("input has no rows".into())),
        Some(r) => r.map_err(|e| Error::Parse(e.to_string()))?,
    };
    let (index, has_header) = match column {
        ColumnSelector::Name(name) => {
            let i = first
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse(format!("no column named '{name}' in header")))?;
            (i, true)
        }
        ColumnSelector::Index(i) => {
            let header = first.get(*i).map_or(false, |c| parse_cell(c).is_none() && !c.is_empty());
            (*i, header)
        }
    };
    let mut values = Vec::new();
    let mut skipped = 0;
    let mut take = |rec: &csv::StringRecord| match rec.get(index).and_then(parse_cell) {
        Some(v) => values.push(v),
        None => skipped += 1,
    };
    if !has_header {
        take(&first);
    }
    for rec in records {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        take(&rec);
    }
    if values.is_empty() {
        return Err(Error::Parse(format!("column {column} holds no numeric values")));
    }
    Ok(ColumnData { values, skipped, has_header })
}

pub fn parse_column_str(text: &str, column: &ColumnSelector) -> Result<ColumnData> {
    read_column(text.as_bytes(), column)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReturnMode {
    #[default]
    Raw,
    /// `ln(p_t / p_{t−1})`
    LogReturn,
    /// `p_t / p_{t−1} − 1`
    SimpleReturn,
}

impl FromStr for ReturnMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "raw" => Ok(ReturnMode::Raw),
            "log" | "log_return" => Ok(ReturnMode::LogReturn),
            "simple" | "simple_return" => Ok(ReturnMode::SimpleReturn),
            other => Err(Error::Parse(format!("unknown return mode '{other}'"))),
        }
    }
}

impl fmt::Display for ReturnMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReturnMode::Raw => "raw",
            ReturnMode::LogReturn => "log_return",
            ReturnMode::SimpleReturn => "simple_return",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnSpec {
    pub mode: ReturnMode,
    /// Multiplier applied after the transform; fitted γ and δ are divided by
    /// it afterwards.
    pub prescale: f64,
}

impl Default for ReturnSpec {
    fn default() -> Self {
        ReturnSpec { mode: ReturnMode::Raw, prescale: 1.0 }
    }
}

impl ReturnSpec {
    pub fn new(mode: ReturnMode, prescale: f64) -> Result<Self> {
        if !(prescale > 0.0 && prescale.is_finite()) {
            return Err(Error::InvalidParams(format!("prescale must be positive, got {prescale}")));
        }
        Ok(ReturnSpec { mode, prescale })
    }

    pub fn apply(&self, series: &[f64]) -> Result<Vec<f64>> {
        let out: Vec<f64> = match self.mode {
            ReturnMode::Raw => series.to_vec(),
            ReturnMode::LogReturn | ReturnMode::SimpleReturn => {
                if let Some(i) = series.iter().position(|p| !(*p > 0.0)) {
                    return Err(Error::InvalidSample(format!(
                        "returns need positive prices; row {i} holds {}",
                        series[i]
                    )));
                }
                series
                    .windows(2)
                    .map(|w| match self.mode {
                        ReturnMode::LogReturn => (w[1] / w[0]).ln(),
                        _ => w[1] / w[0] - 1.0,
                    })
                    .collect()
            }
        };
        Ok(out.into_iter().map(|v| v * self.prescale).collect())
    }
}

fn parse_number(s: &str) -> Result<f64> {
    let v = s
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("'{}' is not a number", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("'{}' is not finite", s.trim())));
    }
    Ok(v)
}

/// Parses `lo:hi:step` (inclusive, either direction) or a comma-separated
/// list of values.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Parse("empty grid".into()));
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid '{spec}' must have the form lo:hi:step")));
        }
        let (lo, hi, step) = (parse_number(parts[0])?, parse_number(parts[1])?, parse_number(parts[2])?);
        if !(step > 0.0) {
            return Err(Error::Parse(format!("grid step must be positive, got {step}")));
        }
        let count = ((hi - lo).abs() / step + 1e-9).floor();
        if !(count.is_finite() && count < MAX_GRID_POINTS as f64) {
            return Err(Error::Parse(format!("grid '{spec}' expands beyond {MAX_GRID_POINTS} points")));
        }
        let dir = if hi >= lo { 1.0 } else { -1.0 };
        Ok((0..=count as usize)
            .map(|i| {
                let v = lo + dir * i as f64 * step;
                // snaps 0.30000000000000004 to 0.3; huge nodes are left alone
                let r = (v * 1e12).round() / 1e12;
                if r.is_finite() { r } else { v }
            })
            .collect())
    } else {
        let v: Vec<f64> = spec.split(',').map(parse_number).collect::<Result<_>>()?;
        if v.len() > MAX_GRID_POINTS {
            return Err(Error::Parse(format!("grid lists more than {MAX_GRID_POINTS} points")));
        }
        Ok(v)
    }
}

/// Parses a comma-separated list of positive integers, e.g. sample sizes.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    let v: Vec<usize> = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("'{}' is not a positive integer", s.trim())))
        })
        .collect::<Result<_>>()?;
    if v.is_empty() || v.contains(&0) {
        return Err(Error::Parse("sizes must be positive".into()));
    }
    Ok(v)
}

/// Interprets a byte buffer as consecutive little-endian `f64` values.
pub fn decode_f64_le(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse(format!("{} bytes is not a whole number of f64 values", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// [`decode_f64_le`] followed by sample validation.
pub fn decode_sample(bytes: &[u8]) -> Result<Sample> {
    Sample::new(decode_f64_le(bytes)?)
}

pub fn encode_f64_le(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_by_name_and_index() {
        let text = "date,price\n2020-01-01,1.5\n2020-01-02,n/a\n2020-01-03,2.5\n";
        let by_name = parse_column_str(text, &"price".parse().unwrap()).unwrap();
        assert_eq!(by_name.values, vec![1.5, 2.5]);
        assert_eq!(by_name.skipped, 1);
        let by_index = parse_column_str(text, &ColumnSelector::Index(1)).unwrap();
        assert_eq!(by_index, by_name);
        assert!(parse_column_str(text, &ColumnSelector::Name("volume".into())).is_err());
    }

    #[test]
    fn headerless_input() {
        let d = parse_column_str("1\n2\n3\n", &ColumnSelector::Index(0)).unwrap();
        assert_eq!(d.values, vec![1.0, 2.0, 3.0]);
        assert!(!d.has_header);
        assert!(parse_column_str("a\nb\n", &ColumnSelector::Index(0)).is_err());
        assert!(parse_column_str("", &ColumnSelector::Index(0)).is_err());
    }

    #[test]
    fn returns() {
        let p = [100.0, 110.0, 99.0];
        let log = ReturnSpec::new(ReturnMode::LogReturn, 1.0).unwrap().apply(&p).unwrap();
        assert!((log[0] - 1.1f64.ln()).abs() < 1e-15);
        let simple = ReturnSpec::new(ReturnMode::SimpleReturn, 100.0).unwrap().apply(&p).unwrap();
        assert!((simple[0] - 10.0).abs() < 1e-12 && (simple[1] + 10.0).abs() < 1e-12);
        assert!(ReturnSpec::new(ReturnMode::LogReturn, 1.0).unwrap().apply(&[1.0, 0.0]).is_err());
        assert!(ReturnSpec::new(ReturnMode::Raw, 0.0).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-0.9:0.9:0.2").unwrap().len(), 10);
        assert_eq!(parse_grid("0.3:1.8:0.1").unwrap().last().copied(), Some(1.8));
        assert_eq!(parse_grid("1,2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(parse_grid("1:0:0.5").unwrap(), vec![1.0, 0.5, 0.0]);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1e9:1e-9").is_err());
        assert!(parse_grid("a:b").is_err());
        assert_eq!(parse_sizes("300,1000").unwrap(), vec![300, 1000]);
        assert!(parse_sizes("0").is_err());
    }

    #[test]
    fn binary_round_trip() {
        let v = vec![1.0, -2.5, 1e300];
        assert_eq!(decode_f64_le(&encode_f64_le(&v)).unwrap(), v);
        assert!(decode_f64_le(&[0u8; 7]).is_err());
        assert!(decode_sample(&encode_f64_le(&[1.0, f64::NAN])).is_err());
    }
}
