//! On-disk formats: spectrum CSV files, generic tables, metadata sidecars and
//! JSON documents. All writers are byte-deterministic.

use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Name of the abscissa column of every spectrum file.
pub const WAVENUMBER_COLUMN: &str = "wavenumber_cm-1";

/// Default number of significant digits for written floats.
pub const DEFAULT_DIGITS: usize = 9;

/// Format `x` with `digits` significant digits, plain decimal where
/// reasonable and scientific otherwise. Trailing zeros are dropped.
pub fn format_float(x: f64, digits: usize) -> String {
    let digits = digits.clamp(1, 17);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        let out = trim_zeros(&fixed);
        if out == "-0" {
            "0".into()
        } else {
            out
        }
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A header row plus float rows with a fixed column count.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<TableCell>>,
}

/// One table value: a number, or free text such as a diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub enum TableCell {
    Number(f64),
    Missing,
    Text(String),
}

impl From<f64> for TableCell {
    fn from(v: f64) -> Self {
        TableCell::Number(v)
    }
}

impl From<Option<f64>> for TableCell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(TableCell::Missing, TableCell::Number)
    }
}

impl From<&str> for TableCell {
    fn from(v: &str) -> Self {
        TableCell::Text(v.to_string())
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<TableCell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Structure(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self, digits: usize) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| match c {
                TableCell::Number(v) => format_float(*v, digits),
                TableCell::Missing => String::new(),
                TableCell::Text(t) => t.clone(),
            }))?;
        }
        w.into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

/// Serialize a spectrum as CSV: `wavenumber_cm-1,<channel>...`, LF endings.
pub fn spectrum_to_csv(spectrum: &Spectrum, digits: usize) -> Result<Vec<u8>> {
    let mut columns = vec![WAVENUMBER_COLUMN.to_string()];
    columns.extend(spectrum.channel_names().map(str::to_string));
    let channels: Vec<&[f64]> = spectrum.channels().map(|(_, v)| v).collect();
    let rows = spectrum
        .grid()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            std::iter::once(x)
                .chain(channels.iter().map(|c| c[i]))
                .map(TableCell::Number)
                .collect()
        })
        .collect();
    Table { columns, rows }.to_csv(digits)
}

/// Parse a spectrum CSV. Errors name the offending line (1-based, header = 1).
pub fn spectrum_from_csv(bytes: &[u8]) -> Result<Spectrum> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.get(0) != Some(WAVENUMBER_COLUMN) {
        return Err(Error::Parse {
            line: 1,
            message: format!("first column must be `{WAVENUMBER_COLUMN}`"),
        });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if names.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data channels".into(),
        });
    }
    let mut grid = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let values = record
            .iter()
            .map(|field| {
                field.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{field}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        let x = values[0];
        if let Some(&prev) = grid.last() {
            if !(x > prev) {
                return Err(Error::Parse {
                    line,
                    message: format!("wavenumber {x} does not increase (previous {prev})"),
                });
            }
        }
        grid.push(x);
        for (c, v) in columns.iter_mut().zip(&values[1..]) {
            c.push(*v);
        }
    }
    let mut spectrum = Spectrum::new(grid)?;
    for (name, values) in names.into_iter().zip(columns) {
        spectrum.push_channel(name, values)?;
    }
    Ok(spectrum)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Structure(format!(
            "line {line}: {len} fields where the header has {expected_len}"
        )),
        _ => Error::Parse {
            line,
            message: e.to_string(),
        },
    }
}

/// Read the named numeric columns of a headed CSV table (other columns are
/// ignored). Errors name the offending line.
pub fn columns_from_csv(bytes: &[u8], wanted: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(bytes);
    let header = reader.headers().map_err(csv_error)?.clone();
    let idx = wanted
        .iter()
        .map(|w| {
            header.iter().position(|h| h == *w).ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column `{w}`"),
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    let mut out = vec![Vec::new(); wanted.len()];
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        for (col, &i) in out.iter_mut().zip(&idx) {
            let field = &record[i];
            col.push(field.trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{field}` in column `{}` is not a number", &header[i]),
            })?);
        }
    }
    Ok(out)
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    spectrum_from_csv(&fs::read(path)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Sidecar path for a data file: `name.csv` -> `name.csv.meta.json`.
pub fn sidecar_path(data: &Path) -> PathBuf {
    let mut name = data.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    data.with_file_name(name)
}

/// Writes artifacts into one directory and remembers them so a failed run
/// can remove what it already produced.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ArtifactWriter {
            dir,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write `bytes` to `name` inside the output directory.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        // Record before writing so a partially written file is also removed.
        self.written.push(path.clone());
        fs::write(&path, bytes)?;
        Ok(path)
    }

    /// Write a data file plus its metadata sidecar.
    pub fn write_with_sidecar<M: Serialize>(
        &mut self,
        name: &str,
        bytes: &[u8],
        meta: &M,
    ) -> Result<PathBuf> {
        let path = self.write(name, bytes)?;
        let side = sidecar_path(Path::new(name));
        self.write(&side.to_string_lossy(), &to_json(meta)?)?;
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Delete everything written so far (best effort).
    pub fn discard(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}
