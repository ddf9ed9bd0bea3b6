//! Sample import/export.
//!
//! Binary layout: one JSON header line `{"d":..,"L_over_pi":..,"N":..,"dtype":"c128"}`
//! terminated by `\n`, then `N^d` pairs of little-endian `f64` (re, im) in
//! the grid's row-major order. Spectra use the same layout in FFT slot order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SampledFunction, Spectrum, TorusGrid};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    d: usize,
    #[serde(rename = "L_over_pi")]
    l_over_pi: u32,
    #[serde(rename = "N")]
    n: usize,
    dtype: String,
}

pub fn write_samples<W: Write>(mut w: W, grid: &TorusGrid, data: &[Complex64]) -> Result<()> {
    if data.len() != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got: data.len(),
        });
    }
    let header = Header {
        d: grid.dim(),
        l_over_pi: grid.periods(),
        n: grid.samples(),
        dtype: "c128".into(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut bytes = Vec::with_capacity(16 * data.len());
    for v in data {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(r: R) -> Result<(TorusGrid, Vec<Complex64>)> {
    let mut reader = BufReader::new(r);
    let mut line = Vec::new();
    reader.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("missing header line".into()));
    }
    let header: Header = serde_json::from_slice(&line[..line.len() - 1])?;
    if header.dtype != "c128" {
        return Err(Error::Format(format!("unsupported dtype {}", header.dtype)));
    }
    let grid = TorusGrid::new(header.d, header.l_over_pi, header.n)?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * grid.len() {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {}",
            bytes.len(),
            16 * grid.len()
        )));
    }
    let data = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok((grid, data))
}

pub fn save_function(path: &Path, f: &SampledFunction) -> Result<()> {
    write_samples(BufWriter::new(File::create(path)?), f.grid(), f.values())
}

pub fn load_function(path: &Path) -> Result<SampledFunction> {
    let (grid, data) = read_samples(File::open(path)?)?;
    SampledFunction::new(grid, data)
}

pub fn save_spectrum(path: &Path, s: &Spectrum) -> Result<()> {
    write_samples(BufWriter::new(File::create(path)?), s.grid(), s.coefficients())
}

pub fn load_spectrum(path: &Path) -> Result<Spectrum> {
    let (grid, data) = read_samples(File::open(path)?)?;
    Spectrum::new(grid, data)
}

/// Reads a one-dimensional `index,re,im` CSV (an `index,re,im` header row is
/// optional). The sample count must be even; `periods` fixes `L = πP`.
pub fn read_csv_1d<R: Read>(r: R, periods: u32) -> Result<SampledFunction> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut rows: Vec<(usize, Complex64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if line == 0 && record.get(0) == Some("index") {
            continue;
        }
        if record.len() != 3 {
            return Err(Error::Format(format!(
                "row {line}: expected 3 columns, found {}",
                record.len()
            )));
        }
        let parse = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("row {line}: {e}")))
        };
        let index = record[0]
            .parse::<usize>()
            .map_err(|e| Error::Format(format!("row {line}: {e}")))?;
        rows.push((index, Complex64::new(parse(1)?, parse(2)?)));
    }
    let grid = TorusGrid::new(1, periods, rows.len())?;
    let mut values = vec![Complex64::new(0.0, 0.0); rows.len()];
    let mut seen = vec![false; rows.len()];
    for (index, v) in rows {
        if index >= values.len() || seen[index] {
            return Err(Error::Format(format!("index {index} missing or repeated")));
        }
        seen[index] = true;
        values[index] = v;
    }
    SampledFunction::new(grid, values)
}

pub fn write_csv_1d<W: Write>(w: W, f: &SampledFunction) -> Result<()> {
    if f.grid().dim() != 1 {
        return Err(Error::Format("CSV export is one-dimensional only".into()));
    }
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(["index", "re", "im"])?;
    for (i, v) in f.values().iter().enumerate() {
        writer.write_record([i.to_string(), v.re.to_string(), v.im.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}
