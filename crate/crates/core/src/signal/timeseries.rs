//! Uniformly sampled series plus CSV and binary round-trip formats.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::halo::AxionParams;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"AXTS";
const BINARY_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Real(v) => v.len(),
            Samples::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Samples::Complex(_))
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Samples::Real(v) => Some(v),
            Samples::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&[Complex64]> {
        match self {
            Samples::Complex(v) => Some(v),
            Samples::Real(_) => None,
        }
    }

    /// Complex view; real samples get a zero imaginary part.
    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Samples::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Samples::Complex(v) => v.clone(),
        }
    }
}

/// Provenance attached to a series. Everything is optional so that foreign
/// data can be loaded with an empty header.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesMeta {
    #[serde(default)]
    pub units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axion: Option<AxionParams>,
    /// Physical size of one baseband unit (the reference FM index β0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub samples: Samples,
    pub meta: SeriesMeta,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BinaryHeader {
    t0: f64,
    dt: f64,
    len: u64,
    complex: bool,
    meta: SeriesMeta,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, samples: Samples, meta: SeriesMeta) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", "sample interval must be positive"));
        }
        if !t0.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        if samples.len() < 2 {
            return Err(Error::invalid("samples", "a series needs at least two samples"));
        }
        Ok(Self { t0, dt, samples, meta })
    }

    pub fn real(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(t0, dt, Samples::Real(values), SeriesMeta::default())
    }

    pub fn complex(t0: f64, dt: f64, values: Vec<Complex64>) -> Result<Self> {
        Self::new(t0, dt, Samples::Complex(values), SeriesMeta::default())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_csv_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// `t,value` or `t,re,im`. Floats use the shortest round-trip form.
    pub fn write_csv_to(&self, w: &mut impl Write) -> Result<()> {
        match &self.samples {
            Samples::Real(v) => {
                writeln!(w, "t,value")?;
                for (k, x) in v.iter().enumerate() {
                    writeln!(w, "{:e},{:e}", self.time(k), x)?;
                }
            }
            Samples::Complex(v) => {
                writeln!(w, "t,re,im")?;
                for (k, z) in v.iter().enumerate() {
                    writeln!(w, "{:e},{:e},{:e}", self.time(k), z.re, z.im)?;
                }
            }
        }
        Ok(())
    }

    /// Reads a CSV written by [`write_csv`](Self::write_csv) or any file with
    /// the same columns. The time column must be uniformly spaced.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let reader = BufReader::new(fs::File::open(path)?);
        Self::read_csv_from(reader)
    }

    pub fn read_csv_from(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines();
        let header = loop {
            match lines.next() {
                Some(l) => {
                    let l = l?;
                    if !l.trim().is_empty() {
                        break l;
                    }
                }
                None => return Err(Error::Format("empty CSV".into())),
            }
        };
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let complex = match cols.as_slice() {
            ["t", _] => false,
            ["t", _, _] => true,
            _ => {
                return Err(Error::Format(format!(
                    "expected header `t,value` or `t,re,im`, found `{header}`"
                )))
            }
        };
        let mut t = Vec::new();
        let mut re = Vec::new();
        let mut im = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols.len() {
                return Err(Error::Format(format!("line {}: wrong number of columns", i + 2)));
            }
            t.push(parse(f[0])?);
            re.push(parse(f[1])?);
            if complex {
                im.push(parse(f[2])?);
            }
        }
        if t.len() < 2 {
            return Err(Error::Format("need at least two rows".into()));
        }
        let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::NonMonotoneTime);
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneTime);
        }
        for (k, w) in t.windows(2).enumerate() {
            let expected = t[0] + (k + 1) as f64 * dt;
            if (w[1] - expected).abs() > 1e-6 * dt + 1e-9 * expected.abs() {
                return Err(Error::Format(format!("time column is not uniformly spaced at row {}", k + 2)));
            }
        }
        let samples = if complex {
            Samples::Complex(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
        } else {
            Samples::Real(re)
        };
        Self::new(t[0], dt, samples, SeriesMeta::default())
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_binary_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// `AXTS`, u32 version, u32 header length, JSON header, then
    /// little-endian f64 samples (re/im interleaved for complex data).
    pub fn write_binary_to(&self, w: &mut impl Write) -> Result<()> {
        let header = BinaryHeader {
            t0: self.t0,
            dt: self.dt,
            len: self.len() as u64,
            complex: self.samples.is_complex(),
            meta: self.meta.clone(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(MAGIC)?;
        w.write_all(&BINARY_VERSION.to_le_bytes())?;
        w.write_all(&(json.len() as u32).to_le_bytes())?;
        w.write_all(&json)?;
        match &self.samples {
            Samples::Real(v) => {
                for x in v {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
            Samples::Complex(v) => {
                for z in v {
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(fs::File::open(path)?);
        Self::read_binary_from(&mut r)
    }

    pub fn read_binary_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an AXTS binary series".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != BINARY_VERSION {
            return Err(Error::Format(format!("unsupported binary version {version}")));
        }
        r.read_exact(&mut word)?;
        let mut json = vec![0u8; u32::from_le_bytes(word) as usize];
        r.read_exact(&mut json)?;
        let header: BinaryHeader =
            serde_json::from_slice(&json).map_err(|e| Error::Format(format!("binary header: {e}")))?;
        let n = header.len as usize;
        let per = if header.complex { 2 } else { 1 };
        let mut raw = vec![0u8; n * per * 8];
        r.read_exact(&mut raw)?;
        let vals: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        let samples = if header.complex {
            Samples::Complex(vals.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
        } else {
            Samples::Real(vals)
        };
        Self::new(header.t0, header.dt, samples, header.meta)
    }
}

/// FNV-1a digest of a serialisable value, hex encoded. Stable across runs and
/// platforms because it hashes the canonical JSON text.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).unwrap_or_default();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}
