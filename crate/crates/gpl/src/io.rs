//! CSV and JSON serialization with deterministic formatting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{build_sampling_set, SamplingSet, SequenceDescriptor};
use crate::reconstruction::{NoiseModel, SpectrogramSamples};
use crate::signal::{ComplexSignal, Grid};
use crate::transforms::gabor::TFMatrix;

pub const SCHEMA_VERSION: u32 = 1;

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?)))
}

/// Shortest round-trip form; scientific outside `[1e-4, 1e15)`.
pub fn fmt(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Serde adapter writing non-finite floats as `null` and reading `null` back as NaN.
pub mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let got: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if got != header {
        return Err(Error::Parse(format!("{}: expected header {:?}, got {:?}", path.display(), header, got)));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!("{} row {}: wrong field count", path.display(), line + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// JSON envelope for a signal CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalEnvelope {
    pub schema_version: u32,
    pub grid: Grid,
    pub csv: String,
}

/// Writes `t,re,im`.
pub fn write_signal_csv(path: &Path, f: &ComplexSignal) -> Result<()> {
    let g = *f.grid();
    write_csv(
        path,
        &["t", "re", "im"],
        f.values().iter().enumerate().map(|(i, v)| vec![fmt(g.point(i)), fmt(v.re), fmt(v.im)]),
    )
}

/// Writes the CSV and a JSON envelope next to it (`<stem>.json`).
pub fn write_signal(dir: &Path, stem: &str, f: &ComplexSignal) -> Result<()> {
    let csv_name = format!("{stem}.csv");
    write_signal_csv(&dir.join(&csv_name), f)?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &SignalEnvelope {
            schema_version: SCHEMA_VERSION,
            grid: *f.grid(),
            csv: csv_name,
        },
    )
}

/// Reads a signal through its envelope; the CSV time column must match the grid.
pub fn read_signal(envelope: &Path) -> Result<ComplexSignal> {
    let env: SignalEnvelope = read_json(envelope)?;
    let dir = envelope.parent().unwrap_or(Path::new("."));
    let rows = read_rows(&dir.join(&env.csv), &["t", "re", "im"])?;
    if rows.len() != env.grid.count {
        return Err(Error::LengthMismatch {
            expected: env.grid.count,
            got: rows.len(),
        });
    }
    for (i, r) in rows.iter().enumerate() {
        if (r[0] - env.grid.point(i)).abs() > 1e-9 * env.grid.step {
            return Err(Error::Parse(format!("time column disagrees with grid at row {}", i + 1)));
        }
    }
    ComplexSignal::new(env.grid, rows.iter().map(|r| C64::new(r[1], r[2])).collect())
}

/// Writes `x,omega,re,im`.
pub fn write_tf_csv(path: &Path, m: &TFMatrix) -> Result<()> {
    write_csv(
        path,
        &["x", "omega", "re", "im"],
        m.iter().map(|(x, w, v)| vec![fmt(x), fmt(w), fmt(v.re), fmt(v.im)]),
    )
}

/// Writes `x,omega`.
pub fn write_sampling_set_csv(path: &Path, s: &SamplingSet) -> Result<()> {
    write_csv(path, &["x", "omega"], s.points.iter().map(|(x, w)| vec![fmt(*x), fmt(*w)]))
}

/// Whether a samples CSV holds `|Gf|` or `|Gf|^2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    #[default]
    Squared,
    Modulus,
}

/// Metadata accompanying a samples CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplesMeta {
    pub schema_version: u32,
    pub x_seq: SequenceDescriptor,
    pub w_seq: SequenceDescriptor,
    #[serde(default)]
    pub theta: f64,
    pub truncation: usize,
    #[serde(default)]
    pub quantity: Quantity,
    #[serde(default)]
    pub noise: Option<NoiseModel>,
    /// Free-form class description (`c`, `beta`, index range).
    #[serde(default)]
    pub class: serde_json::Value,
    pub csv: String,
}

/// Writes `x,omega,value` (squared) and `<stem>.json`.
pub fn write_samples(dir: &Path, stem: &str, s: &SpectrogramSamples, truncation: usize, class: serde_json::Value) -> Result<()> {
    let csv_name = format!("{stem}.csv");
    write_csv(
        &dir.join(&csv_name),
        &["x", "omega", "value"],
        s.set.points.iter().zip(&s.values).map(|((x, w), v)| vec![fmt(*x), fmt(*w), fmt(*v)]),
    )?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &SamplesMeta {
            schema_version: SCHEMA_VERSION,
            x_seq: s.set.x_seq.clone(),
            w_seq: s.set.w_seq.clone(),
            theta: s.set.theta,
            truncation,
            quantity: Quantity::Squared,
            noise: s.noise,
            class,
            csv: csv_name,
        },
    )
}

/// Reads samples through their metadata, squaring moduli on ingest and checking the point list.
pub fn read_samples(meta_path: &Path) -> Result<(SpectrogramSamples, SamplesMeta)> {
    let meta: SamplesMeta = read_json(meta_path)?;
    let dir = meta_path.parent().unwrap_or(Path::new("."));
    let set = build_sampling_set(&meta.x_seq, &meta.w_seq, meta.theta, meta.truncation)?;
    let rows = read_rows(&dir.join(&meta.csv), &["x", "omega", "value"])?;
    if rows.len() != set.len() {
        return Err(Error::LengthMismatch {
            expected: set.len(),
            got: rows.len(),
        });
    }
    for (i, (r, p)) in rows.iter().zip(&set.points).enumerate() {
        if (r[0] - p.0).abs() > 1e-9 * (1.0 + p.0.abs()) || (r[1] - p.1).abs() > 1e-9 * (1.0 + p.1.abs()) {
            return Err(Error::Parse(format!("row {} point does not match the described set", i + 1)));
        }
    }
    let v: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let mut s = match meta.quantity {
        Quantity::Squared => SpectrogramSamples::new(set, v)?,
        Quantity::Modulus => SpectrogramSamples::from_moduli(set, v)?,
    };
    s.noise = meta.noise;
    Ok((s, meta))
}
