//! On-disk artifact formats: lock-record sidecars, dataset directories,
//! model files, attack reports, evolution logs and pattern images.
//!
//! Datasets are directories holding `manifest.json` (scenario, extraction
//! geometry, seeds, counts), `data.csv` (`label,v0..v{L-1}`, normalized
//! values) and `provenance.csv`. All text output is deterministic: floats
//! print in shortest round-trip form, rows follow generation order.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use locklab_core::ann::{Model, Real};
use locklab_core::dataset::{LabeledDataset, Provenance, Scenario};
use locklab_core::extract::{format_vector, ExtractionParams, GrayImage, LocalityVector};
use locklab_core::locking::{LockRecord, Scheme};
use locklab_core::neuroevo::{EvalRecord, EvolutionObserver};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Malformed { path: PathBuf, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn malformed(path: &Path, msg: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

pub fn read_to_string(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn write_string(path: &Path, text: &str) -> Result<(), FormatError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

// ----------------------------------------------------------------------
// Lock records
// ----------------------------------------------------------------------

pub fn write_lock_record(path: &Path, record: &LockRecord) -> Result<(), FormatError> {
    let json = serde_json::to_string_pretty(record).expect("record serializes");
    write_string(path, &json)
}

pub fn read_lock_record(path: &Path) -> Result<LockRecord, FormatError> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| malformed(path, e.to_string()))
}

// ----------------------------------------------------------------------
// Dataset directories
// ----------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub scenario: Scenario,
    pub scheme: Scheme,
    pub params: ExtractionParams,
    pub master_seed: u64,
    pub vectors: usize,
    /// Balance report: `[label-0 count, label-1 count]`.
    pub label_counts: [usize; 2],
    pub source_netlists: Vec<String>,
}

pub fn write_dataset(
    dir: &Path,
    dataset: &LabeledDataset,
    scheme: Scheme,
    master_seed: u64,
) -> Result<(), FormatError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut sources: Vec<String> = Vec::new();
    for p in &dataset.provenance {
        if !sources.contains(&p.netlist_id) {
            sources.push(p.netlist_id.clone());
        }
    }
    let manifest = DatasetManifest {
        scenario: dataset.scenario,
        scheme,
        params: dataset.params,
        master_seed,
        vectors: dataset.len(),
        label_counts: dataset.label_counts(),
        source_netlists: sources,
    };
    write_string(
        &dir.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;

    let data_path = dir.join("data.csv");
    let mut w = BufWriter::new(fs::File::create(&data_path).map_err(io_err(&data_path))?);
    let mut header = String::from("label");
    for i in 0..dataset.params.l_vec {
        header.push_str(&format!(",v{i}"));
    }
    writeln!(w, "{header}").map_err(io_err(&data_path))?;
    for v in &dataset.vectors {
        let mut row = String::with_capacity(dataset.params.l_vec * 6);
        row.push(if v.label == Some(true) { '1' } else { '0' });
        for &x in &v.formatted {
            row.push(',');
            row.push_str(&format!("{x}"));
        }
        writeln!(w, "{row}").map_err(io_err(&data_path))?;
    }
    w.flush().map_err(io_err(&data_path))?;

    let prov_path = dir.join("provenance.csv");
    let mut w = BufWriter::new(fs::File::create(&prov_path).map_err(io_err(&prov_path))?);
    writeln!(w, "netlist_id,scheme,lock_seed,copy,key_index,original_key")
        .map_err(io_err(&prov_path))?;
    for p in &dataset.provenance {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            p.netlist_id, p.scheme, p.lock_seed, p.copy, p.key_index, p.original_key
        )
        .map_err(io_err(&prov_path))?;
    }
    w.flush().map_err(io_err(&prov_path))
}

pub fn read_dataset(dir: &Path) -> Result<(LabeledDataset, DatasetManifest), FormatError> {
    let manifest_path = dir.join("manifest.json");
    let manifest: DatasetManifest = serde_json::from_str(&read_to_string(&manifest_path)?)
        .map_err(|e| malformed(&manifest_path, e.to_string()))?;

    let data_path = dir.join("data.csv");
    let text = read_to_string(&data_path)?;
    let mut lines = text.lines();
    let _header = lines
        .next()
        .ok_or_else(|| malformed(&data_path, "empty file"))?;
    let mut vectors = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let label = match parts.next() {
            Some("0") => false,
            Some("1") => true,
            _ => return Err(malformed(&data_path, format!("row {i}: bad label"))),
        };
        let formatted: Vec<f32> = parts
            .map(|p| p.parse::<f32>())
            .collect::<Result<_, _>>()
            .map_err(|e| malformed(&data_path, format!("row {i}: {e}")))?;
        if formatted.len() != manifest.params.l_vec {
            return Err(malformed(
                &data_path,
                format!(
                    "row {i}: {} values, expected {}",
                    formatted.len(),
                    manifest.params.l_vec
                ),
            ));
        }
        // recover the (trimmed) integer codes from the normalized values
        let raw: Vec<u8> = formatted.iter().map(|&f| (f * 9.0 + 0.5) as u8).collect();
        vectors.push(LocalityVector {
            key_index: 0,
            label: Some(label),
            raw,
            formatted,
        });
    }

    let prov_path = dir.join("provenance.csv");
    let text = read_to_string(&prov_path)?;
    let mut lines = text.lines();
    let _header = lines.next();
    let mut provenance = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(malformed(&prov_path, format!("row {i}: expected 6 fields")));
        }
        let parse_err = |e: &dyn std::fmt::Display| malformed(&prov_path, format!("row {i}: {e}"));
        provenance.push(Provenance {
            netlist_id: parts[0].to_string(),
            scheme: match parts[1] {
                "epic" => Scheme::Epic,
                "unbiased" => Scheme::Unbiased,
                other => return Err(malformed(&prov_path, format!("row {i}: scheme {other}"))),
            },
            lock_seed: parts[2]
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err(&e))?,
            copy: parts[3]
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err(&e))?,
            key_index: parts[4]
                .parse()
                .map_err(|e: std::num::ParseIntError| parse_err(&e))?,
            original_key: parts[5]
                .parse()
                .map_err(|e: std::str::ParseBoolError| parse_err(&e))?,
        });
        if let Some(v) = vectors.get_mut(i) {
            v.key_index = provenance[i].key_index;
        }
    }
    if provenance.len() != vectors.len() {
        return Err(malformed(&prov_path, "provenance/data row count mismatch"));
    }
    Ok((
        LabeledDataset {
            scenario: manifest.scenario,
            params: manifest.params,
            vectors,
            provenance,
        },
        manifest,
    ))
}

/// Unlabeled test vectors as CSV (`key_index,v0..`).
pub fn write_test_vectors(path: &Path, vectors: &[LocalityVector]) -> Result<(), FormatError> {
    let mut out = String::from("key_index");
    let width = vectors.first().map(|v| v.formatted.len()).unwrap_or(0);
    for i in 0..width {
        out.push_str(&format!(",v{i}"));
    }
    out.push('\n');
    for v in vectors {
        out.push_str(&format!("{}", v.key_index));
        for &x in &v.formatted {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
    }
    write_string(path, &out)
}

// ----------------------------------------------------------------------
// Models
// ----------------------------------------------------------------------

pub fn write_model<T: Real>(path: &Path, model: &Model<T>) -> Result<(), FormatError> {
    write_string(path, &model.to_json())
}

pub fn read_model<T: Real>(path: &Path) -> Result<Model<T>, FormatError> {
    Model::from_json(&read_to_string(path)?).map_err(|e| malformed(path, e.to_string()))
}

// ----------------------------------------------------------------------
// Evolution log
// ----------------------------------------------------------------------

/// Streams one JSON object per fitness evaluation, timestamped.
pub struct JsonlLog<W: Write> {
    out: W,
    started: Instant,
}

impl JsonlLog<BufWriter<fs::File>> {
    pub fn create(path: &Path) -> Result<Self, FormatError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(path))?;
        }
        let file = fs::File::create(path).map_err(io_err(path))?;
        Ok(JsonlLog {
            out: BufWriter::new(file),
            started: Instant::now(),
        })
    }
}

impl<W: Write> EvolutionObserver for JsonlLog<W> {
    fn on_evaluation(&mut self, rec: &EvalRecord) {
        let mut value = serde_json::to_value(rec).expect("record serializes");
        value["wall_ms"] = serde_json::json!(self.started.elapsed().as_millis() as u64);
        let _ = writeln!(self.out, "{value}");
        let _ = self.out.flush();
    }
}

// ----------------------------------------------------------------------
// Images
// ----------------------------------------------------------------------

/// Binary PGM (P5, maxval 255).
pub fn write_pgm(path: &Path, image: &GrayImage) -> Result<(), FormatError> {
    let mut bytes = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    bytes.extend_from_slice(&image.pixels);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

pub fn read_pgm(path: &Path) -> Result<GrayImage, FormatError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let header_end = bytes
        .windows(1)
        .enumerate()
        .filter(|(_, w)| w[0] == b'\n')
        .map(|(i, _)| i)
        .nth(2)
        .ok_or_else(|| malformed(path, "truncated header"))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| malformed(path, "non-UTF8 header"))?;
    let mut fields = header.split_ascii_whitespace();
    if fields.next() != Some("P5") {
        return Err(malformed(path, "not a P5 file"));
    }
    let width: usize = fields
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed(path, "bad width"))?;
    let height: usize = fields
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| malformed(path, "bad height"))?;
    if fields.next() != Some("255") {
        return Err(malformed(path, "maxval must be 255"));
    }
    let pixels = bytes[header_end + 1..].to_vec();
    if pixels.len() != width * height {
        return Err(malformed(path, "pixel payload size mismatch"));
    }
    Ok(GrayImage {
        width,
        height,
        pixels,
    })
}

/// PNG via the image crate (optional output next to the PGM).
pub fn write_png(path: &Path, image: &GrayImage) -> Result<(), FormatError> {
    let buf = image::GrayImage::from_raw(
        image.width as u32,
        image.height as u32,
        image.pixels.clone(),
    )
    .expect("pixel buffer matches dimensions");
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(path))?;
    }
    buf.save(path).map_err(|e| malformed(path, e.to_string()))
}

/// Rebuild locality vectors from raw code sequences (CLI extract output).
pub fn vectors_from_raws(
    raws: &[(usize, Option<bool>, Vec<u8>)],
    l_vec: usize,
) -> Result<Vec<LocalityVector>, locklab_core::extract::ExtractError> {
    raws.iter()
        .map(|(key_index, label, raw)| {
            Ok(LocalityVector {
                key_index: *key_index,
                label: *label,
                formatted: format_vector(raw, l_vec)?,
                raw: raw.clone(),
            })
        })
        .collect()
}
