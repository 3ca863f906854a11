//! Reader and writer for the cause-effect-pairs directory layout.
//!
//! A directory holds `pairNNNN.txt` data files (whitespace-separated numeric
//! columns, `#` comment lines allowed) and `pairmeta.txt`, one row per pair:
//! `id cause_start cause_end effect_start effect_end weight` with 1-based
//! column indices. Generated datasets add `manifest.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::LabeledPair;
use crate::error::{Error, Result};
use crate::inference::Direction;
use crate::qv::SamplePair;

pub const META_FILE: &str = "pairmeta.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

fn parse_error(file: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses a numeric text table into columns.
pub fn read_columns(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_error(path, k + 1, format!("invalid number {tok:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if columns.is_empty() {
            columns = vec![Vec::new(); row.len()];
        } else if row.len() != columns.len() {
            return Err(parse_error(
                path,
                k + 1,
                format!("expected {} columns, found {}", columns.len(), row.len()),
            ));
        }
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    if columns.is_empty() {
        return Err(parse_error(path, 0, "no data rows"));
    }
    Ok(columns)
}

/// Reads a two-column file as `(x, y)`.
pub fn read_pair_file(path: &Path) -> Result<SamplePair> {
    let mut columns = read_columns(path)?;
    if columns.len() != 2 {
        return Err(parse_error(
            path,
            0,
            format!("expected 2 columns, found {}", columns.len()),
        ));
    }
    let y = columns.pop().unwrap();
    let x = columns.pop().unwrap();
    SamplePair::new(x, y)
}

pub fn write_pair_file(path: &Path, pair: &SamplePair) -> Result<()> {
    let mut out = String::with_capacity(pair.len() * 40);
    for (x, y) in pair.x().iter().zip(pair.y()) {
        writeln!(out, "{x} {y}").expect("writing to a String");
    }
    fs::write(path, out).map_err(|e| Error::file(path, e))
}

fn pair_file_name(id: usize) -> String {
    format!("pair{id:04}.txt")
}

struct MetaRow {
    id: usize,
    cause: (usize, usize),
    effect: (usize, usize),
    weight: f64,
}

fn read_meta(path: &Path) -> Result<Vec<MetaRow>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::MissingMetadata(path.to_path_buf()))
        }
        Err(e) => return Err(Error::file(path, e)),
    };
    let mut rows = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(parse_error(
                path,
                k + 1,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let index = |i: usize| {
            fields[i]
                .parse::<usize>()
                .map_err(|_| parse_error(path, k + 1, format!("invalid integer {:?}", fields[i])))
        };
        let weight: f64 = fields[5]
            .parse()
            .ok()
            .filter(|w: &f64| *w > 0.0 && w.is_finite())
            .ok_or_else(|| parse_error(path, k + 1, format!("invalid weight {:?}", fields[5])))?;
        rows.push(MetaRow {
            id: index(0)?,
            cause: (index(1)?, index(2)?),
            effect: (index(3)?, index(4)?),
            weight,
        });
    }
    Ok(rows)
}

/// Loads every bivariate pair listed in `pairmeta.txt`.
///
/// Pairs whose cause or effect spans several columns are skipped. The
/// lower-indexed of the two columns becomes `x`, so the truth is `XtoY`
/// exactly when the cause column comes first.
pub fn load_cep_directory(dir: &Path) -> Result<Vec<LabeledPair>> {
    let meta_path = dir.join(META_FILE);
    let mut pairs = Vec::new();
    let mut skipped = 0usize;
    for row in read_meta(&meta_path)? {
        if row.cause.0 != row.cause.1 || row.effect.0 != row.effect.1 {
            skipped += 1;
            continue;
        }
        let (cause, effect) = (row.cause.0, row.effect.0);
        if cause == 0 || effect == 0 || cause == effect {
            return Err(parse_error(
                &meta_path,
                0,
                format!("pair {}: invalid column indices {cause}, {effect}", row.id),
            ));
        }
        let file = dir.join(pair_file_name(row.id));
        let mut columns = read_columns(&file)?;
        let needed = cause.max(effect);
        if columns.len() < needed {
            return Err(parse_error(
                &file,
                0,
                format!("metadata refers to column {needed}, file has {}", columns.len()),
            ));
        }
        let (first, second) = (cause.min(effect), cause.max(effect));
        let y = std::mem::take(&mut columns[second - 1]);
        let x = std::mem::take(&mut columns[first - 1]);
        pairs.push(LabeledPair {
            id: format!("{:04}", row.id),
            pair: SamplePair::new(x, y)?,
            truth: if cause < effect {
                Direction::XtoY
            } else {
                Direction::YtoX
            },
            weight: row.weight,
        });
    }
    if skipped > 0 {
        log::info!("skipped {skipped} multivariate pair(s) in {}", meta_path.display());
    }
    Ok(pairs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub file: String,
    pub truth: Direction,
    pub weight: f64,
}

/// Description of a generated dataset directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub kind: String,
    pub seed: u64,
    pub n: usize,
    pub pairs: Vec<ManifestEntry>,
}

/// Writes pair files, `pairmeta.txt` and `manifest.json` into `dir`.
///
/// Pair `k` (0-based) goes to `pair{k+1:04}.txt` with columns `x y`; its
/// metadata row encodes the truth as the cause/effect column order.
pub fn write_dataset(
    dir: &Path,
    kind: &str,
    seed: u64,
    pairs: &[LabeledPair],
) -> Result<DatasetManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let mut meta = String::new();
    let mut entries = Vec::with_capacity(pairs.len());
    for (k, p) in pairs.iter().enumerate() {
        let file = pair_file_name(k + 1);
        write_pair_file(&dir.join(&file), &p.pair)?;
        let (cause, effect) = match p.truth {
            Direction::YtoX => (2, 1),
            _ => (1, 2),
        };
        writeln!(meta, "{:04} {cause} {cause} {effect} {effect} {}", k + 1, p.weight)
            .expect("writing to a String");
        entries.push(ManifestEntry {
            id: p.id.clone(),
            file,
            truth: p.truth,
            weight: p.weight,
        });
    }
    let meta_path = dir.join(META_FILE);
    fs::write(&meta_path, meta).map_err(|e| Error::file(meta_path, e))?;
    let manifest = DatasetManifest {
        kind: kind.to_string(),
        seed,
        n: pairs.first().map_or(0, |p| p.pair.len()),
        pairs: entries,
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&manifest_path, json + "\n").map_err(|e| Error::file(manifest_path, e))?;
    Ok(manifest)
}

/// Loads the pairs listed in a manifest; file names resolve relative to the
/// manifest's directory.
pub fn load_manifest(path: &Path) -> Result<(DatasetManifest, Vec<LabeledPair>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)?;
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let pairs = manifest
        .pairs
        .iter()
        .map(|e| {
            Ok(LabeledPair {
                id: e.id.clone(),
                pair: read_pair_file(&base.join(&e.file))?,
                truth: e.truth,
                weight: e.weight,
            })
        })
        .collect::<Result<_>>()?;
    Ok((manifest, pairs))
}
