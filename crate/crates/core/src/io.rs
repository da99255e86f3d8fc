//! Versioned on-disk formats: JSON Lines datasets with a header line, and
//! JSON checkpoints.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{Architecture, ParamVector};
use crate::codec::{Decoder, BIT_CONVENTION};
use crate::error::{Error, Result};
use crate::optim::AdamState;
use crate::pca::PcaModel;
use crate::train::{Example, TrainConfig};
use crate::xxz::{DeltaGrid, GroundStateRecord, VqeConfig};

pub const FORMAT_VERSION: u32 = 1;
pub const FEATURES_FORMAT: &str = "tnqc-features";
pub const GROUND_STATES_FORMAT: &str = "tnqc-xxz-ground-states";
pub const CHECKPOINT_FORMAT: &str = "tnqc-checkpoint";
pub const PCA_FORMAT: &str = "tnqc-pca";

/// Lowercase hex SHA-256.
pub fn fingerprint(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn corrupt(what: &str, line: usize, e: impl std::fmt::Display) -> Error {
    Error::Corrupt(format!("{what}, line {line}: {e}"))
}

fn check_header(value: &serde_json::Value, format: &str) -> Result<()> {
    let found = value.get("format").and_then(|f| f.as_str()).unwrap_or("");
    if found != format {
        return Err(Error::Corrupt(format!("expected a {format} file, found format {found:?}")));
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == FORMAT_VERSION as u64 => Ok(()),
        Some(v) => Err(Error::Version { found: v as u32, expected: FORMAT_VERSION }),
        None => Err(Error::Corrupt(format!("{format} header has no version"))),
    }
}

fn write_line(w: &mut impl Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer(&mut *w, value).map_err(|e| Error::Corrupt(e.to_string()))?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Header line, then one JSON object per row.
pub fn write_jsonl<H: Serialize, R: Serialize>(mut w: impl Write, header: &H, rows: &[R]) -> Result<()> {
    write_line(&mut w, header)?;
    for r in rows {
        write_line(&mut w, r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<H: DeserializeOwned, R: DeserializeOwned>(r: impl BufRead, format: &str) -> Result<(H, Vec<R>)> {
    let mut lines = r.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| Error::Corrupt(format!("empty {format} file")))?;
    let first = first?;
    let value: serde_json::Value = serde_json::from_str(&first).map_err(|e| corrupt(format, 1, e))?;
    check_header(&value, format)?;
    let header = serde_json::from_value(value).map_err(|e| corrupt(format, 1, e))?;
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| corrupt(format, i + 1, e))?);
    }
    Ok((header, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureHeader {
    pub format: String,
    pub version: u32,
    pub split: String,
    pub n_features: usize,
    pub n_classes: usize,
    /// Original digits, in the order of the remapped labels.
    pub digits: Vec<u8>,
    pub pixel_scaling: String,
    pub pca_fit: String,
    pub source_fingerprint: String,
}

impl FeatureHeader {
    pub fn new(split: &str, n_features: usize, digits: &[u8], source_fingerprint: String) -> Self {
        FeatureHeader {
            format: FEATURES_FORMAT.into(),
            version: FORMAT_VERSION,
            split: split.into(),
            n_features,
            n_classes: digits.len(),
            digits: digits.to_vec(),
            pixel_scaling: "pixel/255".into(),
            pca_fit: "train split only, after class filtering; min-max scaled on train, clamped to [0,1]".into(),
            source_fingerprint,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub features: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub header: FeatureHeader,
    pub rows: Vec<FeatureRow>,
}

impl FeatureSet {
    pub fn features(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.features.clone()).collect()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Rows as product-state classifier inputs.
    pub fn examples(&self) -> Result<Vec<Example>> {
        self.rows
            .iter()
            .map(|r| Ok(Example { input: crate::codec::encode_qubit(&r.features)?, label: r.label }))
            .collect()
    }
}

pub fn write_features(w: impl Write, set: &FeatureSet) -> Result<()> {
    write_jsonl(w, &set.header, &set.rows)
}

pub fn read_features(r: impl BufRead) -> Result<FeatureSet> {
    let (header, rows): (FeatureHeader, Vec<FeatureRow>) = read_jsonl(r, FEATURES_FORMAT)?;
    for (i, row) in rows.iter().enumerate() {
        if row.features.len() != header.n_features {
            return Err(corrupt(FEATURES_FORMAT, i + 2, format!("{} features, header says {}", row.features.len(), header.n_features)));
        }
        if row.label >= header.n_classes {
            return Err(corrupt(FEATURES_FORMAT, i + 2, format!("label {} outside 0..{}", row.label, header.n_classes)));
        }
    }
    Ok(FeatureSet { header, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateHeader {
    pub format: String,
    pub version: u32,
    pub n_spins: usize,
    pub coupling: f64,
    pub spin_up: String,
    pub grid: DeltaGrid,
    pub vqe: VqeConfig,
    pub seed: u64,
}

impl GroundStateHeader {
    pub fn new(grid: DeltaGrid, vqe: VqeConfig, seed: u64) -> Self {
        GroundStateHeader {
            format: GROUND_STATES_FORMAT.into(),
            version: FORMAT_VERSION,
            n_spins: 8,
            coupling: 1.0,
            spin_up: "|0>".into(),
            grid,
            vqe,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateSet {
    pub header: GroundStateHeader,
    pub records: Vec<GroundStateRecord>,
}

impl GroundStateSet {
    pub fn labels(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Prepared states as classifier inputs.
    pub fn examples(&self) -> Result<Vec<Example>> {
        self.records.iter().map(|r| Ok(Example { input: r.state()?, label: r.label })).collect()
    }
}

pub fn write_ground_states(w: impl Write, set: &GroundStateSet) -> Result<()> {
    write_jsonl(w, &set.header, &set.records)
}

pub fn read_ground_states(r: impl BufRead) -> Result<GroundStateSet> {
    let (header, records): (GroundStateHeader, Vec<GroundStateRecord>) = read_jsonl(r, GROUND_STATES_FORMAT)?;
    let expected = crate::circuit::build_checkerboard(header.n_spins, header.vqe.layers)?.n_params;
    for (i, rec) in records.iter().enumerate() {
        if rec.params.len() != expected || rec.label >= crate::xxz::N_PHASES {
            return Err(corrupt(GROUND_STATES_FORMAT, i + 2, "parameter count or label out of range"));
        }
    }
    Ok(GroundStateSet { header, records })
}

/// Either kind of dataset, detected from the header line.
pub enum Dataset {
    Features(FeatureSet),
    GroundStates(GroundStateSet),
}

impl Dataset {
    pub fn read(bytes: &[u8]) -> Result<Self> {
        let first = bytes.split(|&b| b == b'\n').next().unwrap_or(&[]);
        let value: serde_json::Value = serde_json::from_slice(first).map_err(|e| corrupt("dataset", 1, e))?;
        match value.get("format").and_then(|f| f.as_str()) {
            Some(FEATURES_FORMAT) => Ok(Dataset::Features(read_features(bytes)?)),
            Some(GROUND_STATES_FORMAT) => Ok(Dataset::GroundStates(read_ground_states(bytes)?)),
            other => Err(Error::Corrupt(format!("unrecognized dataset format {other:?}"))),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Dataset::Features(f) => f.header.n_classes,
            Dataset::GroundStates(_) => crate::xxz::N_PHASES,
        }
    }

    pub fn labels(&self) -> Vec<usize> {
        match self {
            Dataset::Features(f) => f.labels(),
            Dataset::GroundStates(g) => g.labels(),
        }
    }

    pub fn examples(&self) -> Result<Vec<Example>> {
        match self {
            Dataset::Features(f) => f.examples(),
            Dataset::GroundStates(g) => g.examples(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaFile {
    pub format: String,
    pub version: u32,
    pub model: PcaModel,
}

pub fn write_pca(w: impl Write, model: &PcaModel) -> Result<()> {
    let file = PcaFile { format: PCA_FORMAT.into(), version: FORMAT_VERSION, model: model.clone() };
    serde_json::to_writer_pretty(w, &file).map_err(|e| Error::Corrupt(e.to_string()))
}

pub fn read_pca(bytes: &[u8]) -> Result<PcaModel> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| Error::Corrupt(format!("PCA model: {e}")))?;
    check_header(&value, PCA_FORMAT)?;
    let file: PcaFile = serde_json::from_value(value).map_err(|e| Error::Corrupt(format!("PCA model: {e}")))?;
    Ok(file.model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub architecture: String,
    pub decoder: Decoder,
    pub n_classes: usize,
    pub bit_convention: String,
    /// Best-validation parameters.
    pub params: ParamVector,
    /// Parameters and optimizer state after the last epoch, for resuming.
    pub last_params: ParamVector,
    pub adam: AdamState,
    pub config: TrainConfig,
    pub seed: u64,
    pub best_val_accuracy: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub dataset_fingerprint: String,
}

impl Checkpoint {
    pub fn architecture(&self) -> Result<Architecture> {
        self.architecture.parse()
    }

    /// Descriptor, parameter lengths and optimizer state agree.
    pub fn validate(&self) -> Result<()> {
        let template = self.architecture()?.build()?;
        self.params.validate_for(&template)?;
        self.last_params.validate_for(&template)?;
        if self.adam.m.len() != template.n_params || self.adam.v.len() != template.n_params {
            return Err(Error::Corrupt("optimizer state length does not match the architecture".into()));
        }
        if self.bit_convention != BIT_CONVENTION {
            return Err(Error::Corrupt(format!("unsupported bit convention {:?}", self.bit_convention)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_slice(bytes).map_err(|e| Error::Corrupt(format!("checkpoint: {e}")))?;
        check_header(&value, CHECKPOINT_FORMAT)?;
        let ckpt: Checkpoint = serde_json::from_value(value).map_err(|e| Error::Corrupt(format!("checkpoint: {e}")))?;
        ckpt.validate()?;
        Ok(ckpt)
    }
}
