//! Forecasting models: replay, prior, exact nearest-neighbor retrieval,
//! and the denoising autoencoder (in [`dae`]).
//!
//! All four models predict the next block's frame vector from the context
//! vectors of an [`Instance`]. Trained models are immutable; predictions
//! are pure functions of (model, instance).

pub mod dae;

pub use dae::{
    dae_forward, dae_init, dae_loss, dae_train, dae_widths, grad_check, DaeParams, DropoutMask,
};

use crate::error::{Error, Result};
use crate::representation::{cosine_dense, FrameVector, Instance};
use crate::util::KahanSum;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

/// Returns the most recent context vector unchanged: the assumption that
/// the same frames will occur again.
pub fn predict_replay(instance: &Instance) -> FrameVector {
    instance
        .context
        .last()
        .expect("instance context is never empty")
        .clone()
}

/// The constant predictor: unit-normalized mean of training targets.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorModel {
    pub mean: FrameVector,
}

/// Average the training targets (in their stored normalization) and scale
/// the result back to unit length.
pub fn fit_prior(train: &[Instance]) -> Result<PriorModel> {
    let first = train
        .first()
        .ok_or_else(|| Error::invalid("cannot fit prior on an empty training set"))?;
    let dims = first.target.dims();
    let mut sums = vec![KahanSum::new(); dims];
    for instance in train {
        if instance.target.dims() != dims {
            return Err(Error::invalid("training targets have mixed dimensions"));
        }
        for (sum, &w) in sums.iter_mut().zip(&instance.target.weights) {
            sum.add(w);
        }
    }
    let mut mean = FrameVector {
        weights: sums.iter().map(|s| s.value() / train.len() as f64).collect(),
        normalized: false,
    };
    mean.normalize();
    Ok(PriorModel { mean })
}

pub fn predict_prior(model: &PriorModel) -> FrameVector {
    model.mean.clone()
}

/// Exact nearest-neighbor index over flattened context vectors.
#[derive(Debug, Clone)]
pub struct IrIndex {
    keys: Vec<Vec<f64>>,
    values: Vec<FrameVector>,
    ids: Vec<(String, usize)>,
    key_width: usize,
}

impl IrIndex {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key_width(&self) -> usize {
        self.key_width
    }

    pub fn entry_id(&self, i: usize) -> &(String, usize) {
        &self.ids[i]
    }
}

fn unit_normalize(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

/// Index every training instance: key = unit-normalized flattened context,
/// value = that instance's target. Entry order is the training order
/// (doc id, then anchor), which is also the tie-break order at query time.
pub fn build_ir_index(train: &[Instance]) -> Result<IrIndex> {
    let first = train
        .first()
        .ok_or_else(|| Error::invalid("cannot build a retrieval index from no instances"))?;
    let key_width = first.flattened_context().len();
    let mut keys = Vec::with_capacity(train.len());
    let mut values = Vec::with_capacity(train.len());
    let mut ids = Vec::with_capacity(train.len());
    for instance in train {
        let flat = instance.flattened_context();
        if flat.len() != key_width {
            return Err(Error::invalid("instances have mixed context widths"));
        }
        keys.push(unit_normalize(flat));
        values.push(instance.target.clone());
        ids.push((instance.doc_id.clone(), instance.anchor_index));
    }
    Ok(IrIndex {
        keys,
        values,
        ids,
        key_width,
    })
}

/// Linear-scan cosine argmax; ties go to the earliest inserted entry.
/// O(index size) per query by design; cap the index when that is too slow.
pub fn predict_ir(index: &IrIndex, context: &[FrameVector]) -> Result<FrameVector> {
    let mut flat = Vec::with_capacity(index.key_width);
    for v in context {
        flat.extend_from_slice(&v.weights);
    }
    if flat.len() != index.key_width {
        return Err(Error::invalid(format!(
            "query width {} does not match index width {}",
            flat.len(),
            index.key_width
        )));
    }
    let query = unit_normalize(flat);
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (i, key) in index.keys.iter().enumerate() {
        // keys and query are unit or zero, so the dot product is the cosine
        let score: f64 = key.iter().zip(&query).map(|(a, b)| a * b).sum();
        if score > best_score {
            best_score = score;
            best = i;
        }
    }
    Ok(index.values[best].clone())
}

/// Hyperparameters for DAE training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Fraction of input coordinates dropped during training; kept units
    /// are scaled by 1/(1-dropout) so inference needs no rescaling.
    pub input_dropout: f64,
    /// Consecutive non-improving epochs tolerated before stopping.
    pub patience_epochs: usize,
    pub max_epochs: usize,
    pub hidden_width: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-5,
            batch_size: 512,
            input_dropout: 0.30,
            patience_epochs: 20,
            max_epochs: 200,
            hidden_width: 512,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        if !(0.0..1.0).contains(&self.input_dropout) {
            return Err(Error::invalid("input dropout must be in [0, 1)"));
        }
        if self.max_epochs == 0 {
            return Err(Error::invalid("max epochs must be positive"));
        }
        if self.hidden_width == 0 {
            return Err(Error::invalid("hidden width must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingReason {
    EarlyStopped,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_cosine: f64,
}

/// Per-epoch history plus which epoch's parameters were kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopping: StoppingReason,
    pub skipped_zero_targets: usize,
}

/// Any of the four forecasting models behind one prediction interface.
#[derive(Debug, Clone)]
pub enum Forecaster {
    Replay,
    Prior(PriorModel),
    Ir(IrIndex),
    Dae(DaeParams),
}

impl Forecaster {
    pub fn name(&self) -> &'static str {
        match self {
            Forecaster::Replay => "replay",
            Forecaster::Prior(_) => "prior",
            Forecaster::Ir(_) => "ir",
            Forecaster::Dae(_) => "dae",
        }
    }

    pub fn predict(&self, instance: &Instance) -> Result<FrameVector> {
        match self {
            Forecaster::Replay => Ok(predict_replay(instance)),
            Forecaster::Prior(model) => Ok(predict_prior(model)),
            Forecaster::Ir(index) => predict_ir(index, &instance.context),
            Forecaster::Dae(params) => {
                let out = dae_forward(params, &instance.flattened_context(), None)?;
                Ok(FrameVector {
                    weights: out,
                    normalized: false,
                })
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    kind: String,
    widths: Vec<usize>,
    param_count: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    train_config: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    fingerprint: Option<String>,
}

fn write_model(path: &Path, header: &ModelHeader, params: &[f64]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let json = serde_json::to_string(header).expect("header serialization cannot fail");
    writeln!(file, "{json}").map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::with_capacity(params.len() * 8);
    for p in params {
        bytes.extend_from_slice(&p.to_le_bytes());
    }
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

fn read_model(path: &Path) -> Result<(ModelHeader, Vec<f64>)> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    let newline = raw
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::parse(path, 1, "missing header line"))?;
    let header: ModelHeader = serde_json::from_slice(&raw[..newline])
        .map_err(|e| Error::parse(path, 1, e.to_string()))?;
    let body = &raw[newline + 1..];
    if body.len() != header.param_count * 8 {
        return Err(Error::parse(
            path,
            1,
            format!(
                "expected {} parameter bytes, found {}",
                header.param_count * 8,
                body.len()
            ),
        ));
    }
    let params = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk is 8 bytes")))
        .collect();
    Ok((header, params))
}

/// Persist a trained DAE: JSON header line, then little-endian f64 blob.
pub fn save_dae(
    params: &DaeParams,
    config: &TrainConfig,
    path: &Path,
    fingerprint: Option<&str>,
) -> Result<()> {
    let header = ModelHeader {
        kind: "dae".into(),
        widths: params.widths.clone(),
        param_count: params.param_count(),
        train_config: Some(config.clone()),
        fingerprint: fingerprint.map(str::to_string),
    };
    write_model(path, &header, &params.flatten())
}

pub fn load_dae(path: &Path) -> Result<(DaeParams, TrainConfig)> {
    let (header, flat) = read_model(path)?;
    if header.kind != "dae" {
        return Err(Error::parse(
            path,
            1,
            format!("expected a dae model, found \"{}\"", header.kind),
        ));
    }
    let params = DaeParams::from_flat(&header.widths, &flat)?;
    Ok((params, header.train_config.unwrap_or_default()))
}

pub fn save_prior(model: &PriorModel, path: &Path, fingerprint: Option<&str>) -> Result<()> {
    let header = ModelHeader {
        kind: "prior".into(),
        widths: vec![model.mean.dims()],
        param_count: model.mean.dims(),
        train_config: None,
        fingerprint: fingerprint.map(str::to_string),
    };
    write_model(path, &header, &model.mean.weights)
}

pub fn load_prior(path: &Path) -> Result<PriorModel> {
    let (header, flat) = read_model(path)?;
    if header.kind != "prior" {
        return Err(Error::parse(
            path,
            1,
            format!("expected a prior model, found \"{}\"", header.kind),
        ));
    }
    let mut mean = FrameVector {
        weights: flat,
        normalized: false,
    };
    let norm = mean.norm();
    mean.normalized = norm == 0.0 || (norm - 1.0).abs() < 1e-9;
    Ok(PriorModel { mean })
}

#[derive(Debug, Serialize, Deserialize)]
struct IrManifest {
    kind: String,
    entries: usize,
    key_width: usize,
    value_width: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    fingerprint: Option<String>,
}

/// Persist the retrieval index as two sparse-vector JSONL files plus an
/// id manifest, under `dir`.
pub fn save_ir(index: &IrIndex, dir: &Path, fingerprint: Option<&str>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let keys: Vec<(String, usize, FrameVector)> = index
        .ids
        .iter()
        .zip(&index.keys)
        .map(|((doc, anchor), key)| {
            (
                doc.clone(),
                *anchor,
                FrameVector {
                    weights: key.clone(),
                    normalized: true,
                },
            )
        })
        .collect();
    crate::representation::save_vectors(&keys, &dir.join("keys.jsonl"))?;
    let values: Vec<(String, usize, FrameVector)> = index
        .ids
        .iter()
        .zip(&index.values)
        .map(|((doc, anchor), value)| (doc.clone(), *anchor, value.clone()))
        .collect();
    crate::representation::save_vectors(&values, &dir.join("values.jsonl"))?;
    let manifest = IrManifest {
        kind: "ir".into(),
        entries: index.len(),
        key_width: index.key_width,
        value_width: index.values.first().map(FrameVector::dims).unwrap_or(0),
        fingerprint: fingerprint.map(str::to_string),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
    fs::write(dir.join("manifest.json"), json).map_err(|e| Error::io(dir, e))
}

pub fn load_ir(dir: &Path) -> Result<IrIndex> {
    let manifest_path = dir.join("manifest.json");
    let raw = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: IrManifest = serde_json::from_str(&raw)
        .map_err(|e| Error::parse(&manifest_path, e.line(), e.to_string()))?;
    let keys = crate::representation::load_vectors(&dir.join("keys.jsonl"), manifest.key_width)?;
    let values =
        crate::representation::load_vectors(&dir.join("values.jsonl"), manifest.value_width)?;
    if keys.len() != values.len() || keys.len() != manifest.entries {
        return Err(Error::parse(
            &manifest_path,
            0,
            "index files disagree on entry count",
        ));
    }
    let ids: Vec<(String, usize)> = keys.iter().map(|(d, a, _)| (d.clone(), *a)).collect();
    Ok(IrIndex {
        keys: keys.into_iter().map(|(_, _, v)| v.weights).collect(),
        values: values.into_iter().map(|(_, _, v)| v).collect(),
        ids,
        key_width: manifest.key_width,
    })
}

/// Mean cosine between a model's predictions and the targets, in instance
/// order with compensated summation.
pub fn mean_prediction_cosine(model: &Forecaster, instances: &[Instance]) -> Result<f64> {
    if instances.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty instance set"));
    }
    let mut sum = KahanSum::new();
    for instance in instances {
        let prediction = model.predict(instance)?;
        sum.add(cosine_dense(&prediction.weights, &instance.target.weights));
    }
    Ok(sum.value() / instances.len() as f64)
}
