//! Frame TF-IDF representation of story blocks.
//!
//! IDF is fit on training blocks only, with idf(t) = ln(n / df(t)) and the
//! convention that frames absent from every training block get idf 0 (the
//! unsmoothed variant; df = n likewise yields 0, so ubiquitous frames carry
//! no signal). Block vectors are raw TF times IDF, L2-normalized by default.
//! Cosine similarity is scale-invariant, so the normalization flag never
//! changes a score; it matters only where vectors are averaged (the prior).

use crate::corpus::StoryBlock;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

/// Per-frame document frequencies and IDF weights over training blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct IdfModel {
    pub n: usize,
    pub df: Vec<usize>,
    idf: Vec<f64>,
}

impl IdfModel {
    fn from_counts(n: usize, df: Vec<usize>) -> Self {
        let idf = df
            .iter()
            .map(|&d| if d == 0 { 0.0 } else { (n as f64 / d as f64).ln() })
            .collect();
        IdfModel { n, df, idf }
    }

    pub fn frame_count(&self) -> usize {
        self.df.len()
    }

    pub fn idf(&self, frame: usize) -> f64 {
        self.idf[frame]
    }

    pub fn idf_weights(&self) -> &[f64] {
        &self.idf
    }

    pub fn save(&self, path: &Path, fingerprint: Option<&str>) -> Result<()> {
        let file = IdfFile {
            n: self.n,
            df: self.df.clone(),
            fingerprint: fingerprint.map(str::to_string),
        };
        let json = serde_json::to_string_pretty(&file).expect("idf serialization cannot fail");
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: IdfFile =
            serde_json::from_str(&raw).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        for (frame, &d) in file.df.iter().enumerate() {
            if d > file.n {
                return Err(Error::parse(
                    path,
                    0,
                    format!("df[{frame}] = {d} exceeds n = {}", file.n),
                ));
            }
        }
        Ok(IdfModel::from_counts(file.n, file.df))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct IdfFile {
    n: usize,
    df: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    fingerprint: Option<String>,
}

/// Fit document frequencies over training story blocks.
/// df[t] counts blocks where frame t has positive term frequency.
pub fn fit_idf(train_blocks: &[StoryBlock], frame_count: usize) -> Result<IdfModel> {
    if train_blocks.is_empty() {
        return Err(Error::invalid("cannot fit idf on an empty training set"));
    }
    let mut df = vec![0usize; frame_count];
    for block in train_blocks {
        for (&frame, &tf) in &block.frame_tf {
            if frame >= frame_count {
                return Err(Error::invalid(format!(
                    "block {}:{} references frame {frame}, but the lexicon has {frame_count}",
                    block.doc_id, block.index
                )));
            }
            if tf > 0.0 {
                df[frame] += 1;
            }
        }
    }
    Ok(IdfModel::from_counts(train_blocks.len(), df))
}

/// A dense length-F vector of non-negative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameVector {
    pub weights: Vec<f64>,
    pub normalized: bool,
}

impl FrameVector {
    pub fn zeros(dims: usize) -> Self {
        FrameVector {
            weights: vec![0.0; dims],
            normalized: true,
        }
    }

    pub fn dims(&self) -> usize {
        self.weights.len()
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    /// Scale to unit Euclidean norm; the all-zero vector stays all-zero.
    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            for w in &mut self.weights {
                *w /= norm;
            }
        }
        self.normalized = true;
    }
}

/// Multiply a block's term frequencies by the fitted IDF weights.
pub fn vectorize(block: &StoryBlock, idf: &IdfModel, normalize: bool) -> FrameVector {
    let mut weights = vec![0.0; idf.frame_count()];
    for (&frame, &tf) in &block.frame_tf {
        weights[frame] = tf * idf.idf(frame);
    }
    let mut v = FrameVector {
        weights,
        normalized: false,
    };
    if normalize {
        v.normalize();
    }
    v
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity on raw slices; 0 when either vector has zero norm.
pub(crate) fn cosine_dense(a: &[f64], b: &[f64]) -> f64 {
    let dot_ab = dot(a, b);
    let na = dot(a, a);
    let nb = dot(b, b);
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot_ab / (na * nb).sqrt()
}

/// Cosine similarity between two frame vectors.
pub fn cosine(a: &FrameVector, b: &FrameVector) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::invalid(format!(
            "cosine on mismatched lengths {} vs {}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(cosine_dense(&a.weights, &b.weights))
}

/// One (context, target) pair: `context` holds the `window` consecutive
/// block vectors ending at `anchor_index`; `target` is the next block.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub doc_id: String,
    pub anchor_index: usize,
    pub context: Vec<FrameVector>,
    pub target: FrameVector,
}

impl Instance {
    /// Context vectors concatenated in chronological order.
    pub fn flattened_context(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.context.iter().map(FrameVector::dims).sum());
        for v in &self.context {
            out.extend_from_slice(&v.weights);
        }
        out
    }
}

/// Build all (context, target) instances from per-document ordered blocks.
/// A document with B blocks yields max(B - window, 0) instances; instances
/// never cross documents. Output order: doc id, then anchor index.
pub fn build_instances(
    blocks_by_doc: &BTreeMap<String, Vec<StoryBlock>>,
    idf: &IdfModel,
    window: usize,
    normalize: bool,
) -> Result<Vec<Instance>> {
    if window < 1 {
        return Err(Error::invalid("context window must be at least 1"));
    }
    let mut instances = Vec::new();
    for (doc_id, blocks) in blocks_by_doc {
        debug_assert!(blocks.windows(2).all(|p| p[0].index + 1 == p[1].index));
        if blocks.len() <= window {
            continue;
        }
        let vectors: Vec<FrameVector> =
            blocks.iter().map(|b| vectorize(b, idf, normalize)).collect();
        for i in 0..blocks.len() - window {
            instances.push(Instance {
                doc_id: doc_id.clone(),
                anchor_index: i + window - 1,
                context: vectors[i..i + window].to_vec(),
                target: vectors[i + window].clone(),
            });
        }
    }
    Ok(instances)
}

#[derive(Debug, Serialize, Deserialize)]
struct VectorRow {
    doc_id: String,
    index: usize,
    weights: BTreeMap<usize, f64>,
    normalized: bool,
}

/// Write block vectors as sparse JSONL rows.
pub fn save_vectors(rows: &[(String, usize, FrameVector)], path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for (doc_id, index, vector) in rows {
        let weights: BTreeMap<usize, f64> = vector
            .weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(i, &w)| (i, w))
            .collect();
        let row = VectorRow {
            doc_id: doc_id.clone(),
            index: *index,
            weights,
            normalized: vector.normalized,
        };
        let line = serde_json::to_string(&row).expect("vector serialization cannot fail");
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Read sparse vector rows back into dense frame vectors.
pub fn load_vectors(path: &Path, dims: usize) -> Result<Vec<(String, usize, FrameVector)>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (line_no, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: VectorRow = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, line_no + 1, e.to_string()))?;
        let mut weights = vec![0.0; dims];
        for (frame, w) in row.weights {
            if frame >= dims {
                return Err(Error::parse(
                    path,
                    line_no + 1,
                    format!("frame id {frame} out of range for {dims} dims"),
                ));
            }
            weights[frame] = w;
        }
        out.push((
            row.doc_id,
            row.index,
            FrameVector {
                weights,
                normalized: row.normalized,
            },
        ));
    }
    Ok(out)
}
