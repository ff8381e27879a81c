//! Frame inventory and trigger-based sentence tagging.
//!
//! A [`FrameLexicon`] holds the frame inventory with each frame's lexical
//! units (the terms that can trigger it) and an inverted index from lemma
//! to frame ids. [`tag_sentence`] turns a tokenized sentence into per-frame
//! weights by lemma lookup: each matched trigger contributes total weight 1,
//! split equally across its candidate frames. No trained parser involved;
//! externally parsed annotations enter through the corpus import path.

mod lemma;

pub use lemma::lemmatize;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

/// Part of speech of a lexical unit. Only used to group word-cloud panels;
/// trigger matching ignores it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

/// A (lemma, part-of-speech) pair that evokes a frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexicalUnit {
    pub lemma: String,
    pub pos: Pos,
}

impl LexicalUnit {
    /// True when the lemma spans multiple words ("bring about").
    pub fn is_multiword(&self) -> bool {
        self.lemma.contains(' ')
    }

    fn word_count(&self) -> usize {
        self.lemma.split(' ').count()
    }
}

/// One semantic frame: a stable integer id, a unique name, and the lexical
/// units that trigger it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub id: usize,
    pub name: String,
    pub lexical_units: Vec<LexicalUnit>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FrameSpec {
    name: String,
    lexical_units: Vec<LexicalUnit>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LexiconFile {
    frames: Vec<FrameSpec>,
}

/// The frame inventory plus the trigger index. Immutable after load and
/// safe to share across threads.
#[derive(Debug, Clone)]
pub struct FrameLexicon {
    frames: Vec<Frame>,
    trigger_index: HashMap<String, Vec<usize>>,
    name_index: HashMap<String, usize>,
    max_trigger_words: usize,
}

impl FrameLexicon {
    /// Build a lexicon from (name, lexical units) pairs. Ids are assigned
    /// by position. Fails on duplicate names or empty lemmas.
    pub fn from_frames(specs: Vec<(String, Vec<LexicalUnit>)>) -> Result<Self> {
        let mut frames = Vec::with_capacity(specs.len());
        let mut name_index = HashMap::new();
        let mut trigger_index: HashMap<String, Vec<usize>> = HashMap::new();
        let mut max_trigger_words = 1;

        for (id, (name, units)) in specs.into_iter().enumerate() {
            if name.trim().is_empty() {
                return Err(Error::invalid(format!("frame {id} has an empty name")));
            }
            if name_index.insert(name.clone(), id).is_some() {
                return Err(Error::invalid(format!("duplicate frame name \"{name}\"")));
            }
            let mut normalized = Vec::with_capacity(units.len());
            for unit in units {
                let lemma = unit.lemma.trim().to_lowercase();
                if lemma.is_empty() {
                    return Err(Error::invalid(format!(
                        "frame \"{name}\" has a lexical unit with an empty lemma"
                    )));
                }
                let lu = LexicalUnit {
                    lemma,
                    pos: unit.pos,
                };
                max_trigger_words = max_trigger_words.max(lu.word_count());
                let ids = trigger_index.entry(lu.lemma.clone()).or_default();
                if !ids.contains(&id) {
                    ids.push(id);
                }
                normalized.push(lu);
            }
            frames.push(Frame {
                id,
                name,
                lexical_units: normalized,
            });
        }
        for ids in trigger_index.values_mut() {
            ids.sort_unstable();
        }
        Ok(FrameLexicon {
            frames,
            trigger_index,
            name_index,
            max_trigger_words,
        })
    }

    /// Number of frames F. Vector dimensionality everywhere downstream.
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn frame(&self, id: usize) -> Option<&Frame> {
        self.frames.get(id)
    }

    pub fn frame_id(&self, name: &str) -> Option<usize> {
        self.name_index.get(name).copied()
    }

    /// Frame ids triggered by a lemma (single- or multi-word), ascending.
    pub fn frames_for_lemma(&self, lemma: &str) -> Option<&[usize]> {
        self.trigger_index.get(lemma).map(Vec::as_slice)
    }

    pub fn trigger_count(&self) -> usize {
        self.trigger_index.len()
    }

    /// Serialize back to the lexicon file schema (ids implied by order).
    pub fn to_json(&self) -> String {
        let file = LexiconFile {
            frames: self
                .frames
                .iter()
                .map(|f| FrameSpec {
                    name: f.name.clone(),
                    lexical_units: f.lexical_units.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("lexicon serialization cannot fail")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Load a lexicon from its JSON file. Ids are assigned by array order.
pub fn load_lexicon(path: &Path) -> Result<FrameLexicon> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: LexiconFile = serde_json::from_str(&raw)
        .map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    FrameLexicon::from_frames(
        file.frames
            .into_iter()
            .map(|f| (f.name, f.lexical_units))
            .collect(),
    )
}

/// Tag a tokenized sentence with evoked frames.
///
/// Scans left to right, preferring the longest multiword trigger at each
/// position; tokens consumed by a multiword match are not re-matched. A
/// trigger with k candidate frames adds 1/k to each of them.
pub fn tag_sentence<T: AsRef<str>>(tokens: &[T], lexicon: &FrameLexicon) -> BTreeMap<usize, f64> {
    let lemmas: Vec<String> = tokens.iter().map(|t| lemmatize(t.as_ref())).collect();
    let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
    let mut add = |ids: &[usize], weights: &mut BTreeMap<usize, f64>| {
        let share = 1.0 / ids.len() as f64;
        for &id in ids {
            *weights.entry(id).or_insert(0.0) += share;
        }
    };

    let n = lemmas.len();
    let mut i = 0;
    while i < n {
        let mut consumed = 1;
        let longest = lexicon.max_trigger_words.min(n - i);
        let mut matched = false;
        for k in (2..=longest).rev() {
            let key = lemmas[i..i + k].join(" ");
            if let Some(ids) = lexicon.frames_for_lemma(&key) {
                add(ids, &mut weights);
                consumed = k;
                matched = true;
                break;
            }
        }
        if !matched {
            if let Some(ids) = lexicon.frames_for_lemma(&lemmas[i]) {
                add(ids, &mut weights);
            }
        }
        i += consumed;
    }
    weights
}
