//! Document ingestion, story-block segmentation, and corpus splitting.
//!
//! Two ways in: `ingest_document` runs the raw-text pipeline (transliterate,
//! chapter cleanup, sentence split, trigger tagging), and `import_parsed`
//! reads documents whose frame annotations were produced elsewhere. Either
//! way a document becomes an ordered list of sentences with per-frame
//! weights; `segment_blocks` chunks those into fixed-length story blocks.

pub mod text;

pub use text::{clean_book, looks_like_html, split_sentences, tokenize, transliterate, Rejection};

use crate::error::{Error, Result};
use crate::lexicon::{tag_sentence, FrameLexicon};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

/// One sentence with its evoked-frame weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<String>,
    pub frame_counts: BTreeMap<usize, f64>,
}

/// One book or abstract, cleaned and tagged.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

/// A fixed-length run of consecutive sentences with aggregated frame
/// term frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct StoryBlock {
    pub doc_id: String,
    pub index: usize,
    pub sentence_span: (usize, usize),
    pub frame_tf: BTreeMap<usize, f64>,
}

/// Document-granularity train/valid/test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train: Vec<String>,
    pub valid: Vec<String>,
    pub test: Vec<String>,
    pub ratios: (f64, f64, f64),
    pub seed: u64,
}

/// Optional predicates applied before the chapter heuristics.
#[derive(Debug, Clone, Default)]
pub struct IngestFilters {
    pub min_bytes: Option<usize>,
    pub reject_html: bool,
}

/// Run the raw-text pipeline on one document.
pub fn ingest_document(
    id: &str,
    raw: &str,
    lexicon: &FrameLexicon,
    filters: &IngestFilters,
) -> std::result::Result<Document, Rejection> {
    if let Some(min) = filters.min_bytes {
        if raw.len() < min {
            return Err(Rejection::BelowMinBytes {
                size: raw.len(),
                min,
            });
        }
    }
    if filters.reject_html && looks_like_html(raw) {
        return Err(Rejection::HtmlDetected);
    }
    let ascii = transliterate(raw);
    let cleaned = clean_book(&ascii)?;
    let sentences: Vec<Sentence> = split_sentences(&cleaned)
        .into_iter()
        .map(|text| {
            let tokens = tokenize(&text);
            let frame_counts = tag_sentence(&tokens, lexicon);
            Sentence {
                text,
                tokens,
                frame_counts,
            }
        })
        .collect();
    if sentences.is_empty() {
        return Err(Rejection::NoSentences);
    }
    Ok(Document {
        id: id.to_string(),
        sentences,
    })
}

/// Chunk a document into non-overlapping blocks of exactly `block_size`
/// sentences; a trailing remainder is dropped. Block term frequencies are
/// the elementwise sums of member sentence counts.
pub fn segment_blocks(doc: &Document, block_size: usize) -> Vec<StoryBlock> {
    assert!(block_size >= 1, "block size must be positive");
    let count = doc.sentences.len() / block_size;
    let mut blocks = Vec::with_capacity(count);
    for index in 0..count {
        let start = index * block_size;
        let end = start + block_size;
        let mut frame_tf: BTreeMap<usize, f64> = BTreeMap::new();
        for sentence in &doc.sentences[start..end] {
            for (&frame, &w) in &sentence.frame_counts {
                *frame_tf.entry(frame).or_insert(0.0) += w;
            }
        }
        blocks.push(StoryBlock {
            doc_id: doc.id.clone(),
            index,
            sentence_span: (start, end),
            frame_tf,
        });
    }
    blocks
}

#[derive(Debug, Serialize, Deserialize)]
struct ParsedSentence {
    text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    frames: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame_weights: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParsedDocument {
    id: String,
    sentences: Vec<ParsedSentence>,
}

/// Read a parsed-corpus JSONL file: one document per line, frame names
/// resolved against the lexicon. This is the fidelity path for annotations
/// produced by an external frame parser.
pub fn import_parsed(path: &Path, lexicon: &FrameLexicon) -> Result<Vec<Document>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (line_no, line) in raw.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: ParsedDocument = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        if !seen.insert(parsed.id.clone()) {
            return Err(Error::parse(
                path,
                line_no,
                format!("duplicate document id \"{}\"", parsed.id),
            ));
        }
        let mut sentences = Vec::with_capacity(parsed.sentences.len());
        for ps in parsed.sentences {
            let mut frame_counts: BTreeMap<usize, f64> = BTreeMap::new();
            let mut resolve = |name: &str| -> Result<usize> {
                lexicon.frame_id(name).ok_or_else(|| {
                    Error::parse(path, line_no, format!("unknown frame name \"{name}\""))
                })
            };
            if let Some(names) = &ps.frames {
                for name in names {
                    let id = resolve(name)?;
                    *frame_counts.entry(id).or_insert(0.0) += 1.0;
                }
            }
            if let Some(weights) = &ps.frame_weights {
                for (name, &w) in weights {
                    if !(w >= 0.0) {
                        return Err(Error::parse(
                            path,
                            line_no,
                            format!("negative weight {w} for frame \"{name}\""),
                        ));
                    }
                    let id = resolve(name)?;
                    *frame_counts.entry(id).or_insert(0.0) += w;
                }
            }
            let tokens = tokenize(&ps.text);
            sentences.push(Sentence {
                text: ps.text,
                tokens,
                frame_counts,
            });
        }
        docs.push(Document {
            id: parsed.id,
            sentences,
        });
    }
    Ok(docs)
}

/// Write documents in the parsed-corpus JSONL schema, with frame ids
/// rendered back to names.
pub fn save_corpus(docs: &[Document], lexicon: &FrameLexicon, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for doc in docs {
        let parsed = ParsedDocument {
            id: doc.id.clone(),
            sentences: doc
                .sentences
                .iter()
                .map(|s| {
                    let weights: BTreeMap<String, f64> = s
                        .frame_counts
                        .iter()
                        .map(|(&id, &w)| {
                            let name = lexicon
                                .frame(id)
                                .map(|f| f.name.clone())
                                .unwrap_or_else(|| id.to_string());
                            (name, w)
                        })
                        .collect();
                    ParsedSentence {
                        text: s.text.clone(),
                        frames: None,
                        frame_weights: Some(weights),
                    }
                })
                .collect(),
        };
        let line = serde_json::to_string(&parsed).expect("corpus serialization cannot fail");
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct BlockDumpRow {
    doc_id: String,
    index: usize,
    tf: BTreeMap<usize, f64>,
}

/// Write story blocks as JSONL rows of raw term frequencies.
pub fn save_blocks(blocks: &[StoryBlock], path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for block in blocks {
        let row = BlockDumpRow {
            doc_id: block.doc_id.clone(),
            index: block.index,
            tf: block.frame_tf.clone(),
        };
        let line = serde_json::to_string(&row).expect("block serialization cannot fail");
        writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Deterministically shuffle document ids by seed, then partition them
/// contiguously by ratio. All parts after the first are floored; the first
/// part takes the remainder.
pub fn split_corpus(docs: &[Document], ratios: (f64, f64, f64), seed: u64) -> Result<CorpusSplit> {
    if docs.is_empty() {
        return Err(Error::invalid("cannot split an empty corpus"));
    }
    let (r_train, r_valid, r_test) = ratios;
    if r_train < 0.0 || r_valid < 0.0 || r_test < 0.0 {
        return Err(Error::invalid("split ratios must be non-negative"));
    }
    let sum = r_train + r_valid + r_test;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split ratios sum to {sum}, expected 1")));
    }
    let nonzero_parts = [r_train, r_valid, r_test].iter().filter(|&&r| r > 0.0).count();
    if docs.len() < nonzero_parts {
        return Err(Error::invalid(format!(
            "{} documents cannot cover {} nonzero split parts",
            docs.len(),
            nonzero_parts
        )));
    }

    let mut ids: Vec<String> = docs.iter().map(|d| d.id.clone()).collect();
    ids.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let n = ids.len();
    let n_valid = (r_valid * n as f64).floor() as usize;
    let n_test = (r_test * n as f64).floor() as usize;
    let n_train = n - n_valid - n_test;

    let train = ids[..n_train].to_vec();
    let valid = ids[n_train..n_train + n_valid].to_vec();
    let test = ids[n_train + n_valid..].to_vec();
    Ok(CorpusSplit {
        train,
        valid,
        test,
        ratios,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{LexicalUnit, Pos};
    use proptest::prelude::*;

    fn lex() -> FrameLexicon {
        FrameLexicon::from_frames(vec![
            (
                "Kinship".into(),
                vec![LexicalUnit {
                    lemma: "father".into(),
                    pos: Pos::Noun,
                }],
            ),
            (
                "State_continue".into(),
                vec![LexicalUnit {
                    lemma: "remain".into(),
                    pos: Pos::Verb,
                }],
            ),
        ])
        .unwrap()
    }

    fn doc_with_sentences(n: usize) -> Document {
        let sentences = (0..n)
            .map(|i| Sentence {
                text: format!("s{i}"),
                tokens: vec![format!("s{i}")],
                frame_counts: BTreeMap::from([(i % 2, 1.0)]),
            })
            .collect();
        Document {
            id: "d".into(),
            sentences,
        }
    }

    #[test]
    fn block_counts_floor() {
        assert_eq!(segment_blocks(&doc_with_sentences(23), 5).len(), 4);
        assert_eq!(segment_blocks(&doc_with_sentences(5), 5).len(), 1);
        assert_eq!(segment_blocks(&doc_with_sentences(9), 10).len(), 0);
    }

    #[test]
    fn block_spans_and_mass() {
        let doc = doc_with_sentences(23);
        let blocks = segment_blocks(&doc, 5);
        assert_eq!(blocks[0].sentence_span, (0, 5));
        assert_eq!(blocks[3].sentence_span, (15, 20));
        // mass conservation over covered sentences
        let block_mass: f64 = blocks
            .iter()
            .flat_map(|b| b.frame_tf.values())
            .sum();
        let sentence_mass: f64 = doc.sentences[..20]
            .iter()
            .flat_map(|s| s.frame_counts.values())
            .sum();
        assert_eq!(block_mass, sentence_mass);
    }

    #[test]
    fn ingest_pipeline_tags_frames() {
        let lexicon = lex();
        let raw = "front matter\nChapter 1\nHis father remained silent. Nothing more.\nChapter 2\nThe end.\n";
        let doc = ingest_document("b1", raw, &lexicon, &IngestFilters::default()).unwrap();
        assert_eq!(doc.id, "b1");
        let tagged: f64 = doc
            .sentences
            .iter()
            .flat_map(|s| s.frame_counts.values())
            .sum();
        assert_eq!(tagged, 2.0); // father + remained
    }

    #[test]
    fn ingest_filters_apply() {
        let lexicon = lex();
        let filters = IngestFilters {
            min_bytes: Some(10_000),
            reject_html: true,
        };
        let err = ingest_document("b", "tiny", &lexicon, &filters).unwrap_err();
        assert!(matches!(err, Rejection::BelowMinBytes { .. }));
        let filters = IngestFilters {
            min_bytes: None,
            reject_html: true,
        };
        let err = ingest_document("b", "<html><body>x</body></html>", &lexicon, &filters)
            .unwrap_err();
        assert_eq!(err, Rejection::HtmlDetected);
    }

    #[test]
    fn import_resolves_names_and_reports_lines() {
        let lexicon = lex();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        std::fs::write(
            &path,
            "{\"id\":\"b1\",\"sentences\":[{\"text\":\"x\",\"frames\":[\"Kinship\"]}]}\n",
        )
        .unwrap();
        let docs = import_parsed(&path, &lexicon).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].sentences[0].frame_counts[&0], 1.0);

        std::fs::write(
            &path,
            "{\"id\":\"b1\",\"sentences\":[]}\n{\"id\":\"b2\",\"sentences\":[{\"text\":\"x\",\"frames\":[\"NotAFrame\"]}]}\n",
        )
        .unwrap();
        let err = import_parsed(&path, &lexicon).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("NotAFrame"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn import_empty_file() {
        let lexicon = lex();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(import_parsed(&path, &lexicon).unwrap().is_empty());
    }

    #[test]
    fn corpus_round_trip() {
        let lexicon = lex();
        let raw = "Chapter 1\nHis father remained silent. More text here.\nChapter 2\nend.\n";
        let doc = ingest_document("b1", raw, &lexicon, &IngestFilters::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        save_corpus(&[doc.clone()], &lexicon, &path).unwrap();
        let loaded = import_parsed(&path, &lexicon).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].id, doc.id);
        for (a, b) in loaded[0].sentences.iter().zip(&doc.sentences) {
            assert_eq!(a.text, b.text);
            assert_eq!(a.frame_counts, b.frame_counts);
        }
    }

    fn docs_with_ids(n: usize) -> Vec<Document> {
        (0..n)
            .map(|i| Document {
                id: format!("d{i:03}"),
                sentences: vec![],
            })
            .collect()
    }

    #[test]
    fn split_sizes_floor_then_remainder_to_train() {
        let split = split_corpus(&docs_with_ids(10), (0.7, 0.1, 0.2), 7).unwrap();
        assert_eq!(
            (split.train.len(), split.valid.len(), split.test.len()),
            (7, 1, 2)
        );
        let split = split_corpus(&docs_with_ids(4794), (0.7, 0.1, 0.2), 7).unwrap();
        assert_eq!(
            (split.train.len(), split.valid.len(), split.test.len()),
            (3357, 479, 958)
        );
    }

    #[test]
    fn split_deterministic_and_disjoint() {
        let docs = docs_with_ids(17);
        let a = split_corpus(&docs, (0.7, 0.1, 0.2), 42).unwrap();
        let b = split_corpus(&docs, (0.7, 0.1, 0.2), 42).unwrap();
        assert_eq!(a, b);
        let c = split_corpus(&docs, (0.7, 0.1, 0.2), 43).unwrap();
        assert_ne!(a.train, c.train);
    }

    #[test]
    fn split_errors() {
        assert!(split_corpus(&[], (0.7, 0.1, 0.2), 1).is_err());
        assert!(split_corpus(&docs_with_ids(2), (0.7, 0.1, 0.2), 1).is_err());
        assert!(split_corpus(&docs_with_ids(5), (0.5, 0.5, 0.5), 1).is_err());
    }

    proptest! {
        /// The split is a partition of all document ids.
        #[test]
        fn split_is_partition(n in 3usize..60, seed in 0u64..1000) {
            let docs = docs_with_ids(n);
            let split = split_corpus(&docs, (0.7, 0.1, 0.2), seed).unwrap();
            let mut all: Vec<String> = split
                .train.iter().chain(&split.valid).chain(&split.test).cloned().collect();
            prop_assert_eq!(all.len(), n);
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), n);
        }

        /// Block count is floor(sentences / block size), and every block
        /// holds exactly the configured number of sentences.
        #[test]
        fn block_count_identity(s in 0usize..60, l in 1usize..12) {
            let doc = doc_with_sentences(s);
            let blocks = segment_blocks(&doc, l);
            prop_assert_eq!(blocks.len(), s / l);
            for b in &blocks {
                prop_assert_eq!(b.sentence_span.1 - b.sentence_span.0, l);
            }
        }
    }
}
