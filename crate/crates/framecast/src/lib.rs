//! framecast: forecast the semantic frames of upcoming story blocks.
//!
//! A long document is treated as a sequence of fixed-length story blocks.
//! Each block becomes a TF-IDF vector over a frame inventory; forecasting
//! models predict the next block's vector from the current context, scored
//! by cosine similarity. The crate also renders frame vectors as word
//! clouds so the predictions are human-readable.
//!
//! Pipeline, end to end:
//! ingest/import -> story blocks -> IDF fit on training blocks ->
//! (context, target) instances -> {replay, prior, ir, dae} -> evaluation
//! tables, skip curves, ablations, word clouds.

pub mod cli;
pub mod cloudviz;
pub mod config;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod lexicon;
pub mod models;
pub mod pipeline;
pub mod representation;
mod util;

pub use error::{Error, Result};
