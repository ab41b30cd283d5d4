//! Curation, lexing and learning pipeline for (intent, code snippet) pairs.
//!
//! The crate is organised bottom-up:
//!
//! - [`numkit`]: dense tensors, hand-written layers, losses, optimizers and a
//!   finite-difference gradient checker.
//! - [`codelex`]: a small Python lexer and `<VAR_NAME>` identifier normalisation.
//! - [`corpus`]: ingestion, cleaning, de-duplication, merging and negative sampling.
//! - [`apiminer`]: frequency mining of API names from intents and import lines.
//! - [`embed`]: vocabularies, skip-gram and GloVe training, PCA projection.
//! - [`seq2seq`]: encoder/decoder LSTM trained with teacher forcing.
//! - [`classifier`]: pair features and the 100-50-25 MLP match classifier.
//! - [`evalkit`]: confusion counts, F1, ROC/PR curves and plots.
//! - [`pipeline`]: configuration, seeds, run manifests and the stage drivers.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise. Reductions
//! always combine fixed-size chunks in index order, so results do not depend
//! on the thread count.

pub mod apiminer;
pub mod classifier;
pub mod codelex;
pub mod corpus;
pub mod embed;
mod error;
pub mod evalkit;
pub mod numkit;
pub mod par;
pub mod pipeline;
pub mod seq2seq;

pub use error::{Error, Result};
