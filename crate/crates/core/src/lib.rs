//! Word embeddings that blend each word's own vector with the vectors of its
//! morphologically similar neighbors.
//!
//! The pipeline runs [`corpus`] (cleaning, vocabulary, noise distribution) →
//! [`relation`] (top-k morphological neighbors per word, built from the
//! similarities in [`morphology`]) → [`model`] (Skip-gram with negative
//! sampling over the blended input) → [`eval`] (analogies and word
//! similarity).

pub mod cli;
pub mod config;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod model;
pub mod morphology;
pub mod relation;

pub use error::{Error, Result};
