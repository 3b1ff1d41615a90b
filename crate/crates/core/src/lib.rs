//! Word embeddings trained from sentence windows and dependency-tree
//! structural features, plus shallow pair classifiers for term matching.
//!
//! The pipeline is:
//!
//! 1. [`conll`] reads pre-parsed treebanks and [`vocab`] counts words.
//! 2. [`features`] turns each parse into `(word, feature)` pairs.
//! 3. [`train`] fits skip-gram negative-sampling embeddings on window
//!    contexts, feature contexts, or both (joint and sequential regimes).
//! 4. [`store`] answers cosine / nearest-neighbour queries.
//! 5. [`classify`] and [`experiment`] score vector sets on pair-matching tasks.

pub mod classify;
pub mod conll;
pub mod error;
pub mod experiment;
pub mod features;
pub mod seed;
pub mod store;
pub mod synthetic;
pub mod train;
pub mod vocab;

pub use error::{Error, Result};
