use std::path::{Path, PathBuf};

use rand::Rng as _;

use crate::seed;
use crate::store::{self, EmbeddingStore};
use crate::vocab::Vocabulary;
use crate::{Error, Result};

/// Input vectors (the published embeddings) plus the two output vector
/// families used as prediction targets: words for window contexts and
/// structural features for feature contexts. All matrices are row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    n_words: usize,
    n_features: usize,
    pub(crate) input: Vec<f64>,
    pub(crate) word_context: Vec<f64>,
    pub(crate) feature_context: Vec<f64>,
}

impl EmbeddingModel {
    /// Input rows uniform in `[-0.5/d, 0.5/d)` from `seed`; output rows zero.
    pub fn new(n_words: usize, n_features: usize, dim: usize, seed: u64) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let mut rng = seed::rng(seed);
        let input = (0..n_words * dim)
            .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
            .collect();
        EmbeddingModel {
            dim,
            n_words,
            n_features,
            input,
            word_context: vec![0.0; n_words * dim],
            feature_context: vec![0.0; n_features * dim],
        }
    }

    pub fn zeros(n_words: usize, n_features: usize, dim: usize) -> Self {
        EmbeddingModel {
            dim,
            n_words,
            n_features,
            input: vec![0.0; n_words * dim],
            word_context: vec![0.0; n_words * dim],
            feature_context: vec![0.0; n_features * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    pub fn word_context(&self) -> &[f64] {
        &self.word_context
    }

    pub fn feature_context(&self) -> &[f64] {
        &self.feature_context
    }

    pub fn input_row(&self, id: u32) -> &[f64] {
        row(&self.input, self.dim, id)
    }

    pub fn input_row_mut(&mut self, id: u32) -> &mut [f64] {
        let d = self.dim;
        &mut self.input[id as usize * d..(id as usize + 1) * d]
    }

    pub fn word_context_row(&self, id: u32) -> &[f64] {
        row(&self.word_context, self.dim, id)
    }

    pub fn word_context_row_mut(&mut self, id: u32) -> &mut [f64] {
        let d = self.dim;
        &mut self.word_context[id as usize * d..(id as usize + 1) * d]
    }

    pub fn feature_context_row(&self, id: u32) -> &[f64] {
        row(&self.feature_context, self.dim, id)
    }

    pub fn feature_context_row_mut(&mut self, id: u32) -> &mut [f64] {
        let d = self.dim;
        &mut self.feature_context[id as usize * d..(id as usize + 1) * d]
    }

    /// Replaces the feature-context matrix with zeros of `n_features` rows.
    pub fn reset_feature_context(&mut self, n_features: usize) {
        self.n_features = n_features;
        self.feature_context = vec![0.0; n_features * self.dim];
    }

    pub fn is_finite(&self) -> bool {
        self.input
            .iter()
            .chain(&self.word_context)
            .chain(&self.feature_context)
            .all(|x| x.is_finite())
    }

    /// The input vectors as a queryable store.
    pub fn to_store(&self, vocab: &Vocabulary) -> Result<EmbeddingStore> {
        EmbeddingStore::new(vocab.items().to_vec(), self.input.clone(), self.dim)
    }

    /// Writes the input vectors in the `V d` / `word v1 … vd` text format.
    pub fn save(&self, path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<()> {
        self.check_vocab(vocab.len(), self.n_words)?;
        store::save_matrix(path, vocab.items(), &self.input, self.dim)
    }

    /// Writes the two output matrices next to `path` as `<path>.wctx` and
    /// `<path>.fctx`, in the same layout as the input vectors.
    pub fn save_contexts(
        &self,
        path: impl AsRef<Path>,
        vocab: &Vocabulary,
        features: Option<&Vocabulary>,
    ) -> Result<()> {
        let path = path.as_ref();
        self.check_vocab(vocab.len(), self.n_words)?;
        store::save_matrix(sidecar(path, "wctx"), vocab.items(), &self.word_context, self.dim)?;
        if let Some(fv) = features {
            self.check_vocab(fv.len(), self.n_features)?;
            store::save_matrix(sidecar(path, "fctx"), fv.items(), &self.feature_context, self.dim)?;
        }
        Ok(())
    }

    fn check_vocab(&self, len: usize, rows: usize) -> Result<()> {
        if len != rows {
            return Err(Error::Dimension {
                expected: rows,
                actual: len,
            });
        }
        Ok(())
    }
}

/// `<path>.<ext>` with the extension appended, not substituted.
pub fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn row(data: &[f64], dim: usize, id: u32) -> &[f64] {
    &data[id as usize * dim..(id as usize + 1) * dim]
}
