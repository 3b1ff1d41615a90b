//! Exact (full-softmax) evaluation of the combined log-likelihood, for
//! monitoring small models.

use std::collections::HashMap;

use super::model::EmbeddingModel;
use super::sgns::dot;
use super::trainer::{IdCorpus, IdPairs, TrainConfig};
use crate::{Error, Result};

/// Largest `V · Fv` accepted by [`joint_objective`].
pub const EXACT_OBJECTIVE_LIMIT: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveTerms {
    /// `(1/T) Σ_t Σ_j log p(w_{t+j} | w_t)`
    pub text: f64,
    /// `(1/|P|) Σ_(w,f) log p(f | w)`, before weighting
    pub feature: f64,
    /// `text + alpha * feature`
    pub total: f64,
}

/// Combined objective with `p(c | w) = softmax over all c of u_w · v_c`,
/// using word-context rows for window contexts and feature-context rows for
/// features. Larger is better.
pub fn joint_objective(
    model: &EmbeddingModel,
    corpus: &IdCorpus,
    pairs: &IdPairs,
    config: &TrainConfig,
) -> Result<ObjectiveTerms> {
    let size = model.n_words() as u64 * model.n_features() as u64;
    if size > EXACT_OBJECTIVE_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: EXACT_OBJECTIVE_LIMIT,
        });
    }

    let mut word_norm = HashMap::new();
    let mut text = 0.0;
    for s in corpus.sentences() {
        let n = s.len();
        for t in 0..n {
            let center = s[t];
            let log_z = *word_norm
                .entry(center)
                .or_insert_with(|| log_partition(model.input_row(center), model.word_context(), model.dim()));
            let lo = t.saturating_sub(config.window);
            let hi = (t + config.window).min(n - 1);
            for j in (lo..=hi).filter(|&j| j != t) {
                text += dot(model.input_row(center), model.word_context_row(s[j])) - log_z;
            }
        }
    }
    if corpus.tokens() > 0 {
        text /= corpus.tokens() as f64;
    }

    let mut feature_norm = HashMap::new();
    let mut feature = 0.0;
    for &(w, f) in pairs.pairs() {
        let log_z = *feature_norm
            .entry(w)
            .or_insert_with(|| log_partition(model.input_row(w), model.feature_context(), model.dim()));
        feature += dot(model.input_row(w), model.feature_context_row(f)) - log_z;
    }
    if !pairs.is_empty() {
        feature /= pairs.len() as f64;
    }

    Ok(ObjectiveTerms {
        text,
        feature,
        total: text + config.alpha * feature,
    })
}

/// `log Σ_c exp(u · v_c)` over every row of `contexts`.
fn log_partition(u: &[f64], contexts: &[f64], dim: usize) -> f64 {
    let scores: Vec<f64> = contexts.chunks_exact(dim).map(|v| dot(u, v)).collect();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(alpha: f64, window: usize) -> TrainConfig {
        TrainConfig {
            alpha,
            window,
            ..Default::default()
        }
    }

    #[test]
    fn zero_model_is_uniform() {
        let (v, fv) = (7, 5);
        let model = EmbeddingModel::zeros(v, fv, 3);
        let corpus = IdCorpus::from_ids(vec![vec![0, 1, 2, 3], vec![4, 5], vec![6]]);
        let pairs = IdPairs::from_ids(vec![(0, 0), (1, 4), (2, 2)]);
        let cfg = config(0.7, 2);
        let got = joint_objective(&model, &corpus, &pairs, &cfg).unwrap();
        // windows: 4 tokens with c=2 -> 10, 2 tokens -> 2, 1 token -> 0; T = 7
        let avg_degree = 12.0 / 7.0;
        let expected = -avg_degree * (v as f64).ln() - 0.7 * (fv as f64).ln();
        assert!((got.total - expected).abs() < 1e-12);
    }

    #[test]
    fn alpha_zero_is_text_term() {
        let mut model = EmbeddingModel::new(4, 3, 2, 1);
        model.feature_context_row_mut(1).copy_from_slice(&[0.3, -0.1]);
        let corpus = IdCorpus::from_ids(vec![vec![0, 1, 2, 3]]);
        let pairs = IdPairs::from_ids(vec![(0, 1)]);
        let got = joint_objective(&model, &corpus, &pairs, &config(0.0, 1)).unwrap();
        assert_eq!(got.total, got.text);
        assert!(got.feature < 0.0);
    }

    #[test]
    fn refuses_large_models() {
        let model = EmbeddingModel::zeros(2000, 1000, 1);
        let err = joint_objective(&model, &IdCorpus::default(), &IdPairs::default(), &config(1.0, 1));
        assert!(matches!(err, Err(Error::TooLarge { size: 2_000_000, .. })));
    }

    #[test]
    fn hand_set_three_word_model() {
        // Independent softmax over three candidates, written out longhand.
        let mut model = EmbeddingModel::zeros(3, 0, 2);
        model.input_row_mut(0).copy_from_slice(&[1.0, 0.0]);
        model.input_row_mut(1).copy_from_slice(&[0.0, 1.0]);
        model.input_row_mut(2).copy_from_slice(&[0.5, 0.5]);
        model.word_context_row_mut(0).copy_from_slice(&[0.2, 0.1]);
        model.word_context_row_mut(1).copy_from_slice(&[-0.3, 0.4]);
        model.word_context_row_mut(2).copy_from_slice(&[0.6, -0.2]);
        let corpus = IdCorpus::from_ids(vec![vec![0, 1, 2]]);
        let got = joint_objective(&model, &corpus, &IdPairs::default(), &config(1.0, 1)).unwrap();

        let u: [[f64; 2]; 3] = [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]];
        let v = [[0.2, 0.1], [-0.3, 0.4], [0.6, -0.2]];
        let logp = |w: usize, c: usize| {
            let s = |k: usize| u[w][0] * v[k][0] + u[w][1] * v[k][1];
            let z = s(0).exp() + s(1).exp() + s(2).exp();
            (s(c).exp() / z).ln()
        };
        let expected = (logp(0, 1) + logp(1, 0) + logp(1, 2) + logp(2, 1)) / 3.0;
        assert!((got.text - expected).abs() < 1e-12, "{} vs {}", got.text, expected);
    }
}
