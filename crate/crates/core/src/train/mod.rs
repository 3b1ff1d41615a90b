//! Skip-gram negative-sampling training over window contexts and
//! structural-feature contexts.

mod model;
mod objective;
mod sampler;
mod schedule;
mod sgns;
mod trainer;

pub use model::{sidecar, EmbeddingModel};
pub use objective::{joint_objective, ObjectiveTerms, EXACT_OBJECTIVE_LIMIT};
pub use sampler::{NegativeSampler, UnigramTable};
pub use schedule::{feature_updates_due, window_events, LearningRate};
pub use sgns::{
    dot, log_sigmoid, sgns_pair_grad, sgns_pair_loss, sgns_step, sigmoid, DenseRows, Rows, Scratch, SgnsGradient,
    SharedRows,
};
pub use trainer::{EpochStat, IdCorpus, IdPairs, Mode, Term, TrainConfig, TrainReport, Trainer, UpdateEvent};

use crate::Result;

/// One SGD step for `(center, positive)` against the chosen context family,
/// drawing negatives from `sampler`. Returns the pre-update loss.
pub fn sgns_update(
    model: &mut EmbeddingModel,
    center: u32,
    positive: u32,
    family: ContextFamily,
    sampler: &mut NegativeSampler,
    negatives: usize,
    lr: f64,
) -> Result<f64> {
    let (rows, n_out) = match family {
        ContextFamily::Word => (model.n_words(), model.n_words()),
        ContextFamily::Feature => (model.n_words(), model.n_features()),
    };
    if center as usize >= rows || positive as usize >= n_out {
        return Err(crate::Error::Config(format!(
            "id out of range: center {center} (< {rows}), positive {positive} (< {n_out})"
        )));
    }
    let mut negs = Vec::with_capacity(negatives);
    sampler.negatives(positive, negatives, &mut negs);
    if let Some(&bad) = negs.iter().find(|&&n| n as usize >= n_out) {
        return Err(crate::Error::Config(format!(
            "sampler produced id {bad} beyond {n_out} rows"
        )));
    }
    let d = model.dim();
    let mut scratch = Scratch::new(d);
    let mut input = DenseRows::new(&mut model.input, d);
    let loss = match family {
        ContextFamily::Word => sgns_step(
            &mut input,
            &mut DenseRows::new(&mut model.word_context, d),
            center,
            positive,
            &negs,
            lr,
            &mut scratch,
        ),
        ContextFamily::Feature => sgns_step(
            &mut input,
            &mut DenseRows::new(&mut model.feature_context, d),
            center,
            positive,
            &negs,
            lr,
            &mut scratch,
        ),
    };
    Ok(loss)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContextFamily {
    Word,
    Feature,
}
