use std::fmt;

use log::debug;
use rand::seq::SliceRandom;

use super::{Arch, Classifier, PairClassifier, PairDataset};
use crate::seed;
use crate::store::EmbeddingStore;
use crate::{Error, Result};

/// Mini-batch SGD settings plus the architecture hyper-parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierConfig {
    pub hidden: usize,
    pub slope: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Epochs without a dev-accuracy improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            hidden: 200,
            slope: 0.01,
            batch_size: 32,
            learning_rate: 0.05,
            epochs: 50,
            patience: 5,
            seed: 1,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.batch_size == 0 {
            return Err(Error::Config("hidden size and batch size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.slope > 0.0 && self.slope < 1.0) {
            return Err(Error::Config(format!(
                "leak slope must be in (0, 1), got {}",
                self.slope
            )));
        }
        Ok(())
    }

    /// A freshly initialised model for vectors of dimension `dim`.
    pub fn init(&self, arch: Arch, dim: usize) -> Result<Classifier> {
        self.validate()?;
        Classifier::new(
            arch,
            dim,
            self.hidden,
            self.slope,
            seed::derive(self.seed, "classifier-init"),
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub true_match: usize,
    pub false_match: usize,
    pub true_non_match: usize,
    pub false_non_match: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_match + self.false_match + self.true_non_match + self.false_non_match
    }

    pub fn correct(&self) -> usize {
        self.true_match + self.true_non_match
    }

    fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.true_match += 1,
            (true, false) => self.false_match += 1,
            (false, false) => self.true_non_match += 1,
            (false, true) => self.false_non_match += 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub confusion: Confusion,
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.confusion;
        write!(
            f,
            "accuracy={:.4} tp={} fp={} tn={} fn={}",
            self.accuracy, c.true_match, c.false_match, c.true_non_match, c.false_non_match
        )
    }
}

/// Accuracy and confusion counts of `model` on `data`.
pub fn evaluate<M: PairClassifier + ?Sized>(
    model: &M,
    data: &PairDataset,
    store: &EmbeddingStore,
) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::EmptyInput("evaluation dataset".into()));
    }
    let items = data.resolve(store)?;
    evaluate_resolved(model, &items, store)
}

fn evaluate_resolved<M: PairClassifier + ?Sized>(
    model: &M,
    items: &[(u32, u32, bool)],
    store: &EmbeddingStore,
) -> Result<Evaluation> {
    let mut confusion = Confusion::default();
    for &(a, b, label) in items {
        confusion.record(model.predict(store.row(a), store.row(b))?, label);
    }
    Ok(Evaluation {
        accuracy: confusion.correct() as f64 / confusion.total() as f64,
        confusion,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept, when a dev set drove selection.
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

/// Fits `model` to `train` by mini-batch SGD on the mean per-item loss.
///
/// With a non-empty `dev` set the parameters with the best dev accuracy are
/// kept and training stops after `patience` epochs without improvement.
/// The embedding store is only read.
pub fn train_classifier(
    model: &mut Classifier,
    train: &PairDataset,
    dev: Option<&PairDataset>,
    store: &EmbeddingStore,
    config: &ClassifierConfig,
) -> Result<TrainHistory> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyInput("training dataset".into()));
    }
    if model.dim() != store.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            actual: store.dim(),
        });
    }
    let mut items = train.resolve(store)?;
    let dev_items = match dev {
        Some(d) if !d.is_empty() => Some(d.resolve(store)?),
        _ => None,
    };

    let mut rng = seed::child_rng(config.seed, "classifier-shuffle");
    let mut grad = vec![0.0; model.params().len()];
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut since_best = 0;

    for epoch in 1..=config.epochs {
        items.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in items.chunks(config.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &(a, b, label) in batch {
                loss_sum += model.loss_grad(store.row(a), store.row(b), label, &mut grad)?;
            }
            let step = config.learning_rate / batch.len() as f64;
            for (p, g) in model.params_mut().iter_mut().zip(&grad) {
                *p -= step * g;
            }
        }
        if !model.is_finite() {
            return Err(Error::Diverged(format!(
                "classifier parameters non-finite after epoch {epoch}"
            )));
        }
        let train_loss = loss_sum / items.len() as f64;
        let dev_accuracy = match &dev_items {
            Some(d) => Some(evaluate_resolved(model, d, store)?.accuracy),
            None => None,
        };
        debug!("classifier epoch={epoch} loss={train_loss:.6} dev={dev_accuracy:?}");
        history.epochs.push(EpochRecord {
            epoch,
            train_loss,
            dev_accuracy,
        });

        if let Some(acc) = dev_accuracy {
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                best = Some((acc, model.params().to_vec()));
                history.best_epoch = Some(epoch);
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= config.patience {
                    history.stopped_early = true;
                    break;
                }
            }
        }
    }
    if let Some((_, params)) = best {
        model.params_mut().copy_from_slice(&params);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::LabeledPair;

    fn toy_store() -> EmbeddingStore {
        EmbeddingStore::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![1.0, 0.0, 0.0, 1.0, 0.7, 0.7],
            2,
        )
        .unwrap()
    }

    fn small_config() -> ClassifierConfig {
        ClassifierConfig {
            hidden: 4,
            ..Default::default()
        }
    }

    #[test]
    fn zero_epochs_leave_model_unchanged() {
        let store = toy_store();
        let cfg = ClassifierConfig {
            epochs: 0,
            ..small_config()
        };
        let mut model = cfg.init(Arch::Mlp, 2).unwrap();
        let before = model.clone();
        let data = PairDataset::new(vec![LabeledPair::new("a", "b", true)], "test");
        let h = train_classifier(&mut model, &data, None, &store, &cfg).unwrap();
        assert!(h.epochs.is_empty());
        assert_eq!(model, before);
    }

    #[test]
    fn empty_and_uncovered_inputs_fail() {
        let store = toy_store();
        let cfg = small_config();
        let mut model = cfg.init(Arch::Mlp, 2).unwrap();
        let empty = PairDataset::default();
        assert!(matches!(
            train_classifier(&mut model, &empty, None, &store, &cfg),
            Err(Error::EmptyInput(_))
        ));
        let uncovered = PairDataset::new(vec![LabeledPair::new("a", "zz", true)], "test");
        assert!(matches!(
            train_classifier(&mut model, &uncovered, None, &store, &cfg),
            Err(Error::UnknownWord(_))
        ));
    }

    #[test]
    fn zero_mlp_on_balanced_data_scores_half() {
        let store = toy_store();
        let model =
            Classifier::Mlp(crate::classify::MlpModel::from_params(2, 3, 0.01, vec![0.0; 3 * 4 + 3 + 3 + 1]).unwrap());
        let data = PairDataset::new(
            vec![LabeledPair::new("a", "b", true), LabeledPair::new("a", "c", false)],
            "test",
        );
        let ev = evaluate(&model, &data, &store).unwrap();
        assert_eq!(ev.accuracy, 0.5);
        assert_eq!(ev.confusion.true_non_match, 1);
        assert_eq!(ev.confusion.false_non_match, 1);
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let store = toy_store();
        let data = PairDataset::new(
            vec![
                LabeledPair::new("a", "a", true),
                LabeledPair::new("b", "b", true),
                LabeledPair::new("a", "b", false),
                LabeledPair::new("b", "a", false),
            ],
            "test",
        );
        let cfg = ClassifierConfig {
            hidden: 8,
            epochs: 30,
            ..Default::default()
        };
        let run = || {
            let mut m = cfg.init(Arch::SharedMlp, 2).unwrap();
            let h = train_classifier(&mut m, &data, None, &store, &cfg).unwrap();
            (m, h)
        };
        let (m1, h1) = run();
        let (m2, h2) = run();
        assert_eq!(m1, m2);
        assert_eq!(h1, h2);
        assert!(h1.epochs.last().unwrap().train_loss < h1.epochs[0].train_loss);
    }

    #[test]
    fn early_stopping_keeps_best_dev_parameters() {
        let store = toy_store();
        let data = PairDataset::new(
            vec![LabeledPair::new("a", "a", true), LabeledPair::new("a", "b", false)],
            "t",
        );
        let cfg = ClassifierConfig {
            hidden: 4,
            patience: 2,
            ..Default::default()
        };
        let mut m = cfg.init(Arch::Mlp, 2).unwrap();
        let h = train_classifier(&mut m, &data, Some(&data), &store, &cfg).unwrap();
        let best = h.best_epoch.unwrap();
        let best_acc = h.epochs[best - 1].dev_accuracy.unwrap();
        assert!(h.epochs.iter().all(|e| e.dev_accuracy.unwrap() <= best_acc));
        assert_eq!(evaluate(&m, &data, &store).unwrap().accuracy, best_acc);
    }
}
