//! Term-matching classifiers over pairs of frozen word vectors.

mod checkpoint;
mod models;
mod training;

use std::fmt;
use std::str::FromStr;

pub use models::{cosine, Block, MlpModel, SharedCosineModel, SharedMlpModel};
pub use training::{evaluate, train_classifier, ClassifierConfig, Confusion, EpochRecord, Evaluation, TrainHistory};

use crate::store::EmbeddingStore;
use crate::{Error, Result};

/// `x` for `x ≥ 0`, otherwise `slope · x`.
pub fn leaky_rectifier(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

/// Common interface of the three architectures.
pub trait PairClassifier {
    fn dim(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    /// Match probability, or projected cosine for the cosine model.
    fn score(&self, va: &[f64], vb: &[f64]) -> Result<f64>;

    /// Adds the gradient of the per-item loss to `grad` and returns the loss.
    fn loss_grad(&self, va: &[f64], vb: &[f64], target: bool, grad: &mut [f64]) -> Result<f64>;

    /// Strict threshold at 0.5: a score of exactly 0.5 is a non-match.
    fn decide(&self, score: f64) -> bool {
        score > 0.5
    }

    fn loss(&self, va: &[f64], vb: &[f64], target: bool) -> Result<f64> {
        let mut scratch = vec![0.0; self.params().len()];
        self.loss_grad(va, vb, target, &mut scratch)
    }

    fn predict(&self, va: &[f64], vb: &[f64]) -> Result<bool> {
        Ok(self.decide(self.score(va, vb)?))
    }
}

/// Relative error `‖g − ĝ‖ / max(‖g‖, ‖ĝ‖)` between the analytic gradient
/// and a central finite difference with step `h`. Zero when both vanish.
pub fn gradient_check<M: PairClassifier + Clone>(
    model: &M,
    va: &[f64],
    vb: &[f64],
    target: bool,
    h: f64,
) -> Result<f64> {
    let mut analytic = vec![0.0; model.params().len()];
    model.loss_grad(va, vb, target, &mut analytic)?;
    let mut probe = model.clone();
    let mut numeric = vec![0.0; analytic.len()];
    for (i, n) in numeric.iter_mut().enumerate() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let up = probe.loss(va, vb, target)?;
        probe.params_mut()[i] = orig - h;
        let down = probe.loss(va, vb, target)?;
        probe.params_mut()[i] = orig;
        *n = (up - down) / (2.0 * h);
    }
    let diff = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, n)| (a - n).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = norm(&analytic).max(norm(&numeric));
    Ok(if scale == 0.0 { 0.0 } else { diff / scale })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arch {
    Mlp,
    SharedMlp,
    SharedCosine,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::Mlp, Arch::SharedMlp, Arch::SharedCosine];

    pub fn name(self) -> &'static str {
        match self {
            Arch::Mlp => "mlp",
            Arch::SharedMlp => "shared-mlp",
            Arch::SharedCosine => "shared-cos",
        }
    }

    /// Column heading used in reports.
    pub fn title(self) -> &'static str {
        match self {
            Arch::Mlp => "MLP",
            Arch::SharedMlp => "Shared MLP",
            Arch::SharedCosine => "Shared Cosine",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mlp" => Ok(Arch::Mlp),
            "shared-mlp" => Ok(Arch::SharedMlp),
            "shared-cos" | "shared-cosine" => Ok(Arch::SharedCosine),
            _ => Err(Error::Config(format!(
                "unknown architecture {s:?} (expected mlp, shared-mlp or shared-cos)"
            ))),
        }
    }
}

/// Any of the three architectures.
#[derive(Clone, Debug, PartialEq)]
pub enum Classifier {
    Mlp(MlpModel),
    SharedMlp(SharedMlpModel),
    SharedCosine(SharedCosineModel),
}

impl Classifier {
    pub fn new(arch: Arch, dim: usize, hidden: usize, slope: f64, seed_value: u64) -> Result<Self> {
        if dim == 0 || hidden == 0 {
            return Err(Error::Config("dimension and hidden size must be positive".into()));
        }
        Ok(match arch {
            Arch::Mlp => Classifier::Mlp(MlpModel::new(dim, hidden, slope, seed_value)?),
            Arch::SharedMlp => Classifier::SharedMlp(SharedMlpModel::new(dim, hidden, slope, seed_value)?),
            Arch::SharedCosine => Classifier::SharedCosine(SharedCosineModel::new(dim, hidden, seed_value)),
        })
    }

    pub fn arch(&self) -> Arch {
        match self {
            Classifier::Mlp(_) => Arch::Mlp,
            Classifier::SharedMlp(_) => Arch::SharedMlp,
            Classifier::SharedCosine(_) => Arch::SharedCosine,
        }
    }

    pub fn hidden(&self) -> usize {
        match self {
            Classifier::Mlp(m) => m.hidden(),
            Classifier::SharedMlp(m) => m.hidden(),
            Classifier::SharedCosine(m) => m.hidden(),
        }
    }

    fn inner(&self) -> &dyn PairClassifier {
        match self {
            Classifier::Mlp(m) => m,
            Classifier::SharedMlp(m) => m,
            Classifier::SharedCosine(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn PairClassifier {
        match self {
            Classifier::Mlp(m) => m,
            Classifier::SharedMlp(m) => m,
            Classifier::SharedCosine(m) => m,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|x| x.is_finite())
    }
}

impl PairClassifier for Classifier {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn params(&self) -> &[f64] {
        self.inner().params()
    }

    fn params_mut(&mut self) -> &mut [f64] {
        self.inner_mut().params_mut()
    }

    fn score(&self, va: &[f64], vb: &[f64]) -> Result<f64> {
        self.inner().score(va, vb)
    }

    fn loss_grad(&self, va: &[f64], vb: &[f64], target: bool, grad: &mut [f64]) -> Result<f64> {
        self.inner().loss_grad(va, vb, target, grad)
    }

    fn decide(&self, score: f64) -> bool {
        self.inner().decide(score)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabeledPair {
    pub a: String,
    pub b: String,
    pub label: bool,
}

impl LabeledPair {
    pub fn new(a: impl Into<String>, b: impl Into<String>, label: bool) -> Self {
        LabeledPair {
            a: a.into(),
            b: b.into(),
            label,
        }
    }
}

/// Labelled word pairs plus a free-form tag naming where they came from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairDataset {
    pub items: Vec<LabeledPair>,
    pub source: String,
}

impl PairDataset {
    pub fn new(items: Vec<LabeledPair>, source: impl Into<String>) -> Self {
        PairDataset {
            items,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledPair> {
        self.items.iter()
    }

    pub fn matches(&self) -> usize {
        self.items.iter().filter(|p| p.label).count()
    }

    /// Store rows for every item; fails on the first uncovered word.
    pub fn resolve(&self, store: &EmbeddingStore) -> Result<Vec<(u32, u32, bool)>> {
        self.items
            .iter()
            .map(|p| {
                let a = store.id(&p.a).ok_or_else(|| Error::UnknownWord(p.a.clone()))?;
                let b = store.id(&p.b).ok_or_else(|| Error::UnknownWord(p.b.clone()))?;
                Ok((a, b, p.label))
            })
            .collect()
    }
}
