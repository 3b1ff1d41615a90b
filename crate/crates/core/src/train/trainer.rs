//! Training loops for the four regimes: window text only, feature pairs
//! only, joint (interleaved), and sequential (text, then feature refinement).

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use log::{debug, info};
use rand::seq::SliceRandom;
use rand::Rng as _;

use super::model::EmbeddingModel;
use super::sampler::{NegativeSampler, UnigramTable};
use super::schedule::{feature_updates_due, window_events, LearningRate};
use super::sgns::{sgns_step, DenseRows, Rows, Scratch, SharedRows};
use crate::conll::ParsedSentence;
use crate::features::FeaturePairSet;
use crate::seed::{self, Rng};
use crate::vocab::Vocabulary;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Text,
    Features,
    Joint,
    Sequential,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Text => "text",
            Mode::Features => "features",
            Mode::Joint => "joint",
            Mode::Sequential => "sequential",
        }
    }

    pub fn uses_text(self) -> bool {
        !matches!(self, Mode::Features)
    }

    pub fn uses_features(self) -> bool {
        !matches!(self, Mode::Text)
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Mode::Text),
            "features" | "feat" => Ok(Mode::Features),
            "joint" => Ok(Mode::Joint),
            "sequential" | "seq" => Ok(Mode::Sequential),
            _ => Err(Error::Config(format!("unknown training mode {s:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    /// Context window on each side of the center word.
    pub window: usize,
    /// Negatives drawn per positive.
    pub negatives: usize,
    /// Weight of the feature term relative to the text term.
    pub alpha: f64,
    pub lr_start: f64,
    pub lr_min: f64,
    pub epochs: usize,
    /// Epochs of feature refinement in sequential mode; `None` means `epochs`.
    pub feature_epochs: Option<usize>,
    pub mode: Mode,
    pub seed: u64,
    pub threads: usize,
    /// Frequent-word subsampling threshold; 0 disables it.
    pub subsample: f64,
    pub sampling_exponent: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            alpha: 1.0,
            lr_start: 0.025,
            lr_min: 1e-4,
            epochs: 5,
            feature_epochs: None,
            mode: Mode::Joint,
            seed: 1,
            threads: 1,
            subsample: 0.0,
            sampling_exponent: 0.75,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.dim == 0 {
            return fail("dim must be positive");
        }
        if self.window == 0 {
            return fail("window must be positive");
        }
        if self.negatives == 0 {
            return fail("negatives must be positive");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return fail("alpha must be a finite value >= 0");
        }
        if !(self.lr_min > 0.0 && self.lr_min <= self.lr_start && self.lr_start.is_finite()) {
            return fail("learning rates must satisfy 0 < lr_min <= lr_start");
        }
        if self.epochs == 0 {
            return fail("epochs must be positive");
        }
        if self.threads == 0 {
            return fail("threads must be positive");
        }
        if !(self.subsample >= 0.0 && self.subsample.is_finite()) {
            return fail("subsample threshold must be >= 0");
        }
        if !(self.sampling_exponent >= 0.0 && self.sampling_exponent.is_finite()) {
            return fail("sampling exponent must be >= 0");
        }
        Ok(())
    }

    fn refine_epochs(&self) -> usize {
        self.feature_epochs.unwrap_or(self.epochs)
    }
}

/// Sentences as vocabulary ids with out-of-vocabulary tokens removed, so
/// windows close over the gaps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdCorpus {
    sentences: Vec<Vec<u32>>,
    tokens: u64,
}

impl IdCorpus {
    pub fn new(sentences: &[ParsedSentence], vocab: &Vocabulary) -> Self {
        Self::from_ids(
            sentences
                .iter()
                .map(|s| s.forms().filter_map(|w| vocab.id(w)).collect())
                .collect(),
        )
    }

    pub fn from_ids(sentences: Vec<Vec<u32>>) -> Self {
        let tokens = sentences.iter().map(|s| s.len() as u64).sum();
        IdCorpus { sentences, tokens }
    }

    pub fn sentences(&self) -> &[Vec<u32>] {
        &self.sentences
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// In-vocabulary token count.
    pub fn tokens(&self) -> u64 {
        self.tokens
    }

    /// Window events per epoch for `window`.
    pub fn window_events(&self, window: usize) -> u64 {
        self.sentences.iter().map(|s| window_events(s.len(), window)).sum()
    }
}

/// `(word id, feature id)` pairs; pairs with an unknown word or feature are
/// dropped on construction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdPairs {
    pairs: Vec<(u32, u32)>,
}

impl IdPairs {
    pub fn new(set: &FeaturePairSet, words: &Vocabulary, features: &Vocabulary) -> Self {
        let pairs = set
            .iter()
            .filter_map(|(w, f)| Some((words.id(w)?, features.id(&f.to_string())?)))
            .collect();
        IdPairs { pairs }
    }

    pub fn from_ids(pairs: Vec<(u32, u32)>) -> Self {
        IdPairs { pairs }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Term {
    Text,
    Feature,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Term::Text => "text",
            Term::Feature => "feat",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStat {
    pub epoch: usize,
    pub term: Term,
    pub mean_loss: f64,
    pub events: u64,
}

impl fmt::Display for EpochStat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "epoch={} term={} mean_loss={} events={}",
            self.epoch, self.term, self.mean_loss, self.events
        )
    }
}

/// Per-epoch, per-term loss means and event counts, in training order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub stats: Vec<EpochStat>,
}

impl TrainReport {
    pub fn curve(&self, term: Term) -> Vec<f64> {
        self.stats
            .iter()
            .filter(|s| s.term == term)
            .map(|s| s.mean_loss)
            .collect()
    }

    pub fn events(&self, term: Term) -> u64 {
        self.stats.iter().filter(|s| s.term == term).map(|s| s.events).sum()
    }
}

impl fmt::Display for TrainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stats {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// One SGD update as seen by an event observer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpdateEvent {
    Text { center: u32, context: u32 },
    Feature { word: u32, feature: u32 },
}

type EventHook<'a> = Box<dyn FnMut(UpdateEvent) + 'a>;
type EpochHook<'a> = Box<dyn FnMut(&[EpochStat], &EmbeddingModel) + 'a>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Text,
    Features,
    Joint,
}

/// Runs training regimes under one [`TrainConfig`].
pub struct Trainer<'a> {
    config: TrainConfig,
    on_event: Option<EventHook<'a>>,
    on_epoch: Option<EpochHook<'a>>,
}

impl<'a> Trainer<'a> {
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(Trainer {
            config,
            on_event: None,
            on_epoch: None,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Observes every update. Only honoured with `threads == 1`.
    pub fn on_event(mut self, hook: impl FnMut(UpdateEvent) + 'a) -> Self {
        self.on_event = Some(Box::new(hook));
        self
    }

    /// Called after each epoch with that epoch's stats and the model.
    pub fn on_epoch(mut self, hook: impl FnMut(&[EpochStat], &EmbeddingModel) + 'a) -> Self {
        self.on_epoch = Some(Box::new(hook));
        self
    }

    /// A freshly initialised model sized for the given vocabularies.
    pub fn init_model(&self, words: &Vocabulary, features: Option<&Vocabulary>) -> EmbeddingModel {
        EmbeddingModel::new(
            words.len(),
            features.map_or(0, Vocabulary::len),
            self.config.dim,
            seed::derive(self.config.seed, "init"),
        )
    }

    /// Dispatches on the configured mode.
    pub fn train(
        &mut self,
        corpus: Option<&IdCorpus>,
        words: &Vocabulary,
        pairs: Option<(&IdPairs, &Vocabulary)>,
        model: &mut EmbeddingModel,
    ) -> Result<TrainReport> {
        let need_pairs = || pairs.ok_or_else(|| Error::Config("feature pairs required for this mode".into()));
        let need_corpus = || corpus.ok_or_else(|| Error::Config("a corpus is required for this mode".into()));
        match self.config.mode {
            Mode::Text => self.train_text(need_corpus()?, words, model),
            Mode::Features => {
                let (p, f) = need_pairs()?;
                self.train_features(p, f, model)
            }
            Mode::Joint => {
                let (p, f) = need_pairs()?;
                self.train_joint(need_corpus()?, words, p, f, model)
            }
            Mode::Sequential => {
                let (p, f) = need_pairs()?;
                self.train_sequential(need_corpus()?, words, p, f, model)
            }
        }
    }

    /// Window-context skip-gram: every in-vocabulary position and every
    /// offset in `[-c, c] \ {0}` inside the sentence is one update.
    pub fn train_text(
        &mut self,
        corpus: &IdCorpus,
        words: &Vocabulary,
        model: &mut EmbeddingModel,
    ) -> Result<TrainReport> {
        check_corpus(corpus, words, model)?;
        let table = self.table(words)?;
        let epochs = self.config.epochs;
        self.run(
            Phase::Text,
            corpus,
            &IdPairs::default(),
            Some(table),
            None,
            Some(words),
            model,
            epochs,
        )
    }

    /// Feature-context skip-gram: one update per pair occurrence per epoch.
    pub fn train_features(
        &mut self,
        pairs: &IdPairs,
        features: &Vocabulary,
        model: &mut EmbeddingModel,
    ) -> Result<TrainReport> {
        check_pairs(pairs, features, model)?;
        let table = self.table(features)?;
        let epochs = self.config.epochs;
        self.run(
            Phase::Features,
            &IdCorpus::default(),
            pairs,
            None,
            Some(table),
            None,
            model,
            epochs,
        )
    }

    /// Text and feature updates interleaved within each epoch. After each
    /// sentence the feature queue is advanced until
    /// [`feature_updates_due`] is met.
    pub fn train_joint(
        &mut self,
        corpus: &IdCorpus,
        words: &Vocabulary,
        pairs: &IdPairs,
        features: &Vocabulary,
        model: &mut EmbeddingModel,
    ) -> Result<TrainReport> {
        check_corpus(corpus, words, model)?;
        check_pairs(pairs, features, model)?;
        let wt = self.table(words)?;
        let ft = self.table(features)?;
        let epochs = self.config.epochs;
        self.run(
            Phase::Joint,
            corpus,
            pairs,
            Some(wt),
            Some(ft),
            Some(words),
            model,
            epochs,
        )
    }

    /// Text training, then feature refinement of the same input vectors with
    /// a fresh feature-context matrix and a restarted learning-rate schedule.
    pub fn train_sequential(
        &mut self,
        corpus: &IdCorpus,
        words: &Vocabulary,
        pairs: &IdPairs,
        features: &Vocabulary,
        model: &mut EmbeddingModel,
    ) -> Result<TrainReport> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput("feature pair set".into()));
        }
        check_corpus(corpus, words, model)?;
        let mut report = self.train_text(corpus, words, model)?;
        let refine = self.config.refine_epochs();
        if refine == 0 {
            return Ok(report);
        }
        info!("sequential: refining with {} feature pairs", pairs.len());
        model.reset_feature_context(features.len());
        check_pairs(pairs, features, model)?;
        let table = self.table(features)?;
        let phase2 = self.run(
            Phase::Features,
            &IdCorpus::default(),
            pairs,
            None,
            Some(table),
            None,
            model,
            refine,
        )?;
        report.stats.extend(phase2.stats);
        Ok(report)
    }

    fn table(&self, vocab: &Vocabulary) -> Result<Arc<UnigramTable>> {
        Ok(Arc::new(UnigramTable::new(
            vocab.counts(),
            self.config.sampling_exponent,
        )?))
    }

    #[allow(clippy::too_many_arguments)]
    fn run(
        &mut self,
        phase: Phase,
        corpus: &IdCorpus,
        pairs: &IdPairs,
        word_table: Option<Arc<UnigramTable>>,
        feature_table: Option<Arc<UnigramTable>>,
        words: Option<&Vocabulary>,
        model: &mut EmbeddingModel,
        epochs: usize,
    ) -> Result<TrainReport> {
        let cfg = &self.config;
        let threads = cfg.threads;
        let sentence_windows: Vec<u64> = corpus
            .sentences()
            .iter()
            .map(|s| window_events(s.len(), cfg.window))
            .collect();
        let keep = match (words, cfg.subsample > 0.0) {
            (Some(v), true) => Some(keep_probabilities(v, cfg.subsample)),
            _ => None,
        };

        let mut workers: Vec<Worker> = (0..threads)
            .map(|t| {
                let sentences = chunk(corpus.sentences().len(), threads, t);
                let pair_range = chunk(pairs.len(), threads, t);
                let windows_total = sentence_windows[sentences.clone()].iter().sum();
                let mut queue: Vec<u32> = pair_range.clone().map(|i| i as u32).collect();
                if phase == Phase::Joint {
                    queue.shuffle(&mut seed::rng(seed::derive_indexed(cfg.seed, "pair-queue", t as u64)));
                }
                Worker {
                    sentences,
                    pairs: pair_range,
                    text_neg: word_table.clone().map(|tb| {
                        NegativeSampler::from_table(tb, seed::derive_indexed(cfg.seed, "text-negatives", t as u64))
                    }),
                    feat_neg: feature_table.clone().map(|tb| {
                        NegativeSampler::from_table(tb, seed::derive_indexed(cfg.seed, "feature-negatives", t as u64))
                    }),
                    sub_rng: seed::rng(seed::derive_indexed(cfg.seed, "subsample", t as u64)),
                    queue,
                    cursor: 0,
                    windows_total,
                    scratch: Scratch::new(cfg.dim),
                    negs: Vec::with_capacity(cfg.negatives),
                    kept: Vec::new(),
                }
            })
            .collect();

        let per_epoch: u64 = workers
            .iter()
            .map(|w| match phase {
                Phase::Text => w.windows_total,
                Phase::Features => w.pairs.len() as u64,
                Phase::Joint => {
                    w.windows_total + feature_updates_due(cfg.alpha, w.pairs.len(), w.windows_total, w.windows_total)
                }
            })
            .sum();
        let ctx = Ctx {
            phase,
            corpus: corpus.sentences(),
            sentence_windows: &sentence_windows,
            pairs: pairs.pairs(),
            window: cfg.window,
            k: cfg.negatives,
            alpha: cfg.alpha,
            lr: LearningRate {
                start: cfg.lr_start,
                min: cfg.lr_min,
                total: per_epoch * epochs as u64,
            },
            keep: keep.as_deref(),
        };
        debug!("{phase:?}: {epochs} epochs x {per_epoch} scheduled updates, {threads} thread(s)");

        let progress = AtomicU64::new(0);
        let mut report = TrainReport::default();
        for epoch in 1..=epochs {
            let tally = if threads == 1 {
                let m = &mut *model;
                let dim = m.dim();
                let mut input = DenseRows::new(&mut m.input, dim);
                let mut wctx = DenseRows::new(&mut m.word_context, dim);
                let mut fctx = DenseRows::new(&mut m.feature_context, dim);
                let hook = self.on_event.as_deref_mut();
                workers[0].run_epoch(&ctx, &mut input, &mut wctx, &mut fctx, &progress, hook)
            } else {
                run_parallel(&ctx, &mut workers, model, &progress)
            };

            let start = report.stats.len();
            if phase != Phase::Features {
                report.stats.push(tally.text.stat(epoch, Term::Text));
            }
            if phase != Phase::Text {
                report.stats.push(tally.feature.stat(epoch, Term::Feature));
            }
            for s in &report.stats[start..] {
                info!("{s}");
            }
            if !model.is_finite() {
                return Err(Error::Diverged(format!("non-finite parameters after epoch {epoch}")));
            }
            if let Some(hook) = self.on_epoch.as_mut() {
                hook(&report.stats[start..], model);
            }
        }
        Ok(report)
    }
}

fn check_corpus(corpus: &IdCorpus, words: &Vocabulary, model: &EmbeddingModel) -> Result<()> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("training corpus".into()));
    }
    if model.n_words() != words.len() {
        return Err(Error::Dimension {
            expected: model.n_words(),
            actual: words.len(),
        });
    }
    Ok(())
}

fn check_pairs(pairs: &IdPairs, features: &Vocabulary, model: &EmbeddingModel) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("feature pair set".into()));
    }
    if model.n_features() != features.len() {
        return Err(Error::Dimension {
            expected: model.n_features(),
            actual: features.len(),
        });
    }
    Ok(())
}

/// Contiguous slice `part` of `0..len` split into `parts` near-equal ranges.
fn chunk(len: usize, parts: usize, part: usize) -> Range<usize> {
    (len * part / parts)..(len * (part + 1) / parts)
}

/// Probability of keeping each word under frequent-word subsampling with
/// threshold `t`: `min(1, (sqrt(f/t) + 1) · t/f)`.
fn keep_probabilities(vocab: &Vocabulary, t: f64) -> Vec<f64> {
    let total = vocab.total() as f64;
    vocab
        .counts()
        .iter()
        .map(|&c| {
            let f = c as f64 / total;
            (((f / t).sqrt() + 1.0) * t / f).min(1.0)
        })
        .collect()
}

struct Ctx<'d> {
    phase: Phase,
    corpus: &'d [Vec<u32>],
    sentence_windows: &'d [u64],
    pairs: &'d [(u32, u32)],
    window: usize,
    k: usize,
    alpha: f64,
    lr: LearningRate,
    keep: Option<&'d [f64]>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Tally {
    loss: f64,
    events: u64,
}

impl Tally {
    fn add(&mut self, other: Tally) {
        self.loss += other.loss;
        self.events += other.events;
    }

    fn stat(self, epoch: usize, term: Term) -> EpochStat {
        EpochStat {
            epoch,
            term,
            mean_loss: if self.events == 0 {
                0.0
            } else {
                self.loss / self.events as f64
            },
            events: self.events,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct EpochTally {
    text: Tally,
    feature: Tally,
}

/// Per-thread training state that persists across epochs.
struct Worker {
    sentences: Range<usize>,
    pairs: Range<usize>,
    text_neg: Option<NegativeSampler>,
    feat_neg: Option<NegativeSampler>,
    sub_rng: Rng,
    /// Joint mode: shuffled cyclic order of this worker's pair indices.
    queue: Vec<u32>,
    cursor: usize,
    windows_total: u64,
    scratch: Scratch,
    negs: Vec<u32>,
    kept: Vec<u32>,
}

impl Worker {
    fn run_epoch<I: Rows, W: Rows, F: Rows>(
        &mut self,
        ctx: &Ctx<'_>,
        input: &mut I,
        wctx: &mut W,
        fctx: &mut F,
        progress: &AtomicU64,
        mut hook: Option<&mut (dyn FnMut(UpdateEvent) + '_)>,
    ) -> EpochTally {
        let mut tally = EpochTally::default();
        match ctx.phase {
            Phase::Text => {
                for i in self.sentences.clone() {
                    tally
                        .text
                        .add(self.text_sentence(ctx, i, input, wctx, progress, &mut hook));
                }
            }
            Phase::Features => {
                for i in self.pairs.clone() {
                    let (w, f) = ctx.pairs[i];
                    let base = progress.load(Ordering::Relaxed);
                    tally
                        .feature
                        .add(self.feature_pair(ctx, w, f, base, input, fctx, &mut hook));
                    progress.fetch_add(1, Ordering::Relaxed);
                }
            }
            Phase::Joint => {
                let mut windows_done = 0;
                let mut feats_done = 0;
                for i in self.sentences.clone() {
                    tally
                        .text
                        .add(self.text_sentence(ctx, i, input, wctx, progress, &mut hook));
                    windows_done += ctx.sentence_windows[i];
                    let due = feature_updates_due(ctx.alpha, self.queue.len(), windows_done, self.windows_total);
                    while feats_done < due {
                        let (w, f) = ctx.pairs[self.queue[self.cursor] as usize];
                        self.cursor = (self.cursor + 1) % self.queue.len();
                        let base = progress.load(Ordering::Relaxed);
                        tally
                            .feature
                            .add(self.feature_pair(ctx, w, f, base, input, fctx, &mut hook));
                        progress.fetch_add(1, Ordering::Relaxed);
                        feats_done += 1;
                    }
                }
            }
        }
        tally
    }

    fn text_sentence<I: Rows, W: Rows>(
        &mut self,
        ctx: &Ctx<'_>,
        index: usize,
        input: &mut I,
        wctx: &mut W,
        progress: &AtomicU64,
        hook: &mut Option<&mut (dyn FnMut(UpdateEvent) + '_)>,
    ) -> Tally {
        let sentence = &ctx.corpus[index];
        let tokens: &[u32] = match ctx.keep {
            Some(keep) => {
                self.kept.clear();
                for &id in sentence {
                    if self.sub_rng.random::<f64>() < keep[id as usize] {
                        self.kept.push(id);
                    }
                }
                &self.kept
            }
            None => sentence,
        };
        let sampler = self.text_neg.as_mut().expect("text sampler");
        let base = progress.load(Ordering::Relaxed);
        let mut tally = Tally::default();
        let n = tokens.len();
        for t in 0..n {
            let lo = t.saturating_sub(ctx.window);
            let hi = (t + ctx.window).min(n.saturating_sub(1));
            for j in lo..=hi {
                if j == t {
                    continue;
                }
                let lr = ctx.lr.at(base + tally.events);
                sampler.negatives(tokens[j], ctx.k, &mut self.negs);
                tally.loss += sgns_step(input, wctx, tokens[t], tokens[j], &self.negs, lr, &mut self.scratch);
                tally.events += 1;
                if let Some(h) = hook.as_mut() {
                    h(UpdateEvent::Text {
                        center: tokens[t],
                        context: tokens[j],
                    });
                }
            }
        }
        progress.fetch_add(tally.events, Ordering::Relaxed);
        tally
    }

    #[allow(clippy::too_many_arguments)]
    fn feature_pair<I: Rows, F: Rows>(
        &mut self,
        ctx: &Ctx<'_>,
        word: u32,
        feature: u32,
        done: u64,
        input: &mut I,
        fctx: &mut F,
        hook: &mut Option<&mut (dyn FnMut(UpdateEvent) + '_)>,
    ) -> Tally {
        let sampler = self.feat_neg.as_mut().expect("feature sampler");
        sampler.negatives(feature, ctx.k, &mut self.negs);
        let loss = sgns_step(
            input,
            fctx,
            word,
            feature,
            &self.negs,
            ctx.lr.at(done),
            &mut self.scratch,
        );
        if let Some(h) = hook.as_mut() {
            h(UpdateEvent::Feature { word, feature });
        }
        Tally { loss, events: 1 }
    }
}

/// One epoch with lock-free shared matrices, one worker per thread.
fn run_parallel(ctx: &Ctx<'_>, workers: &mut [Worker], model: &mut EmbeddingModel, progress: &AtomicU64) -> EpochTally {
    let d = model.dim();
    let input = SharedRows::share(&model.input);
    let wctx = SharedRows::share(&model.word_context);
    let fctx = SharedRows::share(&model.feature_context);
    let tallies: Vec<EpochTally> = std::thread::scope(|s| {
        let handles: Vec<_> = workers
            .iter_mut()
            .map(|w| {
                let (input, wctx, fctx) = (&input, &wctx, &fctx);
                s.spawn(move || {
                    w.run_epoch(
                        ctx,
                        &mut SharedRows::new(input, d),
                        &mut SharedRows::new(wctx, d),
                        &mut SharedRows::new(fctx, d),
                        progress,
                        None,
                    )
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    });
    SharedRows::unshare(&input, &mut model.input);
    SharedRows::unshare(&wctx, &mut model.word_context);
    SharedRows::unshare(&fctx, &mut model.feature_context);
    let mut total = EpochTally::default();
    for t in tallies {
        total.text.add(t.text);
        total.feature.add(t.feature);
    }
    total
}
