use std::fmt;
use std::io::Write as _;
use std::path::Path;

use log::{info, warn};

use structvec::classify::{evaluate, train_classifier, Classifier, ClassifierConfig, PairDataset};
use structvec::conll::{read_conll_file, ParsedSentence};
use structvec::experiment::{filter_by_coverage, labelled_dataset, load_pairs, run_experiment, ExperimentSpec};
use structvec::features::{build_feature_vocabulary, extract_all, ExtractConfig, FeaturePairSet, LabelSet};
use structvec::seed;
use structvec::store::EmbeddingStore;
use structvec::train::{IdCorpus, IdPairs, TrainConfig, Trainer};
use structvec::vocab::Vocabulary;
use structvec::Error;

use crate::{
    ClassifierArgs, ClassifyAction, ClassifyEvalArgs, ClassifyTrainArgs, Cli, Command, ExperimentArgs, ExtractArgs,
    NearestArgs, TrainArgs, VocabArgs,
};

/// A library error with the file or step it concerns.
#[derive(Debug)]
pub struct Failure {
    context: Option<String>,
    error: Error,
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        if self.error.is_config() {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.context {
            Some(c) => write!(f, "{c}: {}", self.error),
            None => write!(f, "{}", self.error),
        }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { context: None, error }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type Result<T> = std::result::Result<T, Failure>;

trait Context<T> {
    fn at(self, path: &Path) -> Result<T>;
}

impl<T> Context<T> for structvec::Result<T> {
    fn at(self, path: &Path) -> Result<T> {
        self.map_err(|error| Failure {
            context: Some(path.display().to_string()),
            error,
        })
    }
}

struct Globals {
    seed: u64,
    threads: usize,
}

pub fn run(cli: Cli) -> Result<()> {
    let globals = Globals {
        seed: cli.seed.unwrap_or(1),
        threads: cli.threads.unwrap_or(1),
    };
    match cli.command {
        Command::ExtractFeatures(a) => extract_features(a),
        Command::BuildVocab(a) => build_vocab(a),
        Command::Train(a) => train(a, &globals),
        Command::Nearest(a) => nearest(a),
        Command::ClassifyTrain(a)
        | Command::Classify {
            action: ClassifyAction::Train(a),
        } => classify_train(a, &globals),
        Command::ClassifyEval(a)
        | Command::Classify {
            action: ClassifyAction::Eval(a),
        } => classify_eval(a, &globals),
        Command::Experiment(a) => experiment(a, cli.seed, cli.threads),
    }
}

fn read_corpus(path: &Path) -> Result<Vec<ParsedSentence>> {
    let bank = read_conll_file(path).at(path)?;
    for e in &bank.rejected {
        warn!("{}: skipped {e}", path.display());
    }
    info!("{}: {} sentences", path.display(), bank.sentences.len());
    Ok(bank.sentences)
}

fn extract_config(feat: &str, labels: &str) -> Result<ExtractConfig> {
    Ok(ExtractConfig {
        families: feat.parse()?,
        labels: LabelSet::default().with_overrides(labels)?,
    })
}

fn extract_features(a: ExtractArgs) -> Result<()> {
    let config = extract_config(&a.feat, &a.labels)?;
    let vocab = match &a.vocab {
        Some(p) => Some(Vocabulary::load(p).at(p)?),
        None => None,
    };
    let sentences = read_corpus(&a.input)?;
    let set = extract_all(&sentences, &config, vocab.as_ref())?;
    set.save(&a.output).at(&a.output)?;
    info!("wrote {} pairs to {}", set.len(), a.output.display());
    Ok(())
}

fn build_vocab(a: VocabArgs) -> Result<()> {
    let vocab = match (&a.input, &a.pairs) {
        (Some(p), _) => Vocabulary::from_sentences(&read_corpus(p)?, a.min_count).at(p)?,
        (None, Some(p)) => build_feature_vocabulary(&FeaturePairSet::load(p).at(p)?, a.min_count).at(p)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    vocab.save(&a.output).at(&a.output)?;
    info!("wrote {} entries to {}", vocab.len(), a.output.display());
    Ok(())
}

fn train(a: TrainArgs, g: &Globals) -> Result<()> {
    let config = TrainConfig {
        dim: a.dim,
        window: a.window,
        negatives: a.negatives,
        alpha: a.alpha,
        lr_start: a.lr,
        epochs: a.epochs,
        feature_epochs: a.feature_epochs,
        mode: a.mode,
        seed: g.seed,
        threads: g.threads,
        subsample: a.subsample,
        ..TrainConfig::default()
    };
    config.validate()?;
    let sentences = read_corpus(&a.corpus)?;
    let words = match &a.vocab {
        Some(p) => Vocabulary::load(p).at(p)?,
        None => Vocabulary::from_sentences(&sentences, a.min_count).at(&a.corpus)?,
    };
    let corpus = IdCorpus::new(&sentences, &words);

    let features = if a.mode.uses_features() {
        let set = match &a.pairs {
            Some(p) => FeaturePairSet::load(p).at(p)?,
            None => extract_all(&sentences, &extract_config(&a.feat, "")?, Some(&words))?,
        };
        let fv = match &a.feature_vocab {
            Some(p) => Vocabulary::load(p).at(p)?,
            None => build_feature_vocabulary(&set, a.min_count)?,
        };
        let ids = IdPairs::new(&set, &words, &fv);
        info!("{} of {} feature pairs in vocabulary", ids.len(), set.len());
        Some((ids, fv))
    } else {
        None
    };

    let mut trainer = Trainer::new(config)?;
    let mut model = trainer.init_model(&words, features.as_ref().map(|(_, fv)| fv));
    let report = trainer.train(
        Some(&corpus),
        &words,
        features.as_ref().map(|(p, fv)| (p, fv)),
        &mut model,
    )?;
    model.save(&a.output, &words).at(&a.output)?;
    if a.contexts {
        model
            .save_contexts(&a.output, &words, features.as_ref().map(|(_, fv)| fv))
            .at(&a.output)?;
    }
    print!("{report}");
    Ok(())
}

fn nearest(a: NearestArgs) -> Result<()> {
    let store = EmbeddingStore::load(&a.model).at(&a.model)?;
    let mut out = std::io::stdout().lock();
    for (word, sim) in store.nearest(&a.word, a.k)? {
        writeln!(out, "{word}\t{sim:.6}")?;
    }
    Ok(())
}

fn classifier_config(c: &ClassifierArgs, seed_value: u64) -> ClassifierConfig {
    ClassifierConfig {
        hidden: c.hidden,
        slope: c.slope,
        batch_size: c.batch_size,
        learning_rate: c.learning_rate,
        epochs: c.epochs,
        patience: c.patience,
        seed: seed_value,
    }
}

/// Labelled, coverage-filtered pairs from `path`.
fn pair_data(path: &Path, store: &EmbeddingStore, ratio: f64, seed_value: u64) -> Result<PairDataset> {
    let raw = load_pairs(path).at(path)?;
    let (covered, dropped) = filter_by_coverage(&raw, &[store]);
    if dropped > 0 {
        warn!(
            "{}: dropped {dropped} pairs with words missing from the model",
            path.display()
        );
    }
    labelled_dataset(&covered, ratio, seed::derive(seed_value, "negatives")).at(path)
}

fn classify_train(a: ClassifyTrainArgs, g: &Globals) -> Result<()> {
    let config = classifier_config(&a.classifier, g.seed);
    config.validate()?;
    let store = EmbeddingStore::load(&a.model).at(&a.model)?;
    let train = pair_data(&a.pairs, &store, a.negative_ratio, g.seed)?;
    let dev = match &a.dev {
        Some(p) => Some(pair_data(p, &store, a.negative_ratio, seed::derive(g.seed, "dev"))?),
        None => None,
    };
    let mut model = config.init(a.arch, store.dim())?;
    let history = train_classifier(&mut model, &train, dev.as_ref(), &store, &config)?;
    for e in &history.epochs {
        info!("epoch={} loss={:.6} dev={:?}", e.epoch, e.train_loss, e.dev_accuracy);
    }
    model.save(&a.output).at(&a.output)?;
    println!("train {}", evaluate(&model, &train, &store)?);
    if let Some(d) = &dev {
        println!("dev {}", evaluate(&model, d, &store)?);
    }
    Ok(())
}

fn classify_eval(a: ClassifyEvalArgs, g: &Globals) -> Result<()> {
    let model = Classifier::load(&a.checkpoint).at(&a.checkpoint)?;
    let store = EmbeddingStore::load(&a.model).at(&a.model)?;
    let data = pair_data(&a.pairs, &store, a.negative_ratio, g.seed)?;
    println!("{}", evaluate(&model, &data, &store)?);
    Ok(())
}

fn experiment(a: ExperimentArgs, seed_value: Option<u64>, threads: Option<usize>) -> Result<()> {
    let mut spec = ExperimentSpec::load(&a.spec).at(&a.spec)?;
    if let Some(s) = seed_value {
        spec.seed = s;
    }
    if let Some(t) = threads {
        spec.threads = t;
    }
    let report = run_experiment(&spec)?;
    if let Some(p) = &a.output {
        std::fs::write(p, report.to_tsv()).map_err(|e| Failure {
            context: Some(p.display().to_string()),
            error: e.into(),
        })?;
    }
    print!("{report}");
    Ok(())
}
