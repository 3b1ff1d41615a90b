//! Pair datasets (positive pairs, shuffled negatives, splits) and the grid of
//! vector sets × classifier architectures scored on held-out accuracy.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use log::info;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::classify::{evaluate, train_classifier, Arch, ClassifierConfig, LabeledPair, PairDataset};
use crate::seed;
use crate::store::EmbeddingStore;
use crate::{Error, Result};

/// Reads `word_a<TAB>word_b[<TAB>0|1]` lines. A missing label means match.
pub fn read_pairs<R: BufRead>(input: R, source: &str) -> Result<PairDataset> {
    let mut items = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let label = match fields.as_slice() {
            [_, _] => true,
            [_, _, "1"] => true,
            [_, _, "0"] => false,
            [_, _, other] => return Err(Error::parse(n, format!("label must be 0 or 1, found {other:?}"))),
            _ => {
                return Err(Error::parse(
                    n,
                    format!("expected 2 or 3 tab-separated fields, found {}", fields.len()),
                ))
            }
        };
        let (a, b) = (fields[0].trim(), fields[1].trim());
        if a.is_empty() || b.is_empty() {
            return Err(Error::parse(n, "empty word"));
        }
        items.push(LabeledPair::new(a, b, label));
    }
    Ok(PairDataset::new(items, source))
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<PairDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    let source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_pairs(std::io::BufReader::new(file), &source)
}

pub fn write_pairs<W: Write>(mut out: W, items: &[LabeledPair]) -> Result<()> {
    for p in items {
        writeln!(out, "{}\t{}\t{}", p.a, p.b, u8::from(p.label))?;
    }
    Ok(())
}

pub fn save_pairs(path: impl AsRef<Path>, items: &[LabeledPair]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_pairs(&mut out, items)?;
    out.flush()?;
    Ok(())
}

/// Keeps the items whose two words are in every store; returns the kept
/// dataset and the number dropped.
pub fn filter_by_coverage(dataset: &PairDataset, stores: &[&EmbeddingStore]) -> (PairDataset, usize) {
    let covered = |w: &str| stores.iter().all(|s| s.contains(w));
    let items: Vec<LabeledPair> = dataset
        .iter()
        .filter(|p| covered(&p.a) && covered(&p.b))
        .cloned()
        .collect();
    let dropped = dataset.len() - items.len();
    (PairDataset::new(items, dataset.source.clone()), dropped)
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Number of negatives for `positives` at `ratio`, rounding up so any
/// remainder goes to the non-match class.
pub fn negatives_needed(positives: usize, ratio: f64) -> usize {
    (ratio * positives as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Non-matching pairs made by pairing first words with shuffled second
/// words. Candidates equal to a positive in either order, repeats, and
/// self-pairs are rejected.
pub fn generate_negatives(positives: &[(String, String)], ratio: f64, seed_value: u64) -> Result<Vec<LabeledPair>> {
    if positives.len() < 2 {
        return Err(Error::Config(
            "negative generation needs at least 2 positive pairs".into(),
        ));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::Config(format!("negative ratio must be positive, got {ratio}")));
    }
    let needed = negatives_needed(positives.len(), ratio);
    let forbidden: HashSet<(String, String)> = positives.iter().map(|(a, b)| unordered(a, b)).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(needed);
    let mut rng = seed::rng(seed_value);
    let mut order: Vec<usize> = (0..positives.len()).collect();
    let budget = needed.saturating_mul(100);
    let mut attempts = 0;
    while out.len() < needed {
        order.shuffle(&mut rng);
        for (i, &j) in order.iter().enumerate() {
            if out.len() == needed {
                break;
            }
            if attempts == budget {
                return Err(Error::NegativeStarvation {
                    needed,
                    produced: out.len(),
                });
            }
            attempts += 1;
            let (a, b) = (&positives[i].0, &positives[j].1);
            let key = unordered(a, b);
            if a == b || forbidden.contains(&key) || !seen.insert(key) {
                continue;
            }
            out.push(LabeledPair::new(a.clone(), b.clone(), false));
        }
    }
    Ok(out)
}

/// Split proportions for train, dev and test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, dev: f64, test: f64) -> Result<Self> {
        let r = SplitRatios { train, dev, test };
        if [train, dev, test].iter().any(|x| !(*x >= 0.0 && x.is_finite())) || (train + dev + test - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split ratios must be non-negative and sum to 1, got {train}, {dev}, {test}"
            )));
        }
        Ok(r)
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            dev: 0.1,
            test: 0.1,
        }
    }
}

impl fmt::Display for SplitRatios {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.train, self.dev, self.test)
    }
}

/// Seeded shuffle then contiguous cut: train and dev sizes are floored and
/// test takes the rest.
pub fn split_dataset<T>(mut items: Vec<T>, ratios: SplitRatios, seed_value: u64) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    if items.is_empty() {
        return Err(Error::EmptyInput("nothing to split".into()));
    }
    let ratios = SplitRatios::new(ratios.train, ratios.dev, ratios.test)?;
    items.shuffle(&mut seed::rng(seed_value));
    let n = items.len() as f64;
    let n_train = ((ratios.train * n + 1e-9).floor() as usize).min(items.len());
    let n_dev = ((ratios.dev * n + 1e-9).floor() as usize).min(items.len() - n_train);
    let test = items.split_off(n_train + n_dev);
    let dev = items.split_off(n_train);
    Ok((items, dev, test))
}

/// Positive pairs plus generated negatives, or the file's own labels when it
/// already contains non-matches.
pub fn labelled_dataset(dataset: &PairDataset, negative_ratio: f64, seed_value: u64) -> Result<PairDataset> {
    if dataset.matches() < dataset.len() {
        return Ok(dataset.clone());
    }
    let positives: Vec<(String, String)> = dataset.iter().map(|p| (p.a.clone(), p.b.clone())).collect();
    let mut items = dataset.items.clone();
    items.extend(generate_negatives(&positives, negative_ratio, seed_value)?);
    Ok(PairDataset::new(items, dataset.source.clone()))
}

/// Everything an experiment run depends on besides the input files.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    /// `(name, path)` in report row order.
    pub vector_sets: Vec<(String, PathBuf)>,
    pub architectures: Vec<Arch>,
    /// `(name, pairs file)`, one report block each.
    pub datasets: Vec<(String, PathBuf)>,
    pub split: SplitRatios,
    pub negative_ratio: f64,
    pub classifier: ClassifierConfig,
    pub seed: u64,
    pub threads: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            vector_sets: Vec::new(),
            architectures: Arch::ALL.to_vec(),
            datasets: Vec::new(),
            split: SplitRatios::default(),
            negative_ratio: 1.0,
            classifier: ClassifierConfig::default(),
            seed: 1,
            threads: 1,
        }
    }
}

impl ExperimentSpec {
    /// Parses `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against `base`.
    ///
    /// Keys: `vectors.<name>`, `dataset.<name>`, `architectures`, `split`,
    /// `negative_ratio`, `seed`, `threads`, `hidden`, `slope`, `epochs`,
    /// `batch_size`, `learning_rate`, `patience`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(n, format!("expected `key = value`, found {line:?}")))?;
            let num = |what: &str| Error::parse(n, format!("{key}: expected {what}, found {value:?}"));
            if let Some(name) = key.strip_prefix("vectors.") {
                spec.vector_sets.push((name.to_string(), base.join(value)));
            } else if let Some(name) = key.strip_prefix("dataset.") {
                spec.datasets.push((name.to_string(), base.join(value)));
            } else {
                match key {
                    "architectures" => {
                        spec.architectures = value
                            .split(',')
                            .map(|a| a.trim().parse())
                            .collect::<Result<_>>()
                            .map_err(|e| Error::parse(n, e.to_string()))?
                    }
                    "split" => {
                        let parts: Vec<f64> = value
                            .split(',')
                            .map(|x| x.trim().parse().map_err(|_| num("three numbers")))
                            .collect::<Result<_>>()?;
                        if parts.len() != 3 {
                            return Err(num("three numbers"));
                        }
                        spec.split = SplitRatios::new(parts[0], parts[1], parts[2])
                            .map_err(|e| Error::parse(n, e.to_string()))?;
                    }
                    "negative_ratio" => spec.negative_ratio = value.parse().map_err(|_| num("a number"))?,
                    "seed" => spec.seed = value.parse().map_err(|_| num("an integer"))?,
                    "threads" => spec.threads = value.parse().map_err(|_| num("an integer"))?,
                    "hidden" => spec.classifier.hidden = value.parse().map_err(|_| num("an integer"))?,
                    "slope" => spec.classifier.slope = value.parse().map_err(|_| num("a number"))?,
                    "epochs" => spec.classifier.epochs = value.parse().map_err(|_| num("an integer"))?,
                    "batch_size" => spec.classifier.batch_size = value.parse().map_err(|_| num("an integer"))?,
                    "learning_rate" => spec.classifier.learning_rate = value.parse().map_err(|_| num("a number"))?,
                    "patience" => spec.classifier.patience = value.parse().map_err(|_| num("an integer"))?,
                    _ => return Err(Error::parse(n, format!("unknown key {key:?}"))),
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.vector_sets.is_empty() || self.datasets.is_empty() || self.architectures.is_empty() {
            return Err(Error::Config(
                "experiment needs at least one vector set, dataset and architecture".into(),
            ));
        }
        let mut names = HashSet::new();
        if let Some((dup, _)) = self.vector_sets.iter().find(|(n, _)| !names.insert(n)) {
            return Err(Error::Config(format!("duplicate vector set {dup:?}")));
        }
        if !(self.negative_ratio > 0.0 && self.negative_ratio.is_finite()) {
            return Err(Error::Config(format!(
                "negative ratio must be positive, got {}",
                self.negative_ratio
            )));
        }
        SplitRatios::new(self.split.train, self.split.dev, self.split.test)?;
        self.classifier.validate()
    }
}

/// Test accuracies (percent) for one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportBlock {
    pub dataset: String,
    pub rows: Vec<String>,
    pub columns: Vec<Arch>,
    /// `cells[row][column]`
    pub cells: Vec<Vec<f64>>,
    pub train: usize,
    pub dev: usize,
    pub test: usize,
    pub dropped: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    pub blocks: Vec<ReportBlock>,
}

impl ExperimentReport {
    /// `dataset  vectors  <arch>…` header, then one row per vector set with
    /// accuracies to two decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let columns = self.blocks.first().map(|b| b.columns.clone()).unwrap_or_default();
        out.push_str("dataset\tvectors");
        for c in &columns {
            write!(out, "\t{c}").unwrap();
        }
        out.push('\n');
        for b in &self.blocks {
            for (r, name) in b.rows.iter().enumerate() {
                write!(out, "{}\t{}", b.dataset, name).unwrap();
                for v in &b.cells[r] {
                    write!(out, "\t{v:.2}").unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    /// Reads back a table written by [`to_tsv`](Self::to_tsv). Split sizes
    /// are not part of the TSV and come back as zero.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty report"))?;
        let head: Vec<&str> = header.split('\t').collect();
        if head.len() < 3 || head[0] != "dataset" || head[1] != "vectors" {
            return Err(Error::parse(1, "expected `dataset<TAB>vectors<TAB>…` header"));
        }
        let columns: Vec<Arch> = head[2..].iter().map(|a| a.parse()).collect::<Result<_>>()?;
        let mut report = ExperimentReport::default();
        for (i, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != columns.len() + 2 {
                return Err(Error::parse(i + 1, "wrong number of columns"));
            }
            let values: Vec<f64> = fields[2..]
                .iter()
                .map(|v| {
                    v.parse()
                        .map_err(|_| Error::parse(i + 1, format!("bad accuracy {v:?}")))
                })
                .collect::<Result<_>>()?;
            if report.blocks.last().is_none_or(|b| b.dataset != fields[0]) {
                report.blocks.push(ReportBlock {
                    dataset: fields[0].to_string(),
                    rows: Vec::new(),
                    columns: columns.clone(),
                    cells: Vec::new(),
                    train: 0,
                    dev: 0,
                    test: 0,
                    dropped: 0,
                });
            }
            let block = report.blocks.last_mut().unwrap();
            block.rows.push(fields[1].to_string());
            block.cells.push(values);
        }
        Ok(report)
    }

    /// Accuracy for `(dataset, vectors, arch)`.
    pub fn cell(&self, dataset: &str, vectors: &str, arch: Arch) -> Option<f64> {
        let b = self.blocks.iter().find(|b| b.dataset == dataset)?;
        let r = b.rows.iter().position(|n| n == vectors)?;
        let c = b.columns.iter().position(|&a| a == arch)?;
        Some(b.cells[r][c])
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(
                f,
                "{} (train {}, dev {}, test {}; {} pairs dropped for coverage)",
                b.dataset, b.train, b.dev, b.test, b.dropped
            )?;
            let first = b.rows.iter().map(String::len).max().unwrap_or(0).max("Vectors".len());
            let widths: Vec<usize> = b.columns.iter().map(|c| c.title().len().max(6)).collect();
            write!(f, "{:<first$}", "Vectors")?;
            for (c, w) in b.columns.iter().zip(&widths) {
                write!(f, "  {:>w$}", c.title())?;
            }
            writeln!(f)?;
            for (name, row) in b.rows.iter().zip(&b.cells) {
                write!(f, "{name:<first$}")?;
                for (v, w) in row.iter().zip(&widths) {
                    write!(f, "  {v:>w$.2}")?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Prepared train/dev/test data for one dataset, shared by every cell.
struct PreparedDataset {
    name: String,
    train: PairDataset,
    dev: PairDataset,
    test: PairDataset,
    dropped: usize,
}

fn prepare(
    name: &str,
    path: &Path,
    index: u64,
    stores: &[&EmbeddingStore],
    spec: &ExperimentSpec,
) -> Result<PreparedDataset> {
    let raw = load_pairs(path)?;
    let (covered, dropped) = filter_by_coverage(&raw, stores);
    info!(
        "dataset {name}: {} pairs, {dropped} dropped for coverage",
        covered.len()
    );
    let labelled = labelled_dataset(
        &covered,
        spec.negative_ratio,
        seed::derive_indexed(spec.seed, "negatives", index),
    )?;
    let (train, dev, test) = split_dataset(
        labelled.items,
        spec.split,
        seed::derive_indexed(spec.seed, "split", index),
    )?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyInput(format!(
            "dataset {name} leaves an empty train or test split"
        )));
    }
    Ok(PreparedDataset {
        name: name.to_string(),
        train: PairDataset::new(train, name),
        dev: PairDataset::new(dev, name),
        test: PairDataset::new(test, name),
        dropped,
    })
}

/// Per-cell classifier seed from the master seed and grid coordinates.
pub fn cell_seed(master: u64, dataset: usize, row: usize, column: usize) -> u64 {
    let d = seed::derive_indexed(master, "cell-dataset", dataset as u64);
    let r = seed::derive_indexed(d, "cell-row", row as u64);
    seed::derive_indexed(r, "cell-column", column as u64)
}

/// Trains and scores every (dataset, vector set, architecture) cell.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let stores: Vec<EmbeddingStore> = spec
        .vector_sets
        .iter()
        .map(|(name, path)| {
            info!("loading vector set {name} from {}", path.display());
            EmbeddingStore::load(path)
        })
        .collect::<Result<_>>()?;
    let store_refs: Vec<&EmbeddingStore> = stores.iter().collect();
    let datasets: Vec<PreparedDataset> = spec
        .datasets
        .iter()
        .enumerate()
        .map(|(i, (name, path))| prepare(name, path, i as u64, &store_refs, spec))
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..stores.len()).flat_map(move |r| (0..spec.architectures.len()).map(move |c| (d, r, c))))
        .collect();
    let run_cell = |&(d, r, c): &(usize, usize, usize)| -> Result<f64> {
        let (data, store, arch) = (&datasets[d], &stores[r], spec.architectures[c]);
        let config = ClassifierConfig {
            seed: cell_seed(spec.seed, d, r, c),
            ..spec.classifier.clone()
        };
        let wrap = |e: Error| Error::Cell {
            row: format!("{}/{}", data.name, spec.vector_sets[r].0),
            column: arch.to_string(),
            source: Box::new(e),
        };
        let mut model = config.init(arch, store.dim()).map_err(wrap)?;
        train_classifier(&mut model, &data.train, Some(&data.dev), store, &config).map_err(wrap)?;
        let accuracy = evaluate(&model, &data.test, store).map_err(wrap)?.accuracy;
        info!(
            "{} / {} / {arch}: {:.2}",
            data.name,
            spec.vector_sets[r].0,
            100.0 * accuracy
        );
        Ok(100.0 * accuracy)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let values: Vec<f64> = pool.install(|| cells.par_iter().map(run_cell).collect::<Result<_>>())?;

    let n_cols = spec.architectures.len();
    let per_dataset = stores.len() * n_cols;
    let blocks = datasets
        .iter()
        .enumerate()
        .map(|(d, data)| ReportBlock {
            dataset: data.name.clone(),
            rows: spec.vector_sets.iter().map(|(n, _)| n.clone()).collect(),
            columns: spec.architectures.clone(),
            cells: values[d * per_dataset..(d + 1) * per_dataset]
                .chunks(n_cols)
                .map(<[f64]>::to_vec)
                .collect(),
            train: data.train.len(),
            dev: data.dev.len(),
            test: data.test.len(),
            dropped: data.dropped,
        })
        .collect();
    Ok(ExperimentReport { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
        list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn two_disjoint_positives_give_the_derangement() {
        for seed_value in 0..20 {
            let neg = generate_negatives(&pairs(&[("a", "b"), ("c", "d")]), 1.0, seed_value).unwrap();
            assert_eq!(neg.len(), 2);
            let got: HashSet<(String, String)> = neg.iter().map(|p| (p.a.clone(), p.b.clone())).collect();
            let allowed: HashSet<(String, String)> = pairs(&[("a", "d"), ("c", "b")]).into_iter().collect();
            assert!(got.is_subset(&allowed));
            assert!(neg.iter().all(|p| !p.label));
        }
    }

    #[test]
    fn ratio_controls_class_balance() {
        let pos: Vec<(String, String)> = (0..50).map(|i| (format!("x{i}"), format!("y{i}"))).collect();
        let neg = generate_negatives(&pos, 4.0, 3).unwrap();
        assert_eq!(neg.len(), 200);
        let share = 50.0 / 250.0;
        assert_eq!(share, 0.2);
        assert_eq!(generate_negatives(&pos, 1.0, 3).unwrap().len(), 50);
        assert_eq!(negatives_needed(3, 0.5), 2);
    }

    #[test]
    fn starvation_is_reported() {
        // Every cross pairing is itself a positive.
        let pos = pairs(&[("a", "b"), ("b", "a")]);
        assert!(matches!(
            generate_negatives(&pos, 1.0, 0),
            Err(Error::NegativeStarvation { needed: 2, produced: 0 })
        ));
        assert!(generate_negatives(&pairs(&[("a", "b")]), 1.0, 0).is_err());
    }

    #[test]
    fn split_sizes() {
        let (tr, dv, te) =
            split_dataset((0..10).collect::<Vec<_>>(), SplitRatios::new(0.8, 0.1, 0.1).unwrap(), 1).unwrap();
        assert_eq!((tr.len(), dv.len(), te.len()), (8, 1, 1));
        let (tr, dv, te) =
            split_dataset((0..7).collect::<Vec<_>>(), SplitRatios::new(1.0, 0.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!((tr.len(), dv.len(), te.len()), (7, 0, 0));
        assert!(split_dataset(Vec::<u8>::new(), SplitRatios::default(), 1).is_err());
        assert!(SplitRatios::new(0.5, 0.1, 0.1).is_err());
    }

    #[test]
    fn pair_file_parsing() {
        assert!(read_pairs("".as_bytes(), "t").unwrap().is_empty());
        let d = read_pairs("a\tb\nc\td\t0\ne\tf\t1\n".as_bytes(), "t").unwrap();
        assert_eq!(d.items[0], LabeledPair::new("a", "b", true));
        assert!(!d.items[1].label);
        assert_eq!(d.matches(), 2);
        let err = read_pairs("a\tb\nbad line\n".as_bytes(), "t").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(matches!(
            read_pairs("a\tb\t2\n".as_bytes(), "t"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn coverage_filter_counts_drops() {
        let store = EmbeddingStore::new(vec!["a".into(), "b".into()], vec![1.0, 0.0, 0.0, 1.0], 2).unwrap();
        let d = PairDataset::new(
            vec![LabeledPair::new("a", "b", true), LabeledPair::new("a", "z", true)],
            "t",
        );
        let (kept, dropped) = filter_by_coverage(&d, &[&store]);
        assert_eq!(kept.len(), 1);
        assert_eq!(dropped, 1);
    }

    #[test]
    fn spec_parsing() {
        let text = "# comment\nseed = 7\nvectors.text = a.vec\nvectors.joint = /abs/b.vec\ndataset.syn = p.tsv\n\
                    architectures = mlp, shared-cos\nsplit = 0.6,0.2,0.2\nnegative_ratio = 4\nepochs = 3\n";
        let spec = ExperimentSpec::parse(text, Path::new("/base")).unwrap();
        assert_eq!(spec.seed, 7);
        assert_eq!(spec.vector_sets[0], ("text".to_string(), PathBuf::from("/base/a.vec")));
        assert_eq!(spec.vector_sets[1].1, PathBuf::from("/abs/b.vec"));
        assert_eq!(spec.architectures, vec![Arch::Mlp, Arch::SharedCosine]);
        assert_eq!(spec.split, SplitRatios::new(0.6, 0.2, 0.2).unwrap());
        assert_eq!(spec.negative_ratio, 4.0);
        assert_eq!(spec.classifier.epochs, 3);
        assert!(matches!(
            ExperimentSpec::parse("seed = x\n", Path::new(".")),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(ExperimentSpec::parse("bogus = 1\n", Path::new(".")).is_err());
    }

    #[test]
    fn report_tsv_round_trip() {
        let report = ExperimentReport {
            blocks: vec![ReportBlock {
                dataset: "syn".into(),
                rows: vec!["text".into(), "joint".into()],
                columns: vec![Arch::Mlp, Arch::SharedMlp],
                cells: vec![vec![75.88, 80.0], vec![82.86, 100.0]],
                train: 0,
                dev: 0,
                test: 0,
                dropped: 0,
            }],
        };
        let tsv = report.to_tsv();
        assert!(tsv.starts_with("dataset\tvectors\tmlp\tshared-mlp\n"));
        assert!(tsv.contains("syn\tjoint\t82.86\t100.00\n"));
        assert_eq!(ExperimentReport::from_tsv(&tsv).unwrap(), report);
        assert_eq!(report.cell("syn", "joint", Arch::SharedMlp), Some(100.0));
        assert!(report.to_string().contains("Shared MLP"));
    }

    proptest! {
        #[test]
        fn negatives_never_collide(n in 4usize..40, ratio in 0.2f64..1.0, seed_value in any::<u64>()) {
            let pos: Vec<(String, String)> = (0..n).map(|i| (format!("a{}", i % 7), format!("b{i}"))).collect();
            let neg = generate_negatives(&pos, ratio, seed_value).unwrap();
            prop_assert_eq!(neg.len(), negatives_needed(n, ratio));
            let forbidden: HashSet<_> = pos.iter().map(|(a, b)| unordered(a, b)).collect();
            let mut seen = HashSet::new();
            for p in &neg {
                let key = unordered(&p.a, &p.b);
                prop_assert!(!forbidden.contains(&key));
                prop_assert!(seen.insert(key));
            }
        }

        #[test]
        fn splits_partition(n in 1usize..200, a in 0.0f64..1.0, b in 0.0f64..1.0, seed_value in any::<u64>()) {
            let train = a;
            let dev = (1.0 - a) * b;
            let ratios = SplitRatios::new(train, dev, 1.0 - train - dev).unwrap();
            let (tr, dv, te) = split_dataset((0..n).collect::<Vec<_>>(), ratios, seed_value).unwrap();
            let mut all: Vec<usize> = tr.iter().chain(&dv).chain(&te).copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let again = split_dataset((0..n).collect::<Vec<_>>(), ratios, seed_value).unwrap();
            prop_assert_eq!((tr, dv, te), again);
        }
    }
}
