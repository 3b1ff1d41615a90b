//! Seeded generators for parsed corpora with known structure.
//!
//! Words come in classes. A class owns its verbs, adjectives and a
//! hypernym; its nouns are subjects of those verbs, carry those adjectives
//! and appear under the hypernym in `such as` constructions. Independently
//! of class, every noun belongs to a topic, and each sentence is padded
//! with words of the subject's topic plus class words borrowed from random
//! other classes. Tokens are then placed in random linear order, so window
//! contexts mostly reflect topic while the dependency arcs carry the class.

use std::fmt::Write as _;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::conll::{ParsedSentence, Token};
use crate::seed::{self, Rng};

#[derive(Clone, Debug, PartialEq)]
pub struct WorldConfig {
    pub classes: usize,
    pub nouns_per_class: usize,
    pub verbs_per_class: usize,
    pub adjectives_per_class: usize,
    pub topics: usize,
    pub words_per_topic: usize,
    /// Topic words added to each sentence.
    pub fillers: usize,
    /// Verbs and adjectives of random classes added to each sentence.
    pub distractors: usize,
    /// Probability that the subject slot is filled by `<hypernym> such as
    /// <noun>` instead of the bare noun.
    pub pattern_rate: f64,
}

impl WorldConfig {
    /// Under 200 word types; small enough for exact objectives.
    pub fn toy() -> Self {
        WorldConfig {
            classes: 6,
            nouns_per_class: 4,
            verbs_per_class: 2,
            adjectives_per_class: 2,
            topics: 3,
            words_per_topic: 12,
            fillers: 4,
            distractors: 1,
            pattern_rate: 0.1,
        }
    }

    /// Long sentences in which window contexts are dominated by topic words
    /// shared across classes.
    pub fn benchmark() -> Self {
        WorldConfig {
            classes: 30,
            nouns_per_class: 12,
            verbs_per_class: 3,
            adjectives_per_class: 3,
            topics: 4,
            words_per_topic: 40,
            fillers: 24,
            distractors: 12,
            pattern_rate: 0.15,
        }
    }
}

/// Generated lexicon plus the class and topic assignments behind it.
#[derive(Clone, Debug)]
pub struct World {
    config: WorldConfig,
    nouns: Vec<Vec<String>>,
    verbs: Vec<Vec<String>>,
    adjectives: Vec<Vec<String>>,
    hypernyms: Vec<String>,
    topic_words: Vec<Vec<String>>,
    noun_topic: Vec<Vec<usize>>,
}

fn names(prefix: &str, class: usize, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{class}x{i}")).collect()
}

struct Draft {
    tokens: Vec<(String, usize, &'static str)>,
}

impl Draft {
    /// Adds a token whose head is draft index `head` (`usize::MAX` for root).
    fn push(&mut self, form: &str, head: usize, label: &'static str) -> usize {
        self.tokens.push((form.to_string(), head, label));
        self.tokens.len() - 1
    }

    /// Shuffles linear order and renumbers heads.
    fn into_sentence(self, rng: &mut Rng) -> ParsedSentence {
        let mut order: Vec<usize> = (0..self.tokens.len()).collect();
        order.shuffle(rng);
        let mut position = vec![0; order.len()];
        for (p, &i) in order.iter().enumerate() {
            position[i] = p + 1;
        }
        let tokens = order
            .iter()
            .map(|&i| {
                let (form, head, label) = &self.tokens[i];
                Token {
                    form: form.clone(),
                    head: if *head == usize::MAX { 0 } else { position[*head] },
                    label: label.to_string(),
                }
            })
            .collect();
        ParsedSentence::new(tokens).expect("generated trees are acyclic")
    }
}

impl World {
    pub fn new(config: WorldConfig, seed_value: u64) -> Self {
        assert!(config.classes >= 2 && config.nouns_per_class >= 1 && config.topics >= 1);
        let mut rng = seed::rng(seed_value);
        let k = config.classes;
        let nouns = (0..k).map(|c| names("n", c, config.nouns_per_class)).collect();
        let verbs = (0..k).map(|c| names("v", c, config.verbs_per_class)).collect();
        let adjectives = (0..k).map(|c| names("j", c, config.adjectives_per_class)).collect();
        let hypernyms = (0..k).map(|c| format!("h{c}")).collect();
        let topic_words = (0..config.topics)
            .map(|t| names("t", t, config.words_per_topic))
            .collect();
        let noun_topic = (0..k)
            .map(|_| {
                (0..config.nouns_per_class)
                    .map(|_| rng.random_range(0..config.topics))
                    .collect()
            })
            .collect();
        World {
            config,
            nouns,
            verbs,
            adjectives,
            hypernyms,
            topic_words,
            noun_topic,
        }
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn nouns(&self, class: usize) -> &[String] {
        &self.nouns[class]
    }

    pub fn class_of(&self, noun: &str) -> Option<usize> {
        self.nouns.iter().position(|c| c.iter().any(|n| n == noun))
    }

    /// Renames class-0 nouns to `names` and gives them one shared topic, so
    /// they are exchangeable in every generated sentence.
    pub fn plant(&mut self, names: &[&str]) {
        assert_eq!(names.len(), self.config.nouns_per_class, "one name per class-0 noun");
        self.nouns[0] = names.iter().map(|s| s.to_string()).collect();
        let topic = self.noun_topic[0][0];
        self.noun_topic[0].iter_mut().for_each(|t| *t = topic);
    }

    pub fn sentence(&self, rng: &mut Rng) -> ParsedSentence {
        let cfg = &self.config;
        let k = cfg.classes;
        let c = rng.random_range(0..k);
        let i = rng.random_range(0..cfg.nouns_per_class);
        let topic = self.noun_topic[c][i];
        let subject = &self.nouns[c][i];

        let mut d = Draft { tokens: Vec::new() };
        let verb = d.push(self.verbs[c].choose(rng).unwrap(), usize::MAX, "root");
        let head_noun = if rng.random::<f64>() < cfg.pattern_rate {
            let hyper = d.push(&self.hypernyms[c], verb, "nsubj");
            let as_ = d.push("as", hyper, "prep");
            d.push("such", as_, "mwe");
            d.push(subject, as_, "pobj");
            hyper
        } else {
            d.push(subject, verb, "nsubj")
        };
        d.push(self.adjectives[c].choose(rng).unwrap(), head_noun, "amod");
        d.push("the", head_noun, "det");

        let oc = (c + 1) % k;
        let object = self.nouns[oc].choose(rng).unwrap();
        d.push(object, verb, "dobj");

        let prep = d.push(if rng.random::<bool>() { "with" } else { "in" }, verb, "prep");
        d.push(self.topic_words[topic].choose(rng).unwrap(), prep, "pobj");

        for _ in 0..cfg.fillers {
            d.push(self.topic_words[topic].choose(rng).unwrap(), verb, "dep");
        }
        for _ in 0..cfg.distractors {
            let other = rng.random_range(0..k);
            let word = if rng.random::<bool>() {
                self.verbs[other].choose(rng)
            } else {
                self.adjectives[other].choose(rng)
            };
            d.push(word.unwrap(), verb, "dep");
        }
        d.into_sentence(rng)
    }

    pub fn corpus(&self, sentences: usize, seed_value: u64) -> Vec<ParsedSentence> {
        let mut rng = seed::rng(seed_value);
        (0..sentences).map(|_| self.sentence(&mut rng)).collect()
    }

    /// Sentences until the compact CoNLL rendering reaches `bytes`.
    pub fn corpus_of_size(&self, bytes: usize, seed_value: u64) -> Vec<ParsedSentence> {
        let mut rng = seed::rng(seed_value);
        let mut out = Vec::new();
        let mut size = 0;
        let mut buf = String::new();
        while size < bytes {
            let s = self.sentence(&mut rng);
            buf.clear();
            writeln!(buf, "{s}").unwrap();
            size += buf.len();
            out.push(s);
        }
        out
    }

    /// Every unordered pair of distinct nouns sharing a class.
    pub fn class_pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for class in &self.nouns {
            for (i, a) in class.iter().enumerate() {
                for b in &class[i + 1..] {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }
}

/// Pair fixture that is linearly separable in every model's input space.
///
/// Word `p{i}` is `(e_0 + e_i)/√2` and word `q{i}` is `(e_i - e_0)/√2`, so
/// `p{i}` and `q{i}` are orthogonal. Each `p{i}` is paired with itself
/// (match) and with `q{i}` in a random order (non-match). On the
/// concatenation `[a; b]` the direction `[e_0; e_0]` separates the classes.
pub fn separable_pairs(n: usize, seed_value: u64) -> (crate::store::EmbeddingStore, crate::classify::PairDataset) {
    use crate::classify::{LabeledPair, PairDataset};
    assert!(n >= 1);
    let dim = n + 1;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut words = Vec::with_capacity(2 * n);
    let mut data = vec![0.0; 2 * n * dim];
    for i in 0..n {
        words.push(format!("p{i}"));
        words.push(format!("q{i}"));
        let (p, q) = (2 * i * dim, (2 * i + 1) * dim);
        data[p] = s;
        data[p + i + 1] = s;
        data[q] = -s;
        data[q + i + 1] = s;
    }
    let store = crate::store::EmbeddingStore::new(words, data, dim).expect("valid store");
    let mut rng = seed::rng(seed_value);
    let mut items = Vec::with_capacity(2 * n);
    for i in 0..n {
        let (p, q) = (format!("p{i}"), format!("q{i}"));
        items.push(LabeledPair::new(p.clone(), p.clone(), true));
        if rng.random::<bool>() {
            items.push(LabeledPair::new(p, q, false));
        } else {
            items.push(LabeledPair::new(q, p, false));
        }
    }
    (store, PairDataset::new(items, "synthetic"))
}
