//! Frequency-filtered vocabularies over words or encoded feature strings.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::conll::ParsedSentence;
use crate::{Error, Result};

/// Bijection between items and dense ids `0..len`, ordered by descending
/// count with lexicographic tie-break.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    items: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    total: u64,
}

impl Vocabulary {
    /// Counts `items` and keeps those seen at least `min_count` times.
    pub fn build<I, S>(items: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        let mut raw: HashMap<String, u64> = HashMap::new();
        for item in items {
            let item = item.as_ref();
            if let Some(c) = raw.get_mut(item) {
                *c += 1;
            } else {
                raw.insert(item.to_string(), 1);
            }
        }
        let mut kept: Vec<(String, u64)> = raw.into_iter().filter(|(_, c)| *c >= min_count).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(Self::from_sorted(kept))
    }

    fn from_sorted(entries: Vec<(String, u64)>) -> Self {
        let mut items = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (item, count)) in entries.into_iter().enumerate() {
            index.insert(item.clone(), i as u32);
            items.push(item);
            counts.push(count);
        }
        let total = counts.iter().sum();
        Vocabulary {
            items,
            counts,
            index,
            total,
        }
    }

    /// Word vocabulary over the surface forms of `sentences`.
    pub fn from_sentences(sentences: &[ParsedSentence], min_count: u64) -> Result<Self> {
        Self::build(sentences.iter().flat_map(|s| s.forms()), min_count)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Sum of the counts of retained items.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn id(&self, item: &str) -> Option<u32> {
        self.index.get(item).copied()
    }

    pub fn contains(&self, item: &str) -> bool {
        self.index.contains_key(item)
    }

    pub fn item(&self, id: u32) -> &str {
        &self.items[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "V={} T={}", self.len(), self.total)?;
        for (item, count) in self.items.iter().zip(&self.counts) {
            writeln!(out, "{item}\t{count}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write(&mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Reads the `V=<n> T=<n>` header format. Entry order is taken as the id
    /// order, whatever the counts say.
    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(l) => l?,
            None => return Err(Error::parse(1, "missing header")),
        };
        let (v, t) = parse_header(&header)
            .ok_or_else(|| Error::parse(1, format!("expected header `V=<int> T=<int>`, found {header:?}")))?;
        let mut entries = Vec::with_capacity(v);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (item, count) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected `item<TAB>count`"))?;
            let count: u64 = count
                .parse()
                .map_err(|_| Error::parse(line_no, format!("non-integer count {count:?}")))?;
            entries.push((item.to_string(), count));
        }
        if entries.len() != v {
            return Err(Error::parse(
                1,
                format!("header says V={v}, found {} entries", entries.len()),
            ));
        }
        let vocab = Self::from_sorted(entries);
        if vocab.index.len() != vocab.items.len() {
            return Err(Error::parse(1, "duplicate entries"));
        }
        if vocab.total != t {
            return Err(Error::parse(
                1,
                format!("header says T={t}, counts sum to {}", vocab.total),
            ));
        }
        Ok(vocab)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }
}

fn parse_header(line: &str) -> Option<(usize, u64)> {
    let mut parts = line.split_whitespace();
    let v = parts.next()?.strip_prefix("V=")?.parse().ok()?;
    let t = parts.next()?.strip_prefix("T=")?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((v, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn counts_and_ids() {
        let v = Vocabulary::build(words("a a b"), 1).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), Some(1));
        assert_eq!(v.count(0), 2);
        assert_eq!(v.count(1), 1);
        assert_eq!(v.total(), 3);
    }

    #[test]
    fn threshold_filters() {
        let v = Vocabulary::build(words("a a b"), 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), None);
        assert_eq!(v.total(), 2);
    }

    #[test]
    fn empty_after_filter_is_error() {
        assert!(matches!(
            Vocabulary::build(words("a b"), 3),
            Err(Error::EmptyVocabulary { min_count: 3 })
        ));
        assert!(Vocabulary::build(Vec::<&str>::new(), 1).is_err());
        assert!(matches!(Vocabulary::build(words("a"), 0), Err(Error::Config(_))));
    }

    #[test]
    fn ties_are_lexicographic() {
        let v = Vocabulary::build(words("c b a c b a d"), 1).unwrap();
        assert_eq!(v.items(), &["a", "b", "c", "d"]);
    }

    #[test]
    fn file_format() {
        let v = Vocabulary::build(words("x y y"), 1).unwrap();
        let mut out = Vec::new();
        v.write(&mut out).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), "V=2 T=3\ny\t2\nx\t1\n");
        assert_eq!(Vocabulary::read(out.as_slice()).unwrap(), v);
    }

    #[test]
    fn bad_files() {
        assert!(Vocabulary::read("V=2\n".as_bytes()).is_err());
        assert!(Vocabulary::read("V=2 T=3\ny\t2\n".as_bytes()).is_err());
        assert!(Vocabulary::read("V=1 T=3\ny\t2\n".as_bytes()).is_err());
        assert!(matches!(
            Vocabulary::read("V=1 T=2\ny 2\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn ids_ignore_input_order(mut toks in prop::collection::vec("[a-e]{1,2}", 1..60), seed in any::<u64>()) {
            let a = Vocabulary::build(&toks, 1).unwrap();
            // deterministic permutation from the seed
            let n = toks.len();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                toks.swap(i, (s >> 33) as usize % (i + 1));
            }
            let b = Vocabulary::build(&toks, 1).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn save_load_round_trip(toks in prop::collection::vec("[a-z]{1,4}", 1..80), min in 1u64..3) {
            if let Ok(v) = Vocabulary::build(&toks, min) {
                prop_assert!(v.counts().iter().all(|&c| c >= min));
                prop_assert_eq!(v.total(), v.counts().iter().sum::<u64>());
                let mut out = Vec::new();
                v.write(&mut out).unwrap();
                prop_assert_eq!(Vocabulary::read(out.as_slice()).unwrap(), v);
            }
        }
    }
}
