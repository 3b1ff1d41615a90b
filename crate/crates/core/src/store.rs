//! Read-only embedding store: cosine similarity, nearest neighbours and the
//! plain-text vector format.
//!
//! The format is word2vec text: a `V d` header, then one `word v1 … vd` line
//! per row. Values are written with 17 significant digits, which round-trips
//! every `f64` exactly.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingStore {
    words: Vec<String>,
    index: HashMap<String, u32>,
    dim: usize,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl EmbeddingStore {
    pub fn new(words: Vec<String>, data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if data.len() != words.len() * dim {
            return Err(Error::Dimension {
                expected: words.len() * dim,
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Config(format!(
                "non-finite value in row of {:?}",
                words[i / dim]
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::Config(format!("duplicate word {w:?}")));
            }
        }
        let norms = data.chunks_exact(dim).map(norm).collect();
        Ok(EmbeddingStore {
            words,
            index,
            dim,
            data,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, id: u32) -> &[f64] {
        let s = id as usize * self.dim;
        &self.data[s..s + self.dim]
    }

    pub fn vector(&self, word: &str) -> Result<&[f64]> {
        let id = self.id(word).ok_or_else(|| Error::UnknownWord(word.to_string()))?;
        Ok(self.row(id))
    }

    pub fn norm(&self, id: u32) -> f64 {
        self.norms[id as usize]
    }

    fn lookup(&self, word: &str) -> Result<u32> {
        let id = self.id(word).ok_or_else(|| Error::UnknownWord(word.to_string()))?;
        if self.norms[id as usize] == 0.0 {
            return Err(Error::ZeroVector(word.to_string()));
        }
        Ok(id)
    }

    fn cosine_ids(&self, a: u32, b: u32) -> f64 {
        let dot: f64 = self.row(a).iter().zip(self.row(b)).map(|(x, y)| x * y).sum();
        (dot / (self.norms[a as usize] * self.norms[b as usize])).clamp(-1.0, 1.0)
    }

    pub fn cosine(&self, a: &str, b: &str) -> Result<f64> {
        let (a, b) = (self.lookup(a)?, self.lookup(b)?);
        Ok(self.cosine_ids(a, b))
    }

    /// The `k` most similar words to `query`, excluding the query itself and
    /// zero rows. Ties are broken by ascending id.
    pub fn nearest(&self, query: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let q = self.lookup(query)?;
        if k == 0 || k >= self.len() {
            return Err(Error::Config(format!("k must satisfy 0 < k < V = {}", self.len())));
        }
        let mut scored: Vec<(u32, f64)> = (0..self.len() as u32)
            .filter(|&id| id != q && self.norms[id as usize] > 0.0)
            .map(|id| (id, self.cosine_ids(q, id)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(k);
        Ok(scored
            .into_iter()
            .map(|(id, s)| (self.words[id as usize].clone(), s))
            .collect())
    }

    /// Order-sensitive FNV checksum over words and value bits.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for w in &self.words {
            feed(w.as_bytes());
            feed(&[0]);
        }
        for x in &self.data {
            feed(&x.to_bits().to_le_bytes());
        }
        h
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        write_matrix(out, &self.words, &self.data, self.dim)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_matrix(path, &self.words, &self.data, self.dim)
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let (words, data, dim) = read_matrix(input)?;
        Self::new(words, data, dim)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn write_matrix<W: Write, S: AsRef<str>>(mut out: W, words: &[S], data: &[f64], dim: usize) -> Result<()> {
    writeln!(out, "{} {}", words.len(), dim)?;
    for (w, row) in words.iter().zip(data.chunks_exact(dim)) {
        out.write_all(w.as_ref().as_bytes())?;
        for x in row {
            write!(out, " {x:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_matrix<S: AsRef<str>>(path: impl AsRef<Path>, words: &[S], data: &[f64], dim: usize) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_matrix(&mut out, words, data, dim)?;
    out.flush()?;
    Ok(())
}

/// Parses the `V d` text format into `(words, row-major values, d)`.
pub fn read_matrix<R: BufRead>(input: R) -> Result<(Vec<String>, Vec<f64>, usize)> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(l) => l?,
        None => return Err(Error::parse(1, "missing `V d` header")),
    };
    let mut parts = header.split_whitespace();
    let (v, d) = match (parts.next(), parts.next(), parts.next()) {
        (Some(v), Some(d), None) => match (v.parse::<usize>(), d.parse::<usize>()) {
            (Ok(v), Ok(d)) if d > 0 => (v, d),
            _ => return Err(Error::parse(1, format!("malformed header {header:?}"))),
        },
        _ => return Err(Error::parse(1, format!("malformed header {header:?}"))),
    };
    let mut words = Vec::with_capacity(v);
    let mut data = Vec::with_capacity(v * d);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if words.len() == v {
            return Err(Error::parse(line_no, format!("more rows than the header's V={v}")));
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap();
        let before = data.len();
        for f in fields {
            let x: f64 = f
                .parse()
                .map_err(|_| Error::parse(line_no, format!("non-numeric value {f:?}")))?;
            data.push(x);
        }
        if data.len() - before != d {
            return Err(Error::parse(
                line_no,
                format!("row has {} values, header says d={d}", data.len() - before),
            ));
        }
        words.push(word.to_string());
    }
    if words.len() != v {
        return Err(Error::parse(
            1,
            format!("header says V={v}, found {} rows", words.len()),
        ));
    }
    Ok((words, data, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use proptest::prelude::*;
    use rand::Rng as _;

    fn store(rows: &[(&str, &[f64])]) -> EmbeddingStore {
        let dim = rows[0].1.len();
        EmbeddingStore::new(
            rows.iter().map(|r| r.0.to_string()).collect(),
            rows.iter().flat_map(|r| r.1.iter().copied()).collect(),
            dim,
        )
        .unwrap()
    }

    fn random_store(n: usize, dim: usize, seed_value: u64) -> EmbeddingStore {
        let mut rng = seed::rng(seed_value);
        let words = (0..n).map(|i| format!("w{i}")).collect();
        let data = (0..n * dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        EmbeddingStore::new(words, data, dim).unwrap()
    }

    #[test]
    fn cosine_values() {
        let s = store(&[("x", &[1.0, 0.0]), ("y", &[0.0, 1.0]), ("z", &[1.0, 1.0])]);
        assert!((s.cosine("x", "x").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.cosine("x", "y").unwrap(), 0.0);
        assert!((s.cosine("x", "z").unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(s.cosine("x", "z").unwrap(), s.cosine("z", "x").unwrap());
    }

    #[test]
    fn cosine_errors() {
        let s = store(&[("x", &[1.0, 0.0]), ("zero", &[0.0, 0.0])]);
        assert!(matches!(s.cosine("x", "nope"), Err(Error::UnknownWord(_))));
        assert!(matches!(s.cosine("x", "zero"), Err(Error::ZeroVector(_))));
    }

    #[test]
    fn nearest_basics() {
        let s = store(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        assert_eq!(s.nearest("a", 1).unwrap(), vec![("b".to_string(), 0.0)]);
        assert!(s.nearest("a", 2).is_err());
        assert!(matches!(s.nearest("c", 1), Err(Error::UnknownWord(_))));

        let s = store(&[("q", &[0.3, 0.7]), ("x", &[1.0, 0.0]), ("dup", &[0.3, 0.7])]);
        let top = s.nearest("q", 1).unwrap();
        assert_eq!(top[0].0, "dup");
        assert!((top[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_by_id() {
        let s = store(&[
            ("q", &[1.0, 0.0]),
            ("b", &[0.0, 1.0]),
            ("a", &[0.0, 2.0]),
            ("c", &[0.0, -1.0]),
        ]);
        let got: Vec<String> = s.nearest("q", 3).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(got, vec!["b", "a", "c"]);
    }

    /// Full scan with an independent cosine written longhand.
    fn brute_force(s: &EmbeddingStore, q: &str, k: usize) -> Vec<String> {
        let qv = s.vector(q).unwrap();
        let mut all: Vec<(usize, f64)> = s
            .words()
            .iter()
            .enumerate()
            .filter(|(_, w)| w.as_str() != q)
            .map(|(i, w)| {
                let v = s.vector(w).unwrap();
                let mut dot = 0.0;
                let mut na = 0.0;
                let mut nb = 0.0;
                for j in 0..v.len() {
                    dot += qv[j] * v[j];
                    na += qv[j] * qv[j];
                    nb += v[j] * v[j];
                }
                (i, dot / (na.sqrt() * nb.sqrt()))
            })
            .collect();
        all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        all.into_iter().take(k).map(|(i, _)| s.words()[i].clone()).collect()
    }

    #[test]
    fn nearest_matches_brute_force() {
        let s = random_store(10, 6, 5);
        let got: Vec<String> = s.nearest("w3", 5).unwrap().into_iter().map(|p| p.0).collect();
        assert_eq!(got, brute_force(&s, "w3", 5));
        let s = random_store(50, 8, 9);
        for w in s.words() {
            let got: Vec<String> = s.nearest(w, 10).unwrap().into_iter().map(|p| p.0).collect();
            assert_eq!(got, brute_force(&s, w, 10));
        }
    }

    #[test]
    fn format_round_trip_and_errors() {
        let s = random_store(3, 4, 1);
        let mut out = Vec::new();
        s.write(&mut out).unwrap();
        assert_eq!(EmbeddingStore::read(out.as_slice()).unwrap(), s);

        let bad_count = "3 2\na 1 2\nb 3 4\n";
        assert!(matches!(
            EmbeddingStore::read(bad_count.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad_row = "2 2\na 1 2\nb 3\n";
        assert!(matches!(
            EmbeddingStore::read(bad_row.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(EmbeddingStore::read("2\n".as_bytes()).is_err());
        assert!(EmbeddingStore::read("1 2\na 1 x\n".as_bytes()).is_err());
    }

    #[test]
    fn hand_written_file() {
        let text = "2 3\ncat 0.5 -1.25 3\ndog 1e-3 0 -2.5e2\n";
        let s = EmbeddingStore::read(text.as_bytes()).unwrap();
        assert_eq!(s.words(), &["cat", "dog"]);
        assert_eq!(s.vector("cat").unwrap(), &[0.5, -1.25, 3.0]);
        assert_eq!(s.vector("dog").unwrap(), &[0.001, 0.0, -250.0]);
    }

    proptest! {
        #[test]
        fn scaling_a_row_preserves_cosines_and_rankings(seed_value in any::<u64>(), row in 0usize..12, scale in 0.01f64..100.0) {
            let s = random_store(12, 5, seed_value);
            let mut data = s.data().to_vec();
            for x in &mut data[row * 5..(row + 1) * 5] {
                *x *= scale;
            }
            let t = EmbeddingStore::new(s.words().to_vec(), data, 5).unwrap();
            let w = &s.words()[row];
            for other in s.words() {
                prop_assert!((s.cosine(w, other).unwrap() - t.cosine(w, other).unwrap()).abs() < 1e-10);
            }
            for q in s.words() {
                let a: Vec<String> = s.nearest(q, 4).unwrap().into_iter().map(|p| p.0).collect();
                let b: Vec<String> = t.nearest(q, 4).unwrap().into_iter().map(|p| p.0).collect();
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn text_round_trip_is_bitwise(seed_value in any::<u64>()) {
            let s = random_store(4, 3, seed_value);
            let mut out = Vec::new();
            s.write(&mut out).unwrap();
            let back = EmbeddingStore::read(out.as_slice()).unwrap();
            prop_assert_eq!(back.checksum(), s.checksum());
        }
    }
}
