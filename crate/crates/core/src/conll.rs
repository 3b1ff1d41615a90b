//! Reader for dependency-parsed sentences in CoNLL-X / CoNLL-U layout.
//!
//! Recognised layouts, chosen per line by column count:
//!
//! ```text
//! 10 columns  ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC   (CoNLL-U, CoNLL-X)
//!  8 columns  ID FORM LEMMA CPOS POS FEATS HEAD DEPREL              (CoNLL-X, no projective cols)
//!  4 columns  ID FORM HEAD DEPREL                                   (compact fixtures)
//! ```
//!
//! Columns are tab separated. Comment lines (`#`), multiword token ranges
//! (`1-2`) and empty nodes (`1.1`) are skipped. Surface forms are lowercased
//! and internal whitespace is replaced by `_` so every form is a single
//! whitespace-free token in the text file formats downstream.

use std::fmt;
use std::io::BufRead;

use log::warn;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub form: String,
    /// 1-based index of the head token, 0 for the root.
    pub head: usize,
    pub label: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedSentence {
    tokens: Vec<Token>,
}

impl ParsedSentence {
    /// Builds a sentence, checking head ranges, labels and acyclicity.
    pub fn new(tokens: Vec<Token>) -> std::result::Result<Self, String> {
        let n = tokens.len();
        for (i, tok) in tokens.iter().enumerate() {
            let pos = i + 1;
            if tok.head > n {
                return Err(format!("token {pos} has head {} beyond length {n}", tok.head));
            }
            if tok.head == pos {
                return Err(format!("token {pos} is its own head"));
            }
            if tok.label.is_empty() {
                return Err(format!("token {pos} has an empty label"));
            }
        }

        // Walk up from every token; a path longer than n means a cycle.
        // state: 0 unvisited, 1 on current path, 2 known to reach the root.
        let mut state = vec![0u8; n + 1];
        for start in 1..=n {
            let mut path = Vec::new();
            let mut cur = start;
            while cur != 0 && state[cur] == 0 {
                state[cur] = 1;
                path.push(cur);
                cur = tokens[cur - 1].head;
            }
            if cur != 0 && state[cur] == 1 {
                return Err(format!("head cycle through token {cur}"));
            }
            for p in path {
                state[p] = 2;
            }
        }
        Ok(ParsedSentence { tokens })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token at 1-based position `pos`.
    pub fn token(&self, pos: usize) -> &Token {
        &self.tokens[pos - 1]
    }

    /// Surface form at 1-based position `pos`.
    pub fn form(&self, pos: usize) -> &str {
        &self.tokens[pos - 1].form
    }

    /// Iterates `(position, token)` with 1-based positions.
    pub fn positions(&self) -> impl Iterator<Item = (usize, &Token)> {
        self.tokens.iter().enumerate().map(|(i, t)| (i + 1, t))
    }

    /// 1-based positions of dependents of `head` carrying `label`.
    pub fn dependents<'a>(&'a self, head: usize, label: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.positions()
            .filter(move |(_, t)| t.head == head && t.label == label)
            .map(|(p, _)| p)
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.form.as_str())
    }
}

impl fmt::Display for ParsedSentence {
    /// Writes the sentence back out in the compact four-column layout.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pos, tok) in self.positions() {
            writeln!(f, "{pos}\t{}\t{}\t{}", tok.form, tok.head, tok.label)?;
        }
        Ok(())
    }
}

/// Normalises a raw surface form: lowercase, whitespace runs to `_`.
pub fn normalize_form(raw: &str) -> String {
    let lower = raw.to_lowercase();
    if lower.chars().any(char::is_whitespace) {
        lower.split_whitespace().collect::<Vec<_>>().join("_")
    } else {
        lower
    }
}

/// Result of reading a treebank: accepted sentences in file order plus the
/// structural errors of sentences that were rejected.
#[derive(Debug, Default)]
pub struct Treebank {
    pub sentences: Vec<ParsedSentence>,
    pub rejected: Vec<Error>,
}

/// Streaming reader yielding one item per sentence.
///
/// A malformed line ends the stream with a [`Error::Parse`]; a sentence with
/// an invalid tree yields [`Error::Structure`] and reading continues.
pub struct ConllReader<R> {
    input: R,
    line_no: usize,
    sentence_no: usize,
    buf: String,
    failed: bool,
}

impl<R: BufRead> ConllReader<R> {
    pub fn new(input: R) -> Self {
        ConllReader {
            input,
            line_no: 0,
            sentence_no: 0,
            buf: String::new(),
            failed: false,
        }
    }

    fn parse_line(&self, line: &str) -> Result<Option<(usize, Token)>> {
        let cols: Vec<&str> = line.split('\t').collect();
        let (head_col, label_col) = match cols.len() {
            10 | 8 => (6, 7),
            4 => (2, 3),
            n => {
                return Err(Error::parse(
                    self.line_no,
                    format!("expected 4, 8 or 10 tab-separated columns, found {n}"),
                ))
            }
        };
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            return Ok(None);
        }
        let id: usize = id
            .parse()
            .map_err(|_| Error::parse(self.line_no, format!("non-integer token id {id:?}")))?;
        let head = cols[head_col];
        let head: usize = head
            .parse()
            .map_err(|_| Error::parse(self.line_no, format!("non-integer head {head:?}")))?;
        let label = cols[label_col].trim();
        if label.is_empty() || label == "_" {
            return Err(Error::parse(self.line_no, "missing dependency label"));
        }
        Ok(Some((
            id,
            Token {
                form: normalize_form(cols[1]),
                head,
                label: label.to_string(),
            },
        )))
    }
}

impl<R: BufRead> Iterator for ConllReader<R> {
    type Item = Result<ParsedSentence>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let mut tokens: Vec<Token> = Vec::new();
        loop {
            self.buf.clear();
            let read = match self.input.read_line(&mut self.buf) {
                Ok(n) => n,
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            };
            if read > 0 {
                self.line_no += 1;
            }
            let line = self.buf.trim_end_matches(['\n', '\r']);
            if read == 0 || line.trim().is_empty() {
                if tokens.is_empty() {
                    if read == 0 {
                        return None;
                    }
                    continue;
                }
                let index = self.sentence_no;
                self.sentence_no += 1;
                return Some(ParsedSentence::new(tokens).map_err(|message| Error::Structure {
                    sentence: index,
                    message,
                }));
            }
            if line.starts_with('#') {
                continue;
            }
            match self.parse_line(line) {
                Ok(None) => {}
                Ok(Some((id, tok))) => {
                    if id != tokens.len() + 1 {
                        self.failed = true;
                        return Some(Err(Error::parse(
                            self.line_no,
                            format!("token id {id} out of sequence (expected {})", tokens.len() + 1),
                        )));
                    }
                    tokens.push(tok);
                }
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
    }
}

/// Reads a whole treebank. Malformed lines abort with their line number;
/// sentences with invalid trees are dropped and reported in
/// [`Treebank::rejected`].
pub fn parse_conll<R: BufRead>(input: R) -> Result<Treebank> {
    let mut bank = Treebank::default();
    for item in ConllReader::new(input) {
        match item {
            Ok(s) => bank.sentences.push(s),
            Err(e @ Error::Structure { .. }) => {
                warn!("rejecting {e}");
                bank.rejected.push(e);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(bank)
}

pub fn read_conll_file(path: impl AsRef<std::path::Path>) -> Result<Treebank> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    parse_conll(std::io::BufReader::new(file))
}

/// Writes sentences in the compact four-column layout.
pub fn write_conll<W: std::io::Write>(mut out: W, sentences: &[ParsedSentence]) -> Result<()> {
    for s in sentences {
        write!(out, "{s}")?;
        writeln!(out)?;
    }
    Ok(())
}
