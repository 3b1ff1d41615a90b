//! Structural features read off dependency trees.
//!
//! Four families are produced, each emitting a mirrored pair of
//! `(word, feature)` items per match:
//!
//! * `arc`: first-order arcs, `dep:<label>:<H|T>:<adjoined>`
//! * `prepf`: prepositional phrases flattened into a direct head/object link,
//!   `prepf:<prep>:<H|T>:<adjoined>`
//! * `pat`: the `such_as`, `known_as` and `name_for` noun-relationship
//!   patterns, `pat:<kind>:<X|Y>:<other>`
//! * `so`: subject/object of the same transitive verb, `so:<subj|obj>:<verb>:<other>`
//!
//! Fields inside an encoding are escaped (`%` → `%25`, `:` → `%3A`,
//! whitespace → `%20`/`%09`/`%0A`/`%0D`) so the encoding stays injective
//! for labels like `nmod:poss`. Plain words and labels encode verbatim.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::conll::ParsedSentence;
use crate::vocab::Vocabulary;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Head,
    Tail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternKind {
    SuchAs,
    KnownAs,
    NameFor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternSide {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Subject,
    Object,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructuralFeature {
    Arc {
        label: String,
        side: Side,
        adjoined: String,
    },
    FlatPrep {
        preposition: String,
        side: Side,
        adjoined: String,
    },
    Pattern {
        kind: PatternKind,
        side: PatternSide,
        other: String,
    },
    SubjObj {
        role: Role,
        verb: String,
        other: String,
    },
}

impl StructuralFeature {
    /// The word on the other end of the relation.
    pub fn partner(&self) -> &str {
        match self {
            StructuralFeature::Arc { adjoined, .. } | StructuralFeature::FlatPrep { adjoined, .. } => adjoined,
            StructuralFeature::Pattern { other, .. } | StructuralFeature::SubjObj { other, .. } => other,
        }
    }

    pub fn family(&self) -> Family {
        match self {
            StructuralFeature::Arc { .. } => Family::Arc,
            StructuralFeature::FlatPrep { .. } => Family::FlatPrep,
            StructuralFeature::Pattern { .. } => Family::Pattern,
            StructuralFeature::SubjObj { .. } => Family::SubjObj,
        }
    }
}

impl PatternKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::SuchAs => "such_as",
            PatternKind::KnownAs => "known_as",
            PatternKind::NameFor => "name_for",
        }
    }
}

fn side_code(side: Side) -> &'static str {
    match side {
        Side::Head => "H",
        Side::Tail => "T",
    }
}

fn escape(field: &str) -> std::borrow::Cow<'_, str> {
    if !field.contains(['%', ':', ' ', '\t', '\n', '\r']) {
        return field.into();
    }
    let mut out = String::with_capacity(field.len() + 8);
    for c in field.chars() {
        match c {
            '%' => out.push_str("%25"),
            ':' => out.push_str("%3A"),
            ' ' => out.push_str("%20"),
            '\t' => out.push_str("%09"),
            '\n' => out.push_str("%0A"),
            '\r' => out.push_str("%0D"),
            c => out.push(c),
        }
    }
    out.into()
}

fn unescape(field: &str) -> std::result::Result<String, String> {
    if !field.contains('%') {
        return Ok(field.to_string());
    }
    let mut out = String::with_capacity(field.len());
    let mut rest = field;
    while let Some(i) = rest.find('%') {
        out.push_str(&rest[..i]);
        let code = rest.get(i + 1..i + 3).ok_or("truncated escape")?;
        out.push(match code {
            "25" => '%',
            "3A" => ':',
            "20" => ' ',
            "09" => '\t',
            "0A" => '\n',
            "0D" => '\r',
            _ => return Err(format!("unknown escape %{code}")),
        });
        rest = &rest[i + 3..];
    }
    out.push_str(rest);
    Ok(out)
}

impl fmt::Display for StructuralFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructuralFeature::Arc { label, side, adjoined } => {
                write!(f, "dep:{}:{}:{}", escape(label), side_code(*side), escape(adjoined))
            }
            StructuralFeature::FlatPrep {
                preposition,
                side,
                adjoined,
            } => write!(
                f,
                "prepf:{}:{}:{}",
                escape(preposition),
                side_code(*side),
                escape(adjoined)
            ),
            StructuralFeature::Pattern { kind, side, other } => {
                let s = match side {
                    PatternSide::X => "X",
                    PatternSide::Y => "Y",
                };
                write!(f, "pat:{}:{}:{}", kind.as_str(), s, escape(other))
            }
            StructuralFeature::SubjObj { role, verb, other } => {
                let r = match role {
                    Role::Subject => "subj",
                    Role::Object => "obj",
                };
                write!(f, "so:{}:{}:{}", r, escape(verb), escape(other))
            }
        }
    }
}

impl FromStr for StructuralFeature {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(format!("expected 4 ':'-separated fields in {s:?}"));
        }
        let side = |code: &str| match code {
            "H" => Ok(Side::Head),
            "T" => Ok(Side::Tail),
            _ => Err(format!("bad side {code:?}")),
        };
        Ok(match parts[0] {
            "dep" => StructuralFeature::Arc {
                label: unescape(parts[1])?,
                side: side(parts[2])?,
                adjoined: unescape(parts[3])?,
            },
            "prepf" => StructuralFeature::FlatPrep {
                preposition: unescape(parts[1])?,
                side: side(parts[2])?,
                adjoined: unescape(parts[3])?,
            },
            "pat" => StructuralFeature::Pattern {
                kind: match parts[1] {
                    "such_as" => PatternKind::SuchAs,
                    "known_as" => PatternKind::KnownAs,
                    "name_for" => PatternKind::NameFor,
                    k => return Err(format!("bad pattern kind {k:?}")),
                },
                side: match parts[2] {
                    "X" => PatternSide::X,
                    "Y" => PatternSide::Y,
                    x => return Err(format!("bad pattern side {x:?}")),
                },
                other: unescape(parts[3])?,
            },
            "so" => StructuralFeature::SubjObj {
                role: match parts[1] {
                    "subj" => Role::Subject,
                    "obj" => Role::Object,
                    r => return Err(format!("bad role {r:?}")),
                },
                verb: unescape(parts[2])?,
                other: unescape(parts[3])?,
            },
            p => return Err(format!("unknown feature prefix {p:?}")),
        })
    }
}

/// A word annotated with one structural feature.
pub type FeaturePair = (String, StructuralFeature);

/// Dependency labels the extractors look for. Defaults are Stanford basic
/// dependencies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    pub prep: String,
    pub pobj: String,
    pub mwe: String,
    pub nsubj: String,
    pub nsubjpass: String,
    pub dobj: String,
}

impl Default for LabelSet {
    fn default() -> Self {
        LabelSet {
            prep: "prep".into(),
            pobj: "pobj".into(),
            mwe: "mwe".into(),
            nsubj: "nsubj".into(),
            nsubjpass: "nsubjpass".into(),
            dobj: "dobj".into(),
        }
    }
}

impl LabelSet {
    /// Applies `role=label` overrides, e.g. `dobj=obj,nsubjpass=nsubj:pass`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (role, label) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("label override {item:?} is not role=label")))?;
            let slot = match role.trim() {
                "prep" => &mut self.prep,
                "pobj" => &mut self.pobj,
                "mwe" => &mut self.mwe,
                "nsubj" => &mut self.nsubj,
                "nsubjpass" => &mut self.nsubjpass,
                "dobj" => &mut self.dobj,
                r => return Err(Error::Config(format!("unknown label role {r:?}"))),
            };
            *slot = label.trim().to_string();
        }
        Ok(self)
    }
}

/// Arc features: each non-root arc `label(h, t)` gives
/// `(h, dep:label:H:t)` and `(t, dep:label:T:h)`.
pub fn extract_arc_features(sentence: &ParsedSentence) -> Vec<FeaturePair> {
    let mut out = Vec::new();
    for (pos, tok) in sentence.positions() {
        if tok.head == 0 {
            continue;
        }
        let head = sentence.form(tok.head);
        out.push((
            head.to_string(),
            StructuralFeature::Arc {
                label: tok.label.clone(),
                side: Side::Head,
                adjoined: tok.form.clone(),
            },
        ));
        out.push((
            sentence.form(pos).to_string(),
            StructuralFeature::Arc {
                label: tok.label.clone(),
                side: Side::Tail,
                adjoined: head.to_string(),
            },
        ));
    }
    out
}

/// Flattened prepositions: `prep(h, p) ∧ pobj(p, o)` links `h` and `o`
/// directly, naming the preposition.
pub fn extract_flat_prep_features(sentence: &ParsedSentence, labels: &LabelSet) -> Vec<FeaturePair> {
    let mut out = Vec::new();
    for (p, tok) in sentence.positions() {
        if tok.head == 0 || tok.label != labels.prep {
            continue;
        }
        let head = sentence.form(tok.head);
        for o in sentence.dependents(p, &labels.pobj) {
            let object = sentence.form(o);
            out.push((
                head.to_string(),
                StructuralFeature::FlatPrep {
                    preposition: tok.form.clone(),
                    side: Side::Head,
                    adjoined: object.to_string(),
                },
            ));
            out.push((
                object.to_string(),
                StructuralFeature::FlatPrep {
                    preposition: tok.form.clone(),
                    side: Side::Tail,
                    adjoined: head.to_string(),
                },
            ));
        }
    }
    out
}

fn push_pattern(out: &mut Vec<FeaturePair>, kind: PatternKind, x: &str, y: &str) {
    out.push((
        x.to_string(),
        StructuralFeature::Pattern {
            kind,
            side: PatternSide::X,
            other: y.to_string(),
        },
    ));
    out.push((
        y.to_string(),
        StructuralFeature::Pattern {
            kind,
            side: PatternSide::Y,
            other: x.to_string(),
        },
    ));
}

/// Noun-relationship patterns:
///
/// ```text
/// such_as   mwe(as_i, such) ∧ prep(X, as_i) ∧ pobj(as_i, Y)
/// known_as  prep(known_i, as_j) ∧ nsubjpass(known_i, X) ∧ pobj(as_j, Y)
/// name_for  nsubj(X, name_i) ∧ prep(name_i, for_j) ∧ pobj(for_j, Y)
/// ```
///
/// `rel(a, b)` is an arc from head `a` to dependent `b`; anchors match the
/// lowercased surface form at one token position.
pub fn extract_pattern_features(sentence: &ParsedSentence, labels: &LabelSet) -> Vec<FeaturePair> {
    let mut out = Vec::new();
    for (i, tok) in sentence.positions() {
        match tok.form.as_str() {
            "as" => {
                // such_as: `as` is the prep dependent of X with a `such` mwe child.
                if tok.head == 0 || tok.label != labels.prep {
                    continue;
                }
                let has_such = sentence.dependents(i, &labels.mwe).any(|m| sentence.form(m) == "such");
                if !has_such {
                    continue;
                }
                let x = sentence.form(tok.head);
                for y in sentence.dependents(i, &labels.pobj) {
                    push_pattern(&mut out, PatternKind::SuchAs, x, sentence.form(y));
                }
            }
            "known" => {
                let subjects: Vec<usize> = sentence.dependents(i, &labels.nsubjpass).collect();
                for j in sentence.dependents(i, &labels.prep) {
                    if sentence.form(j) != "as" {
                        continue;
                    }
                    for &x in &subjects {
                        for y in sentence.dependents(j, &labels.pobj) {
                            push_pattern(&mut out, PatternKind::KnownAs, sentence.form(x), sentence.form(y));
                        }
                    }
                }
            }
            "name" => {
                if tok.head == 0 || tok.label != labels.nsubj {
                    continue;
                }
                let x = sentence.form(tok.head);
                for j in sentence.dependents(i, &labels.prep) {
                    if sentence.form(j) != "for" {
                        continue;
                    }
                    for y in sentence.dependents(j, &labels.pobj) {
                        push_pattern(&mut out, PatternKind::NameFor, x, sentence.form(y));
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// Second-order subject/object links: `nsubj(v, s) ∧ dobj(v, o)` gives
/// `(s, so:subj:v:o)` and `(o, so:obj:v:s)` for every subject × object.
pub fn extract_subjobj_features(sentence: &ParsedSentence, labels: &LabelSet) -> Vec<FeaturePair> {
    let mut out = Vec::new();
    for (v, tok) in sentence.positions() {
        let subjects: Vec<usize> = sentence.dependents(v, &labels.nsubj).collect();
        if subjects.is_empty() {
            continue;
        }
        let objects: Vec<usize> = sentence.dependents(v, &labels.dobj).collect();
        for &s in &subjects {
            for &o in &objects {
                out.push((
                    sentence.form(s).to_string(),
                    StructuralFeature::SubjObj {
                        role: Role::Subject,
                        verb: tok.form.clone(),
                        other: sentence.form(o).to_string(),
                    },
                ));
                out.push((
                    sentence.form(o).to_string(),
                    StructuralFeature::SubjObj {
                        role: Role::Object,
                        verb: tok.form.clone(),
                        other: sentence.form(s).to_string(),
                    },
                ));
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Arc,
    FlatPrep,
    Pattern,
    SubjObj,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Arc, Family::FlatPrep, Family::Pattern, Family::SubjObj];

    pub fn name(self) -> &'static str {
        match self {
            Family::Arc => "arc",
            Family::FlatPrep => "prepf",
            Family::Pattern => "pat",
            Family::SubjObj => "so",
        }
    }
}

/// Which feature families to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Families {
    pub arc: bool,
    pub flat_prep: bool,
    pub pattern: bool,
    pub subjobj: bool,
}

impl Families {
    pub const ALL: Families = Families {
        arc: true,
        flat_prep: true,
        pattern: true,
        subjobj: true,
    };

    pub const NONE: Families = Families {
        arc: false,
        flat_prep: false,
        pattern: false,
        subjobj: false,
    };

    pub fn only(family: Family) -> Self {
        Families::NONE.with(family)
    }

    pub fn with(mut self, family: Family) -> Self {
        match family {
            Family::Arc => self.arc = true,
            Family::FlatPrep => self.flat_prep = true,
            Family::Pattern => self.pattern = true,
            Family::SubjObj => self.subjobj = true,
        }
        self
    }

    pub fn contains(&self, family: Family) -> bool {
        match family {
            Family::Arc => self.arc,
            Family::FlatPrep => self.flat_prep,
            Family::Pattern => self.pattern,
            Family::SubjObj => self.subjobj,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.arc || self.flat_prep || self.pattern || self.subjobj)
    }
}

impl FromStr for Families {
    type Err = Error;

    /// Parses a comma list such as `arc,prepf,pat,so`.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Families::NONE;
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            let family = Family::ALL
                .into_iter()
                .find(|f| f.name() == name)
                .ok_or_else(|| Error::Config(format!("unknown feature family {name:?}")))?;
            out = out.with(family);
        }
        Ok(out)
    }
}

impl fmt::Display for Families {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = Family::ALL
            .into_iter()
            .filter(|fam| self.contains(*fam))
            .map(Family::name)
            .collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractConfig {
    pub families: Families,
    pub labels: LabelSet,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig {
            families: Families::ALL,
            labels: LabelSet::default(),
        }
    }
}

/// Runs the enabled extractors over one sentence, in family order.
pub fn extract_sentence(sentence: &ParsedSentence, config: &ExtractConfig) -> Vec<FeaturePair> {
    let mut out = Vec::new();
    let f = &config.families;
    if f.arc {
        out.extend(extract_arc_features(sentence));
    }
    if f.flat_prep {
        out.extend(extract_flat_prep_features(sentence, &config.labels));
    }
    if f.pattern {
        out.extend(extract_pattern_features(sentence, &config.labels));
    }
    if f.subjobj {
        out.extend(extract_subjobj_features(sentence, &config.labels));
    }
    out
}

/// The multiset of `(word, feature)` training pairs. Duplicates are kept:
/// each occurrence is one training event.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeaturePairSet {
    pairs: Vec<FeaturePair>,
}

impl FeaturePairSet {
    pub fn new(pairs: Vec<FeaturePair>) -> Self {
        FeaturePairSet { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[FeaturePair] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeaturePair> {
        self.pairs.iter()
    }

    /// Canonical feature strings, one per pair occurrence.
    pub fn encoded_features(&self) -> impl Iterator<Item = String> + '_ {
        self.pairs.iter().map(|(_, f)| f.to_string())
    }

    /// Writes one `word<TAB>feature` line per pair.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (w, f) in &self.pairs {
            writeln!(out, "{w}\t{f}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (w, f) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected `word<TAB>feature`"))?;
            let feature = f.parse().map_err(|m: String| Error::parse(i + 1, m))?;
            pairs.push((w.to_string(), feature));
        }
        Ok(FeaturePairSet { pairs })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        self.write(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }
}

/// Extracts pairs from every sentence, in corpus order. With a vocabulary,
/// pairs whose word or partner word is out of vocabulary are dropped.
pub fn extract_all(
    sentences: &[ParsedSentence],
    config: &ExtractConfig,
    vocab: Option<&Vocabulary>,
) -> Result<FeaturePairSet> {
    if config.families.is_empty() {
        return Err(Error::Config("no feature family selected".into()));
    }
    let per_sentence: Vec<Vec<FeaturePair>> = sentences
        .par_iter()
        .map(|s| {
            let mut pairs = extract_sentence(s, config);
            if let Some(v) = vocab {
                pairs.retain(|(w, f)| v.contains(w) && v.contains(f.partner()));
            }
            pairs
        })
        .collect();
    Ok(FeaturePairSet::new(per_sentence.into_iter().flatten().collect()))
}

/// Vocabulary over the canonical feature strings of `pairs`.
pub fn build_feature_vocabulary(pairs: &FeaturePairSet, min_count: u64) -> Result<Vocabulary> {
    Vocabulary::build(pairs.encoded_features(), min_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conll::parse_conll;
    use proptest::prelude::*;

    fn sentence(rows: &[(&str, usize, &str)]) -> ParsedSentence {
        let text: String = rows
            .iter()
            .enumerate()
            .map(|(i, (w, h, l))| format!("{}\t{w}\t{h}\t{l}\n", i + 1))
            .collect();
        parse_conll(text.as_bytes()).unwrap().sentences.remove(0)
    }

    fn paella() -> ParsedSentence {
        sentence(&[
            ("The", 2, "det"),
            ("woman", 3, "nsubj"),
            ("ate", 0, "root"),
            ("the", 5, "det"),
            ("paella", 3, "dobj"),
        ])
    }

    fn arc(label: &str, side: Side, adjoined: &str) -> StructuralFeature {
        StructuralFeature::Arc {
            label: label.into(),
            side,
            adjoined: adjoined.into(),
        }
    }

    fn pair(w: &str, f: StructuralFeature) -> FeaturePair {
        (w.to_string(), f)
    }

    #[test]
    fn root_only_sentence_has_no_arcs() {
        let s = sentence(&[("hello", 0, "root")]);
        assert!(extract_arc_features(&s).is_empty());
    }

    #[test]
    fn paella_arcs() {
        let pairs = extract_arc_features(&paella());
        assert_eq!(pairs.len(), 8);
        assert!(pairs.contains(&pair("ate", arc("nsubj", Side::Head, "woman"))));
        assert!(pairs.contains(&pair("woman", arc("nsubj", Side::Tail, "ate"))));
        assert_eq!(
            pairs,
            vec![
                pair("woman", arc("det", Side::Head, "the")),
                pair("the", arc("det", Side::Tail, "woman")),
                pair("ate", arc("nsubj", Side::Head, "woman")),
                pair("woman", arc("nsubj", Side::Tail, "ate")),
                pair("paella", arc("det", Side::Head, "the")),
                pair("the", arc("det", Side::Tail, "paella")),
                pair("ate", arc("dobj", Side::Head, "paella")),
                pair("paella", arc("dobj", Side::Tail, "ate")),
            ]
        );
    }

    fn flat(prep: &str, side: Side, adjoined: &str) -> StructuralFeature {
        StructuralFeature::FlatPrep {
            preposition: prep.into(),
            side,
            adjoined: adjoined.into(),
        }
    }

    fn such_as() -> ParsedSentence {
        // anarchists such as Frederico Urales
        sentence(&[
            ("anarchists", 0, "root"),
            ("such", 3, "mwe"),
            ("as", 1, "prep"),
            ("Frederico", 5, "nn"),
            ("Urales", 3, "pobj"),
        ])
    }

    #[test]
    fn flat_prep() {
        let labels = LabelSet::default();
        assert!(extract_flat_prep_features(&paella(), &labels).is_empty());
        assert_eq!(
            extract_flat_prep_features(&such_as(), &labels),
            vec![
                pair("anarchists", flat("as", Side::Head, "urales")),
                pair("urales", flat("as", Side::Tail, "anarchists")),
            ]
        );
        let name_for = sentence(&[("name", 0, "root"), ("for", 1, "prep"), ("alkanes", 2, "pobj")]);
        assert_eq!(
            extract_flat_prep_features(&name_for, &labels),
            vec![
                pair("name", flat("for", Side::Head, "alkanes")),
                pair("alkanes", flat("for", Side::Tail, "name")),
            ]
        );
    }

    fn pat(kind: PatternKind, side: PatternSide, other: &str) -> StructuralFeature {
        StructuralFeature::Pattern {
            kind,
            side,
            other: other.into(),
        }
    }

    #[test]
    fn such_as_pattern() {
        let got = extract_pattern_features(&such_as(), &LabelSet::default());
        assert_eq!(
            got,
            vec![
                pair("anarchists", pat(PatternKind::SuchAs, PatternSide::X, "urales")),
                pair("urales", pat(PatternKind::SuchAs, PatternSide::Y, "anarchists")),
            ]
        );
    }

    #[test]
    fn such_as_requires_mwe() {
        let s = sentence(&[("anarchists", 0, "root"), ("as", 1, "prep"), ("urales", 2, "pobj")]);
        assert!(extract_pattern_features(&s, &LabelSet::default()).is_empty());
    }

    #[test]
    fn known_as_pattern() {
        // The incident became known as the Haymarket affair
        let s = sentence(&[
            ("The", 2, "det"),
            ("incident", 4, "nsubjpass"),
            ("became", 4, "auxpass"),
            ("known", 0, "root"),
            ("as", 4, "prep"),
            ("the", 8, "det"),
            ("Haymarket", 8, "nn"),
            ("affair", 5, "pobj"),
        ]);
        assert_eq!(
            extract_pattern_features(&s, &LabelSet::default()),
            vec![
                pair("incident", pat(PatternKind::KnownAs, PatternSide::X, "affair")),
                pair("affair", pat(PatternKind::KnownAs, PatternSide::Y, "incident")),
            ]
        );
    }

    #[test]
    fn name_for_pattern() {
        // The trivial name for alkanes is paraffins
        let s = sentence(&[
            ("The", 3, "det"),
            ("trivial", 3, "amod"),
            ("name", 7, "nsubj"),
            ("for", 3, "prep"),
            ("alkanes", 4, "pobj"),
            ("is", 7, "cop"),
            ("paraffins", 0, "root"),
        ]);
        assert_eq!(
            extract_pattern_features(&s, &LabelSet::default()),
            vec![
                pair("paraffins", pat(PatternKind::NameFor, PatternSide::X, "alkanes")),
                pair("alkanes", pat(PatternKind::NameFor, PatternSide::Y, "paraffins")),
            ]
        );
    }

    fn so(role: Role, verb: &str, other: &str) -> StructuralFeature {
        StructuralFeature::SubjObj {
            role,
            verb: verb.into(),
            other: other.into(),
        }
    }

    #[test]
    fn subject_object() {
        let labels = LabelSet::default();
        let slept = sentence(&[("The", 2, "det"), ("woman", 3, "nsubj"), ("slept", 0, "root")]);
        assert!(extract_subjobj_features(&slept, &labels).is_empty());
        assert_eq!(
            extract_subjobj_features(&paella(), &labels),
            vec![
                pair("woman", so(Role::Subject, "ate", "paella")),
                pair("paella", so(Role::Object, "ate", "woman")),
            ]
        );
        let coordinated = sentence(&[
            ("woman", 2, "nsubj"),
            ("ate", 0, "root"),
            ("paella", 2, "dobj"),
            ("and", 3, "cc"),
            ("bread", 2, "dobj"),
        ]);
        let got = extract_subjobj_features(&coordinated, &labels);
        assert_eq!(got.len(), 4);
        assert!(got.contains(&pair("bread", so(Role::Object, "ate", "woman"))));
        assert!(got.contains(&pair("woman", so(Role::Subject, "ate", "bread"))));
    }

    #[test]
    fn relabeling() {
        let labels = LabelSet::default().with_overrides("nsubj=nsubj,dobj=obj").unwrap();
        let s = sentence(&[("woman", 2, "nsubj"), ("ate", 0, "root"), ("paella", 2, "obj")]);
        assert_eq!(extract_subjobj_features(&s, &labels).len(), 2);
        assert!(LabelSet::default().with_overrides("verb=x").is_err());
    }

    #[test]
    fn canonical_encodings() {
        assert_eq!(arc("nsubj", Side::Head, "woman").to_string(), "dep:nsubj:H:woman");
        assert_eq!(flat("as", Side::Tail, "x").to_string(), "prepf:as:T:x");
        assert_eq!(
            pat(PatternKind::NameFor, PatternSide::Y, "paraffins").to_string(),
            "pat:name_for:Y:paraffins"
        );
        assert_eq!(so(Role::Object, "ate", "woman").to_string(), "so:obj:ate:woman");
        assert_eq!(
            arc("nmod:poss", Side::Tail, "a:b").to_string(),
            "dep:nmod%3Aposs:T:a%3Ab"
        );
    }

    #[test]
    fn extract_all_selection_and_errors() {
        let corpus = vec![paella(), such_as()];
        let err = extract_all(
            &corpus,
            &ExtractConfig {
                families: Families::NONE,
                ..Default::default()
            },
            None,
        );
        assert!(matches!(err, Err(Error::Config(_))));

        let empty = extract_all(&[], &ExtractConfig::default(), None).unwrap();
        assert_eq!(empty.len(), 0);

        let arcs_only = extract_all(
            &corpus,
            &ExtractConfig {
                families: Families::only(Family::Arc),
                ..Default::default()
            },
            None,
        )
        .unwrap();
        let expected: Vec<_> = corpus.iter().flat_map(extract_arc_features).collect();
        assert_eq!(arcs_only.pairs(), expected.as_slice());
    }

    #[test]
    fn oov_filtering() {
        let vocab = Vocabulary::build(["woman", "ate", "paella"], 1).unwrap();
        let got = extract_all(&[paella()], &ExtractConfig::default(), Some(&vocab)).unwrap();
        // det arcs touch "the", which is out of vocabulary
        assert!(got
            .iter()
            .all(|(w, f)| vocab.contains(w) && vocab.contains(f.partner())));
        assert_eq!(got.len(), 4 + 2);
    }

    #[test]
    fn families_parse() {
        assert_eq!("arc,prepf,pat,so".parse::<Families>().unwrap(), Families::ALL);
        assert_eq!("pat".parse::<Families>().unwrap(), Families::only(Family::Pattern));
        assert!("arc,bogus".parse::<Families>().is_err());
        assert_eq!(Families::ALL.to_string(), "arc,prepf,pat,so");
    }

    #[test]
    fn feature_vocabulary_counts() {
        let pairs = extract_all(&[paella(), paella()], &ExtractConfig::default(), None).unwrap();
        let v = build_feature_vocabulary(&pairs, 2).unwrap();
        // dep:det:H:the occurs for both "woman" and "paella"
        assert_eq!(v.len(), 9);
        assert_eq!(v.item(0), "dep:det:H:the");
        assert_eq!(v.count(0), 4);
        assert!(v.counts()[1..].iter().all(|&c| c == 2));
        assert_eq!(build_feature_vocabulary(&pairs, 3).unwrap().len(), 1);
        assert!(build_feature_vocabulary(&pairs, 5).is_err());
    }

    #[test]
    fn pair_dump_round_trip() {
        let pairs = extract_all(&[paella(), such_as()], &ExtractConfig::default(), None).unwrap();
        let mut out = Vec::new();
        pairs.write(&mut out).unwrap();
        assert!(String::from_utf8_lossy(&out).starts_with("woman\tdep:det:H:the\n"));
        assert_eq!(FeaturePairSet::read(out.as_slice()).unwrap(), pairs);
        assert!(matches!(
            FeaturePairSet::read("w\tdep:x:Q:y\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    fn arb_field() -> impl Strategy<Value = String> {
        "[a-z:%_ ]{0,6}"
    }

    fn arb_feature() -> impl Strategy<Value = StructuralFeature> {
        let side = prop_oneof![Just(Side::Head), Just(Side::Tail)];
        let kind = prop_oneof![
            Just(PatternKind::SuchAs),
            Just(PatternKind::KnownAs),
            Just(PatternKind::NameFor)
        ];
        let pside = prop_oneof![Just(PatternSide::X), Just(PatternSide::Y)];
        let role = prop_oneof![Just(Role::Subject), Just(Role::Object)];
        prop_oneof![
            (arb_field(), side.clone(), arb_field()).prop_map(|(label, side, adjoined)| StructuralFeature::Arc {
                label,
                side,
                adjoined
            }),
            (arb_field(), side, arb_field()).prop_map(|(preposition, side, adjoined)| {
                StructuralFeature::FlatPrep {
                    preposition,
                    side,
                    adjoined,
                }
            }),
            (kind, pside, arb_field()).prop_map(|(kind, side, other)| StructuralFeature::Pattern { kind, side, other }),
            (role, arb_field(), arb_field()).prop_map(|(role, verb, other)| StructuralFeature::SubjObj {
                role,
                verb,
                other
            }),
        ]
    }

    proptest! {
        #[test]
        fn encoding_is_injective(a in arb_feature(), b in arb_feature()) {
            let (ea, eb) = (a.to_string(), b.to_string());
            prop_assert_eq!(ea == eb, a == b);
            prop_assert_eq!(ea.parse::<StructuralFeature>().unwrap(), a);
        }
    }
}
