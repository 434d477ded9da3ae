// Copyright 2026 The docrisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Lexical cohesion: the share of content tokens that are cohesive devices.
//!
//! A content token is a cohesive device when it is linked to an earlier
//! content token of the same block, either directly (same surface, or a
//! relation in the [`RelationDb`]) or through a chain of such links between
//! tokens of the block. The device count is therefore the number of content
//! tokens minus the number of connected components of the block's link
//! graph, which makes it independent of token order.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_punctuation, is_reserved, Sentence};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationLabel {
    Synonym,
    NearSynonym,
    Hypernym,
    Meronym,
    Troponym,
    Antonym,
    Coordinate,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 7] = [
        RelationLabel::Synonym,
        RelationLabel::NearSynonym,
        RelationLabel::Hypernym,
        RelationLabel::Meronym,
        RelationLabel::Troponym,
        RelationLabel::Antonym,
        RelationLabel::Coordinate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationLabel::Synonym => "synonym",
            RelationLabel::NearSynonym => "near_synonym",
            RelationLabel::Hypernym => "hypernym",
            RelationLabel::Meronym => "meronym",
            RelationLabel::Troponym => "troponym",
            RelationLabel::Antonym => "antonym",
            RelationLabel::Coordinate => "coordinate",
        }
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        RelationLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Word-to-related-words map. Every relation is stored in both directions
/// under the same label.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationDb {
    entries: HashMap<String, BTreeSet<(String, RelationLabel)>>,
}

impl RelationDb {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `a -label- b` and its mirror. Self-relations are ignored.
    pub fn insert(&mut self, a: &str, label: RelationLabel, b: &str) {
        let (a, b) = (a.to_lowercase(), b.to_lowercase());
        if a == b {
            return;
        }
        self.entries
            .entry(a.clone())
            .or_default()
            .insert((b.clone(), label));
        self.entries.entry(b).or_default().insert((a, label));
    }

    pub fn related(&self, word: &str) -> impl Iterator<Item = (&str, RelationLabel)> {
        self.entries
            .get(word)
            .into_iter()
            .flatten()
            .map(|(w, l)| (w.as_str(), *l))
    }

    pub fn is_related(&self, a: &str, b: &str, enabled: &LabelSet) -> bool {
        self.related(a).any(|(w, l)| w == b && enabled.contains(l))
    }

    /// Number of words with at least one relation.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes the db back in its TSV form, one line per unordered pair.
    pub fn to_tsv(&self) -> String {
        let mut lines = BTreeSet::new();
        for (a, rels) in &self.entries {
            for (b, l) in rels {
                let (x, y) = if a <= b { (a, b) } else { (b, a) };
                lines.insert(format!("{x}\t{l}\t{y}"));
            }
        }
        lines.into_iter().map(|l| l + "\n").collect()
    }
}

/// Parses `word<TAB>label<TAB>word` lines; `#` lines and blank lines are
/// skipped.
pub fn load_relation_db(path: &Path) -> Result<RelationDb> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_relation_db(&text, path)
}

pub fn parse_relation_db(text: &str, path: &Path) -> Result<RelationDb> {
    let mut db = RelationDb::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "expected `word<TAB>label<TAB>word`".into(),
            });
        }
        let label = fields[1]
            .parse::<RelationLabel>()
            .map_err(|label| Error::UnknownLabel {
                path: path.to_path_buf(),
                line: lineno + 1,
                label,
            })?;
        db.insert(fields[0], label, fields[2]);
    }
    Ok(db)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StopList {
    words: HashSet<String>,
}

impl StopList {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        StopList {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(text.lines()))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Set of relation labels that count as cohesive links.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LabelSet(u8);

impl LabelSet {
    pub fn all() -> Self {
        LabelSet((1 << RelationLabel::ALL.len()) - 1)
    }

    pub fn none() -> Self {
        LabelSet(0)
    }

    pub fn with(mut self, label: RelationLabel) -> Self {
        self.0 |= 1 << label as u8;
        self
    }

    pub fn without(mut self, label: RelationLabel) -> Self {
        self.0 &= !(1 << label as u8);
        self
    }

    pub fn contains(&self, label: RelationLabel) -> bool {
        self.0 & (1 << label as u8) != 0
    }
}

impl Default for LabelSet {
    fn default() -> Self {
        Self::all()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LcDenominator {
    /// Content tokens only.
    #[default]
    Content,
    /// Every non-reserved token, punctuation and stopwords included.
    All,
}

impl FromStr for LcDenominator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "content" => Ok(LcDenominator::Content),
            "all" => Ok(LcDenominator::All),
            other => Err(Error::Config(format!("unknown lc_denominator `{other}`"))),
        }
    }
}

impl fmt::Display for LcDenominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LcDenominator::Content => "content",
            LcDenominator::All => "all",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LcConfig {
    pub denominator: LcDenominator,
    pub labels: LabelSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LcScore {
    pub devices: usize,
    pub content_tokens: usize,
    /// Tokens in the denominator; equals `content_tokens` unless the
    /// `all` denominator is configured.
    pub denominator: usize,
    pub value: f64,
}

pub fn is_content_token(token: &str, stop: &StopList) -> bool {
    !is_reserved(token) && !is_punctuation(token) && !stop.contains(token)
}

pub fn lexical_cohesion(sentences: &[Sentence], db: &RelationDb, stop: &StopList) -> LcScore {
    lexical_cohesion_with(sentences, db, stop, &LcConfig::default())
}

pub fn lexical_cohesion_with(
    sentences: &[Sentence],
    db: &RelationDb,
    stop: &StopList,
    config: &LcConfig,
) -> LcScore {
    // One node per distinct content surface: repetitions share a node.
    let mut node_of: HashMap<&str, usize> = HashMap::new();
    let mut content_tokens = 0;
    let mut all_tokens = 0;
    for token in sentences.iter().flat_map(|s| s.tokens.iter()) {
        if is_reserved(token) {
            continue;
        }
        all_tokens += 1;
        if !is_content_token(token, stop) {
            continue;
        }
        content_tokens += 1;
        let next = node_of.len();
        node_of.entry(token.as_str()).or_insert(next);
    }

    let mut components = DisjointSets::new(node_of.len());
    for (&word, &node) in &node_of {
        for (other, label) in db.related(word) {
            if !config.labels.contains(label) {
                continue;
            }
            if let Some(&other_node) = node_of.get(other) {
                components.union(node, other_node);
            }
        }
    }

    let devices = content_tokens - components.count();
    let denominator = match config.denominator {
        LcDenominator::Content => content_tokens,
        LcDenominator::All => all_tokens,
    };
    LcScore {
        devices,
        content_tokens,
        denominator,
        value: devices as f64 / denominator.max(1) as f64,
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    count: usize,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            count: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
            self.count -= 1;
        }
    }

    fn count(&self) -> usize {
        self.count
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sent(words: &str) -> Sentence {
        Sentence::from_tokens(words.split_whitespace(), 0)
    }

    fn db(lines: &str) -> RelationDb {
        parse_relation_db(lines, Path::new("test.tsv")).unwrap()
    }

    #[test]
    fn symmetric_closure() {
        let db = db("car\tsynonym\tautomobile\n");
        let rel: Vec<_> = db.related("automobile").collect();
        assert_eq!(rel, [("car", RelationLabel::Synonym)]);
    }

    #[test]
    fn unknown_label_rejected() {
        let err = parse_relation_db("cat\tfriend\tdog\n", Path::new("x.tsv")).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { line: 1, .. }));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_relation_db("# c\na\tsynonym\tb\nbroken\n", Path::new("x.tsv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn empty_db_counts_repetitions() {
        let db = db("");
        assert!(db.is_empty());
        let s = lexical_cohesion(&[sent("cat sat"), sent("cat ran")], &db, &StopList::default());
        assert_eq!((s.devices, s.content_tokens), (1, 4));
        assert_eq!(s.value, 0.25);
    }

    #[test]
    fn unrelated_tokens_score_zero() {
        let db = db("car\tsynonym\tautomobile\n");
        let s = lexical_cohesion(&[sent("car road")], &db, &StopList::default());
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn related_devices() {
        let db = db("car\tsynonym\tautomobile\ncar\tmeronym\twheel\n");
        let s = lexical_cohesion(&[sent("car automobile wheel")], &db, &StopList::default());
        assert_eq!(s.devices, 2);
        assert!((s.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn stopwords_and_punctuation_are_not_content() {
        let stop = StopList::new(["the", "a"]);
        let s = lexical_cohesion(&[sent("the a , the .")], &RelationDb::new(), &stop);
        assert_eq!((s.devices, s.content_tokens, s.value), (0, 0, 0.0));
    }

    #[test]
    fn disabled_labels_are_ignored() {
        let db = db("car\tmeronym\twheel\n");
        let config = LcConfig {
            labels: LabelSet::all().without(RelationLabel::Meronym),
            ..LcConfig::default()
        };
        let s = lexical_cohesion_with(&[sent("car wheel")], &db, &StopList::default(), &config);
        assert_eq!(s.devices, 0);
    }

    #[test]
    fn all_denominator_counts_punctuation() {
        let config = LcConfig {
            denominator: LcDenominator::All,
            ..LcConfig::default()
        };
        let s = lexical_cohesion_with(&[sent("cat , cat .")], &RelationDb::new(), &StopList::default(), &config);
        assert_eq!((s.devices, s.denominator), (1, 4));
        assert_eq!(s.value, 0.25);
    }

    #[test]
    fn tsv_round_trip() {
        let d = db("car\tsynonym\tautomobile\nwheel\tmeronym\tcar\n");
        let again = parse_relation_db(&d.to_tsv(), Path::new("x")).unwrap();
        assert_eq!(d, again);
    }

    fn block_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
        proptest::collection::vec(
            proptest::collection::vec((0u8..8).prop_map(|i| format!("w{i}")), 1..5),
            1..5,
        )
    }

    proptest! {
        #[test]
        fn value_bounds(block in block_strategy()) {
            let sents: Vec<Sentence> = block.iter().map(|b| Sentence::from_tokens(b.clone(), 0)).collect();
            let d = db("w0\tsynonym\tw1\nw2\thypernym\tw3\n");
            let s = lexical_cohesion(&sents, &d, &StopList::default());
            prop_assert!(s.value >= 0.0 && s.value < 1.0);
            prop_assert!(s.devices <= s.content_tokens);
        }

        #[test]
        fn appending_repeat_adds_one_device(block in block_strategy(), pick in 0usize..100) {
            let mut sents: Vec<Sentence> = block.iter().map(|b| Sentence::from_tokens(b.clone(), 0)).collect();
            let d = db("w0\tsynonym\tw1\nw1\tantonym\tw5\nw2\thypernym\tw3\n");
            let before = lexical_cohesion(&sents, &d, &StopList::default());
            let flat: Vec<String> = block.concat();
            let repeat = flat[pick % flat.len()].clone();
            sents.last_mut().unwrap().tokens.push(repeat);
            let after = lexical_cohesion(&sents, &d, &StopList::default());
            prop_assert_eq!(after.devices, before.devices + 1);
        }
    }
}
