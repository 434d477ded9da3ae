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

//! Topic coherence: mean cosine similarity of adjacent sentence topic
//! vectors, where a sentence's topic vector is the mean of the table
//! vectors of its in-table tokens.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::lexcohesion::StopList;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TopicTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl TopicTable {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("topic table dimension must be at least 1".into()));
        }
        Ok(TopicTable {
            dim,
            vectors: HashMap::new(),
        })
    }

    /// Inserts or replaces a vector. Panics if the length differs from `dim`.
    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) {
        assert_eq!(vector.len(), self.dim, "topic vector length");
        self.vectors.insert(word.into(), vector);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// word2vec text form with rows sorted by word.
    pub fn to_text(&self) -> String {
        let mut words: Vec<&String> = self.vectors.keys().collect();
        words.sort();
        let mut out = format!("{} {}\n", words.len(), self.dim);
        for w in words {
            out.push_str(w);
            for v in &self.vectors[w] {
                out.push(' ');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn load_topic_table(path: &Path) -> Result<TopicTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_topic_table(&text, path)
}

/// Parses the word2vec text format: a `count dim` header, then `count`
/// rows of `word v1 .. v_dim`. Duplicate words are rejected.
pub fn parse_topic_table(text: &str, path: &Path) -> Result<TopicTable> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `count dim` header".into()))?;
    let header: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(header_no + 1, format!("bad header: {e}")))?;
    let &[count, dim] = header.as_slice() else {
        return Err(parse_err(header_no + 1, "header must be `count dim`".into()));
    };
    if dim == 0 {
        return Err(parse_err(header_no + 1, "dimension must be at least 1".into()));
    }

    let mut table = TopicTable::new(dim)?;
    let mut rows = 0;
    for (idx, line) in lines {
        let lineno = idx + 1;
        rows += 1;
        if rows > count {
            return Err(parse_err(lineno, format!("more rows than the declared {count}")));
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap_or_default();
        let values: Vec<f64> = fields
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(lineno, format!("bad value: {e}")))?;
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                path: path.to_path_buf(),
                line: lineno,
                expected: dim,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(lineno, "non-finite value".into()));
        }
        if table.vectors.contains_key(word) {
            return Err(parse_err(lineno, format!("duplicate word `{word}`")));
        }
        table.vectors.insert(word.to_string(), values);
    }
    if rows != count {
        return Err(parse_err(
            text.lines().count(),
            format!("header declares {count} rows, found {rows}"),
        ));
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceTopic {
    pub vector: Vec<f64>,
    /// Number of tokens found in the table.
    pub covered: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohScore {
    pub value: f64,
    /// Adjacent pairs scored, `max(k - 1, 0)`.
    pub pairs: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CohConfig {
    /// Drop stoplist words before averaging.
    pub remove_stopwords: bool,
}

pub fn sentence_topic(sentence: &Sentence, table: &TopicTable) -> SentenceTopic {
    sentence_topic_filtered(sentence, table, |_| true)
}

fn sentence_topic_filtered(
    sentence: &Sentence,
    table: &TopicTable,
    keep: impl Fn(&str) -> bool,
) -> SentenceTopic {
    let mut vector = vec![0.0; table.dim()];
    let mut covered = 0;
    for v in sentence
        .tokens
        .iter()
        .filter(|t| keep(t))
        .filter_map(|t| table.get(t))
    {
        covered += 1;
        vector.iter_mut().zip(v).for_each(|(acc, x)| *acc += x);
    }
    if covered > 0 {
        let n = covered as f64;
        vector.iter_mut().for_each(|x| *x /= n);
    }
    SentenceTopic { vector, covered }
}

/// Cosine similarity clamped to [-1, 1]; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

pub fn coherence(sentences: &[Sentence], table: &TopicTable) -> CohScore {
    coherence_with(sentences, table, None, &CohConfig::default())
}

pub fn coherence_with(
    sentences: &[Sentence],
    table: &TopicTable,
    stop: Option<&StopList>,
    config: &CohConfig,
) -> CohScore {
    let keep = |t: &str| !(config.remove_stopwords && stop.is_some_and(|s| s.contains(t)));
    let topics: Vec<SentenceTopic> = sentences
        .iter()
        .map(|s| sentence_topic_filtered(s, table, keep))
        .collect();
    let pairs = topics.len().saturating_sub(1);
    if pairs == 0 {
        return CohScore { value: 0.0, pairs };
    }
    let total: f64 = topics
        .windows(2)
        .map(|w| cosine(&w[1].vector, &w[0].vector))
        .sum();
    CohScore {
        value: total / pairs as f64,
        pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(words: &str) -> Sentence {
        Sentence::from_tokens(words.split_whitespace(), 0)
    }

    fn table(rows: &[(&str, &[f64])]) -> TopicTable {
        let mut t = TopicTable::new(rows[0].1.len()).unwrap();
        for (w, v) in rows {
            t.insert(*w, v.to_vec());
        }
        t
    }

    #[test]
    fn parse_valid_table() {
        let t = parse_topic_table("2 3\na 1 0 0\nb 0 1 0.5\n", Path::new("t")).unwrap();
        assert_eq!(t.dim(), 3);
        assert_eq!(t.get("b"), Some(&[0.0, 1.0, 0.5][..]));
    }

    #[test]
    fn parse_short_row() {
        let err = parse_topic_table("1 3\na 1 0\n", Path::new("t")).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 2, line: 2, .. }));
    }

    #[test]
    fn parse_duplicate_word() {
        let err = parse_topic_table("2 1\na 1\na 2\n", Path::new("t")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn parse_row_count_mismatch() {
        assert!(parse_topic_table("3 1\na 1\nb 2\n", Path::new("t")).is_err());
        assert!(parse_topic_table("1 1\na 1\nb 2\n", Path::new("t")).is_err());
    }

    #[test]
    fn text_round_trip() {
        let t = table(&[("a", &[1.0, -0.25]), ("b", &[0.1, 3.0])]);
        assert_eq!(parse_topic_table(&t.to_text(), Path::new("t")).unwrap(), t);
    }

    #[test]
    fn topic_is_mean_of_covered_tokens() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let st = sentence_topic(&sent("a b"), &t);
        assert_eq!((st.vector.as_slice(), st.covered), (&[0.5, 0.5][..], 2));
        let st = sentence_topic(&sent("x y"), &t);
        assert_eq!((st.vector.as_slice(), st.covered), (&[0.0, 0.0][..], 0));
        let t = table(&[("a", &[2.0, 0.0])]);
        assert_eq!(sentence_topic(&sent("a a"), &t).vector, [2.0, 0.0]);
    }

    #[test]
    fn coherence_examples() {
        let t = table(&[("x", &[1.0, 0.0]), ("y", &[0.0, 1.0])]);
        assert_eq!(coherence(&[sent("x"), sent("x")], &t).value, 1.0);
        let c = coherence(&[sent("x"), sent("y"), sent("x")], &t);
        assert_eq!((c.value, c.pairs), (0.0, 2));
        let c = coherence(&[sent("x"), sent("x y")], &t);
        assert!((c.value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let c = coherence(&[sent("x y")], &t);
        assert_eq!((c.value, c.pairs), (0.0, 0));
        assert_eq!(coherence(&[], &t).pairs, 0);
    }

    #[test]
    fn uncovered_sentence_contributes_zero() {
        let t = table(&[("x", &[1.0, 0.0])]);
        let c = coherence(&[sent("x"), sent("zzz")], &t);
        assert_eq!((c.value, c.pairs), (0.0, 1));
    }

    #[test]
    fn stopword_removal_flag() {
        let t = table(&[("x", &[1.0, 0.0]), ("the", &[0.0, 1.0])]);
        let stop = StopList::new(["the"]);
        let sents = [sent("x"), sent("x the")];
        let plain = coherence_with(&sents, &t, Some(&stop), &CohConfig::default());
        let filtered = coherence_with(&sents, &t, Some(&stop), &CohConfig { remove_stopwords: true });
        assert!(plain.value < 1.0);
        assert_eq!(filtered.value, 1.0);
    }
}
