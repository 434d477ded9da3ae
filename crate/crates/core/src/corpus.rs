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

//! Parallel document corpora: tokenization, vocabularies and segmentation.
//!
//! A corpus is a pair of UTF-8 files with one sentence per line. Documents
//! are separated by a line holding exactly [`DOC_SEPARATOR`], and both files
//! must agree on the number of documents and on every document's length.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub type TokenId = u32;

pub const PAD: TokenId = 0;
pub const BOS: TokenId = 1;
pub const EOS: TokenId = 2;
pub const UNK: TokenId = 3;

/// Surfaces of the reserved ids, in id order.
pub const RESERVED: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];

pub const DOC_SEPARATOR: &str = "<<<DOC>>>";

pub const DEFAULT_MAX_LEN: usize = 64;

pub fn is_punctuation_char(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '¡' | '¿' | '«' | '»' | '“' | '”' | '‘' | '’' | '…' | '—' | '–' | '。' | '，' | '、'
                | '！' | '？' | '；' | '：'
        )
}

/// True for tokens made only of punctuation characters.
pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_punctuation_char)
}

pub fn is_reserved(token: &str) -> bool {
    RESERVED.contains(&token)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Source,
    Target,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<String>,
    /// 0-based index of the sentence within its document.
    pub doc_position: usize,
}

impl Sentence {
    /// Builds a sentence from already split tokens. Decoded hypotheses go
    /// through here and may be empty; corpus text goes through [`tokenize`].
    pub fn from_tokens<I, S>(tokens: I, doc_position: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Sentence {
            tokens: tokens.into_iter().map(Into::into).collect(),
            doc_position,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn to_line(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Lowercases, splits on whitespace and breaks every punctuation character
/// out into its own token.
pub fn tokenize(line: &str) -> Result<Sentence> {
    let lowered = line.to_lowercase();
    let mut tokens = Vec::new();
    for chunk in lowered.split_whitespace() {
        let mut word = String::new();
        for c in chunk.chars() {
            if is_punctuation_char(c) {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(c.to_string());
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    if tokens.is_empty() {
        return Err(Error::EmptySentence);
    }
    Ok(Sentence {
        tokens,
        doc_position: 0,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub side: Side,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn new(id: impl Into<String>, side: Side, sentences: Vec<Sentence>) -> Self {
        let sentences = sentences
            .into_iter()
            .enumerate()
            .map(|(i, mut s)| {
                s.doc_position = i;
                s
            })
            .collect();
        Document {
            id: id.into(),
            side,
            sentences,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelDocument {
    pub source: Document,
    pub target: Document,
}

impl ParallelDocument {
    pub fn new(source: Document, target: Document) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::Alignment(format!(
                "document {} has {} source and {} target sentences",
                source.id,
                source.len(),
                target.len()
            )));
        }
        Ok(ParallelDocument { source, target })
    }

    pub fn id(&self) -> &str {
        &self.source.id
    }

    /// Number of sentences `k`.
    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }
}

struct RawFile {
    docs: Vec<Vec<Sentence>>,
    separators: usize,
}

fn read_documents(path: &Path, max_len: usize) -> Result<RawFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    let mut current = Vec::new();
    let mut separators = 0;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim() == DOC_SEPARATOR {
            separators += 1;
            if !current.is_empty() {
                docs.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut sentence = tokenize(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        if sentence.len() > max_len {
            log::warn!(
                "{}:{}: truncating sentence of {} tokens to {}",
                path.display(),
                lineno + 1,
                sentence.len(),
                max_len
            );
            sentence.tokens.truncate(max_len);
        }
        current.push(sentence);
    }
    if !current.is_empty() {
        docs.push(current);
    }
    Ok(RawFile { docs, separators })
}

/// Loads a parallel corpus with the default sentence length cap.
pub fn load_corpus(src_path: &Path, tgt_path: &Path) -> Result<Vec<ParallelDocument>> {
    load_corpus_with(src_path, tgt_path, DEFAULT_MAX_LEN)
}

pub fn load_corpus_with(
    src_path: &Path,
    tgt_path: &Path,
    max_len: usize,
) -> Result<Vec<ParallelDocument>> {
    let src = read_documents(src_path, max_len.max(1))?;
    let tgt = read_documents(tgt_path, max_len.max(1))?;
    if src.separators != tgt.separators || src.docs.len() != tgt.docs.len() {
        return Err(Error::Alignment(format!(
            "{} has {} documents ({} separators) but {} has {} ({} separators)",
            src_path.display(),
            src.docs.len(),
            src.separators,
            tgt_path.display(),
            tgt.docs.len(),
            tgt.separators
        )));
    }
    src.docs
        .into_iter()
        .zip(tgt.docs)
        .enumerate()
        .map(|(n, (s, t))| {
            let id = format!("doc{n}");
            ParallelDocument::new(
                Document::new(id.clone(), Side::Source, s),
                Document::new(id, Side::Target, t),
            )
        })
        .collect()
}

/// Loads a single-sided corpus file (for example, system output).
pub fn load_documents(path: &Path, side: Side) -> Result<Vec<Document>> {
    let raw = read_documents(path, usize::MAX)?;
    Ok(raw
        .docs
        .into_iter()
        .enumerate()
        .map(|(n, s)| Document::new(format!("doc{n}"), side, s))
        .collect())
}

/// Writes documents one sentence per line, separating documents with
/// [`DOC_SEPARATOR`] lines.
pub fn write_documents<D, S>(path: &Path, docs: D) -> Result<()>
where
    D: IntoIterator,
    D::Item: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for (i, doc) in docs.into_iter().enumerate() {
        if i > 0 {
            out.push_str(DOC_SEPARATOR);
            out.push('\n');
        }
        for line in doc {
            let _ = writeln!(out, "{}", line.as_ref());
        }
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(tokens: Vec<String>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        Vocabulary { tokens, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::reserved_only()
    }
}

impl Vocabulary {
    pub fn reserved_only() -> Self {
        RESERVED
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .into()
    }

    /// Vocabulary from reserved tokens followed by `words` in order.
    /// Duplicates and reserved surfaces in `words` are skipped.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        let mut seen: std::collections::HashSet<String> = tokens.iter().cloned().collect();
        for w in words {
            let w = w.into();
            if seen.insert(w.clone()) {
                tokens.push(w);
            }
        }
        tokens.into()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, surface: &str) -> TokenId {
        self.index.get(surface).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.index.contains_key(surface)
    }

    pub fn surface(&self, id: TokenId) -> &str {
        self.tokens
            .get(id as usize)
            .map(String::as_str)
            .unwrap_or(RESERVED[UNK as usize])
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, sentence: &Sentence) -> Vec<TokenId> {
        sentence.tokens.iter().map(|t| self.id(t)).collect()
    }

    /// Maps ids back to surfaces, stopping at the first EOS and dropping
    /// PAD/BOS.
    pub fn decode(&self, ids: &[TokenId]) -> Vec<String> {
        ids.iter()
            .take_while(|&&id| id != EOS)
            .filter(|&&id| id != PAD && id != BOS)
            .map(|&id| self.surface(id).to_string())
            .collect()
    }

    /// Hex SHA-256 over the ordered token list.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.tokens {
            hasher.update(t.as_bytes());
            hasher.update([0u8]);
        }
        hasher
            .finalize()
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }
}

/// Keeps the `max_size - 4` most frequent surfaces with at least `min_freq`
/// occurrences. Ties go to the lexicographically smaller surface.
pub fn build_vocab<'a, I>(docs: I, max_size: usize, min_freq: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        for sentence in &doc.sentences {
            for t in &sentence.tokens {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(t, c)| c >= min_freq.max(1) && !is_reserved(t))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let room = max_size.saturating_sub(RESERVED.len());
    Vocabulary::from_words(ranked.into_iter().take(room).map(|(t, _)| t))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub doc_id: String,
    pub pairs: Vec<(Sentence, Sentence)>,
    /// Index of the first pair within the parent document.
    pub origin_doc_offset: usize,
    /// Source sentence preceding the segment in its document, if any.
    pub preceding_source: Option<Sentence>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|(s, _)| s)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|(_, t)| t)
    }
}

/// Id form of a [`Segment`] for one model. `contexts[i]` is the source
/// sentence preceding pair `i` in its document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSegment {
    pub sources: Vec<Vec<TokenId>>,
    pub contexts: Vec<Option<Vec<TokenId>>>,
    pub targets: Vec<Vec<TokenId>>,
}

impl EncodedSegment {
    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn context(&self, i: usize) -> Option<&[TokenId]> {
        self.contexts[i].as_deref()
    }
}

impl Segment {
    pub fn encode(&self, src_vocab: &Vocabulary, tgt_vocab: &Vocabulary) -> EncodedSegment {
        let mut contexts = Vec::with_capacity(self.len());
        let mut previous = self.preceding_source.as_ref();
        for (src, _) in &self.pairs {
            contexts.push(previous.map(|p| src_vocab.encode(p)));
            previous = Some(src);
        }
        EncodedSegment {
            sources: self.sources().map(|s| src_vocab.encode(s)).collect(),
            contexts,
            targets: self.targets().map(|t| tgt_vocab.encode(t)).collect(),
        }
    }
}

/// Splits a document into contiguous chunks of at most `max_sents` pairs.
pub fn make_segments(doc: &ParallelDocument, max_sents: usize) -> Vec<Segment> {
    let max_sents = max_sents.max(1);
    let pairs: Vec<(Sentence, Sentence)> = doc
        .source
        .sentences
        .iter()
        .cloned()
        .zip(doc.target.sentences.iter().cloned())
        .collect();
    pairs
        .chunks(max_sents)
        .enumerate()
        .map(|(n, chunk)| {
            let offset = n * max_sents;
            Segment {
                doc_id: doc.id().to_string(),
                pairs: chunk.to_vec(),
                origin_doc_offset: offset,
                preceding_source: offset
                    .checked_sub(1)
                    .map(|i| doc.source.sentences[i].clone()),
            }
        })
        .collect()
}
