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

//! Seeded synthetic corpora for smoke tests and desk-scale experiments.
//!
//! `copy` pairs every source sentence with itself. `cohesion` gives each
//! document a latent topic: every source sentence carries a topic marker
//! that translates to the topic word, and one ambiguous token whose
//! reference rendering is usually a generic word but often the topic's
//! synonym. The synonym is related to the topic word in the emitted
//! relation db and shares its topic vector, so choosing it raises LC and
//! COH at a small BLEU cost.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coherence::TopicTable;
use crate::corpus::{write_documents, Document, ParallelDocument, Sentence, Side};
use crate::lexcohesion::{RelationDb, RelationLabel, StopList};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntheticKind {
    Copy,
    Cohesion,
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "copy" => Ok(SyntheticKind::Copy),
            "cohesion" => Ok(SyntheticKind::Cohesion),
            other => Err(Error::Config(format!("unknown synthetic corpus kind `{other}`"))),
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticKind::Copy => "copy",
            SyntheticKind::Cohesion => "cohesion",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSizes {
    pub train_docs: usize,
    pub valid_docs: usize,
    pub test_docs: usize,
    pub sents_per_doc: usize,
    /// Word types for `copy`; content nouns for `cohesion`.
    pub vocab: usize,
}

impl SyntheticSizes {
    pub fn defaults(kind: SyntheticKind) -> Self {
        match kind {
            SyntheticKind::Copy => SyntheticSizes {
                train_docs: 40,
                valid_docs: 8,
                test_docs: 8,
                sents_per_doc: 5,
                vocab: 20,
            },
            SyntheticKind::Cohesion => SyntheticSizes {
                train_docs: 200,
                valid_docs: 12,
                test_docs: 12,
                sents_per_doc: 6,
                vocab: 30,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let counts = [
            ("train_docs", self.train_docs),
            ("valid_docs", self.valid_docs),
            ("test_docs", self.test_docs),
            ("sents_per_doc", self.sents_per_doc),
            ("vocab", self.vocab),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(Error::Config(format!("synthetic size `{name}` must be at least 1")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub kind: SyntheticKind,
    pub train: Vec<ParallelDocument>,
    pub valid: Vec<ParallelDocument>,
    pub test: Vec<ParallelDocument>,
    pub relations: Option<RelationDb>,
    pub topics: Option<TopicTable>,
    pub stoplist: Option<StopList>,
}

/// Paths written by [`SyntheticCorpus::write`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntheticFiles {
    pub train_src: PathBuf,
    pub train_tgt: PathBuf,
    pub valid_src: PathBuf,
    pub valid_tgt: PathBuf,
    pub test_src: PathBuf,
    pub test_tgt: PathBuf,
    pub relations: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
}

const FUNCTION_WORDS: [&str; 6] = ["the", "of", "a", "to", "in", "and"];
const TOPICS: usize = 4;
const AMBIGUOUS: usize = 8;
const P_GENERIC: f64 = 0.40;
const P_SYNONYM: f64 = 0.36;

pub fn synthesize(kind: SyntheticKind, sizes: SyntheticSizes, seed: u64) -> Result<SyntheticCorpus> {
    sizes.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        SyntheticKind::Copy => {
            let mut split = |n: usize, tag: &str| -> Result<Vec<ParallelDocument>> {
                (0..n)
                    .map(|d| {
                        let sents: Vec<Sentence> = (0..sizes.sents_per_doc)
                            .map(|i| {
                                let len = rng.gen_range(3..=8);
                                let words = (0..len).map(|_| format!("w{:02}", rng.gen_range(0..sizes.vocab)));
                                Sentence::from_tokens(words, i)
                            })
                            .collect();
                        pair(format!("{tag}{d}"), sents.clone(), sents)
                    })
                    .collect()
            };
            let train = split(sizes.train_docs, "train")?;
            let valid = split(sizes.valid_docs, "valid")?;
            let test = split(sizes.test_docs, "test")?;
            Ok(SyntheticCorpus {
                kind,
                train,
                valid,
                test,
                relations: None,
                topics: None,
                stoplist: None,
            })
        }
        SyntheticKind::Cohesion => {
            let lex = CohesionLexicon::new(sizes.vocab, &mut rng);
            let mut split = |n: usize, tag: &str| -> Result<Vec<ParallelDocument>> {
                (0..n)
                    .map(|d| lex.document(format!("{tag}{d}"), sizes.sents_per_doc, &mut rng))
                    .collect()
            };
            let train = split(sizes.train_docs, "train")?;
            let valid = split(sizes.valid_docs, "valid")?;
            let test = split(sizes.test_docs, "test")?;
            Ok(SyntheticCorpus {
                kind,
                train,
                valid,
                test,
                relations: Some(lex.relations),
                topics: Some(lex.topics),
                stoplist: Some(StopList::new(FUNCTION_WORDS.iter().copied().chain(["."]))),
            })
        }
    }
}

fn pair(id: String, source: Vec<Sentence>, target: Vec<Sentence>) -> Result<ParallelDocument> {
    ParallelDocument::new(
        Document::new(id.clone(), Side::Source, source),
        Document::new(id, Side::Target, target),
    )
}

struct CohesionLexicon {
    nouns: usize,
    relations: RelationDb,
    topics: TopicTable,
}

impl CohesionLexicon {
    fn new(nouns: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut relations = RelationDb::new();
        for t in 0..TOPICS {
            relations.insert(&format!("topic{t}"), RelationLabel::Synonym, &format!("syn{t}"));
        }
        // Unrelated noise links between nouns.
        for _ in 0..nouns / 3 {
            let a = rng.gen_range(0..nouns);
            let b = rng.gen_range(0..nouns);
            relations.insert(&format!("n{a:02}"), RelationLabel::Coordinate, &format!("n{b:02}"));
        }

        let dim = TOPICS + 2;
        let mut topics = TopicTable::new(dim).expect("dim is positive");
        for t in 0..TOPICS {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.2..0.2)).collect();
            v[t] += 1.5;
            topics.insert(format!("topic{t}"), v.clone());
            topics.insert(format!("syn{t}"), v);
        }
        let mut random = |word: String| {
            let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            topics.insert(word, v);
        };
        for j in 0..nouns {
            random(format!("n{j:02}"));
        }
        for k in 0..AMBIGUOUS {
            random(format!("gen{k}"));
            random(format!("alt{k}"));
        }
        CohesionLexicon {
            nouns,
            relations,
            topics,
        }
    }

    /// Source `sfA scX [sfB] tmT scY ambK .`, translated token by token.
    fn document(&self, id: String, sents: usize, rng: &mut ChaCha8Rng) -> Result<ParallelDocument> {
        let topic = rng.gen_range(0..TOPICS);
        let mut source = Vec::with_capacity(sents);
        let mut target = Vec::with_capacity(sents);
        for i in 0..sents {
            let mut src: Vec<String> = Vec::new();
            let mut tgt: Vec<String> = Vec::new();
            let filler = |src: &mut Vec<String>, tgt: &mut Vec<String>, rng: &mut ChaCha8Rng| {
                let f = rng.gen_range(0..FUNCTION_WORDS.len());
                src.push(format!("sf{f}"));
                tgt.push(FUNCTION_WORDS[f].to_string());
            };
            let noun = |src: &mut Vec<String>, tgt: &mut Vec<String>, rng: &mut ChaCha8Rng| {
                let j = rng.gen_range(0..self.nouns);
                src.push(format!("sc{j:02}"));
                tgt.push(format!("n{j:02}"));
            };
            filler(&mut src, &mut tgt, rng);
            noun(&mut src, &mut tgt, rng);
            if rng.gen_bool(0.5) {
                filler(&mut src, &mut tgt, rng);
            }
            src.push(format!("tm{topic}"));
            tgt.push(format!("topic{topic}"));
            noun(&mut src, &mut tgt, rng);
            let k = rng.gen_range(0..AMBIGUOUS);
            src.push(format!("amb{k}"));
            let u: f64 = rng.gen();
            tgt.push(if u < P_GENERIC {
                format!("gen{k}")
            } else if u < P_GENERIC + P_SYNONYM {
                format!("syn{topic}")
            } else {
                format!("alt{k}")
            });
            src.push(".".into());
            tgt.push(".".into());
            source.push(Sentence::from_tokens(src, i));
            target.push(Sentence::from_tokens(tgt, i));
        }
        pair(id, source, target)
    }
}

impl SyntheticCorpus {
    pub fn write(&self, out_dir: &Path) -> Result<SyntheticFiles> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let side = |docs: &[ParallelDocument], target: bool| -> Vec<Vec<String>> {
            docs.iter()
                .map(|d| {
                    let doc = if target { &d.target } else { &d.source };
                    doc.sentences.iter().map(Sentence::to_line).collect()
                })
                .collect()
        };
        let write_split = |name: &str, docs: &[ParallelDocument]| -> Result<(PathBuf, PathBuf)> {
            let src = out_dir.join(format!("{name}.src"));
            let tgt = out_dir.join(format!("{name}.tgt"));
            write_documents(&src, side(docs, false))?;
            write_documents(&tgt, side(docs, true))?;
            Ok((src, tgt))
        };
        let (train_src, train_tgt) = write_split("train", &self.train)?;
        let (valid_src, valid_tgt) = write_split("valid", &self.valid)?;
        let (test_src, test_tgt) = write_split("test", &self.test)?;
        let write_text = |name: &str, text: String| -> Result<PathBuf> {
            let path = out_dir.join(name);
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        };
        let relations = match &self.relations {
            Some(db) => Some(write_text("relations.tsv", db.to_tsv())?),
            None => None,
        };
        let topics = match &self.topics {
            Some(t) => Some(write_text("topics.txt", t.to_text())?),
            None => None,
        };
        let stoplist = match &self.stoplist {
            Some(s) => {
                let mut words: Vec<&str> = s.words().collect();
                words.sort_unstable();
                Some(write_text("stoplist.txt", words.join("\n") + "\n")?)
            }
            None => None,
        };
        Ok(SyntheticFiles {
            train_src,
            train_tgt,
            valid_src,
            valid_tgt,
            test_src,
            test_tgt,
            relations,
            topics,
            stoplist,
        })
    }
}

pub fn gen_synthetic(
    kind: SyntheticKind,
    sizes: SyntheticSizes,
    seed: u64,
    out_dir: &Path,
) -> Result<SyntheticFiles> {
    synthesize(kind, sizes, seed)?.write(out_dir)
}

/// Relabels the content words of `block` injectively onto words drawn at
/// random from `pool`. Repetitions survive, lexical relations generally do
/// not. Panics if `pool` has fewer distinct words than the block.
pub fn shuffled_vocabulary_control(block: &[Sentence], pool: &[String], stop: &StopList, seed: u64) -> Vec<Sentence> {
    let mut words: Vec<&str> = block
        .iter()
        .flat_map(|s| s.tokens.iter().map(String::as_str))
        .filter(|t| crate::lexcohesion::is_content_token(t, stop))
        .collect();
    words.sort_unstable();
    words.dedup();
    let mut pool: Vec<&str> = pool.iter().map(String::as_str).collect();
    pool.sort_unstable();
    pool.dedup();
    assert!(pool.len() >= words.len(), "replacement pool too small");
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let map: std::collections::HashMap<&str, &str> = words.iter().copied().zip(pool).collect();
    block
        .iter()
        .map(|s| {
            Sentence::from_tokens(
                s.tokens.iter().map(|t| map.get(t.as_str()).copied().unwrap_or(t).to_string()),
                s.doc_position,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::coherence_with;
    use crate::lexcohesion::lexical_cohesion;

    fn small(kind: SyntheticKind) -> SyntheticSizes {
        SyntheticSizes {
            train_docs: 6,
            valid_docs: 2,
            test_docs: 2,
            ..SyntheticSizes::defaults(kind)
        }
    }

    #[test]
    fn same_seed_same_files() {
        for kind in [SyntheticKind::Copy, SyntheticKind::Cohesion] {
            let a = tempfile::tempdir().unwrap();
            let b = tempfile::tempdir().unwrap();
            let fa = gen_synthetic(kind, small(kind), 3, a.path()).unwrap();
            let fb = gen_synthetic(kind, small(kind), 3, b.path()).unwrap();
            for name in ["train.src", "train.tgt", "valid.src", "test.tgt"] {
                assert_eq!(
                    fs::read(a.path().join(name)).unwrap(),
                    fs::read(b.path().join(name)).unwrap()
                );
            }
            assert_eq!(fa.relations.is_some(), kind == SyntheticKind::Cohesion);
            assert_eq!(fb.topics.is_some(), kind == SyntheticKind::Cohesion);
        }
    }

    #[test]
    fn copy_reference_scores_equal_source_scores() {
        let c = synthesize(SyntheticKind::Copy, small(SyntheticKind::Copy), 1).unwrap();
        let db = RelationDb::new();
        let stop = StopList::default();
        let mut table = TopicTable::new(2).unwrap();
        for w in 0..20 {
            table.insert(format!("w{w:02}"), vec![w as f64, 1.0]);
        }
        for d in &c.train {
            assert_eq!(
                lexical_cohesion(&d.source.sentences, &db, &stop),
                lexical_cohesion(&d.target.sentences, &db, &stop)
            );
            let cfg = Default::default();
            assert_eq!(
                coherence_with(&d.source.sentences, &table, None, &cfg),
                coherence_with(&d.target.sentences, &table, None, &cfg)
            );
        }
    }

    #[test]
    fn cohesion_reference_beats_shuffled_control() {
        let c = synthesize(SyntheticKind::Cohesion, small(SyntheticKind::Cohesion), 5).unwrap();
        let db = c.relations.as_ref().unwrap();
        let stop = c.stoplist.as_ref().unwrap();
        let pool: Vec<String> = c.topics.as_ref().unwrap().words().map(str::to_string).collect();
        let (mut r, mut s) = (0.0, 0.0);
        for (n, d) in c.train.iter().enumerate() {
            let reference = &d.target.sentences;
            let control = shuffled_vocabulary_control(reference, &pool, stop, n as u64);
            r += lexical_cohesion(reference, db, stop).value;
            s += lexical_cohesion(&control, db, stop).value;
        }
        assert!(r > s, "reference {r} control {s}");
    }

    #[test]
    fn zero_sizes_rejected() {
        let sizes = SyntheticSizes {
            sents_per_doc: 0,
            ..SyntheticSizes::defaults(SyntheticKind::Copy)
        };
        assert!(matches!(synthesize(SyntheticKind::Copy, sizes, 0), Err(Error::Config(_))));
    }
}
