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

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bleu::{document_stats, BleuStats};
use crate::coherence::{load_topic_table, TopicTable};
use crate::corpus::{
    load_documents, write_documents, Document, ParallelDocument, Sentence, Side, TokenId, Vocabulary,
};
use crate::lexcohesion::{load_relation_db, LcConfig, RelationDb, StopList};
use crate::policy::{beam_search, Checkpoint, PolicyModel};
use crate::risk::RewardResources;
use crate::{Error, Result};

use super::TrainConfig;

/// Loads the relation db, topic table and stoplist named in `config`.
/// Unset paths give empty resources.
pub fn load_resources(config: &TrainConfig) -> Result<RewardResources> {
    load_resources_from(
        config.relations.as_deref(),
        config.topics.as_deref(),
        config.stoplist.as_deref(),
        LcConfig {
            denominator: config.lc_denominator,
            ..LcConfig::default()
        },
    )
}

pub fn load_resources_from(
    relations: Option<&Path>,
    topics: Option<&Path>,
    stoplist: Option<&Path>,
    lc: LcConfig,
) -> Result<RewardResources> {
    Ok(RewardResources {
        relations: relations.map(load_relation_db).transpose()?.unwrap_or_else(RelationDb::new),
        stoplist: stoplist.map(StopList::load).transpose()?.unwrap_or_default(),
        topics: match topics {
            Some(p) => load_topic_table(p)?,
            None => TopicTable::new(1)?,
        },
        lc,
        coh: Default::default(),
    })
}

/// Decodes one document sentence by sentence. Each sentence sees the
/// preceding source sentence as context when the model uses one. Empty
/// outputs become a single `<unk>` so the file stays one line per sentence.
pub fn translate_document(
    model: &PolicyModel,
    src_vocab: &Vocabulary,
    tgt_vocab: &Vocabulary,
    doc: &Document,
    beam: usize,
) -> Vec<Sentence> {
    let ids: Vec<Vec<TokenId>> = doc.sentences.iter().map(|s| src_vocab.encode(s)).collect();
    (0..ids.len())
        .map(|i| {
            let ctx = i.checked_sub(1).map(|j| ids[j].as_slice());
            let set = beam_search(model, &ids[i], beam.max(1), ctx);
            let mut words = tgt_vocab.decode(set.best().content());
            if words.is_empty() {
                words.push(crate::corpus::RESERVED[crate::corpus::UNK as usize].to_string());
            }
            Sentence::from_tokens(words, i)
        })
        .collect()
}

/// Decodes documents in parallel; output order follows input order.
pub fn translate_documents(
    model: &PolicyModel,
    src_vocab: &Vocabulary,
    tgt_vocab: &Vocabulary,
    docs: &[Document],
    beam: usize,
) -> Vec<Vec<Sentence>> {
    docs.par_iter()
        .map(|d| translate_document(model, src_vocab, tgt_vocab, d, beam))
        .collect()
}

/// Translates `src_path` into `out_path`, keeping document boundaries.
/// Returns the number of documents written.
pub fn translate(ckpt_path: &Path, src_path: &Path, out_path: &Path, beam: usize) -> Result<usize> {
    if beam == 0 {
        return Err(Error::Config("`beam` must be at least 1".into()));
    }
    let ckpt = Checkpoint::load(ckpt_path)?;
    let model = ckpt.model();
    let docs = load_documents(src_path, Side::Source)?;
    let out = translate_documents(&model, &ckpt.src_vocab, &ckpt.tgt_vocab, &docs, beam);
    write_documents(out_path, out.iter().map(|d| d.iter().map(Sentence::to_line)))?;
    Ok(out.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub id: String,
    pub bleu_doc: f64,
    pub lc: f64,
    /// `None` for single-sentence documents.
    pub coh: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub documents: Vec<DocumentScore>,
    /// BLEU from n-gram statistics summed over documents.
    pub bleu_doc: f64,
    /// Mean over documents.
    pub lc: f64,
    /// Mean over documents with at least two sentences; 0 if there are none.
    pub coh: f64,
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

impl ScoreReport {
    /// Tab-separated scores in percentage points, one row per document and
    /// a final `corpus` row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("doc\tBLEU_doc\tLC\tCOH\n");
        for d in &self.documents {
            let coh = d.coh.map_or_else(|| "-".to_string(), pct);
            let _ = writeln!(out, "{}\t{}\t{}\t{}", d.id, pct(d.bleu_doc), pct(d.lc), coh);
        }
        let _ = writeln!(out, "corpus\t{}\t{}\t{}", pct(self.bleu_doc), pct(self.lc), pct(self.coh));
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "{} documents: BLEU_doc {}  LC {}  COH {}",
            self.documents.len(),
            pct(self.bleu_doc),
            pct(self.lc),
            pct(self.coh)
        )
    }
}

/// Scores hypothesis documents against aligned references. LC and COH are
/// properties of the hypothesis alone.
pub fn score_documents(
    hyp: &[Vec<Sentence>],
    refs: &[Vec<Sentence>],
    ids: &[String],
    resources: &RewardResources,
) -> Result<ScoreReport> {
    if hyp.len() != refs.len() {
        return Err(Error::Alignment(format!(
            "{} hypothesis documents but {} reference documents",
            hyp.len(),
            refs.len()
        )));
    }
    let mut stats = BleuStats::default();
    let mut documents = Vec::with_capacity(hyp.len());
    for (n, (h, r)) in hyp.iter().zip(refs).enumerate() {
        if h.len() != r.len() {
            return Err(Error::Alignment(format!(
                "document {n}: {} hypothesis sentences but {} reference sentences",
                h.len(),
                r.len()
            )));
        }
        let s = document_stats(h, r);
        stats.add(&s);
        let coh = resources.coh(h);
        documents.push(DocumentScore {
            id: ids.get(n).cloned().unwrap_or_else(|| format!("doc{n}")),
            bleu_doc: s.score().value,
            lc: resources.lc(h).value,
            coh: (coh.pairs > 0).then_some(coh.value),
        });
    }
    let lc = if documents.is_empty() {
        0.0
    } else {
        documents.iter().map(|d| d.lc).sum::<f64>() / documents.len() as f64
    };
    let cohs: Vec<f64> = documents.iter().filter_map(|d| d.coh).collect();
    let coh = if cohs.is_empty() {
        0.0
    } else {
        cohs.iter().sum::<f64>() / cohs.len() as f64
    };
    Ok(ScoreReport {
        documents,
        bleu_doc: stats.score().value,
        lc,
        coh,
    })
}

pub fn score(hyp_path: &Path, ref_path: &Path, resources: &RewardResources) -> Result<ScoreReport> {
    let hyp = load_documents(hyp_path, Side::Target)?;
    let refs = load_documents(ref_path, Side::Target)?;
    let ids: Vec<String> = refs.iter().map(|d| d.id.clone()).collect();
    let h: Vec<Vec<Sentence>> = hyp.into_iter().map(|d| d.sentences).collect();
    let r: Vec<Vec<Sentence>> = refs.into_iter().map(|d| d.sentences).collect();
    score_documents(&h, &r, &ids, resources)
}

/// Corpus perplexity of the references under teacher forcing, counting
/// the closing EOS of every sentence.
pub fn perplexity(
    model: &PolicyModel,
    docs: &[ParallelDocument],
    src_vocab: &Vocabulary,
    tgt_vocab: &Vocabulary,
) -> f64 {
    let (nll, tokens) = docs
        .par_iter()
        .map(|doc| {
            let src: Vec<Vec<TokenId>> = doc.source.sentences.iter().map(|s| src_vocab.encode(s)).collect();
            let mut nll = 0.0;
            let mut tokens = 0usize;
            for (i, t) in doc.target.sentences.iter().enumerate() {
                let tgt = tgt_vocab.encode(t);
                let ctx = i.checked_sub(1).map(|j| src[j].as_slice());
                let m = tgt.len() + 1;
                nll += model.accumulate_nll(&src[i], &tgt, ctx, None) * m as f64;
                tokens += m;
            }
            (nll, tokens)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0usize), |(a, n), (b, m)| (a + b, n + m));
    (nll / tokens.max(1) as f64).exp()
}

/// Decodes the held-out documents and scores them together with perplexity.
pub fn evaluate(
    model: &PolicyModel,
    docs: &[ParallelDocument],
    src_vocab: &Vocabulary,
    tgt_vocab: &Vocabulary,
    resources: &RewardResources,
    beam: usize,
) -> Result<(ScoreReport, f64)> {
    let sources: Vec<Document> = docs.iter().map(|d| d.source.clone()).collect();
    let hyp = translate_documents(model, src_vocab, tgt_vocab, &sources, beam);
    let refs: Vec<Vec<Sentence>> = docs.iter().map(|d| d.target.sentences.clone()).collect();
    let ids: Vec<String> = docs.iter().map(|d| d.id().to_string()).collect();
    let report = score_documents(&hyp, &refs, &ids, resources)?;
    Ok((report, perplexity(model, docs, src_vocab, tgt_vocab)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexcohesion::RelationLabel;

    fn doc(lines: &[&str]) -> Vec<Sentence> {
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| Sentence::from_tokens(l.split_whitespace(), i))
            .collect()
    }

    #[test]
    fn identical_hypothesis_scores_hundred_bleu() {
        let mut res = RewardResources::default();
        res.relations.insert("car", RelationLabel::Synonym, "automobile");
        let r = vec![doc(&["the car stopped", "the automobile was red"]), doc(&["a dog barked"])];
        let report = score_documents(&r, &r, &[], &res).unwrap();
        assert_eq!(report.bleu_doc, 1.0);
        assert_eq!(report.documents[0].lc, res.lc(&r[0]).value);
        assert!(report.to_tsv().contains("corpus\t100.00"));
        assert_eq!(report.documents[1].coh, None);
    }

    #[test]
    fn no_repetition_gives_zero_lc() {
        let res = RewardResources::default();
        let h = vec![doc(&["red car", "blue sky", "green tree"])];
        let report = score_documents(&h, &h, &[], &res).unwrap();
        assert_eq!(report.lc, 0.0);
        assert!(report.to_tsv().contains("\t0.00\t"));
    }

    #[test]
    fn misaligned_documents_rejected() {
        let res = RewardResources::default();
        let h = vec![doc(&["a"])];
        let r = vec![doc(&["a"]), doc(&["b"])];
        assert!(matches!(score_documents(&h, &r, &[], &res), Err(Error::Alignment(_))));
        let r = vec![doc(&["a", "b"])];
        assert!(matches!(score_documents(&h, &r, &[], &res), Err(Error::Alignment(_))));
    }
}
