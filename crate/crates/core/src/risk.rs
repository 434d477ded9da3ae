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

//! Expected-risk objective over candidate translations of a segment.
//!
//! For candidate blocks `u_1..u_l` with rewards `r_i`, the loss is
//! `-sum_i r_i p_i` where `p = softmax(s)` and `s_i` is the block's mean
//! per-token log-probability. Rewards are constants; gradients flow through
//! `p` only.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bleu::{bleu_document, bleu_sentence};
use crate::coherence::{coherence_with, CohConfig, TopicTable};
use crate::corpus::{EncodedSegment, Sentence, Vocabulary};
use crate::lexcohesion::{lexical_cohesion_with, LcConfig, RelationDb, StopList};
use crate::policy::{beam_search, CandidateSet, Gradients, PolicyModel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RewardKind {
    BleuDoc,
    BleuSen,
    LcDoc,
    CohDoc,
}

impl RewardKind {
    pub const ALL: [RewardKind; 4] = [
        RewardKind::BleuDoc,
        RewardKind::BleuSen,
        RewardKind::LcDoc,
        RewardKind::CohDoc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RewardKind::BleuDoc => "bleu_doc",
            RewardKind::BleuSen => "bleu_sen",
            RewardKind::LcDoc => "lc_doc",
            RewardKind::CohDoc => "coh_doc",
        }
    }

    pub fn needs_reference(self) -> bool {
        matches!(self, RewardKind::BleuDoc | RewardKind::BleuSen)
    }
}

/// Non-empty set of rewards that are summed without weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardSpec {
    kinds: BTreeSet<RewardKind>,
}

impl RewardSpec {
    pub fn new<I: IntoIterator<Item = RewardKind>>(kinds: I) -> Result<Self> {
        let kinds: BTreeSet<_> = kinds.into_iter().collect();
        if kinds.is_empty() {
            return Err(Error::Config("reward spec must name at least one reward".into()));
        }
        Ok(RewardSpec { kinds })
    }

    pub fn contains(&self, kind: RewardKind) -> bool {
        self.kinds.contains(&kind)
    }

    pub fn kinds(&self) -> impl Iterator<Item = RewardKind> + '_ {
        self.kinds.iter().copied()
    }

    pub fn needs_reference(&self) -> bool {
        self.kinds().any(RewardKind::needs_reference)
    }
}

impl FromStr for RewardSpec {
    type Err = Error;

    /// Parses `+`-separated names such as `bleu_doc+lc_doc+coh_doc`.
    fn from_str(s: &str) -> Result<Self> {
        let kinds = s
            .split('+')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                RewardKind::ALL
                    .into_iter()
                    .find(|k| k.name() == p.to_lowercase())
                    .ok_or_else(|| Error::Config(format!("unknown reward `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        RewardSpec::new(kinds)
    }
}

impl fmt::Display for RewardSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.kinds().map(RewardKind::name).collect();
        f.write_str(&names.join("+"))
    }
}

/// Shared read-only resources for the discourse metrics.
#[derive(Clone, Debug)]
pub struct RewardResources {
    pub relations: RelationDb,
    pub stoplist: StopList,
    pub topics: TopicTable,
    pub lc: LcConfig,
    pub coh: CohConfig,
}

impl Default for RewardResources {
    fn default() -> Self {
        RewardResources {
            relations: RelationDb::new(),
            stoplist: StopList::default(),
            topics: TopicTable::new(1).expect("dim 1 is valid"),
            lc: LcConfig::default(),
            coh: CohConfig::default(),
        }
    }
}

impl RewardResources {
    pub fn lc(&self, block: &[Sentence]) -> crate::lexcohesion::LcScore {
        lexical_cohesion_with(block, &self.relations, &self.stoplist, &self.lc)
    }

    pub fn coh(&self, block: &[Sentence]) -> crate::coherence::CohScore {
        coherence_with(block, &self.topics, Some(&self.stoplist), &self.coh)
    }
}

/// Access to a reference block. Rewards read it only when a BLEU reward is
/// enabled.
pub trait ReferenceBlock {
    fn sentences(&self) -> &[Sentence];
}

impl ReferenceBlock for [Sentence] {
    fn sentences(&self) -> &[Sentence] {
        self
    }
}

impl ReferenceBlock for Vec<Sentence> {
    fn sentences(&self) -> &[Sentence] {
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub bleu_doc: Option<f64>,
    pub bleu_sen: Option<f64>,
    pub lc_doc: Option<f64>,
    /// `None` when disabled or when the block has a single sentence.
    pub coh_doc: Option<f64>,
    pub total: f64,
}

impl RewardBreakdown {
    pub fn get(&self, kind: RewardKind) -> Option<f64> {
        match kind {
            RewardKind::BleuDoc => self.bleu_doc,
            RewardKind::BleuSen => self.bleu_sen,
            RewardKind::LcDoc => self.lc_doc,
            RewardKind::CohDoc => self.coh_doc,
        }
    }
}

pub fn segment_reward(
    candidate: &[Sentence],
    reference: Option<&dyn ReferenceBlock>,
    spec: &RewardSpec,
    resources: &RewardResources,
) -> Result<RewardBreakdown> {
    let mut out = RewardBreakdown::default();
    for kind in spec.kinds() {
        let value = match kind {
            RewardKind::LcDoc => Some(resources.lc(candidate).value),
            RewardKind::CohDoc => {
                let coh = resources.coh(candidate);
                (coh.pairs > 0).then_some(coh.value)
            }
            RewardKind::BleuDoc => {
                let reference = reference.ok_or(Error::MissingReference("bleu_doc"))?;
                Some(bleu_document(candidate, reference.sentences()).value)
            }
            RewardKind::BleuSen => {
                let reference = reference.ok_or(Error::MissingReference("bleu_sen"))?;
                let refs = reference.sentences();
                let n = candidate.len().min(refs.len());
                let sum: f64 = candidate
                    .iter()
                    .zip(refs)
                    .map(|(h, r)| bleu_sentence(h, r).value)
                    .sum();
                Some(if n == 0 { 0.0 } else { sum / n as f64 })
            }
        };
        match kind {
            RewardKind::BleuDoc => out.bleu_doc = value,
            RewardKind::BleuSen => out.bleu_sen = value,
            RewardKind::LcDoc => out.lc_doc = value,
            RewardKind::CohDoc => out.coh_doc = value,
        }
        out.total += value.unwrap_or(0.0);
    }
    Ok(out)
}

/// Softmax over scores with max-subtraction.
pub fn probabilities_from_scores(scores: &[f64]) -> Vec<f64> {
    crate::policy::tensor::softmax(scores)
}

/// Normalised candidate probabilities from mean step log-probabilities.
pub fn candidate_probabilities(set: &CandidateSet) -> Vec<f64> {
    let scores: Vec<f64> = set.candidates.iter().map(|c| c.mean_logprob()).collect();
    probabilities_from_scores(&scores)
}

/// `d loss / d s_i` for `loss = -sum r_k p_k`, written as
/// `-p_i sum_k p_k (r_i - r_k)` so equal rewards give exactly zero.
pub fn risk_score_gradient(probs: &[f64], rewards: &[f64]) -> Vec<f64> {
    probs
        .iter()
        .zip(rewards)
        .map(|(&pi, &ri)| {
            let spread: f64 = probs.iter().zip(rewards).map(|(pk, rk)| pk * (ri - rk)).sum();
            -pi * spread
        })
        .collect()
}

pub fn expected_risk(probs: &[f64], rewards: &[f64]) -> f64 {
    -probs.iter().zip(rewards).map(|(p, r)| p * r).sum::<f64>()
}

/// A candidate block: for every sentence of the segment, the index of the
/// chosen candidate in that sentence's [`CandidateSet`].
pub type BlockChoice = Vec<usize>;

pub fn generate_candidates(model: &PolicyModel, segment: &EncodedSegment, beam: usize) -> Vec<CandidateSet> {
    (0..segment.len())
        .map(|i| beam_search(model, &segment.sources[i], beam, segment.context(i)))
        .collect()
}

/// Block `r` takes every sentence's rank-`r` hypothesis, falling back to
/// rank 0 where a sentence has fewer. Identical blocks are merged.
pub fn assemble_blocks(sets: &[CandidateSet]) -> Vec<BlockChoice> {
    let l = sets.iter().map(CandidateSet::len).max().unwrap_or(0);
    let mut blocks: Vec<BlockChoice> = Vec::with_capacity(l);
    for r in 0..l {
        let choice: BlockChoice = sets
            .iter()
            .map(|s| if r < s.len() { r } else { 0 })
            .collect();
        if !blocks.contains(&choice) {
            blocks.push(choice);
        }
    }
    blocks
}

pub fn block_sentences(
    sets: &[CandidateSet],
    block: &[usize],
    tgt_vocab: &Vocabulary,
    first_position: usize,
) -> Vec<Sentence> {
    sets.iter()
        .zip(block)
        .enumerate()
        .map(|(i, (set, &k))| {
            Sentence::from_tokens(
                tgt_vocab.decode(set.candidates[k].content()),
                first_position + i,
            )
        })
        .collect()
}

/// Loss and block probabilities for fixed candidate blocks under the
/// current parameters. Candidates are re-scored with teacher forcing, and
/// the gradient is added to `grads` when given.
pub fn risk_objective(
    model: &PolicyModel,
    segment: &EncodedSegment,
    sets: &[CandidateSet],
    blocks: &[BlockChoice],
    rewards: &[f64],
    grads: Option<&mut Gradients>,
) -> (f64, Vec<f64>) {
    assert_eq!(blocks.len(), rewards.len());
    // Re-score each distinct (sentence, candidate) once.
    let mut traces: Vec<Vec<Option<crate::policy::Trace>>> =
        sets.iter().map(|s| vec![None; s.len()]).collect();
    for block in blocks {
        for (i, &k) in block.iter().enumerate() {
            if traces[i][k].is_none() {
                let tokens = &sets[i].candidates[k].tokens;
                traces[i][k] = Some(model.forward(&segment.sources[i], segment.context(i), tokens));
            }
        }
    }
    let logprobs: Vec<Vec<Option<Vec<f64>>>> = traces
        .iter()
        .map(|row| row.iter().map(|t| t.as_ref().map(|t| t.logprobs())).collect())
        .collect();

    let mut lengths = Vec::with_capacity(blocks.len());
    let scores: Vec<f64> = blocks
        .iter()
        .map(|block| {
            let mut total = 0.0;
            let mut count = 0;
            for (i, &k) in block.iter().enumerate() {
                let lp = logprobs[i][k].as_ref().expect("scored above");
                total += lp.iter().sum::<f64>();
                count += lp.len();
            }
            lengths.push(count.max(1));
            total / count.max(1) as f64
        })
        .collect();
    let probs = probabilities_from_scores(&scores);
    let loss = expected_risk(&probs, rewards);

    if let Some(grads) = grads {
        let d_scores = risk_score_gradient(&probs, rewards);
        if d_scores.iter().any(|d| *d != 0.0) {
            // d s_b / d logprob = 1 / m_b for every step of block b.
            let mut weights: Vec<Vec<f64>> = sets.iter().map(|s| vec![0.0; s.len()]).collect();
            for ((block, d), &m) in blocks.iter().zip(&d_scores).zip(&lengths) {
                for (i, &k) in block.iter().enumerate() {
                    weights[i][k] += d / m as f64;
                }
            }
            for (i, row) in traces.iter().enumerate() {
                for (k, trace) in row.iter().enumerate() {
                    if let Some(trace) = trace {
                        if weights[i][k] != 0.0 {
                            let upstream = vec![weights[i][k]; trace.tokens().len()];
                            model.backward(trace, &upstream, grads);
                        }
                    }
                }
            }
        }
    }
    (loss, probs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskBatchResult {
    pub loss: f64,
    pub candidate_probs: Vec<f64>,
    pub rewards: Vec<RewardBreakdown>,
    /// Decoded candidate blocks, aligned with `candidate_probs`.
    pub blocks: Vec<Vec<Sentence>>,
}

/// Risk loss for one single-document segment: beam search per sentence,
/// rank-aligned block assembly, block rewards, and the expected risk.
#[allow(clippy::too_many_arguments)]
pub fn risk_loss(
    model: &PolicyModel,
    segment: &EncodedSegment,
    reference: Option<&dyn ReferenceBlock>,
    tgt_vocab: &Vocabulary,
    spec: &RewardSpec,
    beam: usize,
    resources: &RewardResources,
    grads: Option<&mut Gradients>,
) -> Result<RiskBatchResult> {
    if spec.needs_reference() && reference.is_none() {
        let kind = spec.kinds().find(|k| k.needs_reference()).expect("checked");
        return Err(Error::MissingReference(kind.name()));
    }
    let sets = generate_candidates(model, segment, beam);
    let blocks = assemble_blocks(&sets);
    let decoded: Vec<Vec<Sentence>> = blocks
        .iter()
        .map(|b| block_sentences(&sets, b, tgt_vocab, 0))
        .collect();
    let breakdowns = decoded
        .iter()
        .map(|block| segment_reward(block, reference, spec, resources))
        .collect::<Result<Vec<_>>>()?;
    let rewards: Vec<f64> = breakdowns.iter().map(|b| b.total).collect();
    let (loss, candidate_probs) = risk_objective(model, segment, &sets, &blocks, &rewards, grads);
    Ok(RiskBatchResult {
        loss,
        candidate_probs,
        rewards: breakdowns,
        blocks: decoded,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    Risk,
    Nll,
}

/// Per-batch Bernoulli choice between the Risk and NLL objectives.
#[derive(Clone, Debug)]
pub struct MixSchedule {
    risk_prob: f64,
    rng: ChaCha8Rng,
}

impl MixSchedule {
    pub fn new(risk_prob: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&risk_prob) {
            return Err(Error::Config(format!("risk probability {risk_prob} outside [0, 1]")));
        }
        Ok(MixSchedule {
            risk_prob,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn risk_prob(&self) -> f64 {
        self.risk_prob
    }

    pub fn next_objective(&mut self) -> Objective {
        if self.rng.gen::<f64>() < self.risk_prob {
            Objective::Risk
        } else {
            Objective::Nll
        }
    }
}
