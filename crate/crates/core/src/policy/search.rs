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

use serde::{Deserialize, Serialize};

use super::model::{max_decode_len, PolicyModel};
use crate::corpus::{TokenId, BOS, EOS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Target ids, ending in EOS unless cut at the length limit.
    pub tokens: Vec<TokenId>,
    pub step_logprobs: Vec<f64>,
}

impl Candidate {
    pub fn total_logprob(&self) -> f64 {
        self.step_logprobs.iter().sum()
    }

    /// Length-normalised score, the mean per-token log-probability.
    pub fn mean_logprob(&self) -> f64 {
        if self.step_logprobs.is_empty() {
            return 0.0;
        }
        self.total_logprob() / self.step_logprobs.len() as f64
    }

    pub fn is_finished(&self) -> bool {
        self.tokens.last() == Some(&EOS)
    }

    /// Tokens without the closing EOS.
    pub fn content(&self) -> &[TokenId] {
        match self.tokens.split_last() {
            Some((&EOS, rest)) => rest,
            _ => &self.tokens,
        }
    }
}

/// Candidates for one source input, best first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn best(&self) -> &Candidate {
        &self.candidates[0]
    }
}

/// Picks the most probable emittable token at every step.
pub fn greedy_decode(model: &PolicyModel, src: &[TokenId], context: Option<&[TokenId]>) -> Candidate {
    let encoded = model.encode(src, context);
    let max_len = max_decode_len(src.len());
    let mut state = encoded.init_state().to_vec();
    let mut prev = BOS;
    let mut out = Candidate {
        tokens: Vec::new(),
        step_logprobs: Vec::new(),
    };
    while out.tokens.len() < max_len {
        let step = model.step(&encoded, prev, &state);
        let (best, lp) = model
            .emittable()
            .map(|t| (t, step.logprobs[t as usize]))
            .fold((EOS, f64::NEG_INFINITY), |acc, (t, lp)| if lp > acc.1 { (t, lp) } else { acc });
        out.tokens.push(best);
        out.step_logprobs.push(lp);
        if best == EOS {
            break;
        }
        state = step.state;
        prev = best;
    }
    out
}

struct Hypothesis {
    candidate: Candidate,
    total: f64,
    state: Vec<f64>,
}

/// Beam search that keeps the `beam` best partial hypotheses (by total
/// log-probability) at each step, retires hypotheses that emit EOS, and
/// returns the `beam` best finished ones ranked by mean log-probability.
/// Hypotheses still open at the length limit are returned truncated.
pub fn beam_search(
    model: &PolicyModel,
    src: &[TokenId],
    beam: usize,
    context: Option<&[TokenId]>,
) -> CandidateSet {
    let beam = beam.max(1);
    let encoded = model.encode(src, context);
    let max_len = max_decode_len(src.len());
    let mut live = vec![Hypothesis {
        candidate: Candidate {
            tokens: Vec::new(),
            step_logprobs: Vec::new(),
        },
        total: 0.0,
        state: encoded.init_state().to_vec(),
    }];
    let mut finished: Vec<Candidate> = Vec::new();

    for _ in 0..max_len {
        if live.is_empty() {
            break;
        }
        let steps: Vec<_> = live
            .iter()
            .map(|h| {
                let prev = h.candidate.tokens.last().copied().unwrap_or(BOS);
                model.step(&encoded, prev, &h.state)
            })
            .collect();
        let mut expansions: Vec<(f64, usize, TokenId)> = Vec::new();
        for (hi, (h, step)) in live.iter().zip(&steps).enumerate() {
            for t in model.emittable() {
                expansions.push((h.total + step.logprobs[t as usize], hi, t));
            }
        }
        expansions.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut next = Vec::with_capacity(beam);
        for &(total, hi, t) in expansions.iter().take(beam) {
            let step = &steps[hi];
            let mut candidate = live[hi].candidate.clone();
            candidate.tokens.push(t);
            candidate.step_logprobs.push(step.logprobs[t as usize]);
            if t == EOS {
                finished.push(candidate);
            } else {
                next.push(Hypothesis {
                    candidate,
                    total,
                    state: step.state.clone(),
                });
            }
        }
        live = next;
    }
    finished.extend(live.into_iter().map(|h| h.candidate));

    finished.sort_by(|a, b| {
        b.mean_logprob()
            .total_cmp(&a.mean_logprob())
            .then_with(|| a.tokens.cmp(&b.tokens))
    });
    finished.dedup_by(|a, b| a.tokens == b.tokens);
    finished.truncate(beam);
    CandidateSet {
        candidates: finished,
    }
}
