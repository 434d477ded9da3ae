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

//! BLEU-4 at sentence, document and corpus level.
//!
//! Sentence and document scores smooth zero n-gram matches for n >= 2 with
//! an add-one count, `1 / (total + 1)`. Scores live on [0, 1]; reports
//! multiply by 100.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;

pub const MAX_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub value: f64,
    pub ngram_precisions: [f64; MAX_ORDER],
    /// 0 for an empty hypothesis.
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

/// Sufficient statistics: clipped matches and hypothesis n-gram totals per
/// order, plus lengths. Summing stats over documents gives corpus BLEU.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn from_tokens<H, R>(hyp: &[H], reference: &[R]) -> Self
    where
        H: AsRef<str>,
        R: AsRef<str>,
    {
        let hyp: Vec<&str> = hyp.iter().map(AsRef::as_ref).collect();
        let reference: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
        let mut stats = BleuStats {
            hyp_len: hyp.len(),
            ref_len: reference.len(),
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let mut ref_counts: HashMap<&[&str], usize> = HashMap::new();
            for gram in reference.windows(n) {
                *ref_counts.entry(gram).or_default() += 1;
            }
            let mut hyp_counts: HashMap<&[&str], usize> = HashMap::new();
            for gram in hyp.windows(n) {
                *hyp_counts.entry(gram).or_default() += 1;
            }
            stats.matches[n - 1] = hyp_counts
                .iter()
                .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
                .sum();
            stats.totals[n - 1] = hyp.len().saturating_sub(n - 1);
        }
        stats
    }

    pub fn add(&mut self, other: &BleuStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    /// Smoothed BLEU-4 from the accumulated statistics.
    pub fn score(&self) -> BleuScore {
        let precisions: [f64; MAX_ORDER] = std::array::from_fn(|n| {
            if self.matches[n] > 0 {
                self.matches[n] as f64 / self.totals[n] as f64
            } else if n == 0 {
                0.0
            } else {
                1.0 / (self.totals[n] as f64 + 1.0)
            }
        });
        if self.hyp_len == 0 {
            return BleuScore {
                value: 0.0,
                ngram_precisions: precisions,
                brevity_penalty: 0.0,
                hyp_len: 0,
                ref_len: self.ref_len,
            };
        }
        let brevity_penalty = if self.hyp_len >= self.ref_len {
            1.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        };
        let value = if precisions[0] == 0.0 {
            0.0
        } else {
            let mean_log = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
            (brevity_penalty * mean_log.exp()).min(1.0)
        };
        BleuScore {
            value,
            ngram_precisions: precisions,
            brevity_penalty,
            hyp_len: self.hyp_len,
            ref_len: self.ref_len,
        }
    }
}

pub fn bleu_tokens<H: AsRef<str>, R: AsRef<str>>(hyp: &[H], reference: &[R]) -> BleuScore {
    BleuStats::from_tokens(hyp, reference).score()
}

pub fn bleu_sentence(hyp: &Sentence, reference: &Sentence) -> BleuScore {
    bleu_tokens(&hyp.tokens, &reference.tokens)
}

/// BLEU over the concatenation of each side's sentences.
pub fn bleu_document(hyp: &[Sentence], reference: &[Sentence]) -> BleuScore {
    document_stats(hyp, reference).score()
}

pub fn document_stats(hyp: &[Sentence], reference: &[Sentence]) -> BleuStats {
    BleuStats::from_tokens(&concat(hyp), &concat(reference))
}

fn concat(block: &[Sentence]) -> Vec<&str> {
    block
        .iter()
        .flat_map(|s| s.tokens.iter().map(String::as_str))
        .collect()
}
