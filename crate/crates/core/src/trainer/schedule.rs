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

/// Held-out scores after `iteration` parameter updates. Metric values are
/// fractions in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub iteration: usize,
    pub bleu_doc: f64,
    pub lc: f64,
    pub coh: f64,
    pub perplexity: f64,
    pub learning_rate: f64,
}

impl ValidationRecord {
    fn metrics(&self) -> [f64; 3] {
        [self.bleu_doc, self.lc, self.coh]
    }

    /// Number of metrics on which `self` is at least as good as `other`.
    pub fn wins_against(&self, other: &ValidationRecord) -> usize {
        self.metrics()
            .iter()
            .zip(other.metrics())
            .filter(|(a, b)| **a >= *b)
            .count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionRule {
    Perplexity,
    MajorityMetrics,
}

impl SelectionRule {
    /// Index of the selected record, or `None` for an empty slice.
    pub fn select(self, records: &[ValidationRecord]) -> Option<usize> {
        match self {
            SelectionRule::Perplexity => select_perplexity(records),
            SelectionRule::MajorityMetrics => select_majority(records),
        }
    }
}

/// Lowest perplexity; the earliest record wins ties.
pub fn select_perplexity(records: &[ValidationRecord]) -> Option<usize> {
    (0..records.len()).min_by(|&a, &b| records[a].perplexity.total_cmp(&records[b].perplexity))
}

/// A record at least as good as every other record on two of the three
/// metrics, preferring the highest BLEU_doc among such records. When the
/// preferences are cyclic and no such record exists, the record with the
/// most pairwise majorities is taken, again breaking ties by BLEU_doc.
pub fn select_majority(records: &[ValidationRecord]) -> Option<usize> {
    let beats = |a: usize, b: usize| records[a].wins_against(&records[b]) >= 2;
    let by_bleu = |a: &usize, b: &usize| {
        records[*a]
            .bleu_doc
            .total_cmp(&records[*b].bleu_doc)
            .then_with(|| b.cmp(a))
    };
    let winners: Vec<usize> = (0..records.len())
        .filter(|&a| (0..records.len()).all(|b| a == b || beats(a, b)))
        .collect();
    if let Some(best) = winners.into_iter().max_by(by_bleu) {
        return Some(best);
    }
    let copeland = |a: usize| (0..records.len()).filter(|&b| a != b && beats(a, b)).count();
    (0..records.len()).max_by(|a, b| copeland(*a).cmp(&copeland(*b)).then_with(|| by_bleu(a, b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnnealEvent {
    Improved,
    Waiting,
    Halved,
    Stop,
}

/// Halves the learning rate whenever validation perplexity fails to
/// improve for `patience` consecutive validations, at most `max_halvings`
/// times; the next plateau after that stops training.
#[derive(Clone, Debug, PartialEq)]
pub struct Annealer {
    lr: f64,
    best: f64,
    stale: usize,
    halvings: usize,
    max_halvings: usize,
    patience: usize,
    min_improvement: f64,
}

impl Annealer {
    pub fn new(lr: f64, max_halvings: usize, patience: usize, min_improvement: f64) -> Self {
        Annealer {
            lr,
            best: f64::INFINITY,
            stale: 0,
            halvings: 0,
            max_halvings,
            patience: patience.max(1),
            min_improvement,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    pub fn halvings(&self) -> usize {
        self.halvings
    }

    pub fn observe(&mut self, perplexity: f64) -> AnnealEvent {
        if perplexity < self.best * (1.0 - self.min_improvement) || self.best.is_infinite() {
            self.best = self.best.min(perplexity);
            self.stale = 0;
            return AnnealEvent::Improved;
        }
        self.stale += 1;
        if self.stale < self.patience {
            return AnnealEvent::Waiting;
        }
        self.stale = 0;
        if self.halvings < self.max_halvings {
            self.halvings += 1;
            self.lr *= 0.5;
            AnnealEvent::Halved
        } else {
            AnnealEvent::Stop
        }
    }
}
