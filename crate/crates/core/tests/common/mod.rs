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

//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use docrisk::corpus::{is_punctuation, is_reserved, Sentence};
use docrisk::lexcohesion::{RelationDb, StopList, LabelSet};
use docrisk::coherence::TopicTable;
use docrisk::policy::{Params, PolicyModel};

/// BLEU-4 with add-one smoothing for zero matches at n >= 2, counting
/// n-grams by linear scans over joined strings.
pub fn brute_bleu(hyp: &[String], reference: &[String]) -> f64 {
    if hyp.is_empty() {
        return 0.0;
    }
    let grams = |toks: &[String], n: usize| -> Vec<String> {
        if toks.len() < n {
            return Vec::new();
        }
        (0..=toks.len() - n).map(|i| toks[i..i + n].join("\u{1}")).collect()
    };
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let h = grams(hyp, n);
        let mut r = grams(reference, n);
        let mut matches = 0usize;
        for g in &h {
            if let Some(pos) = r.iter().position(|x| x == g) {
                r.remove(pos);
                matches += 1;
            }
        }
        let p = if matches > 0 {
            matches as f64 / h.len() as f64
        } else if n == 1 {
            return 0.0;
        } else {
            1.0 / (h.len() as f64 + 1.0)
        };
        log_sum += p.ln();
    }
    let (c, r) = (hyp.len() as f64, reference.len() as f64);
    let bp = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
    bp * (log_sum / 4.0).exp()
}

pub fn concat(block: &[Sentence]) -> Vec<String> {
    block.iter().flat_map(|s| s.tokens.iter().cloned()).collect()
}

fn content_positions(block: &[Sentence], stop: &StopList) -> Vec<String> {
    concat(block)
        .into_iter()
        .filter(|t| !is_reserved(t) && !is_punctuation(t) && !stop.contains(t))
        .collect()
}

fn linked(db: &RelationDb, a: &str, b: &str) -> bool {
    a == b || db.is_related(a, b, &LabelSet::all())
}

/// Devices as content tokens minus connected components of the token-level
/// link graph, components found by breadth-first search.
pub fn lc_components(block: &[Sentence], db: &RelationDb, stop: &StopList) -> (usize, usize) {
    let toks = content_positions(block, stop);
    let n = toks.len();
    let mut seen = vec![false; n];
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && linked(db, &toks[u], &toks[v]) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    (n - components, n)
}

/// Devices by enumerating every (earlier, later) position pair over the
/// transitive closure of the link relation (Floyd-Warshall).
pub fn lc_pairwise(block: &[Sentence], db: &RelationDb, stop: &StopList) -> (usize, usize) {
    let toks = content_positions(block, stop);
    let n = toks.len();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = i == j || linked(db, &toks[i], &toks[j]);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let devices = (0..n).filter(|&j| (0..j).any(|jp| reach[jp][j])).count();
    (devices, n)
}

/// Coherence computed directly from the definition.
pub fn coh_direct(block: &[Sentence], table: &TopicTable) -> f64 {
    let topic = |s: &Sentence| -> Vec<f64> {
        let vs: Vec<&[f64]> = s.tokens.iter().filter_map(|t| table.get(t)).collect();
        (0..table.dim())
            .map(|d| {
                if vs.is_empty() {
                    0.0
                } else {
                    vs.iter().map(|v| v[d]).sum::<f64>() / vs.len() as f64
                }
            })
            .collect()
    };
    if block.len() < 2 {
        return 0.0;
    }
    let topics: Vec<Vec<f64>> = block.iter().map(topic).collect();
    let mut sum = 0.0;
    for i in 1..topics.len() {
        let (a, b) = (&topics[i], &topics[i - 1]);
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        sum += if na == 0.0 || nb == 0.0 { 0.0 } else { (dot / (na * nb)).clamp(-1.0, 1.0) };
    }
    sum / (topics.len() - 1) as f64
}

/// Per-block relative error between an analytic gradient and central
/// finite differences of `f`, `|a - n| / max(|a|, |n|, 1e-7)` in L2 norm.
pub fn gradient_check(
    model: &PolicyModel,
    analytic: &Params,
    eps: f64,
    f: impl Fn(&PolicyModel) -> f64,
) -> Vec<(&'static str, f64)> {
    let mut probe = model.clone();
    let mut report = Vec::new();
    for (bi, name) in Params::NAMES.iter().enumerate() {
        let n_values = model.params.blocks()[bi].1.data.len();
        let mut numeric = vec![0.0; n_values];
        for i in 0..n_values {
            let original = model.params.blocks()[bi].1.data[i];
            probe.params.blocks_mut()[bi].1.data[i] = original + eps;
            let plus = f(&probe);
            probe.params.blocks_mut()[bi].1.data[i] = original - eps;
            let minus = f(&probe);
            probe.params.blocks_mut()[bi].1.data[i] = original;
            numeric[i] = (plus - minus) / (2.0 * eps);
        }
        let a = &analytic.blocks()[bi].1.data;
        let diff: f64 = a.iter().zip(&numeric).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nn = numeric.iter().map(|x| x * x).sum::<f64>().sqrt();
        report.push((*name, diff / na.max(nn).max(1e-7)));
    }
    report
}
