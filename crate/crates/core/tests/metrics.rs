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

mod common;

use proptest::prelude::*;

use docrisk::bleu::{bleu_document, bleu_sentence, bleu_tokens, BleuStats};
use docrisk::coherence::{coherence, TopicTable};
use docrisk::corpus::Sentence;
use docrisk::lexcohesion::{lexical_cohesion, RelationDb, RelationLabel, StopList};

const WORDS: [&str; 10] = ["car", "auto", "wheel", "road", "tree", "leaf", "the", "of", "sun", "."];

fn word() -> impl Strategy<Value = &'static str> {
    (0..WORDS.len()).prop_map(|i| WORDS[i])
}

fn block() -> impl Strategy<Value = Vec<Sentence>> {
    prop::collection::vec(prop::collection::vec(word(), 1..12), 1..6).prop_map(|sents| {
        sents
            .into_iter()
            .enumerate()
            .map(|(i, s)| Sentence::from_tokens(s, i))
            .collect()
    })
}

fn relations() -> impl Strategy<Value = RelationDb> {
    prop::collection::vec((word(), 0..7usize, word()), 0..8).prop_map(|edges| {
        let mut db = RelationDb::new();
        for (a, l, b) in edges {
            db.insert(a, RelationLabel::ALL[l], b);
        }
        db
    })
}

fn table() -> impl Strategy<Value = TopicTable> {
    (1..5usize)
        .prop_flat_map(|dim| prop::collection::vec(prop::option::of(prop::collection::vec(-3.0..3.0f64, dim)), WORDS.len()))
        .prop_map(|rows| {
            let dim = rows.iter().flatten().next().map_or(1, Vec::len);
            let mut t = TopicTable::new(dim).unwrap();
            for (w, row) in WORDS.iter().zip(rows) {
                if let Some(v) = row {
                    t.insert(*w, v);
                }
            }
            t
        })
}

fn stop() -> StopList {
    StopList::new(["the", "of"])
}

proptest! {
    #[test]
    fn lc_matches_both_oracles(b in block(), db in relations()) {
        let lc = lexical_cohesion(&b, &db, &stop());
        let (d1, n1) = common::lc_components(&b, &db, &stop());
        let (d2, n2) = common::lc_pairwise(&b, &db, &stop());
        prop_assert_eq!((lc.devices, lc.content_tokens), (d1, n1));
        prop_assert_eq!((d1, n1), (d2, n2));
        prop_assert!((0.0..=1.0).contains(&lc.value));
    }

    #[test]
    fn lc_ignores_sentence_order(b in block(), db in relations(), seed in any::<u64>()) {
        let mut shuffled = b.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed as usize).wrapping_mul(i + 7) % (i + 1));
        }
        prop_assert_eq!(
            lexical_cohesion(&b, &db, &stop()).devices,
            lexical_cohesion(&shuffled, &db, &stop()).devices
        );
    }

    #[test]
    fn coherence_matches_direct_definition(b in block(), t in table()) {
        let got = coherence(&b, &t);
        let want = common::coh_direct(&b, &t);
        prop_assert!((got.value - want).abs() <= 1e-12, "{} vs {}", got.value, want);
        prop_assert_eq!(got.pairs, b.len() - 1);
        prop_assert!((-1.0..=1.0).contains(&got.value));
    }

    #[test]
    fn bleu_matches_brute_force(h in block(), r in block()) {
        let s = bleu_sentence(&h[0], &r[0]).value;
        prop_assert!((s - common::brute_bleu(&h[0].tokens, &r[0].tokens)).abs() <= 1e-9);
        let d = bleu_document(&h, &r).value;
        prop_assert!((d - common::brute_bleu(&common::concat(&h), &common::concat(&r))).abs() <= 1e-9);
        prop_assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn bleu_of_identity_is_one(b in block()) {
        let toks = common::concat(&b);
        prop_assert!((bleu_tokens(&toks, &toks).value - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn corpus_stats_add_up(pairs in prop::collection::vec((block(), block()), 1..4)) {
        let mut total = BleuStats::default();
        let mut hyp = Vec::new();
        let mut reference = Vec::new();
        for (h, r) in &pairs {
            total.add(&docrisk::bleu::document_stats(h, r));
            hyp.extend(common::concat(h));
            reference.extend(common::concat(r));
        }
        let joined = BleuStats::from_tokens(&hyp, &reference);
        prop_assert_eq!(total.hyp_len, joined.hyp_len);
        prop_assert_eq!(total.ref_len, joined.ref_len);
        prop_assert!(total.score().value.is_finite());
    }
}
