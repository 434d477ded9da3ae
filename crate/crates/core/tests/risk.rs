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

use proptest::prelude::*;

use docrisk::corpus::EncodedSegment;
use docrisk::policy::{ModelConfig, PolicyModel};
use docrisk::risk::{
    assemble_blocks, expected_risk, generate_candidates, probabilities_from_scores, risk_objective,
    risk_score_gradient,
};

fn case() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..8usize).prop_flat_map(|n| {
        (
            prop::collection::vec(-40.0..0.0f64, n),
            prop::collection::vec(-1.0..2.0f64, n),
        )
    })
}

proptest! {
    #[test]
    fn probabilities_normalised_and_shift_invariant((scores, _) in case(), c in -100.0..100.0f64) {
        let p = probabilities_from_scores(&scores);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        let shifted: Vec<f64> = scores.iter().map(|s| s + c).collect();
        for (a, b) in p.iter().zip(probabilities_from_scores(&shifted)) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn loss_bounded_and_linear_in_rewards((scores, rewards) in case(), c in -3.0..3.0f64, k in 0.1..4.0f64) {
        let p = probabilities_from_scores(&scores);
        let loss = expected_risk(&p, &rewards);
        let max = rewards.iter().cloned().fold(f64::MIN, f64::max);
        let min = rewards.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!(loss >= -max - 1e-12 && loss <= -min + 1e-12);
        let shifted: Vec<f64> = rewards.iter().map(|r| r + c).collect();
        prop_assert!((expected_risk(&p, &shifted) - (loss - c)).abs() <= 1e-12);
        let scaled: Vec<f64> = rewards.iter().map(|r| r * k).collect();
        prop_assert!((expected_risk(&p, &scaled) - k * loss).abs() <= 1e-12);
    }

    #[test]
    fn loss_invariant_to_candidate_order((scores, rewards) in case(), rot in 0..8usize) {
        let n = scores.len();
        let r = rot % n;
        let mut s2 = scores.clone();
        let mut r2 = rewards.clone();
        s2.rotate_left(r);
        r2.rotate_left(r);
        let a = expected_risk(&probabilities_from_scores(&scores), &rewards);
        let b = expected_risk(&probabilities_from_scores(&s2), &r2);
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn score_gradient_matches_finite_differences((scores, rewards) in case()) {
        let g = risk_score_gradient(&probabilities_from_scores(&scores), &rewards);
        let eps = 1e-6;
        for i in 0..scores.len() {
            let mut plus = scores.clone();
            plus[i] += eps;
            let mut minus = scores.clone();
            minus[i] -= eps;
            let fd = (expected_risk(&probabilities_from_scores(&plus), &rewards)
                - expected_risk(&probabilities_from_scores(&minus), &rewards))
                / (2.0 * eps);
            prop_assert!((fd - g[i]).abs() <= 1e-6, "{} vs {}", fd, g[i]);
        }
    }

    #[test]
    fn equal_rewards_give_zero_score_gradient((scores, _) in case(), r in -2.0..2.0f64) {
        let rewards = vec![r; scores.len()];
        let g = risk_score_gradient(&probabilities_from_scores(&scores), &rewards);
        prop_assert!(g.iter().all(|x| *x == 0.0));
    }
}

#[test]
fn small_step_against_gradient_lowers_risk() {
    let model = PolicyModel::init(
        ModelConfig {
            src_vocab: 10,
            tgt_vocab: 8,
            emb_dim: 8,
            hidden_dim: 8,
            context_sents: 1,
        },
        31,
    )
    .unwrap();
    let segment = EncodedSegment {
        sources: vec![vec![4, 5, 6], vec![7, 9]],
        contexts: vec![None, Some(vec![4, 5, 6])],
        targets: vec![vec![4], vec![5]],
    };
    let sets = generate_candidates(&model, &segment, 3);
    let blocks = assemble_blocks(&sets);
    assert!(blocks.len() >= 2);
    let rewards: Vec<f64> = (0..blocks.len()).map(|b| if b == 1 { 1.0 } else { 0.1 }).collect();
    let mut grads = model.params.zeros_like();
    let (before, probs) = risk_objective(&model, &segment, &sets, &blocks, &rewards, Some(&mut grads));
    let mut stepped = model.clone();
    stepped.params.add_scaled(-1e-3 / grads.l2_norm(), &grads);
    let (after, probs_after) = risk_objective(&stepped, &segment, &sets, &blocks, &rewards, None);
    assert!(after < before, "{after} >= {before}");
    assert!(probs_after[1] > probs[1]);
}
