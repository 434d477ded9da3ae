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

use std::fs;
use std::path::Path;

use docrisk::corpus::{load_documents, Sentence, Side, DOC_SEPARATOR};
use docrisk::policy::{greedy_decode, Checkpoint};
use docrisk::risk::Objective;
use docrisk::synthetic::{gen_synthetic, SyntheticFiles, SyntheticKind, SyntheticSizes};
use docrisk::trainer::{
    self, eval, finetune_risk, pretrain_nll, pretrain_nll_from, read_training_log, select_majority, TrainConfig,
    CURVES_FILE, LOG_FILE,
};
use docrisk::Error;

fn corpus(kind: SyntheticKind, dir: &Path, train_docs: usize) -> SyntheticFiles {
    let sizes = SyntheticSizes {
        train_docs,
        valid_docs: 2,
        test_docs: 2,
        ..SyntheticSizes::defaults(kind)
    };
    gen_synthetic(kind, sizes, 4, &dir.join("data")).unwrap()
}

fn config(files: &SyntheticFiles, ckpt_dir: &Path) -> TrainConfig {
    let mut c = TrainConfig::default();
    c.train_src = Some(files.train_src.clone());
    c.train_tgt = Some(files.train_tgt.clone());
    c.valid_src = Some(files.valid_src.clone());
    c.valid_tgt = Some(files.valid_tgt.clone());
    c.relations = files.relations.clone();
    c.topics = files.topics.clone();
    c.stoplist = files.stoplist.clone();
    c.ckpt_dir = ckpt_dir.to_path_buf();
    c.emb_dim = 16;
    c.hidden_dim = 32;
    c.learning_rate = 5e-3;
    c
}

#[test]
fn ten_pair_copy_corpus_overfits() {
    let dir = tempfile::tempdir().unwrap();
    let files = corpus(SyntheticKind::Copy, dir.path(), 2);
    let mut c = config(&files, &dir.path().join("ckpt"));
    c.context_sents = 0;
    c.epochs = 50;
    c.learning_rate = 1e-2;
    c.max_batch_sentences = 5;
    c.valid_src = None;
    c.valid_tgt = None;
    let out = pretrain_nll(&c).unwrap();
    let best = out.epoch_train_perplexity.iter().cloned().fold(f64::MAX, f64::min);
    assert!(best < 1.1, "{:?}", out.epoch_train_perplexity);
}

#[test]
fn fixed_seed_gives_identical_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let files = corpus(SyntheticKind::Copy, dir.path(), 3);
    let mut a = config(&files, &dir.path().join("a"));
    a.epochs = 4;
    let mut b = a.clone();
    b.ckpt_dir = dir.path().join("b");
    let ra = pretrain_nll(&a).unwrap();
    let rb = pretrain_nll(&b).unwrap();
    assert_eq!(ra.batches, rb.batches);
    assert_eq!(ra.records, rb.records);
    assert_eq!(ra.checkpoint, rb.checkpoint);
    let mut c = a.clone();
    c.seed = 2;
    c.ckpt_dir = dir.path().join("c");
    assert_ne!(pretrain_nll(&c).unwrap().batches, ra.batches);
}

#[test]
fn missing_corpus_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = TrainConfig::default();
    c.ckpt_dir = dir.path().to_path_buf();
    assert!(matches!(pretrain_nll(&c), Err(Error::Config(_))));
    c.train_src = Some(dir.path().join("missing.src"));
    c.train_tgt = Some(dir.path().join("missing.tgt"));
    assert!(matches!(pretrain_nll(&c), Err(Error::Config(_))));
}

#[test]
fn zero_risk_probability_is_continued_nll() {
    let dir = tempfile::tempdir().unwrap();
    let files = corpus(SyntheticKind::Cohesion, dir.path(), 4);
    let mut pre = config(&files, &dir.path().join("pre"));
    pre.epochs = 2;
    let init = pretrain_nll(&pre).unwrap().checkpoint;

    let mut cont = pre.clone();
    cont.epochs = 3;
    cont.ckpt_dir = dir.path().join("cont");
    let nll = pretrain_nll_from(&cont, Some(&init)).unwrap();

    let mut ft = cont.clone();
    ft.risk_prob = 0.0;
    ft.ckpt_dir = dir.path().join("ft");
    let risk = finetune_risk(&ft, &init).unwrap();

    assert_eq!(risk.batches, nll.batches);
    assert_eq!(risk.records, nll.records);
    assert!(risk.batches.iter().all(|b| b.objective == Objective::Nll));
}

#[test]
fn annealing_halves_five_times_then_stops() {
    let dir = tempfile::tempdir().unwrap();
    let files = corpus(SyntheticKind::Copy, dir.path(), 2);
    let mut c = config(&files, &dir.path().join("ckpt"));
    c.epochs = 20;
    c.patience = 1;
    c.min_improvement = 1.0;
    let out = pretrain_nll(&c).unwrap();
    assert_eq!(out.halvings, 5);
    assert_eq!(out.final_learning_rate, c.learning_rate / 32.0);
    // Validation 0 sets the baseline; validations 1..=5 halve; 6 stops.
    assert_eq!(out.records.len(), 7);
    let lrs: Vec<f64> = out.records.iter().map(|r| r.learning_rate).collect();
    for w in lrs.windows(2) {
        assert!(w[1] == w[0] || w[1] == w[0] / 2.0, "{lrs:?}");
    }
}

#[test]
fn finetune_selects_majority_record_and_logs_every_validation() {
    let dir = tempfile::tempdir().unwrap();
    let files = corpus(SyntheticKind::Cohesion, dir.path(), 4);
    let mut pre = config(&files, &dir.path().join("pre"));
    pre.epochs = 3;
    let init = pretrain_nll(&pre).unwrap().checkpoint;
    let mut ft = pre.clone();
    ft.risk_prob = 1.0;
    ft.epochs = 3;
    ft.validate_every = 2;
    ft.ckpt_dir = dir.path().join("ft");
    let out = finetune_risk(&ft, &init).unwrap();

    let log = read_training_log(&ft.ckpt_dir.join(LOG_FILE)).unwrap();
    assert_eq!(log, out.records);
    let csv = fs::read_to_string(ft.ckpt_dir.join(CURVES_FILE)).unwrap();
    assert_eq!(csv.lines().count(), out.records.len() + 1);

    let pool = &out.records[1..];
    assert_eq!(out.selected, 1 + select_majority(pool).unwrap());
    let s = &out.records[out.selected];
    let winner_exists = pool
        .iter()
        .any(|a| pool.iter().all(|b| a == b || a.wins_against(b) >= 2));
    if winner_exists {
        assert!(pool.iter().all(|b| b == s || s.wins_against(b) >= 2));
    }
    let saved = Checkpoint::load(&out.checkpoint_path).unwrap();
    assert_eq!(saved, out.checkpoint);
}

#[test]
fn finetune_rejects_foreign_vocabulary() {
    let dir = tempfile::tempdir().unwrap();
    let copy = corpus(SyntheticKind::Copy, dir.path(), 2);
    let mut pre = config(&copy, &dir.path().join("pre"));
    pre.epochs = 1;
    let init = pretrain_nll(&pre).unwrap().checkpoint;
    let other = dir.path().join("other");
    let coh = gen_synthetic(
        SyntheticKind::Cohesion,
        SyntheticSizes {
            train_docs: 2,
            valid_docs: 1,
            test_docs: 1,
            ..SyntheticSizes::defaults(SyntheticKind::Cohesion)
        },
        1,
        &other,
    )
    .unwrap();
    let ft = config(&coh, &dir.path().join("ft"));
    assert!(matches!(finetune_risk(&ft, &init), Err(Error::VocabMismatch(_))));
}

#[test]
fn translate_keeps_documents_and_beam_one_is_greedy() {
    let dir = tempfile::tempdir().unwrap();
    let files = corpus(SyntheticKind::Cohesion, dir.path(), 3);
    let mut c = config(&files, &dir.path().join("ckpt"));
    c.epochs = 2;
    let out = pretrain_nll(&c).unwrap();
    let hyp = dir.path().join("hyp.txt");
    let n = trainer::translate(&out.checkpoint_path, &files.test_src, &hyp, 1).unwrap();
    assert_eq!(n, 2);
    let count = |p: &Path| fs::read_to_string(p).unwrap().lines().filter(|l| *l == DOC_SEPARATOR).count();
    assert_eq!(count(&hyp), count(&files.test_src));

    let ckpt = &out.checkpoint;
    let model = ckpt.model();
    let mut expected = Vec::new();
    for doc in load_documents(&files.test_src, Side::Source).unwrap() {
        let ids: Vec<Vec<u32>> = doc.sentences.iter().map(|s| ckpt.src_vocab.encode(s)).collect();
        let lines: Vec<String> = (0..ids.len())
            .map(|i| {
                let ctx = i.checked_sub(1).map(|j| ids[j].as_slice());
                let words = ckpt.tgt_vocab.decode(greedy_decode(&model, &ids[i], ctx).content());
                if words.is_empty() { "<unk>".to_string() } else { words.join(" ") }
            })
            .collect();
        expected.push(lines.join("\n"));
    }
    let expected = expected.join(&format!("\n{DOC_SEPARATOR}\n")) + "\n";
    assert_eq!(fs::read_to_string(&hyp).unwrap(), expected);

    let beam2 = dir.path().join("beam2.txt");
    trainer::translate(&out.checkpoint_path, &files.test_src, &beam2, 2).unwrap();
    assert_eq!(count(&beam2), count(&files.test_src));
}

#[test]
fn score_matches_module_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let files = corpus(SyntheticKind::Cohesion, dir.path(), 1);
    let c = config(&files, dir.path());
    let resources = eval::load_resources(&c).unwrap();
    let report = trainer::score(&files.test_tgt, &files.test_tgt, &resources).unwrap();
    assert_eq!(report.bleu_doc, 1.0);
    let refs = load_documents(&files.test_tgt, Side::Target).unwrap();
    for (d, r) in report.documents.iter().zip(&refs) {
        assert_eq!(d.lc, resources.lc(&r.sentences).value);
        assert_eq!(d.coh, Some(resources.coh(&r.sentences).value));
    }
    let tsv = report.to_tsv();
    assert_eq!(tsv.lines().count(), refs.len() + 2);
    assert!(tsv.lines().last().unwrap().starts_with("corpus\t100.00\t"));

    let short = dir.path().join("short.txt");
    let first: Vec<Vec<String>> = vec![refs[0].sentences.iter().map(Sentence::to_line).collect()];
    docrisk::corpus::write_documents(&short, first).unwrap();
    assert!(matches!(
        trainer::score(&short, &files.test_tgt, &resources),
        Err(Error::Alignment(_))
    ));
}
