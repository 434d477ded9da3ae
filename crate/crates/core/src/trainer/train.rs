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
use std::io::Write as _;
use std::path::PathBuf;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    build_vocab, load_corpus_with, make_segments, EncodedSegment, ParallelDocument, Sentence, Vocabulary,
};
use crate::policy::{clip_grad_norm, Adam, Checkpoint, ModelConfig, PolicyModel};
use crate::risk::{risk_loss, MixSchedule, Objective, RewardResources};
use crate::{Error, Result};

use super::curves::write_curves_csv;
use super::eval::{evaluate, load_resources, perplexity};
use super::schedule::{AnnealEvent, Annealer, SelectionRule, ValidationRecord};
use super::TrainConfig;

pub const LOG_FILE: &str = "train_log.jsonl";
pub const CURVES_FILE: &str = "reward_curves.csv";
pub const BEST_FILE: &str = "best.json";

/// Seed offset of the objective-mixing stream, kept apart from the
/// initialisation and shuffling streams.
const MIX_SEED_OFFSET: u64 = 0x6d69_7853_6368_6564;
const SHUFFLE_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchLog {
    pub objective: Objective,
    pub loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// The checkpoint chosen by the selection rule, also saved as
    /// `best.json` in the checkpoint directory.
    pub checkpoint: Checkpoint,
    pub checkpoint_path: PathBuf,
    pub records: Vec<ValidationRecord>,
    pub selected: usize,
    pub batches: Vec<BatchLog>,
    /// Training-set perplexity after each completed epoch.
    pub epoch_train_perplexity: Vec<f64>,
    pub final_learning_rate: f64,
    pub halvings: usize,
}

struct TrainSegment {
    encoded: EncodedSegment,
    reference: Vec<Sentence>,
}

struct Session<'a> {
    config: &'a TrainConfig,
    src_vocab: Vocabulary,
    tgt_vocab: Vocabulary,
    train: Vec<ParallelDocument>,
    valid: Vec<ParallelDocument>,
    resources: RewardResources,
}

impl<'a> Session<'a> {
    fn open(config: &'a TrainConfig) -> Result<Self> {
        config.validate()?;
        let (train_src, train_tgt) = config.corpus_paths("train")?;
        let train = load_corpus_with(&train_src, &train_tgt, config.max_len)?;
        if train.is_empty() {
            return Err(Error::Config(format!("training corpus {} is empty", train_src.display())));
        }
        let valid = match (&config.valid_src, &config.valid_tgt) {
            (None, None) => {
                warn!("no validation corpus configured; validating on the training corpus");
                train.clone()
            }
            _ => {
                let (s, t) = config.corpus_paths("valid")?;
                load_corpus_with(&s, &t, config.max_len)?
            }
        };
        let src_vocab = build_vocab(train.iter().map(|d| &d.source), config.vocab_size, config.min_freq);
        let tgt_vocab = build_vocab(train.iter().map(|d| &d.target), config.vocab_size, config.min_freq);
        Ok(Session {
            config,
            src_vocab,
            tgt_vocab,
            train,
            valid,
            resources: load_resources(config)?,
        })
    }

    fn model_from(&self, init: Option<&Checkpoint>) -> Result<PolicyModel> {
        let Some(ckpt) = init else {
            let mc = ModelConfig {
                src_vocab: self.src_vocab.len(),
                tgt_vocab: self.tgt_vocab.len(),
                emb_dim: self.config.emb_dim,
                hidden_dim: self.config.hidden_dim,
                context_sents: self.config.context_sents,
            };
            return PolicyModel::init(mc, self.config.seed);
        };
        ckpt.check_vocab(&self.src_vocab, &self.tgt_vocab)?;
        let c = &ckpt.config;
        if (c.emb_dim, c.hidden_dim, c.context_sents)
            != (self.config.emb_dim, self.config.hidden_dim, self.config.context_sents)
        {
            warn!("model shape and context settings are taken from the initial checkpoint");
        }
        Ok(ckpt.model())
    }

    fn segments(&self) -> Vec<TrainSegment> {
        self.train
            .iter()
            .flat_map(|d| make_segments(d, self.config.max_batch_sentences))
            .map(|s| TrainSegment {
                encoded: s.encode(&self.src_vocab, &self.tgt_vocab),
                reference: s.targets().cloned().collect(),
            })
            .collect()
    }

    fn validate(&self, model: &PolicyModel, iteration: usize, lr: f64) -> Result<ValidationRecord> {
        let (report, ppl) = evaluate(
            model,
            &self.valid,
            &self.src_vocab,
            &self.tgt_vocab,
            &self.resources,
            self.config.valid_beam,
        )?;
        Ok(ValidationRecord {
            iteration,
            bleu_doc: report.bleu_doc,
            lc: report.lc,
            coh: report.coh,
            perplexity: ppl,
            learning_rate: lr,
        })
    }

    fn run(&self, mut model: PolicyModel, risk_prob: f64, rule: SelectionRule) -> Result<TrainOutcome> {
        let config = self.config;
        let dir = &config.ckpt_dir;
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        fs::write(dir.join("config.txt"), config.to_file_text()).map_err(|e| Error::io(dir, e))?;
        let log_path = dir.join(LOG_FILE);
        let mut log = fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;

        let segments = self.segments();
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
        shuffle_rng.set_stream(SHUFFLE_STREAM);
        let mut mix = MixSchedule::new(risk_prob, config.seed.wrapping_add(MIX_SEED_OFFSET))?;
        let mut adam = Adam::new(&model.params, config.learning_rate);
        let mut annealer = Annealer::new(
            config.learning_rate,
            config.annealing_steps,
            config.patience,
            config.min_improvement,
        );

        let mut records = Vec::new();
        let mut ckpt_paths = Vec::new();
        let mut batches = Vec::new();
        let mut epoch_ppl = Vec::new();
        let mut iteration = 0usize;

        let mut checkpoint_and_log = |model: &PolicyModel, iteration: usize, lr: f64| -> Result<f64> {
            let record = self.validate(model, iteration, lr)?;
            info!(
                "iter {iteration}: ppl {:.4} BLEU_doc {:.2} LC {:.2} COH {:.2} lr {lr:e}",
                record.perplexity,
                100.0 * record.bleu_doc,
                100.0 * record.lc,
                100.0 * record.coh
            );
            let line = serde_json::to_string(&record).map_err(|e| Error::Checkpoint(e.to_string()))?;
            writeln!(log, "{line}").map_err(|e| Error::io(&log_path, e))?;
            let path = dir.join(format!("iter_{iteration:07}.json"));
            Checkpoint::new(model, &self.src_vocab, &self.tgt_vocab).save(&path)?;
            ckpt_paths.push(path);
            records.push(record);
            Ok(record.perplexity)
        };

        let ppl = checkpoint_and_log(&model, 0, annealer.learning_rate())?;
        annealer.observe(ppl);

        let mut grads = model.params.zeros_like();
        let mut stop = false;
        for epoch in 0..config.epochs {
            let mut order: Vec<usize> = (0..segments.len()).collect();
            order.shuffle(&mut shuffle_rng);
            let packed = pack(&order, &segments, config.max_batch_sentences);
            for (b, batch) in packed.iter().enumerate() {
                let objective = mix.next_objective();
                grads.fill(0.0);
                let loss = match objective {
                    Objective::Nll => {
                        let n: usize = batch.iter().map(|&s| segments[s].encoded.len()).sum();
                        let scale = 1.0 / n as f64;
                        let mut loss = 0.0;
                        for &s in batch {
                            let seg = &segments[s].encoded;
                            for i in 0..seg.len() {
                                loss += scale
                                    * model.accumulate_nll(
                                        &seg.sources[i],
                                        &seg.targets[i],
                                        seg.context(i),
                                        Some((&mut grads, scale)),
                                    );
                            }
                        }
                        loss
                    }
                    // Rewards never mix documents: the batch loss is the sum
                    // of the per-segment risks.
                    Objective::Risk => {
                        let mut loss = 0.0;
                        for &s in batch {
                            let seg = &segments[s];
                            let result = risk_loss(
                                &model,
                                &seg.encoded,
                                Some(&seg.reference),
                                &self.tgt_vocab,
                                &config.rewards,
                                config.beam,
                                &self.resources,
                                Some(&mut grads),
                            )?;
                            loss += result.loss;
                        }
                        loss
                    }
                };
                clip_grad_norm(&mut grads, config.clip_norm);
                adam.step(&mut model.params, &grads);
                iteration += 1;
                batches.push(BatchLog { objective, loss });

                let end_of_epoch = b + 1 == packed.len();
                let due = if config.validate_every == 0 {
                    end_of_epoch
                } else {
                    iteration.is_multiple_of(config.validate_every)
                };
                if due {
                    let ppl = checkpoint_and_log(&model, iteration, annealer.learning_rate())?;
                    match annealer.observe(ppl) {
                        AnnealEvent::Halved => {
                            adam.lr = annealer.learning_rate();
                            info!("perplexity plateau: learning rate halved to {:e}", adam.lr);
                        }
                        AnnealEvent::Stop => {
                            info!("perplexity plateau after {} halvings: stopping", annealer.halvings());
                            stop = true;
                        }
                        AnnealEvent::Improved | AnnealEvent::Waiting => {}
                    }
                }
                if stop {
                    break;
                }
            }
            let train_ppl = perplexity(&model, &self.train, &self.src_vocab, &self.tgt_vocab);
            info!("epoch {}: training perplexity {train_ppl:.4}", epoch + 1);
            epoch_ppl.push(train_ppl);
            if stop {
                break;
            }
        }

        // The iteration-0 record describes the starting point; it competes
        // only when nothing else was validated.
        let candidates = if records.len() > 1 { &records[1..] } else { &records[..] };
        let offset = records.len() - candidates.len();
        let selected = offset + rule.select(candidates).expect("at least one record");
        let checkpoint = Checkpoint::load(&ckpt_paths[selected])?;
        let checkpoint_path = dir.join(BEST_FILE);
        checkpoint.save(&checkpoint_path)?;
        write_curves_csv(&records, &dir.join(CURVES_FILE))?;
        info!(
            "selected iteration {} of {} validations",
            records[selected].iteration,
            records.len()
        );
        Ok(TrainOutcome {
            checkpoint,
            checkpoint_path,
            records,
            selected,
            batches,
            epoch_train_perplexity: epoch_ppl,
            final_learning_rate: adam.lr,
            halvings: annealer.halvings(),
        })
    }
}

/// Groups shuffled segments into batches of at most `max_sents` sentences.
/// A segment is never split across batches.
fn pack(order: &[usize], segments: &[TrainSegment], max_sents: usize) -> Vec<Vec<usize>> {
    let mut batches = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut size = 0;
    for &s in order {
        let n = segments[s].encoded.len();
        if !current.is_empty() && size + n > max_sents {
            batches.push(std::mem::take(&mut current));
            size = 0;
        }
        current.push(s);
        size += n;
    }
    if !current.is_empty() {
        batches.push(current);
    }
    batches
}

/// NLL training from scratch, selected by validation perplexity.
pub fn pretrain_nll(config: &TrainConfig) -> Result<TrainOutcome> {
    pretrain_nll_from(config, None)
}

/// NLL training, optionally continuing from `init`.
pub fn pretrain_nll_from(config: &TrainConfig, init: Option<&Checkpoint>) -> Result<TrainOutcome> {
    let session = Session::open(config)?;
    let model = session.model_from(init)?;
    session.run(model, 0.0, SelectionRule::Perplexity)
}

/// Mixed Risk/NLL fine-tuning from `init`, selected by majority of the
/// document metrics.
pub fn finetune_risk(config: &TrainConfig, init: &Checkpoint) -> Result<TrainOutcome> {
    let session = Session::open(config)?;
    let model = session.model_from(Some(init))?;
    session.run(model, config.risk_prob, SelectionRule::MajorityMetrics)
}

