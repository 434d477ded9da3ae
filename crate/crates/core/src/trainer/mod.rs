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

//! Training loops, evaluation and reporting behind the command-line tool.

mod config;
pub mod curves;
pub mod eval;
pub mod schedule;
mod train;

pub use config::TrainConfig;
pub use curves::{read_training_log, reward_curves};
pub use eval::{load_resources, score, translate, ScoreReport};
pub use schedule::{select_majority, select_perplexity, Annealer, AnnealEvent, SelectionRule, ValidationRecord};
pub use train::{
    finetune_risk, pretrain_nll, pretrain_nll_from, BatchLog, TrainOutcome, BEST_FILE, CURVES_FILE, LOG_FILE,
};
