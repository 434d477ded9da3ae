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

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::lexcohesion::LcDenominator;
use crate::risk::RewardSpec;
use crate::{Error, Result};

/// Settings shared by every training and evaluation command.
///
/// Loadable from a flat `key = value` file; later [`TrainConfig::set`]
/// calls override earlier ones, which is how command-line flags win over
/// file values.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub max_batch_sentences: usize,
    pub beam: usize,
    pub risk_prob: f64,
    pub rewards: RewardSpec,
    pub context_sents: usize,
    pub annealing_steps: usize,
    /// Consecutive validations without improvement before a halving.
    pub patience: usize,
    /// Minimum relative perplexity decrease that counts as improvement.
    pub min_improvement: f64,
    /// Batches between validations; 0 validates once per epoch.
    pub validate_every: usize,
    pub clip_norm: f64,
    /// Beam used when decoding the validation set.
    pub valid_beam: usize,
    pub emb_dim: usize,
    pub hidden_dim: usize,
    pub vocab_size: usize,
    pub min_freq: usize,
    pub max_len: usize,
    pub lc_denominator: LcDenominator,
    pub train_src: Option<PathBuf>,
    pub train_tgt: Option<PathBuf>,
    pub valid_src: Option<PathBuf>,
    pub valid_tgt: Option<PathBuf>,
    pub relations: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub ckpt_dir: PathBuf,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 1,
            epochs: 10,
            learning_rate: 1e-3,
            max_batch_sentences: 15,
            beam: 2,
            risk_prob: 0.5,
            rewards: "bleu_doc+lc_doc+coh_doc".parse().expect("valid reward spec"),
            context_sents: 1,
            annealing_steps: 5,
            patience: 2,
            min_improvement: 1e-3,
            validate_every: 0,
            clip_norm: 5.0,
            valid_beam: 1,
            emb_dim: 32,
            hidden_dim: 64,
            vocab_size: 30_000,
            min_freq: 1,
            max_len: crate::corpus::DEFAULT_MAX_LEN,
            lc_denominator: LcDenominator::Content,
            train_src: None,
            train_tgt: None,
            valid_src: None,
            valid_tgt: None,
            relations: None,
            topics: None,
            stoplist: None,
            ckpt_dir: PathBuf::from("checkpoints"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

impl TrainConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut config = TrainConfig::default();
        config.apply_file(path)?;
        Ok(config)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Sets one field by name. Dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--").replace('-', "_");
        let path = || Some(PathBuf::from(value));
        match key.as_str() {
            "seed" => self.seed = parse(&key, value)?,
            "epochs" => self.epochs = parse(&key, value)?,
            "lr" | "learning_rate" => self.learning_rate = parse(&key, value)?,
            "batch_sents" | "max_batch_sentences" => self.max_batch_sentences = parse(&key, value)?,
            "beam" => self.beam = parse(&key, value)?,
            "risk_prob" => self.risk_prob = parse(&key, value)?,
            "rewards" => self.rewards = value.parse()?,
            "context_sents" => self.context_sents = parse(&key, value)?,
            "anneal_steps" | "annealing_steps" => self.annealing_steps = parse(&key, value)?,
            "patience" => self.patience = parse(&key, value)?,
            "min_improvement" => self.min_improvement = parse(&key, value)?,
            "validate_every" => self.validate_every = parse(&key, value)?,
            "clip_norm" => self.clip_norm = parse(&key, value)?,
            "valid_beam" => self.valid_beam = parse(&key, value)?,
            "emb_dim" => self.emb_dim = parse(&key, value)?,
            "hidden_dim" => self.hidden_dim = parse(&key, value)?,
            "vocab_size" => self.vocab_size = parse(&key, value)?,
            "min_freq" => self.min_freq = parse(&key, value)?,
            "max_len" => self.max_len = parse(&key, value)?,
            "lc_denominator" => self.lc_denominator = value.parse()?,
            "train_src" => self.train_src = path(),
            "train_tgt" => self.train_tgt = path(),
            "valid_src" => self.valid_src = path(),
            "valid_tgt" => self.valid_tgt = path(),
            "relations" => self.relations = path(),
            "topics" => self.topics = path(),
            "stoplist" => self.stoplist = path(),
            "ckpt_dir" => self.ckpt_dir = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("epochs", self.epochs),
            ("batch_sents", self.max_batch_sentences),
            ("beam", self.beam),
            ("patience", self.patience),
            ("valid_beam", self.valid_beam),
            ("emb_dim", self.emb_dim),
            ("hidden_dim", self.hidden_dim),
            ("min_freq", self.min_freq),
            ("max_len", self.max_len),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(Error::Config(format!("`{name}` must be at least 1")));
            }
        }
        if self.vocab_size <= crate::corpus::RESERVED.len() {
            return Err(Error::Config("`vocab_size` leaves no room for words".into()));
        }
        if !(0.0..=1.0).contains(&self.risk_prob) {
            return Err(Error::Config(format!("`risk_prob` {} outside [0, 1]", self.risk_prob)));
        }
        if self.context_sents > 1 {
            return Err(Error::Config("`context_sents` must be 0 or 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("`lr` must be positive".into()));
        }
        if !(self.clip_norm.is_finite() && self.clip_norm > 0.0) {
            return Err(Error::Config("`clip_norm` must be positive".into()));
        }
        if !(self.min_improvement.is_finite() && self.min_improvement >= 0.0) {
            return Err(Error::Config("`min_improvement` must be non-negative".into()));
        }
        Ok(())
    }

    /// Both sides of a corpus pair, or a configuration error naming the
    /// missing key or file.
    pub(crate) fn corpus_paths(&self, split: &str) -> Result<(PathBuf, PathBuf)> {
        let (src, tgt) = match split {
            "train" => (&self.train_src, &self.train_tgt),
            _ => (&self.valid_src, &self.valid_tgt),
        };
        let check = |p: &Option<PathBuf>, key: String| -> Result<PathBuf> {
            let p = p.clone().ok_or_else(|| Error::Config(format!("`{key}` is not set")))?;
            if !p.is_file() {
                return Err(Error::Config(format!("`{key}` file {} does not exist", p.display())));
            }
            Ok(p)
        };
        Ok((check(src, format!("{split}_src"))?, check(tgt, format!("{split}_tgt"))?))
    }

    /// `key = value` form readable by [`TrainConfig::from_file`].
    pub fn to_file_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("seed", self.seed.to_string());
        kv("epochs", self.epochs.to_string());
        kv("lr", self.learning_rate.to_string());
        kv("batch_sents", self.max_batch_sentences.to_string());
        kv("beam", self.beam.to_string());
        kv("risk_prob", self.risk_prob.to_string());
        kv("rewards", self.rewards.to_string());
        kv("context_sents", self.context_sents.to_string());
        kv("anneal_steps", self.annealing_steps.to_string());
        kv("patience", self.patience.to_string());
        kv("min_improvement", self.min_improvement.to_string());
        kv("validate_every", self.validate_every.to_string());
        kv("clip_norm", self.clip_norm.to_string());
        kv("valid_beam", self.valid_beam.to_string());
        kv("emb_dim", self.emb_dim.to_string());
        kv("hidden_dim", self.hidden_dim.to_string());
        kv("vocab_size", self.vocab_size.to_string());
        kv("min_freq", self.min_freq.to_string());
        kv("max_len", self.max_len.to_string());
        kv("lc_denominator", self.lc_denominator.to_string());
        let paths = [
            ("train_src", &self.train_src),
            ("train_tgt", &self.train_tgt),
            ("valid_src", &self.valid_src),
            ("valid_tgt", &self.valid_tgt),
            ("relations", &self.relations),
            ("topics", &self.topics),
            ("stoplist", &self.stoplist),
        ];
        for (k, p) in paths {
            if let Some(p) = p {
                kv(k, p.display().to_string());
            }
        }
        kv("ckpt_dir", self.ckpt_dir.display().to_string());
        out
    }
}
