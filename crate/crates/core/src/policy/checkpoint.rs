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

use serde::{Deserialize, Serialize};

use super::model::{ModelConfig, Params, PolicyModel};
use crate::corpus::Vocabulary;
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Serialized model: config, both vocabularies with their fingerprints,
/// and every parameter value. Stored as JSON; floats use shortest
/// round-trip formatting so save/load/save is byte-identical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: ModelConfig,
    pub src_vocab_hash: String,
    pub tgt_vocab_hash: String,
    pub src_vocab: Vocabulary,
    pub tgt_vocab: Vocabulary,
    pub params: Params,
}

impl Checkpoint {
    pub fn new(model: &PolicyModel, src_vocab: &Vocabulary, tgt_vocab: &Vocabulary) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config: model.config.clone(),
            src_vocab_hash: src_vocab.fingerprint(),
            tgt_vocab_hash: tgt_vocab.fingerprint(),
            src_vocab: src_vocab.clone(),
            tgt_vocab: tgt_vocab.clone(),
            params: model.params.clone(),
        }
    }

    pub fn model(&self) -> PolicyModel {
        PolicyModel {
            config: self.config.clone(),
            params: self.params.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        if !self.params.all_finite() {
            return Err(Error::Checkpoint("refusing to save non-finite parameters".into()));
        }
        serde_json::to_string(self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        ckpt.validate()?;
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint version {}",
                self.version
            )));
        }
        if self.src_vocab.fingerprint() != self.src_vocab_hash
            || self.tgt_vocab.fingerprint() != self.tgt_vocab_hash
        {
            return Err(Error::Checkpoint("vocabulary fingerprint mismatch".into()));
        }
        if self.src_vocab.len() != self.config.src_vocab
            || self.tgt_vocab.len() != self.config.tgt_vocab
        {
            return Err(Error::Checkpoint("vocabulary size does not match config".into()));
        }
        self.config.validate()?;
        let expected = Params::zeros(&self.config);
        for ((name, a), (_, b)) in self.params.blocks().into_iter().zip(expected.blocks()) {
            if !a.same_shape(b) || a.data.len() != a.rows * a.cols {
                return Err(Error::Checkpoint(format!("parameter `{name}` has the wrong shape")));
            }
        }
        Ok(())
    }

    /// Errors unless both vocabularies match this checkpoint's.
    pub fn check_vocab(&self, src: &Vocabulary, tgt: &Vocabulary) -> Result<()> {
        if src.fingerprint() != self.src_vocab_hash {
            return Err(Error::VocabMismatch("source vocabulary differs from checkpoint".into()));
        }
        if tgt.fingerprint() != self.tgt_vocab_hash {
            return Err(Error::VocabMismatch("target vocabulary differs from checkpoint".into()));
        }
        Ok(())
    }
}
