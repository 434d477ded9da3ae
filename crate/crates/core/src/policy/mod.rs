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

//! The translation policy: model, decoding, checkpoints and optimiser.

mod checkpoint;
mod model;
mod optim;
mod search;
pub mod tensor;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use model::{
    encoder_input, max_decode_len, Encoded, Gradients, ModelConfig, Params, PolicyModel, Step, Trace,
};
pub use optim::{clip_grad_norm, Adam};
pub use search::{beam_search, greedy_decode, Candidate, CandidateSet};
