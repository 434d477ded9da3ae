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

//! Document-level translation training with discourse rewards.
//!
//! The crate bundles a small seedable encoder-decoder policy, three
//! document metrics (lexical cohesion, topic coherence, BLEU), the
//! expected-risk objective that turns those metrics into training signal,
//! and the training/evaluation loops exposed by the `docrisk` binary.

pub mod bleu;
pub mod coherence;
pub mod corpus;
mod error;
pub mod lexcohesion;
pub mod policy;
pub mod risk;
pub mod synthetic;
pub mod trainer;

pub use error::{Error, Result};
