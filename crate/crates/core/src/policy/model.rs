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

//! Single-layer recurrent encoder-decoder with dot-product attention.
//!
//! Encoder: `h_i = tanh(W_e x_i + U_e h_{i-1} + b_e)`.
//! Decoder: `s_j = tanh(W_d y_{j-1} + U_d s_{j-1} + b_d)` starting from
//! `s_init = tanh(W_0 h_last + b_0)`, attention `a = softmax(H s_j)`,
//! `c_j = H^T a`, `o_j = tanh(W_c [s_j; c_j] + b_c)` and
//! `log p(. | ...) = log_softmax(W_v o_j + b_v)`.
//!
//! Gradients are derived by hand; see the finite-difference tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{axpy, dot, log_softmax, softmax, Matrix};
use crate::corpus::{TokenId, BOS, EOS, PAD};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub src_vocab: usize,
    pub tgt_vocab: usize,
    pub emb_dim: usize,
    pub hidden_dim: usize,
    /// Number of preceding source sentences prepended to the input (0 or 1).
    pub context_sents: usize,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.emb_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::Config("embedding and hidden dims must be at least 1".into()));
        }
        if self.src_vocab <= EOS as usize || self.tgt_vocab <= EOS as usize {
            return Err(Error::Config("vocabularies must contain the reserved tokens".into()));
        }
        if self.context_sents > 1 {
            return Err(Error::Config("context_sents must be 0 or 1".into()));
        }
        Ok(())
    }
}

/// Longest hypothesis the decoder produces for a source of `src_len` tokens.
pub fn max_decode_len(src_len: usize) -> usize {
    2 * src_len + 5
}

macro_rules! param_blocks {
    ($($name:ident),* $(,)?) => {
        /// Every trainable tensor of the model. Also used, zero-initialised,
        /// as the gradient accumulator.
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        pub struct Params {
            $(pub $name: Matrix,)*
        }

        impl Params {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($name)),*];

            pub fn blocks(&self) -> Vec<(&'static str, &Matrix)> {
                vec![$((stringify!($name), &self.$name)),*]
            }

            pub fn blocks_mut(&mut self) -> Vec<(&'static str, &mut Matrix)> {
                vec![$((stringify!($name), &mut self.$name)),*]
            }
        }
    };
}

param_blocks!(
    src_emb, tgt_emb, enc_w, enc_u, enc_b, init_w, init_b, dec_w, dec_u, dec_b, comb_w, comb_b,
    out_w, out_b,
);

impl Params {
    pub fn zeros(config: &ModelConfig) -> Self {
        let (e, h) = (config.emb_dim, config.hidden_dim);
        Params {
            src_emb: Matrix::zeros(config.src_vocab, e),
            tgt_emb: Matrix::zeros(config.tgt_vocab, e),
            enc_w: Matrix::zeros(h, e),
            enc_u: Matrix::zeros(h, h),
            enc_b: Matrix::zeros(h, 1),
            init_w: Matrix::zeros(h, h),
            init_b: Matrix::zeros(h, 1),
            dec_w: Matrix::zeros(h, e),
            dec_u: Matrix::zeros(h, h),
            dec_b: Matrix::zeros(h, 1),
            comb_w: Matrix::zeros(h, 2 * h),
            comb_b: Matrix::zeros(h, 1),
            out_w: Matrix::zeros(config.tgt_vocab, h),
            out_b: Matrix::zeros(config.tgt_vocab, 1),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut p = self.clone();
        p.fill(0.0);
        p
    }

    pub fn fill(&mut self, value: f64) {
        for (_, m) in self.blocks_mut() {
            m.fill(value);
        }
    }

    pub fn num_values(&self) -> usize {
        self.blocks().iter().map(|(_, m)| m.len()).sum()
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &Params) {
        for ((_, a), (_, b)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            axpy(alpha, &b.data, &mut a.data);
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for (_, m) in self.blocks_mut() {
            m.data.iter_mut().for_each(|x| *x *= alpha);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.blocks()
            .iter()
            .flat_map(|(_, m)| m.data.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.blocks()
            .iter()
            .all(|(_, m)| m.data.iter().all(|x| x.is_finite()))
    }
}

/// Per-parameter gradient buffers, shaped like [`Params`].
pub type Gradients = Params;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyModel {
    pub config: ModelConfig,
    pub params: Params,
}

/// Encoder output for one source input.
#[derive(Clone, Debug)]
pub struct Encoded {
    inputs: Vec<TokenId>,
    states: Vec<Vec<f64>>,
    init_state: Vec<f64>,
}

impl Encoded {
    pub fn init_state(&self) -> &[f64] {
        &self.init_state
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Everything one decoder step needs for the backward pass.
#[derive(Clone, Debug)]
pub struct Step {
    input: TokenId,
    prev_state: Vec<f64>,
    pub state: Vec<f64>,
    attention: Vec<f64>,
    context: Vec<f64>,
    combined: Vec<f64>,
    probs: Vec<f64>,
    pub logprobs: Vec<f64>,
}

/// A teacher-forced pass over one target sequence.
#[derive(Clone, Debug)]
pub struct Trace {
    encoded: Encoded,
    steps: Vec<Step>,
    tokens: Vec<TokenId>,
}

impl Trace {
    /// `log p(token_j | tokens_<j, source)` for every position.
    pub fn logprobs(&self) -> Vec<f64> {
        self.steps
            .iter()
            .zip(&self.tokens)
            .map(|(s, &t)| s.logprobs[t as usize])
            .collect()
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }
}

fn tanh_in_place(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.tanh());
}

/// `d * (1 - y^2)` for `y = tanh(.)`.
fn tanh_backward(grad: &[f64], y: &[f64]) -> Vec<f64> {
    grad.iter().zip(y).map(|(g, y)| g * (1.0 - y * y)).collect()
}

/// Encoder input: optional context, an EOS boundary, the source, and a
/// closing EOS.
pub fn encoder_input(src: &[TokenId], context: Option<&[TokenId]>) -> Vec<TokenId> {
    let mut input = Vec::with_capacity(src.len() + context.map_or(0, |c| c.len() + 1) + 1);
    if let Some(ctx) = context {
        input.extend_from_slice(ctx);
        input.push(EOS);
    }
    input.extend_from_slice(src);
    input.push(EOS);
    input
}

impl PolicyModel {
    /// Glorot-uniform weights and zero biases from a seeded ChaCha stream.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Params::zeros(&config);
        for (name, m) in params.blocks_mut() {
            if name.ends_with("_b") {
                continue;
            }
            let limit = (6.0 / (m.rows + m.cols) as f64).sqrt();
            m.data
                .iter_mut()
                .for_each(|x| *x = rng.gen_range(-limit..limit));
        }
        Ok(PolicyModel { config, params })
    }

    pub fn hidden_dim(&self) -> usize {
        self.config.hidden_dim
    }

    /// Drops the context when the model is configured without one.
    fn effective_context<'a>(&self, context: Option<&'a [TokenId]>) -> Option<&'a [TokenId]> {
        if self.config.context_sents == 0 {
            None
        } else {
            context
        }
    }

    fn clamp_src(&self, id: TokenId) -> usize {
        (id as usize).min(self.config.src_vocab - 1)
    }

    fn clamp_tgt(&self, id: TokenId) -> usize {
        (id as usize).min(self.config.tgt_vocab - 1)
    }

    pub fn encode(&self, src: &[TokenId], context: Option<&[TokenId]>) -> Encoded {
        let p = &self.params;
        let h = self.hidden_dim();
        let inputs = encoder_input(src, self.effective_context(context));
        let mut states: Vec<Vec<f64>> = Vec::with_capacity(inputs.len());
        for &x in &inputs {
            let mut pre = p.enc_b.data.clone();
            p.enc_w.matvec_add(p.src_emb.row(self.clamp_src(x)), &mut pre);
            if let Some(prev) = states.last() {
                p.enc_u.matvec_add(prev, &mut pre);
            }
            tanh_in_place(&mut pre);
            states.push(pre);
        }
        let mut init_state = p.init_b.data.clone();
        let last = states.last().cloned().unwrap_or_else(|| vec![0.0; h]);
        p.init_w.matvec_add(&last, &mut init_state);
        tanh_in_place(&mut init_state);
        Encoded {
            inputs,
            states,
            init_state,
        }
    }

    /// One decoder step from `prev_state` after emitting `input`.
    pub fn step(&self, encoded: &Encoded, input: TokenId, prev_state: &[f64]) -> Step {
        let p = &self.params;
        let h = self.hidden_dim();

        let mut state = p.dec_b.data.clone();
        p.dec_w.matvec_add(p.tgt_emb.row(self.clamp_tgt(input)), &mut state);
        p.dec_u.matvec_add(prev_state, &mut state);
        tanh_in_place(&mut state);

        let scores: Vec<f64> = encoded.states.iter().map(|hs| dot(hs, &state)).collect();
        let attention = softmax(&scores);
        let mut context = vec![0.0; h];
        for (a, hs) in attention.iter().zip(&encoded.states) {
            axpy(*a, hs, &mut context);
        }

        let mut combined = p.comb_b.data.clone();
        p.comb_w.matvec_add_cols(&state, 0, &mut combined);
        p.comb_w.matvec_add_cols(&context, h, &mut combined);
        tanh_in_place(&mut combined);

        let mut logits = p.out_b.data.clone();
        p.out_w.matvec_add(&combined, &mut logits);
        let (logprobs, probs) = log_softmax(&logits);

        Step {
            input,
            prev_state: prev_state.to_vec(),
            state,
            attention,
            context,
            combined,
            probs,
            logprobs,
        }
    }

    /// Teacher-forced pass over `tokens` (which should end in EOS when the
    /// sequence is complete).
    pub fn forward(&self, src: &[TokenId], context: Option<&[TokenId]>, tokens: &[TokenId]) -> Trace {
        let encoded = self.encode(src, context);
        let mut steps = Vec::with_capacity(tokens.len());
        let mut prev_token = BOS;
        let mut state = encoded.init_state.clone();
        for &t in tokens {
            let step = self.step(&encoded, prev_token, &state);
            state = step.state.clone();
            steps.push(step);
            prev_token = t;
        }
        Trace {
            encoded,
            steps,
            tokens: tokens.to_vec(),
        }
    }

    /// Per-step log-probabilities of `tokens` under the current parameters.
    pub fn sequence_logprobs(
        &self,
        src: &[TokenId],
        tokens: &[TokenId],
        context: Option<&[TokenId]>,
    ) -> Vec<f64> {
        self.forward(src, context, tokens).logprobs()
    }

    /// Accumulates into `grads` the gradient of `sum_j upstream[j] * logprob_j`.
    pub fn backward(&self, trace: &Trace, upstream: &[f64], grads: &mut Gradients) {
        assert_eq!(upstream.len(), trace.steps.len());
        let p = &self.params;
        let h = self.hidden_dim();
        let enc = &trace.encoded;
        let n = enc.states.len();

        let mut d_states = vec![vec![0.0; h]; n];
        let mut d_next = vec![0.0; h];

        for (j, step) in trace.steps.iter().enumerate().rev() {
            let g = upstream[j];
            let target = self.clamp_tgt(trace.tokens[j]);

            // Output layer: d logp_t / d z = onehot(t) - p.
            let mut d_combined = vec![0.0; h];
            if g != 0.0 {
                let dz: Vec<f64> = step
                    .probs
                    .iter()
                    .enumerate()
                    .map(|(k, pk)| g * (if k == target { 1.0 } else { 0.0 } - pk))
                    .collect();
                grads.out_w.outer_add(&dz, &step.combined);
                grads.out_b.add_vec(&dz);
                p.out_w.matvec_t_add(&dz, &mut d_combined);
            }

            let d_comb_pre = tanh_backward(&d_combined, &step.combined);
            grads.comb_w.outer_add_cols(&d_comb_pre, &step.state, 0);
            grads.comb_w.outer_add_cols(&d_comb_pre, &step.context, h);
            grads.comb_b.add_vec(&d_comb_pre);

            let mut d_state = std::mem::take(&mut d_next);
            p.comb_w.matvec_t_add_cols(&d_comb_pre, 0, &mut d_state);
            let mut d_context = vec![0.0; h];
            p.comb_w.matvec_t_add_cols(&d_comb_pre, h, &mut d_context);

            // Attention: c = sum_i a_i h_i with a = softmax(h_i . s).
            let d_attn: Vec<f64> = enc.states.iter().map(|hs| dot(&d_context, hs)).collect();
            let mean = dot(&step.attention, &d_attn);
            for (i, hs) in enc.states.iter().enumerate() {
                let a = step.attention[i];
                let d_score = a * (d_attn[i] - mean);
                axpy(a, &d_context, &mut d_states[i]);
                axpy(d_score, &step.state, &mut d_states[i]);
                axpy(d_score, hs, &mut d_state);
            }

            let d_pre = tanh_backward(&d_state, &step.state);
            let input = self.clamp_tgt(step.input);
            grads.dec_w.outer_add(&d_pre, p.tgt_emb.row(input));
            p.dec_w.matvec_t_add(&d_pre, grads.tgt_emb.row_mut(input));
            grads.dec_u.outer_add(&d_pre, &step.prev_state);
            grads.dec_b.add_vec(&d_pre);
            d_next = vec![0.0; h];
            p.dec_u.matvec_t_add(&d_pre, &mut d_next);
        }

        if n == 0 {
            return;
        }
        let d_init = tanh_backward(&d_next, &enc.init_state);
        grads.init_w.outer_add(&d_init, &enc.states[n - 1]);
        grads.init_b.add_vec(&d_init);
        p.init_w.matvec_t_add(&d_init, &mut d_states[n - 1]);

        let mut d_carry = vec![0.0; h];
        for i in (0..n).rev() {
            let mut d_h = std::mem::take(&mut d_states[i]);
            axpy(1.0, &d_carry, &mut d_h);
            let d_pre = tanh_backward(&d_h, &enc.states[i]);
            let x = self.clamp_src(enc.inputs[i]);
            grads.enc_w.outer_add(&d_pre, p.src_emb.row(x));
            p.enc_w.matvec_t_add(&d_pre, grads.src_emb.row_mut(x));
            if i > 0 {
                grads.enc_u.outer_add(&d_pre, &enc.states[i - 1]);
            }
            grads.enc_b.add_vec(&d_pre);
            d_carry = vec![0.0; h];
            p.enc_u.matvec_t_add(&d_pre, &mut d_carry);
        }
    }

    /// Token-averaged negative log-likelihood of `tgt` followed by EOS.
    /// When `grads` is given, `scale * d loss / d theta` is added to it.
    pub fn accumulate_nll(
        &self,
        src: &[TokenId],
        tgt: &[TokenId],
        context: Option<&[TokenId]>,
        grads: Option<(&mut Gradients, f64)>,
    ) -> f64 {
        let mut tokens = tgt.to_vec();
        tokens.push(EOS);
        let trace = self.forward(src, context, &tokens);
        let m = tokens.len() as f64;
        let loss = -trace.logprobs().iter().sum::<f64>() / m;
        if let Some((grads, scale)) = grads {
            let upstream = vec![-scale / m; tokens.len()];
            self.backward(&trace, &upstream, grads);
        }
        loss
    }

    /// NLL loss and its gradient for one sentence pair.
    pub fn nll_loss(
        &self,
        src: &[TokenId],
        tgt: &[TokenId],
        context: Option<&[TokenId]>,
    ) -> (f64, Gradients) {
        let mut grads = self.params.zeros_like();
        let loss = self.accumulate_nll(src, tgt, context, Some((&mut grads, 1.0)));
        (loss, grads)
    }

    /// Ids the decoder may emit: everything except PAD and BOS.
    pub fn emittable(&self) -> impl Iterator<Item = TokenId> {
        (0..self.config.tgt_vocab as TokenId).filter(|&t| t != PAD && t != BOS)
    }
}
