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

use super::model::{Gradients, Params};

/// Adam with bias correction. `lr` is mutable so annealing can halve it.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    first: Params,
    second: Params,
    t: u32,
}

impl Adam {
    pub fn new(params: &Params, lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.998,
            eps: 1e-9,
            first: params.zeros_like(),
            second: params.zeros_like(),
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut Params, grads: &Gradients) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let blocks = params
            .blocks_mut()
            .into_iter()
            .zip(grads.blocks())
            .zip(self.first.blocks_mut())
            .zip(self.second.blocks_mut());
        for ((((_, p), (_, g)), (_, m)), (_, v)) in blocks {
            for i in 0..p.data.len() {
                let gi = g.data[i];
                m.data[i] = self.beta1 * m.data[i] + (1.0 - self.beta1) * gi;
                v.data[i] = self.beta2 * v.data[i] + (1.0 - self.beta2) * gi * gi;
                let m_hat = m.data[i] / bc1;
                let v_hat = v.data[i] / bc2;
                p.data[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

/// Rescales `grads` so its global L2 norm is at most `max_norm`.
pub fn clip_grad_norm(grads: &mut Gradients, max_norm: f64) -> f64 {
    let norm = grads.l2_norm();
    if norm > max_norm && norm > 0.0 {
        grads.scale(max_norm / norm);
    }
    norm
}
