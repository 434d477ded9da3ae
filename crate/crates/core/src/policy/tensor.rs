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

use serde::{Deserialize, Serialize};

/// Dense row-major matrix. Bias vectors are stored as `n x 1` matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn same_shape(&self, other: &Matrix) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    /// `out += A[:, offset..offset + x.len()] x`
    pub fn matvec_add_cols(&self, x: &[f64], offset: usize, out: &mut [f64]) {
        debug_assert!(offset + x.len() <= self.cols && out.len() == self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.row(r)[offset..offset + x.len()];
            *o += dot(row, x);
        }
    }

    /// `out += A x`
    pub fn matvec_add(&self, x: &[f64], out: &mut [f64]) {
        self.matvec_add_cols(x, 0, out)
    }

    /// `out += A[:, offset..offset + out.len()]^T y`
    pub fn matvec_t_add_cols(&self, y: &[f64], offset: usize, out: &mut [f64]) {
        debug_assert!(y.len() == self.rows && offset + out.len() <= self.cols);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let row = &self.row(r)[offset..offset + out.len()];
            axpy(yr, row, out);
        }
    }

    /// `out += A^T y`
    pub fn matvec_t_add(&self, y: &[f64], out: &mut [f64]) {
        self.matvec_t_add_cols(y, 0, out)
    }

    /// `A[:, offset..offset + x.len()] += y x^T`
    pub fn outer_add_cols(&mut self, y: &[f64], x: &[f64], offset: usize) {
        debug_assert!(y.len() == self.rows && offset + x.len() <= self.cols);
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let row = &mut self.row_mut(r)[offset..offset + x.len()];
            axpy(yr, x, row);
        }
    }

    /// `A += y x^T`
    pub fn outer_add(&mut self, y: &[f64], x: &[f64]) {
        self.outer_add_cols(y, x, 0)
    }

    /// Adds `v` to a bias stored as an `n x 1` matrix.
    pub fn add_vec(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.data.len());
        axpy(1.0, v, &mut self.data);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= sum);
    out
}

/// Returns `(log_softmax(z), softmax(z))`.
pub fn log_softmax(z: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z.iter().map(|x| (x - max).exp()).sum();
    let log_norm = max + sum.ln();
    let logp: Vec<f64> = z.iter().map(|x| x - log_norm).collect();
    let p = logp.iter().map(|l| l.exp()).collect();
    (logp, p)
}
