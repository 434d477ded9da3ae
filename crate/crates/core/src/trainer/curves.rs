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
use std::path::Path;

use crate::{Error, Result};

use super::schedule::ValidationRecord;

pub const CSV_HEADER: &str = "iteration,BLEU_doc,LC,COH,perplexity,learning_rate";

/// Reads the JSON-lines validation log written during training.
pub fn read_training_log(path: &Path) -> Result<Vec<ValidationRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// One CSV row per validation pass; metric columns are fractions.
pub fn curves_csv(records: &[ValidationRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iteration, r.bleu_doc, r.lc, r.coh, r.perplexity, r.learning_rate
        );
    }
    out
}

pub fn write_curves_csv(records: &[ValidationRecord], out: &Path) -> Result<()> {
    fs::write(out, curves_csv(records)).map_err(|e| Error::io(out, e))
}

/// Converts a training log into the reward-curve CSV. Returns the row count.
pub fn reward_curves(log: &Path, out: &Path) -> Result<usize> {
    let records = read_training_log(log)?;
    write_curves_csv(&records, out)?;
    Ok(records.len())
}
