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

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use docrisk::lexcohesion::{LcConfig, LcDenominator};
use docrisk::policy::Checkpoint;
use docrisk::synthetic::{gen_synthetic, SyntheticKind, SyntheticSizes};
use docrisk::trainer::{self, eval, TrainConfig, TrainOutcome};

#[derive(Parser)]
#[command(name = "docrisk", version, about = "Document-level translation training with discourse rewards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a translation model with negative log-likelihood.
    Pretrain {
        #[command(flatten)]
        train: TrainArgs,
        /// Continue from this checkpoint instead of a fresh model.
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Fine-tune a checkpoint with the mixed Risk/NLL objective.
    FinetuneRisk {
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        init: PathBuf,
    },
    /// Translate a document-separated source file.
    Translate {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        beam: usize,
    },
    /// Score hypotheses against references with BLEU_doc, LC and COH.
    Score {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        relations: Option<PathBuf>,
        #[arg(long)]
        topics: Option<PathBuf>,
        #[arg(long)]
        stoplist: Option<PathBuf>,
        #[arg(long, default_value = "content")]
        lc_denominator: LcDenominator,
        /// Write the TSV report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic corpus.
    GenSynthetic {
        #[arg(long)]
        kind: SyntheticKind,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        train_docs: Option<usize>,
        #[arg(long)]
        valid_docs: Option<usize>,
        #[arg(long)]
        test_docs: Option<usize>,
        #[arg(long)]
        sents_per_doc: Option<usize>,
        #[arg(long)]
        vocab: Option<usize>,
    },
    /// Convert a training log into a reward-curve CSV.
    RewardCurves {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Flat `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_sents: Option<usize>,
    #[arg(long)]
    beam: Option<usize>,
    #[arg(long)]
    risk_prob: Option<f64>,
    #[arg(long)]
    rewards: Option<String>,
    #[arg(long)]
    context_sents: Option<usize>,
    #[arg(long)]
    anneal_steps: Option<usize>,
    #[arg(long)]
    relations: Option<PathBuf>,
    #[arg(long)]
    topics: Option<PathBuf>,
    #[arg(long)]
    stoplist: Option<PathBuf>,
    #[arg(long)]
    ckpt_dir: Option<PathBuf>,
    #[arg(long)]
    train_src: Option<PathBuf>,
    #[arg(long)]
    train_tgt: Option<PathBuf>,
    #[arg(long)]
    valid_src: Option<PathBuf>,
    #[arg(long)]
    valid_tgt: Option<PathBuf>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl TrainArgs {
    fn resolve(&self) -> docrisk::Result<TrainConfig> {
        let mut config = match &self.config {
            Some(p) => TrainConfig::from_file(p)?,
            None => TrainConfig::default(),
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let overrides = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("epochs", self.epochs.map(|v| v.to_string())),
            ("lr", self.lr.map(|v| v.to_string())),
            ("batch_sents", self.batch_sents.map(|v| v.to_string())),
            ("beam", self.beam.map(|v| v.to_string())),
            ("risk_prob", self.risk_prob.map(|v| v.to_string())),
            ("rewards", self.rewards.clone()),
            ("context_sents", self.context_sents.map(|v| v.to_string())),
            ("anneal_steps", self.anneal_steps.map(|v| v.to_string())),
            ("relations", path(&self.relations)),
            ("topics", path(&self.topics)),
            ("stoplist", path(&self.stoplist)),
            ("ckpt_dir", path(&self.ckpt_dir)),
            ("train_src", path(&self.train_src)),
            ("train_tgt", path(&self.train_tgt)),
            ("valid_src", path(&self.valid_src)),
            ("valid_tgt", path(&self.valid_tgt)),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                config.set(key, &v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| docrisk::Error::Config(format!("expected KEY=VALUE, got `{kv}`")))?;
            config.set(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }
}

fn report(outcome: &TrainOutcome) {
    let r = &outcome.records[outcome.selected];
    println!(
        "selected iteration {} (perplexity {:.4}, BLEU_doc {:.2}, LC {:.2}, COH {:.2}) -> {}",
        r.iteration,
        r.perplexity,
        100.0 * r.bleu_doc,
        100.0 * r.lc,
        100.0 * r.coh,
        outcome.checkpoint_path.display()
    );
}

fn run(cli: Cli) -> docrisk::Result<()> {
    match cli.command {
        Command::Pretrain { train, init } => {
            let config = train.resolve()?;
            let init = init.as_deref().map(Checkpoint::load).transpose()?;
            report(&trainer::pretrain_nll_from(&config, init.as_ref())?);
        }
        Command::FinetuneRisk { train, init } => {
            let config = train.resolve()?;
            report(&trainer::finetune_risk(&config, &Checkpoint::load(&init)?)?);
        }
        Command::Translate { ckpt, src, out, beam } => {
            let n = trainer::translate(&ckpt, &src, &out, beam)?;
            println!("translated {n} documents -> {}", out.display());
        }
        Command::Score {
            hyp,
            reference,
            relations,
            topics,
            stoplist,
            lc_denominator,
            out,
        } => {
            let lc = LcConfig {
                denominator: lc_denominator,
                ..LcConfig::default()
            };
            let resources =
                eval::load_resources_from(relations.as_deref(), topics.as_deref(), stoplist.as_deref(), lc)?;
            let report = trainer::score(&hyp, &reference, &resources)?;
            match out {
                Some(path) => write(&path, &report.to_tsv())?,
                None => print!("{}", report.to_tsv()),
            }
            eprintln!("{}", report.summary());
        }
        Command::GenSynthetic {
            kind,
            out_dir,
            seed,
            train_docs,
            valid_docs,
            test_docs,
            sents_per_doc,
            vocab,
        } => {
            let d = SyntheticSizes::defaults(kind);
            let sizes = SyntheticSizes {
                train_docs: train_docs.unwrap_or(d.train_docs),
                valid_docs: valid_docs.unwrap_or(d.valid_docs),
                test_docs: test_docs.unwrap_or(d.test_docs),
                sents_per_doc: sents_per_doc.unwrap_or(d.sents_per_doc),
                vocab: vocab.unwrap_or(d.vocab),
            };
            gen_synthetic(kind, sizes, seed, &out_dir)?;
            println!("wrote {kind} corpus to {}", out_dir.display());
        }
        Command::RewardCurves { log, out } => {
            let n = trainer::reward_curves(&log, &out)?;
            println!("wrote {n} rows to {}", out.display());
        }
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> docrisk::Result<()> {
    std::fs::write(path, text).map_err(|e| {
        docrisk::Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
