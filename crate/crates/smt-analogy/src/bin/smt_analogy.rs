//! Command-line front end: corpus generation, encoder training, alignment
//! inference, exact gold computation, evaluation, and heatmap export.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use smt_analogy::embed::{train_encoder, EmbedConfig, EmbedError};
use smt_analogy::heatmap::export_heatmap;
use smt_analogy::infer::{InferError, InferenceConfig};
use smt_analogy::io::{
    read_checkpoint, read_corpus, read_predictions, write_checkpoint, write_corpus,
    write_predictions,
};
use smt_analogy::oracle::SearchLimits;
use smt_analogy::pipeline::{
    evaluate_files, oracle_corpus, predict_corpus, PipelineConfig, PipelineError,
};
use smt_analogy::synth::{sample_analogy_pair, sample_order_pairs, GenError, GenParams};
use smt_analogy::vocab::SignatureVocab;

#[derive(Parser)]
#[command(
    name = "smt-analogy",
    version,
    about = "Structure-mapping analogical reasoning over labeled DAGs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic analogy corpus with planted gold alignments.
    Gen {
        #[arg(long)]
        out: PathBuf,
        /// Number of analogy pairs to generate.
        #[arg(long)]
        num: usize,
        #[arg(long, default_value_t = 2)]
        depth_min: usize,
        #[arg(long, default_value_t = 7)]
        depth_max: usize,
        /// Extra target structure as a fraction of the core size.
        #[arg(long, default_value_t = 0.3)]
        distractor: f64,
        /// Probability of synonym-relabeling non-relation base signatures.
        #[arg(long, default_value_t = 0.5)]
        relabel: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Train the order-embedding encoder on a corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Output checkpoint path.
        #[arg(long)]
        out: PathBuf,
        /// Message-passing layers.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Embedding dimension.
        #[arg(long, default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        margin: f64,
        #[arg(long, default_value_t = 5000)]
        steps: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Optimize alignments for every pair of a corpus.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        /// Output predictions path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        lambda1: f64,
        #[arg(long, default_value_t = 1e-1)]
        lambda2: f64,
        #[arg(long, default_value_t = 1e-3)]
        lambda3: f64,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Fill in gold alignments with the exact structure mapper.
    Oracle {
        #[arg(long)]
        corpus: PathBuf,
        /// Output gold corpus path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 12)]
        max_base: usize,
        #[arg(long, default_value_t = 40)]
        max_target: usize,
    },
    /// Score predictions against a gold corpus.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Output metrics path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Export one pair's score matrix as a PGM image.
    Heatmap {
        #[arg(long)]
        pred: PathBuf,
        /// Pair id to render.
        #[arg(long)]
        pair: String,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<smt_analogy::io::IoError> for Failure {
    fn from(e: smt_analogy::io::IoError) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::InvalidParams(_) => Failure::usage(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<EmbedError> for Failure {
    fn from(e: EmbedError) -> Self {
        match e {
            EmbedError::NonFiniteLoss { .. } => Failure::numeric(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Infer(InferError::NonFinite { .. }) => Failure::numeric(e.to_string()),
            PipelineError::Embed(EmbedError::NonFiniteLoss { .. }) => {
                Failure::numeric(e.to_string())
            }
            _ => Failure::data(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            _ => {
                eprint!("{e}");
                return ExitCode::from(1);
            }
        },
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen {
            out,
            num,
            depth_min,
            depth_max,
            distractor,
            relabel,
            seed,
        } => {
            let mut params = GenParams::new(SignatureVocab::builtin(seed));
            params.depth_range = (depth_min, depth_max);
            params.distractor = distractor;
            params.relabel = relabel;
            params.seed = seed;
            params.validate()?;
            let mut instances = Vec::with_capacity(num);
            for i in 0..num {
                let mut inst = sample_analogy_pair(&params, seed.wrapping_add(i as u64))?;
                inst.id = format!("p{i:05}");
                instances.push(inst);
            }
            write_corpus(&out, &instances)?;
            println!("wrote {num} pairs to {}", out.display());
            Ok(())
        }
        Command::Train {
            corpus,
            out,
            k,
            dim,
            margin,
            steps,
            lr,
            seed,
        } => {
            let instances = read_corpus(&corpus)?;
            if instances.is_empty() {
                return Err(Failure::data("corpus has no pairs"));
            }
            let graphs: Vec<_> = instances
                .iter()
                .flat_map(|i| [i.base.clone(), i.target.clone()])
                .collect();
            let config = EmbedConfig {
                layers: k,
                dim,
                margin,
                steps,
                learning_rate: lr,
                seed,
                ..EmbedConfig::default()
            };
            let vocab = SignatureVocab::builtin(seed);
            let n_pairs = (graphs.len() * 4).max(64);
            let pairs = sample_order_pairs(&graphs, n_pairs, n_pairs, k, seed)?;
            let result = train_encoder(&config, &pairs, &vocab, seed)?;
            write_checkpoint(&out, &config, seed, &result.params)?;
            let first = result.loss_trace.first().copied().unwrap_or(0.0);
            let last = result.loss_trace.last().copied().unwrap_or(0.0);
            println!(
                "trained {steps} steps on {} order pairs (loss {first:.4} -> {last:.4}), wrote {}",
                pairs.len(),
                out.display()
            );
            Ok(())
        }
        Command::Infer {
            model,
            corpus,
            out,
            lambda1,
            lambda2,
            lambda3,
            lr,
            iters,
            tau,
            seed,
        } => {
            let instances = read_corpus(&corpus)?;
            let ckpt = read_checkpoint(&model)?;
            let vocab = SignatureVocab::builtin(ckpt.vocab_seed);
            if ckpt.params.in_dim != 3 + vocab.d_sig() {
                return Err(Failure::data(format!(
                    "checkpoint expects {} input features, vocabulary provides {}",
                    ckpt.params.in_dim,
                    3 + vocab.d_sig()
                )));
            }
            let config = PipelineConfig {
                infer: InferenceConfig {
                    lambda1,
                    lambda2,
                    lambda3,
                    learning_rate: lr,
                    max_iters: iters,
                    tau,
                    seed,
                    ..InferenceConfig::default()
                },
                ..PipelineConfig::default()
            };
            config
                .infer
                .validate()
                .map_err(|e| Failure::usage(e.to_string()))?;
            let (predictions, failures) = predict_corpus(&instances, &ckpt.params, &vocab, &config);
            for f in &failures {
                eprintln!("pair {}: {}", f.id, f.error);
            }
            if predictions.is_empty() && !failures.is_empty() {
                return Err(Failure::numeric("every pair failed during inference"));
            }
            write_predictions(&out, &predictions)?;
            println!(
                "inferred {} pairs ({} failed), wrote {}",
                predictions.len(),
                failures.len(),
                out.display()
            );
            Ok(())
        }
        Command::Oracle {
            corpus,
            out,
            max_base,
            max_target,
        } => {
            let limits = SearchLimits {
                max_base_nodes: max_base,
                max_target_nodes: max_target,
                ..SearchLimits::default()
            };
            let (solved, failures) = oracle_corpus(&corpus, &out, limits, None)?;
            for f in &failures {
                eprintln!("pair {}: {}", f.id, f.error);
            }
            println!(
                "solved {solved} pairs ({} skipped), wrote {}",
                failures.len(),
                out.display()
            );
            Ok(())
        }
        Command::Eval { pred, gold, out } => {
            let report = evaluate_files(&pred, &gold, &out)?;
            for f in &report.failures {
                eprintln!("pair {}: {}", f.id, f.error);
            }
            let m = &report.aggregate;
            println!(
                "{} pairs: acc {:.3} re {:.3} pr {:.3} f1 {:.3} auc {:.3} exact {:.3}, wrote {}",
                report.pairs.len(),
                m.accuracy,
                m.recall,
                m.precision,
                m.f1,
                m.roc_auc,
                report.exact_match_rate,
                out.display()
            );
            Ok(())
        }
        Command::Heatmap { pred, pair, out } => {
            let predictions = read_predictions(&pred)?;
            let prediction = predictions
                .iter()
                .find(|p| p.id == pair)
                .ok_or_else(|| Failure::data(format!("no pair {pair:?} in predictions")))?;
            export_heatmap(&prediction.scores, &out).map_err(|e| Failure::data(e.to_string()))?;
            println!(
                "wrote {}x{} heatmap to {}",
                prediction.scores.rows(),
                prediction.scores.cols(),
                out.display()
            );
            Ok(())
        }
    }
}
