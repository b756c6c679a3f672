use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use seqteach::analysis::correlate_with_mean_pq;
use seqteach::harness::{
    self, efficiency_experiment, emit_reports, load_checkpoint, run_comparison, ExperimentConfig,
    Prepared,
};
use seqteach::optimizer::{OptimizerRunState, Stage};
use seqteach::schedule::{
    baseline_distribution, distribution_csv, sample_sequence, stationary, BaselineKind,
    TimeVaryingDistribution,
};
use seqteach::vocab::generate_synthetic_vocabulary;
use seqteach::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "seqteach",
    version,
    about = "Optimize training-word sequences for a reading model"
)]
struct Cli {
    /// TOML experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Vocabulary TSV (default: synthetic lexicon).
    #[arg(long, global = true)]
    vocab: Option<PathBuf>,
    /// Pool size K.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Increase log verbosity.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StageArg {
    One,
    Two,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the synthetic lexicon as TSV.
    GenVocab,
    /// Validate a vocabulary and print its encodings as JSON lines.
    Encode,
    /// Write the pool/test split.
    Split,
    /// Pool-size efficiency sweep.
    Efficiency {
        /// Pool sizes (comma separated).
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<usize>>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Optimize the sampling distribution.
    Optimize {
        #[arg(long, value_enum, default_value = "both")]
        stage: StageArg,
        /// Continue from a checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Optimizer steps per stage.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Compare baselines with the optimized distributions.
    Compare {
        /// Continue from checkpoints left in the output directory.
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Sample one training sequence.
    SampleSeq {
        /// Optimizer checkpoint whose best iterate to sample from.
        #[arg(long, conflicts_with = "baseline")]
        from: Option<PathBuf>,
        /// Baseline to sample from instead.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Correlate word variables with an optimized distribution.
    Analyze {
        /// Optimizer checkpoint holding the distribution.
        #[arg(long)]
        from: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut c = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(w) = cli.workers {
        c.workers = w;
    }
    if let Some(o) = &cli.out {
        c.out.clone_from(o);
    }
    if let Some(v) = &cli.vocab {
        c.vocab = Some(v.clone());
    }
    if let Some(k) = cli.k {
        c.k = k;
    }
    c.validate()?;
    Ok(c)
}

fn write(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = config(&cli)?;
    match cli.command {
        Command::GenVocab => {
            let synth = generate_synthetic_vocabulary(&cfg.synthetic, cfg.seed)?;
            write(&cfg.out.join("vocab.tsv"), &synth.vocabulary.to_tsv())?;
            let exceptions: Vec<&str> = synth
                .exceptions
                .iter()
                .map(|&i| synth.vocabulary.item(i).word.as_str())
                .collect();
            write(
                &cfg.out.join("exceptions.txt"),
                &(exceptions.join("\n") + "\n"),
            )?;
        }
        Command::Encode => {
            let vocab = cfg.load_vocabulary()?;
            let mut stdout = std::io::stdout().lock();
            for it in vocab.items() {
                let bits: Vec<usize> =
                    it.o.iter()
                        .enumerate()
                        .filter(|(_, &b)| b == 1.0)
                        .map(|(i, _)| i)
                        .collect();
                let line = serde_json::json!({
                    "word": it.word,
                    "orth": it.aligned_orth,
                    "phon": it.aligned_phon.concat(),
                    "input_bits": bits,
                });
                if writeln!(stdout, "{line}").is_err() {
                    break;
                }
            }
        }
        Command::Split => {
            let p = Prepared::new(&cfg)?;
            let words = |ix: &[usize]| -> Vec<String> {
                ix.iter().map(|&i| p.vocab.item(i).word.clone()).collect()
            };
            let json = serde_json::json!({
                "seed": cfg.seed,
                "k": cfg.k,
                "pool": words(&p.split.pool),
                "test": words(&p.split.test),
            });
            write(
                &cfg.out.join("split.json"),
                &(serde_json::to_string_pretty(&json)? + "\n"),
            )?;
        }
        Command::Efficiency { ks, reps } => {
            if let Some(ks) = ks {
                cfg.efficiency.ks = ks;
            }
            if let Some(r) = reps {
                cfg.efficiency.reps = r;
            }
            let vocab = cfg.load_vocabulary()?;
            let e = &cfg.efficiency;
            let report = cfg.thread_pool()?.install(|| {
                efficiency_experiment(&vocab, &e.ks, e.reps, e.lr, &e.criteria, cfg.seed)
            })?;
            emit_reports(&report, &cfg.out)?;
        }
        Command::Optimize {
            stage,
            resume,
            steps,
        } => {
            if let Some(s) = steps {
                cfg.optimizer.steps = s;
            }
            optimize(&cfg, stage, resume.as_deref())?;
        }
        Command::Compare { resume, steps } => {
            if let Some(s) = steps {
                cfg.optimizer.steps = s;
            }
            fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
            let report = run_comparison(&cfg, Some(&cfg.out), resume)?;
            for f in emit_reports(&report, &cfg.out)? {
                log::info!("wrote {}", f.display());
            }
            for c in &report.conditions {
                println!(
                    "{:<16} accuracy {:.4} +- {:.4}  best {:.4}  p {}",
                    c.name,
                    c.mean_accuracy,
                    c.stderr,
                    c.best_sequence_accuracy,
                    c.p_vs_optimum
                        .map_or("-".to_string(), |p| format!("{p:.3e}"))
                );
            }
        }
        Command::SampleSeq { from, baseline } => {
            let p = Prepared::new(&cfg)?;
            let tvd = match (from, baseline) {
                (Some(path), _) => checkpoint_distribution(&path, &cfg)?,
                (None, b) => {
                    let kind = BaselineKind::parse(b.as_deref().unwrap_or("uniform"))?;
                    stationary(
                        &baseline_distribution(&p.vocab, &p.split, &kind)?,
                        cfg.optimizer.horizon,
                    )
                }
            };
            let seq = sample_sequence(&tvd, cfg.seed);
            let mut out = String::from("t\tword\n");
            for (t, &i) in seq.item_indices.iter().enumerate() {
                out.push_str(&format!("{t}\t{}\n", p.vocab.item(p.split.pool[i]).word));
            }
            write(&cfg.out.join("sequence.tsv"), &out)?;
        }
        Command::Analyze { from } => {
            let p = Prepared::new(&cfg)?;
            let tvd = checkpoint_distribution(&from, &cfg)?;
            let report = correlate_with_mean_pq(&p.vocab, &p.split.pool, tvd.start(), tvd.end())?;
            for n in &report.notices {
                log::warn!("{n}");
            }
            write(&cfg.out.join("analysis.csv"), &report.to_csv())?;
            write(
                &cfg.out.join("analysis.json"),
                &(serde_json::to_string_pretty(&report)? + "\n"),
            )?;
        }
    }
    Ok(())
}

fn checkpoint_distribution(path: &Path, cfg: &ExperimentConfig) -> Result<TimeVaryingDistribution> {
    let state: OptimizerRunState = load_checkpoint(path)?;
    if state.k != cfg.k {
        return Err(Error::Config(format!(
            "checkpoint has K = {} but the config has K = {}",
            state.k, cfg.k
        )));
    }
    state.best_distribution()
}

fn optimize(cfg: &ExperimentConfig, stage: StageArg, resume: Option<&Path>) -> Result<()> {
    let prepared = Prepared::new(cfg)?;
    let setup = prepared.setup(cfg)?;
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    cfg.thread_pool()?.install(|| -> Result<()> {
        let resumed = match resume {
            Some(path) => Some(harness::resume_from(path, &setup)?),
            None => None,
        };
        let one = match (&resumed, stage) {
            (Some(r), _) if r.state.stage == Stage::One => Some(r.clone()),
            (_, StageArg::One | StageArg::Both) if resumed.is_none() => {
                Some(harness::run_checkpointed_stage(
                    harness::stage1_state(cfg)?,
                    &setup,
                    Some(&cfg.out),
                    false,
                )?)
            }
            _ => None,
        };
        let two = match (&resumed, stage) {
            (Some(r), _) if r.state.stage == Stage::Two => Some(r.clone()),
            (_, StageArg::One) => None,
            _ => {
                let p_bar = match &one {
                    Some(o) => o.p.clone(),
                    None => {
                        let s: OptimizerRunState =
                            load_checkpoint(&cfg.out.join(harness::STAGE_ONE_CHECKPOINT))?;
                        s.best_distribution()?.start().clone()
                    }
                };
                Some(harness::run_checkpointed_stage(
                    harness::stage2_state(cfg, &p_bar)?,
                    &setup,
                    Some(&cfg.out),
                    false,
                )?)
            }
        };
        for (name, outcome) in [("stage1", &one), ("stage2", &two)] {
            if let Some(o) = outcome {
                let csv = distribution_csv(&prepared.vocab, &prepared.split, &o.p, &o.q)?;
                write(&cfg.out.join(format!("{name}_distribution.csv")), &csv)?;
                println!(
                    "{name}: best step {} cost {:.4} +- {:.4}",
                    o.best.step, o.best.cost.mean, o.best.cost.stderr
                );
            }
        }
        Ok(())
    })
}
