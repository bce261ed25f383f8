//! Command-line driver: one subcommand per pipeline stage, all sharing one
//! configuration file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::corpus::{self, TokenStream, Vocabulary};
use crate::embeddings::{format_g6, EmbeddingFormat, Embeddings};
use crate::error::{Error, Result};
use crate::eval::{self, OovMode};
use crate::model::{self, UnknownPredictor};
use crate::morphology::{MorphKind, MorphResources};
use crate::relation::{build_any, RelationMatrix};

/// File names inside the output directory.
pub mod files {
    use crate::morphology::MorphKind;

    pub const VOCAB: &str = "vocab.txt";
    pub const TRAINED_RELATION: &str = "trained-relation.txt";
    pub const COEFFICIENTS: &str = "coefficients.tsv";
    pub const LOSSES: &str = "losses.csv";
    pub const EVAL_TEXT: &str = "eval.txt";
    pub const EVAL_CSV: &str = "eval.csv";
    pub const DIAGNOSTICS: &str = "diagnostics.csv";

    pub fn relation(kind: MorphKind) -> String {
        format!("relation.{}.txt", kind.name())
    }

    pub fn embeddings(binary: bool) -> &'static str {
        if binary {
            "embeddings.bin"
        } else {
            "embeddings.txt"
        }
    }

    /// Effective configuration echoed by a stage.
    pub fn config_echo(stage: &str) -> String {
        format!("{stage}.config.txt")
    }
}

#[derive(Debug, Parser)]
#[command(name = "knet", version, about = "Morphology-aware word embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Pipeline configuration file (`key = value` lines).
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Shortcut for `--set output_dir=DIR`.
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
    /// Shortcut for `--set threads=N`.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(dir) = &self.output_dir {
            cfg.output_dir = dir.clone();
        }
        if let Some(n) = self.threads {
            cfg.training.threads = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean raw text into lowercase words separated by single spaces.
    Preprocess { input: PathBuf, output: PathBuf },
    /// Count the corpus and write the vocabulary.
    Vocab(ConfigArgs),
    /// Build the relation file for the configured knowledge kind.
    Relations(ConfigArgs),
    /// Train embeddings and write a checkpoint.
    Train(ConfigArgs),
    /// Evaluate embeddings on the configured datasets.
    Eval {
        #[command(flatten)]
        config: ConfigArgs,
        /// Embeddings to evaluate; defaults to the trained ones.
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Print the words closest to a known word.
    Nearest {
        #[arg(long)]
        embeddings: PathBuf,
        word: String,
        #[arg(short, default_value_t = 10)]
        n: usize,
    },
    /// Synthesize an embedding for a word outside the vocabulary.
    PredictUnknown {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        embeddings: PathBuf,
        word: String,
        /// Similarity kind; defaults to `unknown_kind` from the configuration.
        #[arg(long)]
        kind: Option<MorphKind>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Per-bucket coefficient table of a trained checkpoint.
    Diagnostics {
        #[command(flatten)]
        config: ConfigArgs,
        /// Checkpoint directory; defaults to the output directory.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess { input, output } => cmd_preprocess(&input, &output),
        Command::Vocab(args) => cmd_vocab(&stage(&args, "vocab")?),
        Command::Relations(args) => cmd_relations(&stage(&args, "relations")?),
        Command::Train(args) => cmd_train(&stage(&args, "train")?),
        Command::Eval { config, embeddings } => {
            let cfg = stage(&config, "eval")?;
            let path = embeddings.unwrap_or_else(|| default_embeddings(&cfg));
            cmd_eval(&cfg, &path)
        }
        Command::Nearest { embeddings, word, n } => cmd_nearest(&embeddings, &word, n),
        Command::PredictUnknown {
            config,
            embeddings,
            word,
            kind,
            top,
        } => {
            let cfg = config.resolve()?;
            cmd_predict_unknown(
                &cfg,
                &embeddings,
                &word,
                kind.unwrap_or(cfg.unknown_kind),
                top.unwrap_or(cfg.unknown_top),
            )
        }
        Command::Diagnostics { config, checkpoint } => {
            let cfg = stage(&config, "diagnostics")?;
            let dir = checkpoint.unwrap_or_else(|| cfg.output_dir.clone());
            cmd_diagnostics(&dir)
        }
    }
}

/// Resolves the configuration, creates the output directory and echoes the
/// effective configuration into it.
fn stage(args: &ConfigArgs, name: &str) -> Result<PipelineConfig> {
    let cfg = args.resolve()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    write_file(&cfg.output_dir.join(files::config_echo(name)), cfg.to_text().as_bytes())?;
    Ok(cfg)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn default_embeddings(cfg: &PipelineConfig) -> PathBuf {
    cfg.output_dir
        .join(files::embeddings(cfg.format == EmbeddingFormat::Binary))
}

fn resources(cfg: &PipelineConfig) -> Result<MorphResources> {
    MorphResources::load(cfg.affixes.as_deref(), cfg.patterns.as_deref())
}

fn corpus_path(cfg: &PipelineConfig) -> Result<&Path> {
    cfg.corpus
        .as_deref()
        .ok_or_else(|| Error::Config("no corpus configured".into()))
}

fn load_vocab(cfg: &PipelineConfig) -> Result<Vocabulary> {
    Vocabulary::load(&cfg.output_dir.join(files::VOCAB))
}

pub fn cmd_preprocess(input: &Path, output: &Path) -> Result<()> {
    let reader = File::open(input).map_err(|e| Error::io(input, e))?;
    let writer = File::create(output).map_err(|e| Error::io(output, e))?;
    corpus::preprocess_stream(BufReader::new(reader), BufWriter::new(writer))
        .map_err(|e| Error::io(output, e))
}

pub fn cmd_vocab(cfg: &PipelineConfig) -> Result<()> {
    let text = corpus::read_text(corpus_path(cfg)?)?;
    let vocab = corpus::build_vocab(text.split_whitespace(), cfg.min_count)?;
    vocab.save(&cfg.output_dir.join(files::VOCAB))?;
    println!(
        "{} words, {} tokens kept (min_count {})",
        vocab.len(),
        vocab.total_tokens(),
        cfg.min_count
    );
    Ok(())
}

pub fn cmd_relations(cfg: &PipelineConfig) -> Result<()> {
    let kind = cfg
        .kind
        .ok_or_else(|| Error::Config("kind = none uses no relation".into()))?;
    let vocab = load_vocab(cfg)?;
    let res = resources(cfg)?;
    let started = Instant::now();
    let (relation, parts) = build_any(&vocab, kind, cfg.neighbors, &res)?;
    for part in parts.iter().chain([&relation]) {
        let path = cfg.output_dir.join(files::relation(part.kind()));
        part.save(vocab.words(), &path)?;
        println!("{}: {} links -> {}", part.kind(), part.nnz(), path.display());
    }
    log::info!("relations built in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

pub fn cmd_train(cfg: &PipelineConfig) -> Result<()> {
    let vocab = load_vocab(cfg)?;
    let text = corpus::read_text(corpus_path(cfg)?)?;
    let stream = TokenStream::new(text.split_whitespace(), &vocab);
    drop(text);
    let trained = match cfg.kind {
        Some(kind) => {
            let relation =
                RelationMatrix::load(&cfg.output_dir.join(files::relation(kind)), &vocab, kind)?;
            model::train(&vocab, &stream, relation, &cfg.training)?
        }
        None => model::train_skipgram(&vocab, &stream, &cfg.training)?,
    };
    let dir = &cfg.output_dir;
    let embeddings = Embeddings::from_model(&vocab, &trained.model);
    embeddings.save(&default_embeddings(cfg), cfg.format)?;
    if cfg.kind.is_some() {
        trained
            .relation
            .save(vocab.words(), &dir.join(files::TRAINED_RELATION))?;
    }
    let mut coeffs = Vec::new();
    trained
        .model
        .write_coefficients(&mut coeffs)
        .map_err(|e| Error::io(dir.join(files::COEFFICIENTS), e))?;
    write_file(&dir.join(files::COEFFICIENTS), &coeffs)?;
    let mut losses = String::from("epoch,loss,seconds\n");
    for (i, (l, s)) in trained
        .report
        .epoch_losses
        .iter()
        .zip(&trained.report.epoch_seconds)
        .enumerate()
    {
        losses.push_str(&format!("{},{l},{s}\n", i + 1));
    }
    write_file(&dir.join(files::LOSSES), losses.as_bytes())?;
    println!(
        "{} steps, final epoch loss {:.5}, {:.0} words/s",
        trained.report.steps,
        trained.report.epoch_losses.last().copied().unwrap_or(f64::NAN),
        trained.report.words_per_sec
    );
    Ok(())
}

/// One line of the evaluation table.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub dataset: String,
    pub metric: &'static str,
    /// `None` when nothing could be scored.
    pub value: Option<f64>,
    pub count: usize,
    pub skipped: usize,
}

pub fn eval_csv(rows: &[EvalRow]) -> String {
    let mut out = String::from("dataset,metric,value,count,skipped\n");
    for r in rows {
        let value = r.value.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{value},{},{}\n",
            r.dataset, r.metric, r.count, r.skipped
        ));
    }
    out
}

pub fn eval_table(rows: &[EvalRow]) -> String {
    let mut out = format!(
        "{:<14} {:<20} {:>8} {:>8} {:>8}\n",
        "dataset", "metric", "value", "count", "skipped"
    );
    for r in rows {
        let value = r
            .value
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "n/a".into());
        out.push_str(&format!(
            "{:<14} {:<20} {value:>8} {:>8} {:>8}\n",
            r.dataset, r.metric, r.count, r.skipped
        ));
    }
    out
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Evaluates `embeddings` on every dataset named in `cfg`.
pub fn evaluate(cfg: &PipelineConfig, embeddings: &Embeddings) -> Result<Vec<EvalRow>> {
    let mut rows = Vec::new();
    if let Some(path) = &cfg.analogies {
        let questions = eval::load_analogies(path)?;
        let result = eval::eval_analogies(&questions, embeddings);
        let name = dataset_name(path);
        for (metric, counts) in [
            ("semantic_accuracy", result.semantic),
            ("syntactic_accuracy", result.syntactic),
            ("total_accuracy", result.total()),
        ] {
            rows.push(EvalRow {
                dataset: name.clone(),
                metric,
                value: counts.accuracy(),
                count: counts.answered,
                skipped: counts.skipped,
            });
        }
    }
    let sim_sets: Vec<&PathBuf> = cfg.wordsim.iter().chain(&cfg.rareword).collect();
    if !sim_sets.is_empty() {
        let res = resources(cfg)?;
        let predictor = UnknownPredictor::new(embeddings, &res, cfg.unknown_kind, cfg.unknown_top)?;
        for path in sim_sets {
            let pairs = eval::load_similarity(path)?;
            let name = dataset_name(path);
            for (metric, mode) in [
                ("spearman_known", OovMode::KnownOnly),
                ("spearman_all", OovMode::AllWords),
            ] {
                let r = eval::eval_wordsim(&pairs, embeddings, mode, Some(&predictor))?;
                rows.push(EvalRow {
                    dataset: name.clone(),
                    metric,
                    value: Some(r.rho),
                    count: r.pairs,
                    skipped: r.pairs_with_oov,
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Config(
            "no evaluation dataset configured (analogies, wordsim, rareword)".into(),
        ));
    }
    Ok(rows)
}

pub fn cmd_eval(cfg: &PipelineConfig, embeddings_path: &Path) -> Result<()> {
    let embeddings = Embeddings::load(embeddings_path, EmbeddingFormat::from_path(embeddings_path))?;
    let rows = evaluate(cfg, &embeddings)?;
    let table = eval_table(&rows);
    write_file(&cfg.output_dir.join(files::EVAL_TEXT), table.as_bytes())?;
    write_file(&cfg.output_dir.join(files::EVAL_CSV), eval_csv(&rows).as_bytes())?;
    print!("{table}");
    Ok(())
}

pub fn cmd_nearest(embeddings_path: &Path, word: &str, n: usize) -> Result<()> {
    let embeddings = Embeddings::load(embeddings_path, EmbeddingFormat::from_path(embeddings_path))?;
    let i = embeddings
        .index_of(word)
        .ok_or_else(|| Error::Invalid(format!("{word:?} is not in the embeddings")))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (j, score) in embeddings.nearest(i, n) {
        writeln!(out, "{}\t{score:.6}", embeddings.word(j)).map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

pub fn cmd_predict_unknown(
    cfg: &PipelineConfig,
    embeddings_path: &Path,
    word: &str,
    kind: MorphKind,
    top: usize,
) -> Result<()> {
    let embeddings = Embeddings::load(embeddings_path, EmbeddingFormat::from_path(embeddings_path))?;
    let res = resources(cfg)?;
    let word = word.to_lowercase();
    let est = model::predict_unknown(&word, &embeddings, &res, kind, top)?;
    let mut out = String::new();
    out.push_str(&word);
    for x in &est.vector {
        out.push(' ');
        out.push_str(&format_g6(*x));
    }
    out.push('\n');
    for c in &est.neighbors {
        out.push_str(&format!("# {}\t{:.6}\n", embeddings.word(c.index), c.score));
    }
    print!("{out}");
    Ok(())
}

pub fn cmd_diagnostics(checkpoint: &Path) -> Result<()> {
    let train_cfg = PipelineConfig::load(&checkpoint.join(files::config_echo("train")))?;
    let vocab = Vocabulary::load(&checkpoint.join(files::VOCAB))?;
    let coeff_path = checkpoint.join(files::COEFFICIENTS);
    let text = std::fs::read_to_string(&coeff_path).map_err(|e| Error::io(&coeff_path, e))?;
    let (c1, c2) = model::read_coefficients(&text).map_err(|(l, m)| Error::parse(&coeff_path, l, m))?;
    let bucket_of = match train_cfg.kind {
        Some(_) => model::buckets_for(&vocab, train_cfg.training.buckets)?,
        None => vec![0; vocab.len()],
    };
    if bucket_of.iter().any(|&b| b as usize >= c1.len()) {
        return Err(Error::parse(&coeff_path, 0, "fewer buckets than the training configuration implies"));
    }
    let diag = model::bucket_diagnostics(&c1, &c2, &bucket_of);
    let path = checkpoint.join(files::DIAGNOSTICS);
    write_file(&path, diag.to_csv().as_bytes())?;
    println!(
        "{} buckets, overall c1/c2 ratio {:.4} -> {}",
        diag.rows.len(),
        diag.overall_ratio,
        path.display()
    );
    Ok(())
}
