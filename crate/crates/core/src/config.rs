//! Flat `key = value` pipeline configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::embeddings::EmbeddingFormat;
use crate::error::{Error, Result};
use crate::model::TrainingConfig;
use crate::morphology::MorphKind;
use crate::relation::DEFAULT_NEIGHBORS;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    /// Cleaned corpus, whitespace-separated tokens.
    pub corpus: Option<PathBuf>,
    pub min_count: u64,
    /// `None` trains plain Skip-gram without any relation.
    pub kind: Option<MorphKind>,
    pub affixes: Option<PathBuf>,
    pub patterns: Option<PathBuf>,
    /// Neighbors per relation row.
    pub neighbors: usize,
    pub training: TrainingConfig,
    pub output_dir: PathBuf,
    pub analogies: Option<PathBuf>,
    pub wordsim: Option<PathBuf>,
    pub rareword: Option<PathBuf>,
    /// Similarity used to synthesize vectors for unknown words.
    pub unknown_kind: MorphKind,
    pub unknown_top: usize,
    pub format: EmbeddingFormat,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: None,
            min_count: 5,
            kind: Some(MorphKind::Combination),
            affixes: None,
            patterns: None,
            neighbors: DEFAULT_NEIGHBORS,
            training: TrainingConfig::default(),
            output_dir: PathBuf::from("out"),
            analogies: None,
            wordsim: None,
            rareword: None,
            unknown_kind: MorphKind::Combination,
            unknown_top: 5,
            format: EmbeddingFormat::Text,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid value {value:?} for {key}"))),
    }
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl PipelineConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.training;
        match key {
            "corpus" => self.corpus = opt_path(value),
            "min_count" => self.min_count = parse(key, value)?,
            "kind" => {
                self.kind = match value {
                    "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "affixes" => self.affixes = opt_path(value),
            "patterns" => self.patterns = opt_path(value),
            "neighbors" => self.neighbors = parse(key, value)?,
            "dim" => t.dim = parse(key, value)?,
            "window" => t.window = parse(key, value)?,
            "negatives" => t.negatives = parse(key, value)?,
            "buckets" => t.buckets = parse(key, value)?,
            "lr" => t.lr = parse(key, value)?,
            "epochs" => t.epochs = parse(key, value)?,
            "seed" => t.seed = parse(key, value)?,
            "freeze_relation" => t.freeze_relation = parse_bool(key, value)?,
            "freeze_coeffs" => t.freeze_coeffs = parse_bool(key, value)?,
            "c1_init" => t.c1_init = parse(key, value)?,
            "c2_init" => t.c2_init = parse(key, value)?,
            "c_init" => {
                t.c1_init = parse(key, value)?;
                t.c2_init = t.c1_init;
            }
            "threads" => t.threads = parse(key, value)?,
            "shrink_window" => t.shrink_window = parse_bool(key, value)?,
            "subsample" => t.subsample = parse(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "analogies" => self.analogies = opt_path(value),
            "wordsim" => self.wordsim = opt_path(value),
            "rareword" => self.rareword = opt_path(value),
            "unknown_kind" => self.unknown_kind = parse(key, value)?,
            "unknown_top" => self.unknown_top = parse(key, value)?,
            "format" => {
                self.format = match value {
                    "text" => EmbeddingFormat::Text,
                    "binary" => EmbeddingFormat::Binary,
                    _ => return Err(Error::Config(format!("invalid value {value:?} for {key}"))),
                }
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` assignments, one per line; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> std::result::Result<(), (usize, String)> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| (lineno + 1, format!("expected key = value, got {line:?}")))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| (lineno + 1, e.to_string()))?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> std::result::Result<Self, (usize, String)> {
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {assignment:?}")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn validate(&self) -> Result<()> {
        self.training.validate()?;
        if self.neighbors == 0 {
            return Err(Error::Config("neighbors must be at least 1".into()));
        }
        if self.min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        if self.unknown_top == 0 {
            return Err(Error::Config("unknown_top must be at least 1".into()));
        }
        Ok(())
    }

    /// Every key with its effective value; parsing the result reproduces
    /// this configuration.
    pub fn to_text(&self) -> String {
        let t = &self.training;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("corpus", show_path(&self.corpus));
        put("min_count", self.min_count.to_string());
        put("kind", self.kind.map_or("none".into(), |k| k.name().into()));
        put("affixes", show_path(&self.affixes));
        put("patterns", show_path(&self.patterns));
        put("neighbors", self.neighbors.to_string());
        put("dim", t.dim.to_string());
        put("window", t.window.to_string());
        put("negatives", t.negatives.to_string());
        put("buckets", t.buckets.to_string());
        put("lr", t.lr.to_string());
        put("epochs", t.epochs.to_string());
        put("seed", t.seed.to_string());
        put("freeze_relation", t.freeze_relation.to_string());
        put("freeze_coeffs", t.freeze_coeffs.to_string());
        put("c1_init", t.c1_init.to_string());
        put("c2_init", t.c2_init.to_string());
        put("threads", t.threads.to_string());
        put("shrink_window", t.shrink_window.to_string());
        put("subsample", t.subsample.to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("analogies", show_path(&self.analogies));
        put("wordsim", show_path(&self.wordsim));
        put("rareword", show_path(&self.rareword));
        put("unknown_kind", self.unknown_kind.name().into());
        put("unknown_top", self.unknown_top.to_string());
        put(
            "format",
            match self.format {
                EmbeddingFormat::Text => "text".into(),
                EmbeddingFormat::Binary => "binary".into(),
            },
        );
        out
    }
}
