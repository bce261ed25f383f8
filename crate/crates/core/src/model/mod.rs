//! The embedding network: parameters, the per-example objective and its
//! gradients, the training loop, and embeddings for unseen words.

mod diagnostics;
mod step;
mod train;
mod unknown;

use rand::Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};

pub use diagnostics::{bucket_diagnostics, export_diagnostics, BucketRow, Diagnostics, RATIO_CLAMP};
pub use step::{
    apply_step, combined_input, knowledge_repr, log_sigmoid, neg_objective, sigmoid,
    step_gradients, Freeze, StepGradients,
};
pub use train::{train, train_skipgram, train_with_observer, TrainReport, Trained};
pub use unknown::{predict_unknown, UnknownEstimate, UnknownPredictor};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingConfig {
    pub dim: usize,
    /// Half-window: contexts at offsets `-window..=window` except 0.
    pub window: usize,
    pub negatives: usize,
    pub buckets: usize,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub freeze_relation: bool,
    pub freeze_coeffs: bool,
    pub c1_init: f64,
    pub c2_init: f64,
    /// 1 is the reproducible mode; more threads update shared parameters
    /// without synchronization.
    pub threads: usize,
    /// Draw the effective half-window uniformly from `1..=window` per position.
    pub shrink_window: bool,
    /// Frequent-word subsampling threshold; 0 disables it.
    pub subsample: f64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dim: 100,
            window: 5,
            negatives: 3,
            buckets: 1000,
            lr: 0.025,
            epochs: 1,
            seed: 1,
            freeze_relation: false,
            freeze_coeffs: false,
            c1_init: 0.5,
            c2_init: 0.5,
            threads: 1,
            shrink_window: false,
            subsample: 0.0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("buckets", self.buckets),
            ("epochs", self.epochs),
            ("threads", self.threads),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.c1_init.is_finite() && self.c2_init.is_finite()) {
            return Err(Error::Config("coefficient initial values must be finite".into()));
        }
        if !(self.subsample >= 0.0 && self.subsample.is_finite()) {
            return Err(Error::Config("subsample must be non-negative".into()));
        }
        Ok(())
    }
}

/// Groups frequency-ranked words into `b` contiguous buckets of roughly equal
/// token mass.
///
/// A bucket closes once its mass reaches `total / b`, or early when the words
/// left are only just enough to give every remaining bucket one word. The
/// last bucket takes whatever remains.
pub fn assign_buckets(counts: &[u64], b: usize) -> Result<Vec<u32>> {
    if b == 0 || b > counts.len() {
        return Err(Error::Config(format!(
            "bucket count {b} must be between 1 and the vocabulary size {}",
            counts.len()
        )));
    }
    let total: u64 = counts.iter().sum();
    let target = total as f64 / b as f64;
    let mut out = Vec::with_capacity(counts.len());
    let mut bucket = 0usize;
    let mut mass = 0u64;
    for (i, &c) in counts.iter().enumerate() {
        out.push(bucket as u32);
        mass += c;
        let words_left = counts.len() - i - 1;
        let buckets_left = b - bucket - 1;
        if buckets_left > 0 && (mass as f64 >= target || words_left == buckets_left) {
            bucket += 1;
            mass = 0;
        }
    }
    Ok(out)
}

/// Trainable parameters apart from the relation weights.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    /// Row-major `V x dim` input vectors.
    input: Vec<f64>,
    /// Row-major `V x dim` output vectors.
    output: Vec<f64>,
    c1: Vec<f64>,
    c2: Vec<f64>,
    bucket_of: Vec<u32>,
}

impl EmbeddingModel {
    /// Input rows uniform in `[-0.5/dim, 0.5/dim)`, output rows zero.
    pub fn init<R: Rng + ?Sized>(
        vocab_len: usize,
        dim: usize,
        bucket_of: Vec<u32>,
        c1_init: f64,
        c2_init: f64,
        rng: &mut R,
    ) -> Self {
        assert_eq!(bucket_of.len(), vocab_len);
        let buckets = bucket_of.iter().map(|&b| b as usize + 1).max().unwrap_or(1);
        let half = 0.5 / dim as f64;
        let input = (0..vocab_len * dim)
            .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * half)
            .collect();
        EmbeddingModel {
            dim,
            input,
            output: vec![0.0; vocab_len * dim],
            c1: vec![c1_init; buckets],
            c2: vec![c2_init; buckets],
            bucket_of,
        }
    }

    /// Builds a model from explicit parameters.
    pub fn from_parts(
        dim: usize,
        input: Vec<f64>,
        output: Vec<f64>,
        c1: Vec<f64>,
        c2: Vec<f64>,
        bucket_of: Vec<u32>,
    ) -> Result<Self> {
        let v = bucket_of.len();
        if dim == 0 || input.len() != v * dim || output.len() != v * dim {
            return Err(Error::Invalid("embedding matrix shape mismatch".into()));
        }
        if c1.len() != c2.len() || bucket_of.iter().any(|&b| b as usize >= c1.len()) {
            return Err(Error::Invalid("bucket coefficients do not cover bucket_of".into()));
        }
        Ok(EmbeddingModel {
            dim,
            input,
            output,
            c1,
            c2,
            bucket_of,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_len(&self) -> usize {
        self.bucket_of.len()
    }

    pub fn num_buckets(&self) -> usize {
        self.c1.len()
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    pub fn input_mut(&mut self) -> &mut [f64] {
        &mut self.input
    }

    pub fn output(&self) -> &[f64] {
        &self.output
    }

    pub fn output_mut(&mut self) -> &mut [f64] {
        &mut self.output
    }

    pub fn input_row(&self, i: usize) -> &[f64] {
        &self.input[i * self.dim..(i + 1) * self.dim]
    }

    pub fn output_row(&self, i: usize) -> &[f64] {
        &self.output[i * self.dim..(i + 1) * self.dim]
    }

    pub fn c1(&self) -> &[f64] {
        &self.c1
    }

    pub fn c2(&self) -> &[f64] {
        &self.c2
    }

    pub fn c1_mut(&mut self) -> &mut [f64] {
        &mut self.c1
    }

    pub fn c2_mut(&mut self) -> &mut [f64] {
        &mut self.c2
    }

    pub fn bucket_of(&self) -> &[u32] {
        &self.bucket_of
    }

    pub fn bucket(&self, t: usize) -> usize {
        self.bucket_of[t] as usize
    }

    pub fn is_finite(&self) -> bool {
        self.input
            .iter()
            .chain(&self.output)
            .chain(&self.c1)
            .chain(&self.c2)
            .all(|x| x.is_finite())
    }

    /// Writes `bucket<TAB>c1<TAB>c2` lines with round-trip precision.
    pub fn write_coefficients<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, (c1, c2)) in self.c1.iter().zip(&self.c2).enumerate() {
            writeln!(w, "{i}\t{c1}\t{c2}")?;
        }
        w.flush()
    }
}

/// Reads a coefficients file into `(c1, c2)` columns.
pub fn read_coefficients(text: &str) -> std::result::Result<(Vec<f64>, Vec<f64>), (usize, String)> {
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: &str| (lineno + 1, msg.to_string());
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(err("expected bucket<TAB>c1<TAB>c2"));
        }
        let bucket: usize = fields[0].parse().map_err(|_| err("bad bucket index"))?;
        if bucket != c1.len() {
            return Err(err("buckets must be listed in order from 0"));
        }
        c1.push(fields[1].parse().map_err(|_| err("bad c1 value"))?);
        c2.push(fields[2].parse().map_err(|_| err("bad c2 value"))?);
    }
    Ok((c1, c2))
}

/// Bucket assignment for a vocabulary, clamping the bucket count to the
/// vocabulary size.
pub fn buckets_for(vocab: &Vocabulary, b: usize) -> Result<Vec<u32>> {
    let b = b.min(vocab.len());
    assign_buckets(vocab.counts(), b)
}
