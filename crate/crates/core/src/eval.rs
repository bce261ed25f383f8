//! Analogy accuracy and word-similarity rank correlation.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use crate::embeddings::{cosine, Embeddings};
use crate::error::{Error, Result};
use crate::model::UnknownPredictor;

/// Analogy sections counted as semantic; every other section is syntactic.
pub const SEMANTIC_SECTIONS: [&str; 5] = [
    "capital-common-countries",
    "capital-world",
    "currency",
    "city-in-state",
    "family",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    Semantic,
    Syntactic,
}

/// "a is to b as c is to d".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub category: Category,
}

impl AnalogyQuestion {
    pub fn new(words: [&str; 4], category: Category) -> Self {
        let [a, b, c, d] = words.map(str::to_string);
        AnalogyQuestion { a, b, c, d, category }
    }
}

/// Parses the sectioned analogy format: `: name` lines open a section, data
/// lines hold four words. Words are lowercased to match the cleaned corpus.
pub fn parse_analogies(text: &str) -> std::result::Result<Vec<AnalogyQuestion>, (usize, String)> {
    let mut category = Category::Syntactic;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(':') {
            let name = name.trim();
            category = if SEMANTIC_SECTIONS.iter().any(|s| name.starts_with(s)) {
                Category::Semantic
            } else {
                Category::Syntactic
            };
            continue;
        }
        let words: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
        let [a, b, c, d]: [String; 4] = words
            .try_into()
            .map_err(|_| (lineno + 1, format!("expected four words in {line:?}")))?;
        out.push(AnalogyQuestion { a, b, c, d, category });
    }
    Ok(out)
}

pub fn load_analogies(path: &Path) -> Result<Vec<AnalogyQuestion>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_analogies(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
}

/// Unit-normalized embedding rows for answering many analogies.
pub struct AnalogySolver<'a> {
    embeddings: &'a Embeddings,
    unit: Vec<f64>,
}

impl<'a> AnalogySolver<'a> {
    pub fn new(embeddings: &'a Embeddings) -> Self {
        AnalogySolver {
            embeddings,
            unit: embeddings.unit_rows(),
        }
    }

    fn unit_row(&self, i: usize) -> &[f64] {
        let d = self.embeddings.dim();
        &self.unit[i * d..(i + 1) * d]
    }

    /// Index maximizing `(b̂ - â + ĉ)·x̂` over all words except `b` and `c`;
    /// ties go to the lower index.
    pub fn solve_indices(&self, a: usize, b: usize, c: usize) -> Option<usize> {
        let target: Vec<f64> = self
            .unit_row(b)
            .iter()
            .zip(self.unit_row(a))
            .zip(self.unit_row(c))
            .map(|((b, a), c)| b - a + c)
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for (j, row) in self.unit.chunks_exact(self.embeddings.dim()).enumerate() {
            if j == b || j == c {
                continue;
            }
            let score: f64 = row.iter().zip(&target).map(|(x, t)| x * t).sum();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        best.map(|(j, _)| j)
    }

    /// The predicted `d`, or `None` when `a`, `b` or `c` is unknown.
    pub fn solve(&self, q: &AnalogyQuestion) -> Option<&'a str> {
        let e = self.embeddings;
        let (a, b, c) = (e.index_of(&q.a)?, e.index_of(&q.b)?, e.index_of(&q.c)?);
        self.solve_indices(a, b, c).map(|j| e.words()[j].as_str())
    }
}

pub fn answer_analogy<'a>(q: &AnalogyQuestion, embeddings: &'a Embeddings) -> Option<&'a str> {
    AnalogySolver::new(embeddings).solve(q)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CategoryCounts {
    pub correct: usize,
    pub answered: usize,
    pub skipped: usize,
}

impl CategoryCounts {
    /// `None` when no question could be answered.
    pub fn accuracy(&self) -> Option<f64> {
        (self.answered > 0).then(|| self.correct as f64 / self.answered as f64)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AnalogyResult {
    pub semantic: CategoryCounts,
    pub syntactic: CategoryCounts,
}

impl AnalogyResult {
    pub fn total(&self) -> CategoryCounts {
        CategoryCounts {
            correct: self.semantic.correct + self.syntactic.correct,
            answered: self.semantic.answered + self.syntactic.answered,
            skipped: self.semantic.skipped + self.syntactic.skipped,
        }
    }
}

/// Exact-match accuracy over the questions whose `a`, `b` and `c` are known.
pub fn eval_analogies(questions: &[AnalogyQuestion], embeddings: &Embeddings) -> AnalogyResult {
    let solver = AnalogySolver::new(embeddings);
    let outcomes: Vec<(Category, Option<bool>)> = questions
        .par_iter()
        .map(|q| (q.category, solver.solve(q).map(|d| d == q.d)))
        .collect();
    let mut result = AnalogyResult::default();
    for (category, outcome) in outcomes {
        let counts = match category {
            Category::Semantic => &mut result.semantic,
            Category::Syntactic => &mut result.syntactic,
        };
        match outcome {
            None => counts.skipped += 1,
            Some(ok) => {
                counts.answered += 1;
                counts.correct += ok as usize;
            }
        }
    }
    result
}

/// 1-based ranks with ties sharing their average rank.
pub fn fractional_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Spearman's rank correlation: Pearson correlation of fractional ranks.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Invalid("rank correlation needs equal-length inputs".into()));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two observations"));
    }
    let (rx, ry) = (fractional_ranks(xs), fractional_ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for (x, y) in rx.iter().zip(&ry) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant ranks"));
    }
    Ok(cov / (vx * vy).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityPair {
    pub w1: String,
    pub w2: String,
    pub human: f64,
}

/// Parses `word1 word2 score` lines separated by tabs (or other
/// whitespace). Blank lines, `#` comments and a non-numeric header line are
/// skipped. Words are lowercased.
pub fn parse_similarity(text: &str) -> std::result::Result<Vec<SimilarityPair>, (usize, String)> {
    let mut out = Vec::new();
    let mut seen_data = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        if fields.len() < 3 {
            return Err((lineno + 1, format!("expected word1, word2 and a score in {line:?}")));
        }
        match fields[2].parse::<f64>() {
            Ok(human) if human.is_finite() => {
                seen_data = true;
                out.push(SimilarityPair {
                    w1: fields[0].to_lowercase(),
                    w2: fields[1].to_lowercase(),
                    human,
                });
            }
            _ if !seen_data => {} // header
            _ => return Err((lineno + 1, format!("bad score {:?}", fields[2]))),
        }
    }
    Ok(out)
}

pub fn load_similarity(path: &Path) -> Result<Vec<SimilarityPair>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_similarity(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OovMode {
    /// Unknown words get the zero vector, whose cosine with anything is 0.
    KnownOnly,
    /// Unknown words get a vector synthesized from similar known words.
    AllWords,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordSimResult {
    pub rho: f64,
    pub pairs: usize,
    /// Pairs with at least one unknown word.
    pub pairs_with_oov: usize,
    /// Unknown words (AllWords mode) that no known word resembles; they
    /// fall back to the zero vector.
    pub unpredicted: usize,
}

/// Cosine similarity of each pair under `mode`.
pub fn model_similarities(
    pairs: &[SimilarityPair],
    embeddings: &Embeddings,
    mode: OovMode,
    predictor: Option<&UnknownPredictor<'_>>,
) -> Result<(Vec<f64>, usize, usize)> {
    if mode == OovMode::AllWords && predictor.is_none() {
        return Err(Error::Config("AllWords mode needs an unknown-word predictor".into()));
    }
    let zero = vec![0.0; embeddings.dim()];
    let mut synthesized: HashMap<&str, Option<Vec<f64>>> = HashMap::new();
    if let (OovMode::AllWords, Some(p)) = (mode, predictor) {
        let unknown: Vec<&str> = {
            let mut words: Vec<&str> = pairs
                .iter()
                .flat_map(|p| [p.w1.as_str(), p.w2.as_str()])
                .filter(|w| embeddings.index_of(w).is_none())
                .collect();
            words.sort_unstable();
            words.dedup();
            words
        };
        let vectors: Vec<Result<Option<Vec<f64>>>> = unknown
            .par_iter()
            .map(|w| match p.predict(w) {
                Ok(est) => Ok(Some(est.vector)),
                Err(Error::NoCandidates(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect();
        for (w, v) in unknown.into_iter().zip(vectors) {
            synthesized.insert(w, v?);
        }
    }
    let unpredicted = synthesized.values().filter(|v| v.is_none()).count();
    let lookup = |w: &str| -> &[f64] {
        match embeddings.vector_of(w) {
            Some(v) => v,
            None => synthesized
                .get(w)
                .and_then(|v| v.as_deref())
                .unwrap_or(&zero),
        }
    };
    let mut with_oov = 0;
    let sims = pairs
        .iter()
        .map(|p| {
            if embeddings.index_of(&p.w1).is_none() || embeddings.index_of(&p.w2).is_none() {
                with_oov += 1;
            }
            cosine(lookup(&p.w1), lookup(&p.w2))
        })
        .collect();
    Ok((sims, with_oov, unpredicted))
}

/// Spearman correlation between model cosines and human scores.
pub fn eval_wordsim(
    pairs: &[SimilarityPair],
    embeddings: &Embeddings,
    mode: OovMode,
    predictor: Option<&UnknownPredictor<'_>>,
) -> Result<WordSimResult> {
    let (sims, pairs_with_oov, unpredicted) = model_similarities(pairs, embeddings, mode, predictor)?;
    let human: Vec<f64> = pairs.iter().map(|p| p.human).collect();
    Ok(WordSimResult {
        rho: spearman_rho(&sims, &human)?,
        pairs: pairs.len(),
        pairs_with_oov,
        unpredicted,
    })
}
