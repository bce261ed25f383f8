//! The sparse relation matrix: for each vocabulary word, its top-k
//! morphological neighbors and a learnable weight per neighbor.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::morphology::{Candidate, MorphKind, MorphResources, SimilarityIndex};

pub const DEFAULT_NEIGHBORS: usize = 5;

/// Compressed-row storage of the relation matrix.
///
/// The index structure is fixed at construction; only the weights change
/// during training.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationMatrix {
    kind: MorphKind,
    k: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
}

impl RelationMatrix {
    /// A matrix with `len` empty rows.
    pub fn empty(len: usize, kind: MorphKind, k: usize) -> Self {
        RelationMatrix {
            kind,
            k,
            offsets: vec![0; len + 1],
            neighbors: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn from_rows(kind: MorphKind, k: usize, rows: Vec<Vec<Candidate>>) -> Result<Self> {
        let len = rows.len();
        let mut offsets = Vec::with_capacity(len + 1);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() > k {
                return Err(Error::Invalid(format!(
                    "row {i} has {} neighbors, more than k = {k}",
                    row.len()
                )));
            }
            for c in row {
                if c.index == i || c.index >= len {
                    return Err(Error::Invalid(format!(
                        "row {i} has invalid neighbor {}",
                        c.index
                    )));
                }
                neighbors.push(c.index as u32);
                weights.push(c.score);
            }
            offsets.push(neighbors.len());
        }
        Ok(RelationMatrix {
            kind,
            k,
            offsets,
            neighbors,
            weights,
        })
    }

    pub fn kind(&self) -> MorphKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of rows (the vocabulary size).
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total number of stored neighbor links.
    pub fn nnz(&self) -> usize {
        self.neighbors.len()
    }

    pub fn row_range(&self, t: usize) -> std::ops::Range<usize> {
        self.offsets[t]..self.offsets[t + 1]
    }

    pub fn row_neighbors(&self, t: usize) -> &[u32] {
        &self.neighbors[self.row_range(t)]
    }

    pub fn row_weights(&self, t: usize) -> &[f64] {
        &self.weights[self.row_range(t)]
    }

    pub fn row(&self, t: usize) -> Vec<Candidate> {
        self.row_neighbors(t)
            .iter()
            .zip(self.row_weights(t))
            .map(|(&n, &w)| Candidate {
                index: n as usize,
                score: w,
            })
            .collect()
    }

    pub(crate) fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub(crate) fn neighbors(&self) -> &[u32] {
        &self.neighbors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// True when both matrices link exactly the same (row, neighbor) pairs.
    pub fn same_structure(&self, other: &RelationMatrix) -> bool {
        self.offsets == other.offsets && self.neighbors == other.neighbors
    }

    /// Writes `word<TAB>neighbor:weight ...` lines, one per vocabulary word.
    pub fn write<W: Write>(&self, words: &[String], mut w: W) -> std::io::Result<()> {
        for t in 0..self.len() {
            write!(w, "{}\t", words[t])?;
            for (i, (&n, &weight)) in self
                .row_neighbors(t)
                .iter()
                .zip(self.row_weights(t))
                .enumerate()
            {
                if i > 0 {
                    w.write_all(b" ")?;
                }
                write!(w, "{}:{:.6}", words[n as usize], weight)?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn save(&self, words: &[String], path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(words, BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn to_text(&self, words: &[String]) -> String {
        let mut buf = Vec::new();
        self.write(words, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("vocabulary words are UTF-8")
    }

    /// Reads a relation file written by [`RelationMatrix::write`]. Rows must
    /// appear in vocabulary order.
    pub fn read<R: BufRead>(reader: R, vocab: &Vocabulary, kind: MorphKind) -> std::result::Result<Self, (usize, String)> {
        let mut rows = Vec::with_capacity(vocab.len());
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| (lineno + 1, e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| (lineno + 1, msg);
            let (word, rest) = line
                .split_once('\t')
                .ok_or_else(|| err("expected word<TAB>neighbors".into()))?;
            let expected = vocab
                .words()
                .get(rows.len())
                .ok_or_else(|| err("more rows than vocabulary words".into()))?;
            if word != expected {
                return Err(err(format!("row for {word:?} where {expected:?} was expected")));
            }
            let mut row = Vec::new();
            for item in rest.split_whitespace() {
                let (n, w) = item
                    .rsplit_once(':')
                    .ok_or_else(|| err(format!("bad neighbor entry {item:?}")))?;
                let index = vocab
                    .index_of(n)
                    .ok_or_else(|| err(format!("unknown neighbor {n:?}")))?;
                let score: f64 = w
                    .parse()
                    .map_err(|_| err(format!("bad weight {w:?}")))?;
                row.push(Candidate { index, score });
            }
            rows.push(row);
        }
        if rows.len() != vocab.len() {
            return Err((0, format!("{} rows for {} vocabulary words", rows.len(), vocab.len())));
        }
        let k = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
        RelationMatrix::from_rows(kind, k, rows).map_err(|e| (0, e.to_string()))
    }

    pub fn load(path: &Path, vocab: &Vocabulary, kind: MorphKind) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file), vocab, kind).map_err(|(line, msg)| Error::parse(path, line, msg))
    }
}

/// Top-`k` neighbors of every vocabulary word under one knowledge kind.
/// Rows are computed in parallel.
pub fn build_relation(
    vocab: &Vocabulary,
    kind: MorphKind,
    k: usize,
    resources: &MorphResources,
) -> Result<RelationMatrix> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if !kind.is_single() {
        return Err(Error::Invalid(
            "build each single kind and merge them with combine_relations".into(),
        ));
    }
    let index = SimilarityIndex::new(vocab.words(), kind, resources)?;
    let rows: Vec<Vec<Candidate>> = (0..vocab.len())
        .into_par_iter()
        .map(|i| index.row(i, k))
        .collect();
    RelationMatrix::from_rows(kind, k, rows)
}

/// Merges neighbor lists by vote: a candidate's votes are the number of lists
/// that contain it. The `k` most-voted candidates are kept (ties to the lower
/// index) and weighted by the mean of their scores in those lists.
pub fn combine_lists(lists: &[Vec<Candidate>], k: usize) -> Vec<Candidate> {
    // index -> (votes, score sum)
    let mut tally: HashMap<usize, (usize, f64)> = HashMap::new();
    for list in lists {
        for c in list {
            let e = tally.entry(c.index).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += c.score;
        }
    }
    let mut ranked: Vec<(usize, usize, f64)> = tally
        .into_iter()
        .map(|(index, (votes, sum))| (index, votes, sum))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(k)
        .map(|(index, votes, sum)| Candidate {
            index,
            score: sum / votes as f64,
        })
        .collect()
}

/// Vote-based combination of per-kind relation matrices over one vocabulary.
pub fn combine_relations(per_kind: &[RelationMatrix], k: usize) -> Result<RelationMatrix> {
    let Some(first) = per_kind.first() else {
        return Err(Error::Invalid("nothing to combine".into()));
    };
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if per_kind.iter().any(|m| m.len() != first.len()) {
        return Err(Error::Invalid(
            "relation matrices cover different vocabularies".into(),
        ));
    }
    let rows = (0..first.len())
        .map(|t| {
            let lists: Vec<Vec<Candidate>> = per_kind.iter().map(|m| m.row(t)).collect();
            combine_lists(&lists, k)
        })
        .collect();
    RelationMatrix::from_rows(MorphKind::Combination, k, rows)
}

/// Builds the relation for any kind, including the vote-based combination.
/// For the combination the four single-kind matrices are returned as well.
pub fn build_any(
    vocab: &Vocabulary,
    kind: MorphKind,
    k: usize,
    resources: &MorphResources,
) -> Result<(RelationMatrix, Vec<RelationMatrix>)> {
    if kind.is_single() {
        return Ok((build_relation(vocab, kind, k, resources)?, Vec::new()));
    }
    let parts = MorphKind::SINGLE
        .iter()
        .map(|&kind| build_relation(vocab, kind, k, resources))
        .collect::<Result<Vec<_>>>()?;
    Ok((combine_relations(&parts, k)?, parts))
}

/// Scales non-negative weights to sum to one.
pub fn normalize_row(weights: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || total <= 0.0 || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::ZeroWeightRow);
    }
    Ok(weights.iter().map(|w| w / total).collect())
}
