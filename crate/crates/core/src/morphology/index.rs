use std::collections::HashMap;

use super::{hyphenate, segment_morphemes, strings, MorphKind, MorphResources};
use crate::error::{Error, Result};

/// A scored neighbor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub index: usize,
    pub score: f64,
}

/// A word prepared for scoring against a [`SimilarityIndex`].
#[derive(Clone, Debug)]
pub struct Query {
    bytes: Vec<u8>,
    set: Vec<u32>,
}

/// Precomputed per-word features for one knowledge kind, used to score one
/// word against a whole word list quickly.
///
/// Edit and LCS scans skip candidates whose length ratio alone cannot beat
/// the current k-th best score.
pub struct SimilarityIndex<'a> {
    kind: MorphKind,
    words: Vec<&'a [u8]>,
    sets: Vec<Vec<u32>>,
    interner: HashMap<String, u32>,
    resources: &'a MorphResources,
}

impl<'a> SimilarityIndex<'a> {
    pub fn new(words: &'a [String], kind: MorphKind, resources: &'a MorphResources) -> Result<Self> {
        if !kind.is_single() {
            return Err(Error::Invalid(
                "a similarity index needs a single knowledge kind".into(),
            ));
        }
        let mut index = SimilarityIndex {
            kind,
            words: words.iter().map(|w| w.as_bytes()).collect(),
            sets: Vec::new(),
            interner: HashMap::new(),
            resources,
        };
        if matches!(kind, MorphKind::Morpheme | MorphKind::Syllable) {
            let mut sets = Vec::with_capacity(words.len());
            for w in words {
                let pieces = index.pieces(w);
                let mut ids: Vec<u32> = pieces
                    .into_iter()
                    .map(|p| {
                        let next = index.interner.len() as u32;
                        *index.interner.entry(p).or_insert(next)
                    })
                    .collect();
                ids.sort_unstable();
                ids.dedup();
                sets.push(ids);
            }
            index.sets = sets;
        }
        Ok(index)
    }

    pub fn kind(&self) -> MorphKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    fn pieces(&self, word: &str) -> Vec<String> {
        match self.kind {
            MorphKind::Morpheme => segment_morphemes(word, &self.resources.rules),
            MorphKind::Syllable => hyphenate(word, &self.resources.patterns),
            _ => Vec::new(),
        }
    }

    pub fn query(&self, word: &str) -> Query {
        let mut set: Vec<u32> = self
            .pieces(word)
            .into_iter()
            .enumerate()
            // unseen pieces get ids that cannot collide with the word list
            .map(|(i, p)| self.interner.get(&p).copied().unwrap_or(u32::MAX - i as u32))
            .collect();
        set.sort_unstable();
        set.dedup();
        Query {
            bytes: word.as_bytes().to_vec(),
            set,
        }
    }

    /// Query for the `i`-th indexed word.
    pub fn query_at(&self, i: usize) -> Query {
        Query {
            bytes: self.words[i].to_vec(),
            set: self.sets.get(i).cloned().unwrap_or_default(),
        }
    }

    /// Cheap upper bound on `score(q, j)`.
    fn bound(&self, q: &Query, j: usize) -> f64 {
        let (a, b) = match self.kind {
            MorphKind::Edit | MorphKind::Lcs => (q.bytes.len(), self.words[j].len()),
            _ => (q.set.len(), self.sets[j].len()),
        };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if hi == 0 {
            return 0.0;
        }
        match self.kind {
            MorphKind::Edit => 1.0 - (hi - lo) as f64 / hi as f64,
            _ => lo as f64 / hi as f64,
        }
    }

    pub fn score(&self, q: &Query, j: usize, scratch: &mut Vec<usize>) -> f64 {
        let w = self.words[j];
        match self.kind {
            MorphKind::Edit => {
                let longest = q.bytes.len().max(w.len());
                if longest == 0 {
                    return 1.0;
                }
                let d = strings::edit_distance_with(&q.bytes, w, scratch);
                1.0 - d as f64 / longest as f64
            }
            MorphKind::Lcs => {
                let longest = q.bytes.len().max(w.len());
                if longest == 0 {
                    return 1.0;
                }
                strings::lcs_length_with(&q.bytes, w, scratch) as f64 / longest as f64
            }
            _ => {
                let other = &self.sets[j];
                let longest = q.set.len().max(other.len());
                if longest == 0 {
                    return 0.0;
                }
                sorted_intersection(&q.set, other) as f64 / longest as f64
            }
        }
    }

    /// The `k` highest-scoring words with positive score, best first; ties go
    /// to the lower index.
    pub fn top_k(&self, q: &Query, k: usize, exclude: Option<usize>) -> Vec<Candidate> {
        let mut top: Vec<Candidate> = Vec::with_capacity(k + 1);
        if k == 0 {
            return top;
        }
        let mut scratch = Vec::new();
        for j in 0..self.words.len() {
            if Some(j) == exclude {
                continue;
            }
            let floor = if top.len() == k { top[k - 1].score } else { 0.0 };
            if self.bound(q, j) <= floor {
                continue;
            }
            let score = self.score(q, j, &mut scratch);
            if score <= floor {
                continue;
            }
            let at = top.partition_point(|c| c.score >= score);
            top.insert(at, Candidate { index: j, score });
            top.truncate(k);
        }
        top
    }

    /// Neighbors of indexed word `i`, excluding itself.
    pub fn row(&self, i: usize, k: usize) -> Vec<Candidate> {
        self.top_k(&self.query_at(i), k, Some(i))
    }
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}
