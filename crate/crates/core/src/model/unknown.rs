use crate::embeddings::Embeddings;
use crate::error::{Error, Result};
use crate::morphology::{Candidate, MorphKind, MorphResources, SimilarityIndex};
use crate::relation::{combine_lists, normalize_row};

/// An embedding synthesized for an unseen word, with the known words it was
/// built from and their normalized weights.
#[derive(Clone, Debug, PartialEq)]
pub struct UnknownEstimate {
    pub vector: Vec<f64>,
    pub neighbors: Vec<Candidate>,
}

/// Reusable similarity indices over a known vocabulary, for synthesizing
/// many unseen-word embeddings.
pub struct UnknownPredictor<'a> {
    embeddings: &'a Embeddings,
    indices: Vec<SimilarityIndex<'a>>,
    top: usize,
}

impl<'a> UnknownPredictor<'a> {
    pub fn new(
        embeddings: &'a Embeddings,
        resources: &'a MorphResources,
        kind: MorphKind,
        top: usize,
    ) -> Result<Self> {
        if top == 0 {
            return Err(Error::Config("top must be at least 1".into()));
        }
        let kinds: &[MorphKind] = if kind.is_single() {
            std::slice::from_ref(match kind {
                MorphKind::Edit => &MorphKind::SINGLE[0],
                MorphKind::Lcs => &MorphKind::SINGLE[1],
                MorphKind::Morpheme => &MorphKind::SINGLE[2],
                _ => &MorphKind::SINGLE[3],
            })
        } else {
            &MorphKind::SINGLE
        };
        let indices = kinds
            .iter()
            .map(|&k| SimilarityIndex::new(embeddings.words(), k, resources))
            .collect::<Result<Vec<_>>>()?;
        Ok(UnknownPredictor {
            embeddings,
            indices,
            top,
        })
    }

    /// The known words most similar to `word`, with raw scores.
    pub fn candidates(&self, word: &str) -> Vec<Candidate> {
        let lists: Vec<Vec<Candidate>> = self
            .indices
            .iter()
            .map(|index| index.top_k(&index.query(word), self.top, None))
            .collect();
        match lists.len() {
            1 => lists.into_iter().next().unwrap_or_default(),
            _ => combine_lists(&lists, self.top),
        }
    }

    pub fn predict(&self, word: &str) -> Result<UnknownEstimate> {
        if word.is_empty() {
            return Err(Error::Invalid("cannot predict an empty word".into()));
        }
        if self.embeddings.index_of(word).is_some() {
            return Err(Error::KnownWord(word.to_string()));
        }
        let found = self.candidates(word);
        if found.is_empty() {
            return Err(Error::NoCandidates(word.to_string()));
        }
        let raw: Vec<f64> = found.iter().map(|c| c.score).collect();
        let weights = normalize_row(&raw).map_err(|_| Error::NoCandidates(word.to_string()))?;
        let mut vector = vec![0.0; self.embeddings.dim()];
        let mut neighbors = Vec::with_capacity(found.len());
        for (c, w) in found.iter().zip(weights) {
            for (v, x) in vector.iter_mut().zip(self.embeddings.vector(c.index)) {
                *v += w * x;
            }
            neighbors.push(Candidate {
                index: c.index,
                score: w,
            });
        }
        Ok(UnknownEstimate { vector, neighbors })
    }
}

/// Embedding for a word outside the vocabulary: the normalized-score
/// weighted sum of its `top` most similar known words.
pub fn predict_unknown(
    word: &str,
    embeddings: &Embeddings,
    resources: &MorphResources,
    kind: MorphKind,
    top: usize,
) -> Result<UnknownEstimate> {
    UnknownPredictor::new(embeddings, resources, kind, top)?.predict(word)
}
