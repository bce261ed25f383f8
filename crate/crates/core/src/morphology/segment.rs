//! Rule-based affix stripping used as the morpheme segmenter.

use std::path::Path;

use crate::error::{Error, Result};

const BUNDLED_AFFIXES: &str = include_str!("../../data/affixes.txt");

/// Prefix and suffix inventories plus the minimum stem length that stripping
/// must leave behind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentationRules {
    // both sorted by descending length so the first match is the longest
    prefixes: Vec<String>,
    suffixes: Vec<String>,
    min_stem_len: usize,
}

impl SegmentationRules {
    pub const DEFAULT_MIN_STEM_LEN: usize = 3;

    pub fn new<P, S>(prefixes: P, suffixes: S, min_stem_len: usize) -> Result<Self>
    where
        P: IntoIterator,
        P::Item: Into<String>,
        S: IntoIterator,
        S::Item: Into<String>,
    {
        if min_stem_len < 2 {
            return Err(Error::Config(format!(
                "min_stem_len must be at least 2, got {min_stem_len}"
            )));
        }
        let prepare = |items: Vec<String>| -> Result<Vec<String>> {
            if items.iter().any(String::is_empty) {
                return Err(Error::Config("affixes must be non-empty".into()));
            }
            let mut items = items;
            items.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            items.dedup();
            Ok(items)
        };
        Ok(SegmentationRules {
            prefixes: prepare(prefixes.into_iter().map(Into::into).collect())?,
            suffixes: prepare(suffixes.into_iter().map(Into::into).collect())?,
            min_stem_len,
        })
    }

    /// Parses an affix list with `[prefixes]` and `[suffixes]` sections.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str, min_stem_len: usize) -> std::result::Result<Self, (usize, String)> {
        enum Section {
            None,
            Prefixes,
            Suffixes,
        }
        let mut section = Section::None;
        let mut prefixes = Vec::new();
        let mut suffixes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[prefixes]" => section = Section::Prefixes,
                "[suffixes]" => section = Section::Suffixes,
                affix => match section {
                    Section::Prefixes => prefixes.push(affix.to_lowercase()),
                    Section::Suffixes => suffixes.push(affix.to_lowercase()),
                    Section::None => {
                        return Err((lineno + 1, "affix outside of a section".into()));
                    }
                },
            }
        }
        SegmentationRules::new(prefixes, suffixes, min_stem_len).map_err(|e| (0, e.to_string()))
    }

    pub fn load(path: &Path, min_stem_len: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, min_stem_len).map_err(|(line, msg)| Error::parse(path, line, msg))
    }

    /// The affix list shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_AFFIXES, Self::DEFAULT_MIN_STEM_LEN)
            .expect("bundled affix list is well-formed")
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    pub fn min_stem_len(&self) -> usize {
        self.min_stem_len
    }
}

/// Splits `word` into morphemes.
///
/// Prefixes are stripped greedily (longest match first) while the remaining
/// stem keeps at least `min_stem_len` bytes, then suffixes the same way. The
/// result lists the stripped prefixes outermost first, the stem, then the
/// suffixes innermost first, with duplicates removed.
pub fn segment_morphemes(word: &str, rules: &SegmentationRules) -> Vec<String> {
    let min = rules.min_stem_len;
    let mut stem = word;
    let mut front = Vec::new();
    while let Some(p) = rules
        .prefixes
        .iter()
        .find(|p| stem.len() >= p.len() + min && stem.starts_with(p.as_str()))
    {
        front.push(p.as_str());
        stem = &stem[p.len()..];
    }
    let mut back = Vec::new();
    while let Some(s) = rules
        .suffixes
        .iter()
        .find(|s| stem.len() >= s.len() + min && stem.ends_with(s.as_str()))
    {
        back.push(s.as_str());
        stem = &stem[..stem.len() - s.len()];
    }
    let mut out: Vec<String> = Vec::with_capacity(front.len() + back.len() + 1);
    for piece in front
        .into_iter()
        .chain(std::iter::once(stem))
        .chain(back.into_iter().rev())
    {
        if !out.iter().any(|m| m == piece) {
            out.push(piece.to_string());
        }
    }
    out
}
