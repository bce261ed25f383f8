//! Morphological similarity between words: edit distance, longest common
//! substring, shared morphemes and shared syllables.

mod hyphen;
mod index;
mod segment;
mod strings;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

pub use hyphen::{hyphenate, HyphenationPatterns};
pub use index::{Candidate, SimilarityIndex};
pub use segment::{segment_morphemes, SegmentationRules};
pub use strings::{edit_distance, lcs_length, sim_edit, sim_lcs};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MorphKind {
    Edit,
    Lcs,
    Morpheme,
    Syllable,
    /// Vote over the four single kinds; only meaningful for whole neighbor
    /// lists, never as a pairwise score.
    Combination,
}

impl MorphKind {
    pub const SINGLE: [MorphKind; 4] = [
        MorphKind::Edit,
        MorphKind::Lcs,
        MorphKind::Morpheme,
        MorphKind::Syllable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MorphKind::Edit => "edit",
            MorphKind::Lcs => "lcs",
            MorphKind::Morpheme => "morpheme",
            MorphKind::Syllable => "syllable",
            MorphKind::Combination => "combination",
        }
    }

    pub fn is_single(self) -> bool {
        self != MorphKind::Combination
    }
}

impl fmt::Display for MorphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MorphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "edit" => Ok(MorphKind::Edit),
            "lcs" => Ok(MorphKind::Lcs),
            "morpheme" => Ok(MorphKind::Morpheme),
            "syllable" => Ok(MorphKind::Syllable),
            "combination" => Ok(MorphKind::Combination),
            other => Err(Error::Config(format!("unknown morphology kind {other:?}"))),
        }
    }
}

/// Affix rules and hyphenation patterns needed by the morpheme and syllable
/// similarities.
#[derive(Clone, Debug)]
pub struct MorphResources {
    pub rules: SegmentationRules,
    pub patterns: HyphenationPatterns,
}

impl MorphResources {
    pub fn bundled() -> Self {
        static BUNDLED: OnceLock<MorphResources> = OnceLock::new();
        BUNDLED
            .get_or_init(|| MorphResources {
                rules: SegmentationRules::bundled(),
                patterns: HyphenationPatterns::bundled(),
            })
            .clone()
    }

    /// Loads resources from files, falling back to the bundled data for any
    /// path not given.
    pub fn load(affixes: Option<&Path>, patterns: Option<&Path>) -> Result<Self> {
        Ok(MorphResources {
            rules: match affixes {
                Some(p) => SegmentationRules::load(p, SegmentationRules::DEFAULT_MIN_STEM_LEN)?,
                None => SegmentationRules::bundled(),
            },
            patterns: match patterns {
                Some(p) => HyphenationPatterns::load(p)?,
                None => HyphenationPatterns::bundled(),
            },
        })
    }
}

/// `|A ∩ B| / max(|A|, |B|)` over two collections treated as sets.
pub(crate) fn overlap_ratio<T: PartialEq>(a: &[T], b: &[T]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    let mut shared = 0;
    for (i, x) in a.iter().enumerate() {
        if !a[..i].contains(x) && b.contains(x) {
            shared += 1;
        }
    }
    shared as f64 / longest as f64
}

fn dedup<T: PartialEq>(items: Vec<T>) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(items.len());
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

pub fn sim_morpheme(a: &str, b: &str, rules: &SegmentationRules) -> f64 {
    overlap_ratio(&segment_morphemes(a, rules), &segment_morphemes(b, rules))
}

pub fn sim_syllable(a: &str, b: &str, patterns: &HyphenationPatterns) -> f64 {
    overlap_ratio(
        &dedup(hyphenate(a, patterns)),
        &dedup(hyphenate(b, patterns)),
    )
}

/// Pairwise similarity for a single knowledge kind.
pub fn similarity(kind: MorphKind, a: &str, b: &str, res: &MorphResources) -> Result<f64> {
    Ok(match kind {
        MorphKind::Edit => sim_edit(a, b),
        MorphKind::Lcs => sim_lcs(a, b),
        MorphKind::Morpheme => sim_morpheme(a, b, &res.rules),
        MorphKind::Syllable => sim_syllable(a, b, &res.patterns),
        MorphKind::Combination => {
            return Err(Error::Invalid(
                "the combination kind has no pairwise score".into(),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn overlap_examples() {
        let f1 = strings(&["in", "convenient", "ly"]);
        let f2 = strings(&["in", "convenient"]);
        assert!((overlap_ratio(&f1, &f2) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(overlap_ratio(&f1, &f1), 1.0);
        assert_eq!(overlap_ratio(&f1, &strings(&["cat"])), 0.0);
        let g1 = strings(&["psy", "cho", "lo", "gy"]);
        let g2 = strings(&["cho", "lo"]);
        assert_eq!(overlap_ratio(&g1, &g2), 0.5);
    }

    #[test]
    fn kind_names_roundtrip() {
        for kind in MorphKind::SINGLE.iter().chain([&MorphKind::Combination]) {
            assert_eq!(kind.name().parse::<MorphKind>().unwrap(), *kind);
        }
        assert!("nope".parse::<MorphKind>().is_err());
    }

    #[test]
    fn combination_has_no_pairwise_score() {
        let res = MorphResources::bundled();
        assert!(similarity(MorphKind::Combination, "a", "b", &res).is_err());
    }

    #[test]
    fn identical_words_score_one() {
        let res = MorphResources::bundled();
        for w in ["convenient", "a", "psychology", "rerun"] {
            for kind in MorphKind::SINGLE {
                assert_eq!(similarity(kind, w, w, &res).unwrap(), 1.0, "{kind} {w}");
            }
        }
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-e]{1,9}"
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn scores_symmetric_and_bounded(a in word(), b in word()) {
            let res = MorphResources::bundled();
            for kind in MorphKind::SINGLE {
                let ab = similarity(kind, &a, &b, &res).unwrap();
                let ba = similarity(kind, &b, &a, &res).unwrap();
                prop_assert_eq!(ab, ba);
                prop_assert!((0.0..=1.0).contains(&ab));
            }
        }

        #[test]
        fn edit_triangle_inequality(a in word(), b in word(), c in word()) {
            prop_assert!(edit_distance(&a, &c) <= edit_distance(&a, &b) + edit_distance(&b, &c));
        }

        #[test]
        fn syllables_concatenate_to_word(w in "[a-z]{1,16}") {
            let patterns = HyphenationPatterns::bundled();
            prop_assert_eq!(hyphenate(&w, &patterns).concat(), w);
        }
    }
}
