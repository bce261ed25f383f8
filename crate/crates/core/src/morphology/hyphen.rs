//! Liang's pattern-based hyphenation, reading TeX `\patterns` files.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

const BUNDLED_PATTERNS: &str = include_str!("../../data/hyph-en-us.tex");

/// Letters that must stay together at the start and at the end of a word.
const LEFT_MIN: usize = 2;
const RIGHT_MIN: usize = 2;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HyphenationPatterns {
    /// Letter string (with `.` as word boundary) to inter-letter weights; each
    /// value is one longer than its key.
    patterns: HashMap<Vec<u8>, Vec<u8>>,
    exceptions: HashMap<String, Vec<String>>,
    max_pattern_len: usize,
}

impl HyphenationPatterns {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one pattern in TeX notation, e.g. `.ach4` or `hy3ph`.
    pub fn add_pattern(&mut self, pattern: &str) -> std::result::Result<(), String> {
        let mut letters = Vec::with_capacity(pattern.len());
        let mut weights = vec![0u8];
        for b in pattern.bytes() {
            if b.is_ascii_digit() {
                *weights.last_mut().unwrap() = b - b'0';
            } else if b.is_ascii_alphabetic() || b == b'.' || !b.is_ascii() {
                letters.push(b.to_ascii_lowercase());
                weights.push(0);
            } else {
                return Err(format!("unexpected character {:?} in pattern {pattern:?}", b as char));
            }
        }
        if letters.is_empty() {
            return Err(format!("pattern {pattern:?} has no letters"));
        }
        self.max_pattern_len = self.max_pattern_len.max(letters.len());
        self.patterns.insert(letters, weights);
        Ok(())
    }

    /// Adds a hyphenation exception such as `psy-cho-lo-gy`.
    pub fn add_exception(&mut self, hyphenated: &str) {
        let word: String = hyphenated.chars().filter(|&c| c != '-').collect();
        let parts = hyphenated
            .split('-')
            .filter(|p| !p.is_empty())
            .map(str::to_lowercase)
            .collect();
        self.exceptions.insert(word.to_lowercase(), parts);
    }

    /// Parses TeX pattern syntax: `%` comments, a `\patterns{...}` block and
    /// an optional `\hyphenation{...}` block of exceptions. Bare pattern
    /// lines outside any block are read as patterns.
    pub fn parse(text: &str) -> std::result::Result<Self, (usize, String)> {
        #[derive(PartialEq)]
        enum Block {
            Patterns,
            Exceptions,
        }
        let mut out = HyphenationPatterns::new();
        let mut block = Block::Patterns;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('%').next().unwrap_or("");
            let spaced = line.replace('{', " { ").replace('}', " } ");
            for token in spaced.split_whitespace() {
                match token {
                    "\\patterns" => block = Block::Patterns,
                    "\\hyphenation" => block = Block::Exceptions,
                    "{" => {}
                    "}" => block = Block::Patterns,
                    t if t.starts_with('\\') => {
                        return Err((lineno + 1, format!("unsupported command {t}")));
                    }
                    t if block == Block::Exceptions => out.add_exception(t),
                    t => out.add_pattern(t).map_err(|msg| (lineno + 1, msg))?,
                }
            }
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|(line, msg)| Error::parse(path, line, msg))
    }

    /// US English patterns shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_PATTERNS).expect("bundled hyphenation patterns are well-formed")
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, letters: &str) -> Option<&[u8]> {
        self.patterns.get(letters.as_bytes()).map(Vec::as_slice)
    }

    /// Byte offsets inside `word` where a hyphen may go.
    pub fn break_points(&self, word: &str) -> Vec<usize> {
        let n = word.len();
        if n < LEFT_MIN + RIGHT_MIN {
            return Vec::new();
        }
        let mut wrapped = Vec::with_capacity(n + 2);
        wrapped.push(b'.');
        wrapped.extend(word.bytes().map(|b| b.to_ascii_lowercase()));
        wrapped.push(b'.');
        // levels[m] is the weight just before wrapped[m]
        let mut levels = vec![0u8; wrapped.len() + 1];
        for start in 0..wrapped.len() {
            let end_max = (start + self.max_pattern_len).min(wrapped.len());
            for end in start + 1..=end_max {
                if let Some(weights) = self.patterns.get(&wrapped[start..end]) {
                    for (offset, &w) in weights.iter().enumerate() {
                        let slot = &mut levels[start + offset];
                        *slot = (*slot).max(w);
                    }
                }
            }
        }
        // a break before word byte p sits before wrapped[p + 1]
        (LEFT_MIN..=n - RIGHT_MIN)
            .filter(|&p| levels[p + 1] % 2 == 1 && word.is_char_boundary(p))
            .collect()
    }
}

/// Splits `word` into syllables. The pieces concatenate back to `word`.
pub fn hyphenate(word: &str, patterns: &HyphenationPatterns) -> Vec<String> {
    if let Some(parts) = patterns.exceptions.get(&word.to_lowercase()) {
        if parts.concat().len() == word.len() {
            let mut out = Vec::with_capacity(parts.len());
            let mut at = 0;
            for p in parts {
                out.push(word[at..at + p.len()].to_string());
                at += p.len();
            }
            return out;
        }
    }
    let mut out = Vec::new();
    let mut last = 0;
    for p in patterns.break_points(word) {
        out.push(word[last..p].to_string());
        last = p;
    }
    out.push(word[last..].to_string());
    out
}
