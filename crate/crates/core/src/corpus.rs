//! Text cleaning, vocabulary construction and the negative-sampling noise
//! distribution.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

const DIGIT_WORDS: [&str; 10] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
];

/// Streaming form of [`preprocess_text`].
///
/// Feeding a byte stream in arbitrary chunks and then calling
/// [`Preprocessor::finish`] produces exactly the output of `preprocess_text`
/// on the concatenation.
#[derive(Debug, Default)]
pub struct Preprocessor {
    in_word: bool,
    emitted_any: bool,
    // bytes of a UTF-8 sequence split across chunks
    pending: Vec<u8>,
}

impl Preprocessor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the cleaned form of `chunk` to `out`.
    pub fn feed(&mut self, chunk: &[u8], out: &mut String) {
        let owned;
        let mut rest: &[u8] = if self.pending.is_empty() {
            chunk
        } else {
            let mut joined = std::mem::take(&mut self.pending);
            joined.extend_from_slice(chunk);
            owned = joined;
            &owned
        };
        loop {
            match std::str::from_utf8(rest) {
                Ok(valid) => {
                    self.push_str(valid, out);
                    return;
                }
                Err(e) => {
                    let (valid, tail) = rest.split_at(e.valid_up_to());
                    // SAFETY: `valid_up_to` marks the end of a valid prefix.
                    self.push_str(unsafe { std::str::from_utf8_unchecked(valid) }, out);
                    match e.error_len() {
                        // invalid bytes are dropped
                        Some(len) => rest = &tail[len..],
                        None => {
                            self.pending = tail.to_vec();
                            return;
                        }
                    }
                }
            }
        }
    }

    /// Flushes the stream; a truncated trailing UTF-8 sequence is dropped.
    pub fn finish(&mut self) {
        self.pending.clear();
    }

    fn push_str(&mut self, text: &str, out: &mut String) {
        for ch in text.chars() {
            match ch {
                'a'..='z' | 'A'..='Z' => {
                    if !self.in_word {
                        if self.emitted_any {
                            out.push(' ');
                        }
                        self.in_word = true;
                        self.emitted_any = true;
                    }
                    out.push(ch.to_ascii_lowercase());
                }
                '0'..='9' => {
                    if self.emitted_any {
                        out.push(' ');
                    }
                    out.push_str(DIGIT_WORDS[ch as usize - '0' as usize]);
                    self.emitted_any = true;
                    self.in_word = false;
                }
                _ => self.in_word = false,
            }
        }
    }
}

/// Lowercases ASCII letters, spells out each digit as its own word and turns
/// every other character into a separator. Words in the output are separated
/// by single spaces. Bytes that are not valid UTF-8 are dropped.
pub fn preprocess_text(raw: &[u8]) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pre = Preprocessor::new();
    pre.feed(raw, &mut out);
    pre.finish();
    out
}

/// Streams `input` through the preprocessor into `output`.
pub fn preprocess_stream<R: Read, W: Write>(input: R, mut output: W) -> std::io::Result<()> {
    let mut reader = BufReader::with_capacity(1 << 16, input);
    let mut pre = Preprocessor::new();
    let mut buf = String::new();
    loop {
        let chunk = reader.fill_buf()?;
        if chunk.is_empty() {
            break;
        }
        let len = chunk.len();
        buf.clear();
        pre.feed(chunk, &mut buf);
        reader.consume(len);
        output.write_all(buf.as_bytes())?;
    }
    pre.finish();
    output.flush()
}

/// Frequency-ranked vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    total_tokens: u64,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from `(word, count)` pairs that are already in
    /// non-increasing count order.
    pub fn from_counts(entries: Vec<(String, u64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("vocabulary is empty".into()));
        }
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (word, count)) in entries.into_iter().enumerate() {
            if i > 0 && count > counts[i - 1] {
                return Err(Error::Invalid(format!(
                    "vocabulary counts must be non-increasing (word {word:?})"
                )));
            }
            if index.insert(word.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate vocabulary word {word:?}")));
            }
            words.push(word);
            counts.push(count);
        }
        let total_tokens = counts.iter().sum();
        Ok(Vocabulary {
            words,
            counts,
            total_tokens,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts[idx]
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (word, count) in self.words.iter().zip(&self.counts) {
            writeln!(w, "{word}\t{count}")?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, lineno + 1, "expected word<TAB>count"))?;
            let count = count
                .parse()
                .map_err(|_| Error::parse(path, lineno + 1, format!("bad count {count:?}")))?;
            entries.push((word.to_string(), count));
        }
        Vocabulary::from_counts(entries).map_err(|e| Error::parse(path, 0, e.to_string()))
    }
}

/// Counts whitespace-separated tokens and keeps words seen at least
/// `min_count` times. Ties in frequency keep first-occurrence order.
pub fn build_vocab<'a, I>(tokens: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a str>,
{
    if min_count == 0 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    // word -> (count, first occurrence)
    let mut seen: HashMap<&'a str, (u64, usize)> = HashMap::new();
    for token in tokens {
        let next = seen.len();
        seen.entry(token).or_insert((0, next)).0 += 1;
    }
    let mut kept: Vec<(&str, u64, usize)> = seen
        .into_iter()
        .filter(|(_, (count, _))| *count >= min_count)
        .map(|(w, (count, first))| (w, count, first))
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary(min_count));
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    Vocabulary::from_counts(kept.into_iter().map(|(w, c, _)| (w.to_string(), c)).collect())
}

/// Cumulative distribution of the noise distribution `count^{3/4} / Z`.
#[derive(Clone, Debug)]
pub struct NoiseTable {
    cumulative: Vec<f64>,
}

impl NoiseTable {
    pub const POWER: f64 = 0.75;

    pub fn new(vocab: &Vocabulary) -> Self {
        let masses: Vec<f64> = vocab
            .counts()
            .iter()
            .map(|&c| (c as f64).powf(Self::POWER))
            .collect();
        let z: f64 = masses.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = masses
            .iter()
            .map(|m| {
                acc += m;
                acc / z
            })
            .collect();
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        NoiseTable { cumulative }
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Probability mass of word `idx`.
    pub fn mass(&self, idx: usize) -> f64 {
        match idx {
            0 => self.cumulative[0],
            _ => self.cumulative[idx] - self.cumulative[idx - 1],
        }
    }

    /// Draws one word index. Consumes exactly one `f64` from `rng`.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Corpus as vocabulary indices; out-of-vocabulary tokens are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenStream {
    tokens: Vec<u32>,
}

impl TokenStream {
    pub fn new<'a, I>(tokens: I, vocab: &Vocabulary) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let tokens = tokens
            .into_iter()
            .filter_map(|t| vocab.index_of(t))
            .map(|i| i as u32)
            .collect();
        TokenStream { tokens }
    }

    pub fn from_indices(tokens: Vec<u32>) -> Self {
        TokenStream { tokens }
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Reads a whole text file. Invalid UTF-8 is replaced, which the cleaning
/// rules then treat as separators.
pub fn read_text(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(match String::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => String::from_utf8_lossy(e.as_bytes()).into_owned(),
    })
}
