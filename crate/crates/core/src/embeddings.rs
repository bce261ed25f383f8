//! Trained word vectors and their word2vec text and binary file formats.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::model::EmbeddingModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Text,
    Binary,
}

impl EmbeddingFormat {
    /// Binary for a `.bin` extension, text otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") => EmbeddingFormat::Binary,
            _ => EmbeddingFormat::Text,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    /// Row-major `len x dim`.
    data: Vec<f64>,
}

impl Embeddings {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != words.len() * dim {
            return Err(Error::Invalid(format!(
                "{} values cannot hold {} vectors of dimension {dim}",
                data.len(),
                words.len()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Invalid(format!("invalid word {w:?}")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate word {w:?}")));
            }
        }
        Ok(Embeddings {
            words,
            index,
            dim,
            data,
        })
    }

    /// The input vectors of a trained model.
    pub fn from_model(vocab: &Vocabulary, model: &EmbeddingModel) -> Self {
        Embeddings::new(vocab.words().to_vec(), model.dim(), model.input().to_vec())
            .expect("model shape matches its vocabulary")
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector_of(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.vector(i))
    }

    /// Copy with every row scaled to unit length; zero rows stay zero.
    pub fn unit_rows(&self) -> Vec<f64> {
        let mut out = self.data.clone();
        for row in out.chunks_mut(self.dim) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        out
    }

    /// The `n` words with highest cosine similarity to word `i`, excluding
    /// `i`; ties go to the lower index.
    pub fn nearest(&self, i: usize, n: usize) -> Vec<(usize, f64)> {
        let q = self.vector(i);
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .filter(|&j| j != i)
            .map(|j| (j, cosine(q, self.vector(j))))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(n);
        scored
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        let mut line = String::new();
        for (i, word) in self.words.iter().enumerate() {
            line.clear();
            line.push_str(word);
            for &x in self.vector(i) {
                line.push(' ');
                line.push_str(&format_g6(x));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, word) in self.words.iter().enumerate() {
            w.write_all(word.as_bytes())?;
            w.write_all(b" ")?;
            for &x in self.vector(i) {
                w.write_all(&(x as f32).to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_text<R: BufRead>(reader: R) -> std::result::Result<Self, (usize, String)> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or((1, "missing header".to_string()))?
            .map_err(|e| (1, e.to_string()))?;
        let (count, dim) = parse_header(&header).map_err(|m| (1, m))?;
        let mut words = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(|e| (lineno, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap_or_default();
            let before = data.len();
            for f in fields {
                let x: f64 = f
                    .parse()
                    .map_err(|_| (lineno, format!("bad number {f:?}")))?;
                data.push(x);
            }
            if data.len() - before != dim {
                return Err((
                    lineno,
                    format!("expected {dim} values, found {}", data.len() - before),
                ));
            }
            words.push(word.to_string());
        }
        if words.len() != count {
            return Err((0, format!("header promises {count} words, found {}", words.len())));
        }
        Embeddings::new(words, dim, data).map_err(|e| (0, e.to_string()))
    }

    pub fn read_binary<R: Read>(reader: R) -> std::result::Result<Self, (usize, String)> {
        let mut r = BufReader::new(reader);
        let mut header = String::new();
        r.read_line(&mut header).map_err(|e| (1, e.to_string()))?;
        let (count, dim) = parse_header(header.trim_end()).map_err(|m| (1, m))?;
        let mut words = Vec::with_capacity(count);
        let mut data = Vec::with_capacity(count * dim);
        let mut buf = vec![0u8; 4 * dim];
        for i in 0..count {
            let mut word = Vec::new();
            r.read_until(b' ', &mut word).map_err(|e| (i + 2, e.to_string()))?;
            if word.pop() != Some(b' ') {
                return Err((i + 2, "truncated file".into()));
            }
            // some writers separate records with a newline
            let word: Vec<u8> = word.into_iter().skip_while(|&b| b == b'\n').collect();
            let word = String::from_utf8(word).map_err(|_| (i + 2, "word is not UTF-8".to_string()))?;
            r.read_exact(&mut buf).map_err(|e| (i + 2, e.to_string()))?;
            data.extend(
                buf.chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64),
            );
            words.push(word);
        }
        Embeddings::new(words, dim, data).map_err(|e| (0, e.to_string()))
    }

    pub fn save(&self, path: &Path, format: EmbeddingFormat) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let w = BufWriter::new(file);
        match format {
            EmbeddingFormat::Text => self.write_text(w),
            EmbeddingFormat::Binary => self.write_binary(w),
        }
        .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, format: EmbeddingFormat) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        match format {
            EmbeddingFormat::Text => Self::read_text(BufReader::new(file)),
            EmbeddingFormat::Binary => Self::read_binary(file),
        }
        .map_err(|(line, msg)| Error::parse(path, line, msg))
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("words are UTF-8")
    }
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize), String> {
    let mut it = line.split_whitespace();
    let count = it.next().and_then(|x| x.parse().ok());
    let dim = it.next().and_then(|x| x.parse().ok());
    match (count, dim, it.next()) {
        (Some(c), Some(d), None) if d > 0 => Ok((c, d)),
        _ => Err(format!("bad header {line:?}, expected `count dim`")),
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

/// Six significant digits in the style of C's `%g`.
pub fn format_g6(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
