//! Independent reference implementations used as test oracles. Nothing here
//! calls the code it is checked against.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::{Path, PathBuf};

use knet::corpus::Vocabulary;
use knet::morphology::{hyphenate, segment_morphemes, MorphKind, MorphResources};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// The raw Wikipedia excerpt, decompressed.
pub fn wiki_excerpt() -> Vec<u8> {
    let file = std::fs::File::open(data_dir().join("enwiki-excerpt.xml.gz")).expect("corpus");
    let mut raw = Vec::new();
    flate2::read::GzDecoder::new(file)
        .read_to_end(&mut raw)
        .expect("gzip");
    raw
}

/// Levenshtein distance by memoized recursion over suffixes.
pub fn edit_distance_oracle(a: &[u8], b: &[u8]) -> usize {
    fn go(a: &[u8], b: &[u8], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        if let Some(&d) = memo.get(&(a.len(), b.len())) {
            return d;
        }
        let d = if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            1 + go(&a[1..], b, memo)
                .min(go(a, &b[1..], memo))
                .min(go(&a[1..], &b[1..], memo))
        };
        memo.insert((a.len(), b.len()), d);
        d
    }
    go(a, b, &mut HashMap::new())
}

/// Longest common contiguous substring by enumerating every substring of `a`.
pub fn lcs_oracle(a: &[u8], b: &[u8]) -> usize {
    let mut best = 0;
    for i in 0..a.len() {
        for j in i + 1..=a.len() {
            let s = &a[i..j];
            if s.len() > best && b.windows(s.len()).any(|w| w == s) {
                best = s.len();
            }
        }
    }
    best
}

fn set_overlap(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / longest as f64
}

/// Pairwise similarity computed from the oracles above and the plain
/// segmentations.
pub fn similarity_oracle(kind: MorphKind, a: &str, b: &str, res: &MorphResources) -> f64 {
    let longest = a.len().max(b.len()) as f64;
    match kind {
        MorphKind::Edit => 1.0 - edit_distance_oracle(a.as_bytes(), b.as_bytes()) as f64 / longest,
        MorphKind::Lcs => lcs_oracle(a.as_bytes(), b.as_bytes()) as f64 / longest,
        MorphKind::Morpheme => set_overlap(
            &segment_morphemes(a, &res.rules).into_iter().collect(),
            &segment_morphemes(b, &res.rules).into_iter().collect(),
        ),
        MorphKind::Syllable => set_overlap(
            &hyphenate(a, &res.patterns).into_iter().collect(),
            &hyphenate(b, &res.patterns).into_iter().collect(),
        ),
        MorphKind::Combination => unreachable!("no pairwise score"),
    }
}

/// All-pairs top-k: every other word with a positive score, best first,
/// ties to the lower index.
pub fn top_k_oracle(
    words: &[String],
    kind: MorphKind,
    k: usize,
    res: &MorphResources,
) -> Vec<Vec<(usize, f64)>> {
    (0..words.len())
        .map(|i| {
            let mut scored: Vec<(usize, f64)> = (0..words.len())
                .filter(|&j| j != i)
                .map(|j| (j, similarity_oracle(kind, &words[i], &words[j], res)))
                .filter(|&(_, s)| s > 0.0)
                .collect();
            scored.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
            scored.truncate(k);
            scored
        })
        .collect()
}

/// Distinct lowercase words from the rare-word pairs, in file order.
pub fn rareword_words(n: usize) -> Vec<String> {
    let text = std::fs::read_to_string(data_dir().join("rareword.txt")).expect("rareword");
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for line in text.lines() {
        for w in line.split('\t').take(2) {
            let w = w.to_lowercase();
            if w.bytes().all(|c| c.is_ascii_lowercase()) && seen.insert(w.clone()) {
                out.push(w);
                if out.len() == n {
                    return out;
                }
            }
        }
    }
    out
}

/// Vocabulary over `words` with strictly decreasing counts, so indices follow
/// the given order.
pub fn ranked_vocab(words: &[String]) -> Vocabulary {
    let n = words.len() as u64;
    Vocabulary::from_counts(
        words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), n - i as u64 + 1))
            .collect(),
    )
    .unwrap()
}

fn log_sigmoid(x: f64) -> f64 {
    -(1.0 + (-x).exp()).ln()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Plain Skip-gram with negative sampling, written from the textbook update
/// and the documented sampling protocol: a ChaCha8 stream seeded with
/// `seed` first fills the input rows, then for every (center, context) pair
/// draws `negatives` uniform reals, each mapped to the first word whose
/// cumulative `count^0.75` mass exceeds it. The learning rate falls linearly
/// per token to `lr * 1e-4`. Returns the loss of every step.
pub struct SkipGramOracle {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub lr: f64,
    pub seed: u64,
}

impl SkipGramOracle {
    pub fn losses(&self, counts: &[u64], tokens: &[u32], max_steps: usize) -> Vec<f64> {
        let v = counts.len();
        let d = self.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let half = 0.5 / d as f64;
        let mut input: Vec<Vec<f64>> = (0..v)
            .map(|_| (0..d).map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * half).collect())
            .collect();
        let mut output = vec![vec![0.0; d]; v];

        let masses: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let z: f64 = masses.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = masses
            .iter()
            .map(|m| {
                acc += m;
                acc / z
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        let draw = |rng: &mut ChaCha8Rng| {
            let u: f64 = rng.gen();
            cumulative.iter().position(|&c| c > u).unwrap_or(v - 1)
        };

        let n = tokens.len();
        let mut losses = Vec::new();
        for pos in 0..n {
            let lr = self.lr * (1.0 - (1.0 - 1e-4) * pos as f64 / n as f64);
            let t = tokens[pos] as usize;
            let lo = pos.saturating_sub(self.window);
            let hi = (pos + self.window).min(n - 1);
            for ctx in (lo..=hi).filter(|&c| c != pos) {
                let mut targets = vec![(tokens[ctx] as usize, 1.0)];
                for _ in 0..self.negatives {
                    targets.push((draw(&mut rng), 0.0));
                }
                let vin = input[t].clone();
                let mut e = vec![0.0; d];
                let mut loss = 0.0;
                let mut gs = Vec::new();
                for &(u, label) in &targets {
                    let f: f64 = output[u].iter().zip(&vin).map(|(a, b)| a * b).sum();
                    loss -= if label == 1.0 { log_sigmoid(f) } else { log_sigmoid(-f) };
                    let g = label - sigmoid(f);
                    for (ed, o) in e.iter_mut().zip(&output[u]) {
                        *ed += g * o;
                    }
                    gs.push(g);
                }
                for (&(u, _), g) in targets.iter().zip(gs) {
                    for (o, x) in output[u].iter_mut().zip(&vin) {
                        *o += lr * g * x;
                    }
                }
                for (m, ed) in input[t].iter_mut().zip(&e) {
                    *m += lr * ed;
                }
                losses.push(loss);
                if losses.len() == max_steps {
                    return losses;
                }
            }
        }
        losses
    }
}

/// Exhaustive analogy scan over unit-normalized rows, excluding `b` and `c`,
/// ties to the lower index.
pub fn analogy_oracle(rows: &[Vec<f64>], a: usize, b: usize, c: usize) -> Option<usize> {
    let unit: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            r.iter().map(|x| if n > 0.0 { x / n } else { 0.0 }).collect()
        })
        .collect();
    let target: Vec<f64> = (0..unit[0].len())
        .map(|i| unit[b][i] - unit[a][i] + unit[c][i])
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (j, x) in unit.iter().enumerate() {
        if j == b || j == c {
            continue;
        }
        let s: f64 = x.iter().zip(&target).map(|(p, q)| p * q).sum();
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((j, s));
        }
    }
    best.map(|(j, _)| j)
}

/// Spearman correlation through the classic `1 - 6 Σd² / (n(n² - 1))`
/// formula; valid only without ties.
pub fn spearman_no_ties(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64 + 1.0;
        }
        r
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let n = xs.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Relative error with an absolute floor for components near zero.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// A random toy model with a relation of `neighbors` links per word.
pub struct Fixture {
    pub model: knet::model::EmbeddingModel,
    pub relation: knet::relation::RelationMatrix,
    pub t: usize,
    pub o: usize,
    pub noise: Vec<usize>,
}

pub fn random_fixture(seed: u64, v: usize, dim: usize, negatives: usize, neighbors: usize) -> Fixture {
    use knet::morphology::Candidate;
    use rand::seq::index::sample;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let buckets = 3;
    let mut uniform = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(lo..hi)).collect()
    };
    let input = uniform(v * dim, -1.0, 1.0);
    let output = uniform(v * dim, -1.0, 1.0);
    let c1 = uniform(buckets, 0.2, 1.2);
    let c2 = uniform(buckets, 0.2, 1.2);
    let bucket_of: Vec<u32> = (0..v).map(|i| (i * buckets / v) as u32).collect();
    let model =
        knet::model::EmbeddingModel::from_parts(dim, input, output, c1, c2, bucket_of).unwrap();
    let rows: Vec<Vec<Candidate>> = (0..v)
        .map(|t| {
            sample(&mut rng, v - 1, neighbors)
                .into_iter()
                .map(|j| Candidate {
                    index: if j >= t { j + 1 } else { j },
                    score: rng.gen_range(0.05..1.0),
                })
                .collect()
        })
        .collect();
    let relation =
        knet::relation::RelationMatrix::from_rows(MorphKind::Edit, neighbors, rows).unwrap();
    let t = rng.gen_range(0..v);
    let o = rng.gen_range(0..v);
    let noise = (0..negatives).map(|_| rng.gen_range(0..v)).collect();
    Fixture {
        model,
        relation,
        t,
        o,
        noise,
    }
}

/// Which parameter a finite difference perturbs.
#[derive(Clone, Copy, Debug)]
pub enum Param {
    Input(usize),
    Output(usize),
    C1(usize),
    C2(usize),
    Weight(usize),
}

fn objective(f: &Fixture) -> f64 {
    use knet::model::{combined_input, neg_objective};
    let v = combined_input(f.t, &f.relation, &f.model);
    neg_objective(&v, f.o, &f.noise, &f.model)
}

/// Central difference of the objective along one parameter.
pub fn central_difference(f: &mut Fixture, p: Param, h: f64) -> f64 {
    fn slot(f: &mut Fixture, p: Param) -> &mut f64 {
        match p {
            Param::Input(i) => &mut f.model.input_mut()[i],
            Param::Output(i) => &mut f.model.output_mut()[i],
            Param::C1(b) => &mut f.model.c1_mut()[b],
            Param::C2(b) => &mut f.model.c2_mut()[b],
            Param::Weight(i) => &mut f.relation.weights_mut()[i],
        }
    }
    let x = *slot(f, p);
    *slot(f, p) = x + h;
    let up = objective(f);
    *slot(f, p) = x - h;
    let down = objective(f);
    *slot(f, p) = x;
    (up - down) / (2.0 * h)
}

/// Every (parameter, analytic gradient) pair the objective depends on.
pub fn analytic_components(f: &Fixture) -> Vec<(Param, f64)> {
    let g = knet::model::step_gradients(f.t, f.o, &f.noise, &f.relation, &f.model);
    let dim = f.model.dim();
    let mut out = Vec::new();
    for d in 0..dim {
        out.push((Param::Input(f.t * dim + d), g.grad_v_t[d]));
    }
    let range = f.relation.row_range(f.t);
    for (j, &n) in f.relation.row_neighbors(f.t).iter().enumerate() {
        for d in 0..dim {
            out.push((Param::Input(n as usize * dim + d), g.grad_neighbors[j][d]));
        }
        out.push((Param::Weight(range.start + j), g.grad_s[j]));
    }
    let mut words: Vec<usize> = std::iter::once(f.o).chain(f.noise.iter().copied()).collect();
    words.sort_unstable();
    words.dedup();
    for u in words {
        let gu = g.output_gradient(u, dim);
        for (d, &x) in gu.iter().enumerate() {
            out.push((Param::Output(u * dim + d), x));
        }
    }
    let b = f.model.bucket(f.t);
    out.push((Param::C1(b), g.grad_c1));
    out.push((Param::C2(b), g.grad_c2));
    out
}

/// Largest relative error between analytic and central-difference gradients
/// over one fixture.
pub fn worst_gradient_error(f: &mut Fixture, h: f64, floor: f64) -> (f64, Param) {
    let mut worst = (0.0, Param::C1(0));
    for (p, analytic) in analytic_components(f) {
        let numeric = central_difference(f, p, h);
        let err = relative_error(analytic, numeric, floor);
        if err > worst.0 {
            worst = (err, p);
        }
    }
    worst
}

fn gaussian_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Fifty words in 256 dimensions: ten questions on disjoint word quadruples,
/// each `d` set to the normalized `b̂ - â + ĉ`, plus ten random distractors.
pub fn constructed_analogies() -> (knet::embeddings::Embeddings, Vec<knet::eval::AnalogyQuestion>) {
    use knet::eval::{AnalogyQuestion, Category};
    let dim = 256;
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut words = Vec::new();
    let mut data = Vec::new();
    let mut questions = Vec::new();
    for q in 0..10 {
        let [a, b, c] = [0, 1, 2].map(|_| gaussian_unit(&mut rng, dim));
        let d: Vec<f64> = (0..dim).map(|i| b[i] - a[i] + c[i]).collect();
        let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        let names = ["a", "b", "c", "d"].map(|s| format!("{s}{q}"));
        for (name, v) in names.iter().zip([a, b, c, d.iter().map(|x| x / n).collect()]) {
            words.push(name.clone());
            data.extend(v);
        }
        let category = if q < 5 { Category::Semantic } else { Category::Syntactic };
        questions.push(AnalogyQuestion::new(
            [&names[0], &names[1], &names[2], &names[3]].map(String::as_str),
            category,
        ));
    }
    for i in 0..10 {
        words.push(format!("x{i}"));
        data.extend(gaussian_unit(&mut rng, dim));
    }
    (knet::embeddings::Embeddings::new(words, dim, data).unwrap(), questions)
}

/// A random 20-word embedding and one random (a, b, c) triple.
pub fn random_analogy_fixture(seed: u64) -> (Vec<Vec<f64>>, [usize; 3]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.gen_range(2..12);
    let rows: Vec<Vec<f64>> = (0..20)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let abc = [0, 1, 2].map(|_| rng.gen_range(0..20));
    (rows, abc)
}
