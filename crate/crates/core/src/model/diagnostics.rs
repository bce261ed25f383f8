use super::EmbeddingModel;

/// Largest reported `|c1 / c2|`.
pub const RATIO_CLAMP: f64 = 5.0;

/// Denominators smaller than this report [`RATIO_CLAMP`].
const RATIO_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct BucketRow {
    pub bucket: usize,
    pub words: usize,
    pub c1: f64,
    pub c2: f64,
    /// `|c1 / c2|`, at most [`RATIO_CLAMP`].
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub rows: Vec<BucketRow>,
    /// `Σ c1_i n_i / Σ c2_i n_i` over buckets with `n_i` words.
    pub overall_ratio: f64,
}

impl Diagnostics {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bucket,words,c1,c2,ratio\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.bucket, r.words, r.c1, r.c2, r.ratio));
        }
        let words: usize = self.rows.iter().map(|r| r.words).sum();
        out.push_str(&format!("overall,{words},,,{}\n", self.overall_ratio));
        out
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den.abs() < RATIO_EPS {
        RATIO_CLAMP
    } else {
        num / den
    }
}

pub fn export_diagnostics(model: &EmbeddingModel) -> Diagnostics {
    bucket_diagnostics(model.c1(), model.c2(), model.bucket_of())
}

/// Per-bucket table from raw coefficients and the word-to-bucket map.
pub fn bucket_diagnostics(c1: &[f64], c2: &[f64], bucket_of: &[u32]) -> Diagnostics {
    let mut words = vec![0usize; c1.len()];
    for &b in bucket_of {
        words[b as usize] += 1;
    }
    let rows: Vec<BucketRow> = (0..c1.len())
        .map(|b| {
            let (c1, c2) = (c1[b], c2[b]);
            BucketRow {
                bucket: b,
                words: words[b],
                c1,
                c2,
                ratio: ratio(c1, c2).abs().min(RATIO_CLAMP),
            }
        })
        .collect();
    let num: f64 = rows.iter().map(|r| r.c1 * r.words as f64).sum();
    let den: f64 = rows.iter().map(|r| r.c2 * r.words as f64).sum();
    Diagnostics {
        rows,
        overall_ratio: ratio(num, den),
    }
}
