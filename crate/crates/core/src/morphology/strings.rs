//! Edit distance and longest common substring over bytes.

/// Levenshtein distance with unit-cost insertion, deletion and substitution.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let mut row = Vec::new();
    edit_distance_with(a.as_bytes(), b.as_bytes(), &mut row)
}

/// [`edit_distance`] with a caller-owned scratch row.
pub(crate) fn edit_distance_with(a: &[u8], b: &[u8], row: &mut Vec<usize>) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    if b.is_empty() {
        return a.len();
    }
    row.clear();
    row.extend(0..=b.len());
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            let cost = usize::from(ca != cb);
            row[j + 1] = (diag + cost).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[b.len()]
}

/// Length of the longest contiguous substring shared by `a` and `b`.
pub fn lcs_length(a: &str, b: &str) -> usize {
    let mut row = Vec::new();
    lcs_length_with(a.as_bytes(), b.as_bytes(), &mut row)
}

pub(crate) fn lcs_length_with(a: &[u8], b: &[u8], row: &mut Vec<usize>) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    row.clear();
    row.resize(b.len() + 1, 0);
    let mut best = 0;
    for &ca in a {
        // walk right to left so row[j] still holds the previous row's value
        for j in (0..b.len()).rev() {
            if ca == b[j] {
                row[j + 1] = row[j] + 1;
                best = best.max(row[j + 1]);
            } else {
                row[j + 1] = 0;
            }
        }
    }
    best
}

/// `1 - d(a, b) / max(len(a), len(b))`.
pub fn sim_edit(a: &str, b: &str) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance(a, b) as f64 / longest as f64
}

/// `g(a, b) / max(len(a), len(b))` where `g` is [`lcs_length`].
pub fn sim_lcs(a: &str, b: &str) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    lcs_length(a, b) as f64 / longest as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edit_examples() {
        assert_eq!(edit_distance("abc", "abc"), 0);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
        assert_eq!(edit_distance("a", "b"), 1);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("flaw", "lawn"), 2);
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(lcs_length("convention", "convenient"), 6);
        assert_eq!(lcs_length("abc", "xyz"), 0);
        assert_eq!(lcs_length("xabcy", "zzabczz"), 3);
        // contiguous, not subsequence
        assert_eq!(lcs_length("axbxc", "abc"), 1);
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(sim_edit("convenient", "convenient"), 1.0);
        assert!((sim_edit("kitten", "sitting") - (1.0 - 3.0 / 7.0)).abs() < 1e-15);
        assert_eq!(sim_edit("a", "b"), 0.0);
        assert!((sim_lcs("convention", "convenient") - 0.6).abs() < 1e-15);
        assert_eq!(sim_lcs("run", "run"), 1.0);
        assert_eq!(sim_lcs("abc", "xyz"), 0.0);
    }
}
