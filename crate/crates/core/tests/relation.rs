mod common;

use common::{ranked_vocab, rareword_words, top_k_oracle};
use knet::corpus::TokenStream;
use knet::model::{train, TrainingConfig};
use knet::morphology::{Candidate, MorphKind, MorphResources};
use knet::relation::{build_relation, combine_lists, combine_relations, RelationMatrix};
use proptest::prelude::*;

fn assert_rows_match(rel: &RelationMatrix, oracle: &[Vec<(usize, f64)>], words: &[String]) {
    for (t, expected) in oracle.iter().enumerate() {
        let got: Vec<(usize, f64)> = rel.row(t).iter().map(|c| (c.index, c.score)).collect();
        assert_eq!(got.len(), expected.len(), "{} {:?}: {got:?} vs {expected:?}", words[t], rel.kind());
        for ((gi, gs), (ei, es)) in got.iter().zip(expected) {
            assert_eq!(gi, ei, "{} {:?}: {got:?} vs {expected:?}", words[t], rel.kind());
            assert!((gs - es).abs() < 1e-12);
        }
    }
}

#[test]
fn top_k_rows_match_all_pairs_scan() {
    let words = rareword_words(200);
    assert_eq!(words.len(), 200);
    let vocab = ranked_vocab(&words);
    let res = MorphResources::bundled();
    for kind in MorphKind::SINGLE {
        let rel = build_relation(&vocab, kind, 5, &res).unwrap();
        assert_rows_match(&rel, &top_k_oracle(&words, kind, 5, &res), &words);
    }
}

#[test]
fn full_rows_match_all_pairs_scan() {
    let words = rareword_words(20);
    let vocab = ranked_vocab(&words);
    let res = MorphResources::bundled();
    for kind in MorphKind::SINGLE {
        let rel = build_relation(&vocab, kind, 19, &res).unwrap();
        assert_rows_match(&rel, &top_k_oracle(&words, kind, 19, &res), &words);
    }
}

#[test]
fn run_runs_blue() {
    let words: Vec<String> = ["run", "runs", "blue"].map(String::from).to_vec();
    let rel = build_relation(&ranked_vocab(&words), MorphKind::Edit, 1, &MorphResources::bundled())
        .unwrap();
    // d(run, runs) = 1 over length 4; d(run, blue) = 4 over length 4
    assert_eq!(rel.row(0), vec![Candidate { index: 1, score: 0.75 }]);
}

#[test]
fn single_word_has_empty_row() {
    let rel = build_relation(&ranked_vocab(&["cat".into()]), MorphKind::Lcs, 5, &MorphResources::bundled())
        .unwrap();
    assert_eq!(rel.nnz(), 0);
}

#[test]
fn hand_counted_votes() {
    let c = |index, score| Candidate { index, score };
    let lists = vec![
        vec![c(4, 0.9), c(2, 0.5)],
        vec![c(4, 0.3), c(1, 0.4)],
        vec![c(5, 0.3), c(2, 0.3)],
        vec![c(4, 0.3), c(7, 0.8)],
    ];
    // votes: 4 -> 3, 2 -> 2, then 1, 5, 7 with one vote each
    let merged = combine_lists(&lists, 3);
    assert_eq!(merged.iter().map(|c| c.index).collect::<Vec<_>>(), vec![4, 2, 1]);
    assert!((merged[0].score - 0.5).abs() < 1e-15);
    assert!((merged[1].score - 0.4).abs() < 1e-15);
    assert!((merged[2].score - 0.4).abs() < 1e-15);
}

fn candidate_lists(v: usize) -> impl Strategy<Value = Vec<Vec<Candidate>>> {
    let list = proptest::sample::subsequence((0..v).collect::<Vec<_>>(), 0..=5).prop_flat_map(|idx| {
        let n = idx.len();
        (Just(idx), proptest::collection::vec(0.01f64..1.0, n))
    });
    proptest::collection::vec(list, 4).prop_map(|lists| {
        lists
            .into_iter()
            .map(|(idx, scores)| {
                idx.into_iter()
                    .zip(scores)
                    .map(|(index, score)| Candidate { index, score })
                    .collect()
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn combination_stays_within_the_union(lists in candidate_lists(30), k in 1usize..8) {
        let merged = combine_lists(&lists, k);
        prop_assert!(merged.len() <= k);
        for c in &merged {
            let scores: Vec<f64> = lists
                .iter()
                .filter_map(|l| l.iter().find(|x| x.index == c.index).map(|x| x.score))
                .collect();
            prop_assert!(!scores.is_empty());
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            prop_assert!((c.score - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_lists_combine_to_themselves(lists in candidate_lists(30)) {
        let mut one = lists[0].clone();
        one.sort_by_key(|c| c.index);
        let merged = combine_lists(&[one.clone(), one.clone(), one.clone(), one.clone()], 5);
        prop_assert_eq!(merged.len(), one.len());
        for (m, c) in merged.iter().zip(&one) {
            prop_assert_eq!(m.index, c.index);
            prop_assert!((m.score - c.score).abs() < 1e-12);
        }
    }
}

#[test]
fn training_keeps_the_sparse_structure() {
    let words = rareword_words(60);
    let vocab = ranked_vocab(&words);
    let res = MorphResources::bundled();
    let parts: Vec<RelationMatrix> = MorphKind::SINGLE
        .iter()
        .map(|&k| build_relation(&vocab, k, 5, &res).unwrap())
        .collect();
    let rel = combine_relations(&parts, 5).unwrap();
    let tokens: Vec<u32> = (0..3000u32).map(|i| (i * 7 + i / 13) % 60).collect();
    let config = TrainingConfig {
        dim: 10,
        buckets: 4,
        ..TrainingConfig::default()
    };
    let trained = train(&vocab, &TokenStream::from_indices(tokens), rel.clone(), &config).unwrap();
    assert!(trained.relation.same_structure(&rel));
    assert_ne!(trained.relation.weights(), rel.weights());
}
