mod common;

use common::{all_warping_paths, brute_force_dtw};
use hmmaccel_core::dtw::{dtw_cost, dtw_distance, euclidean_distance, run_length_collapse, CostMatrix};
use proptest::prelude::*;

fn digits(s: &str) -> Vec<usize> {
    s.bytes().map(|b| (b - b'0') as usize).collect()
}

#[test]
fn enumeration_confirms_worked_example_distances() {
    assert_eq!(brute_force_dtw(&digits("1234567"), &digits("1222234")), 6.0);
    assert_eq!(brute_force_dtw(&digits("1222234"), &digits("1123334")), 0.0);
    assert_eq!(dtw_distance(&digits("1234567"), &digits("1222234")).unwrap().distance, 6.0);
}

#[test]
fn path_counts_match_delannoy_numbers() {
    // D(m, n) central Delannoy numbers: 1, 3, 13, 63
    let counts: Vec<usize> = (1..=4).map(|k| all_warping_paths(k, k).len()).collect();
    assert_eq!(counts, vec![1, 3, 13, 63]);
}

#[test]
fn exhaustive_small_sequences() {
    // every pair of sequences over {0,1,2} with lengths 1..=3
    let mut seqs = vec![];
    for len in 1..=3 {
        seqs.extend(common::all_tuples(3, len));
    }
    for x in &seqs {
        for y in &seqs {
            let r = dtw_distance(x, y).unwrap();
            assert_eq!(r.distance, brute_force_dtw(x, y), "{x:?} {y:?}");
        }
    }
}

fn small_seq(max_len: usize, alphabet: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..alphabet, 1..=max_len)
}

proptest! {
    #[test]
    fn dp_matches_enumeration(x in small_seq(6, 3), y in small_seq(6, 3)) {
        let r = dtw_distance(&x, &y).unwrap();
        prop_assert_eq!(r.distance, brute_force_dtw(&x, &y));
        prop_assert_eq!(CostMatrix::new(&x, &y).path_cost(&r.path), r.distance);
        prop_assert!(r.path.is_valid_for(x.len(), y.len()));
    }

    #[test]
    fn rolling_cost_matches_full_table(x in small_seq(12, 10), y in small_seq(12, 10)) {
        prop_assert_eq!(dtw_cost(&x, &y).unwrap(), dtw_distance(&x, &y).unwrap().distance);
    }

    #[test]
    fn symmetric(x in small_seq(10, 10), y in small_seq(10, 10)) {
        prop_assert_eq!(
            dtw_distance(&x, &y).unwrap().distance,
            dtw_distance(&y, &x).unwrap().distance
        );
    }

    #[test]
    fn zero_iff_same_collapsed_form(x in small_seq(9, 4), y in small_seq(9, 4)) {
        let zero = dtw_distance(&x, &y).unwrap().distance == 0.0;
        prop_assert_eq!(zero, run_length_collapse(&x) == run_length_collapse(&y));
    }

    #[test]
    fn bounded_by_diagonal(pair in (1usize..10).prop_flat_map(|n| (
        prop::collection::vec(0usize..10, n),
        prop::collection::vec(0usize..10, n),
    ))) {
        let (x, y) = pair;
        let diag: f64 = x.iter().zip(&y).map(|(a, b)| a.abs_diff(*b) as f64).sum();
        prop_assert!(dtw_distance(&x, &y).unwrap().distance <= diag);
        let e = euclidean_distance(&x, &y).unwrap();
        prop_assert_eq!(e == 0.0, x == y);
    }

    #[test]
    fn identical_sequences_use_the_diagonal(x in small_seq(10, 10)) {
        let r = dtw_distance(&x, &x).unwrap();
        prop_assert_eq!(r.distance, 0.0);
        let diag: Vec<_> = (0..x.len()).map(|i| (i, i)).collect();
        prop_assert_eq!(r.path.steps(), diag.as_slice());
    }
}
