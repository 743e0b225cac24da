mod common;

use common::*;
use entmetrics::knn::{mixed_ball_stats, NeighborIndex, Side};
use entmetrics::{EmbeddingSet, Error};
use proptest::prelude::*;

fn line(values: &[f64]) -> EmbeddingSet {
    EmbeddingSet::new(values.to_vec(), 1).unwrap()
}

#[test]
fn single_point_has_no_self_excluded_neighbour() {
    let set = line(&[4.0]);
    let index = NeighborIndex::build(&set);
    assert!(matches!(index.kth_distance_of_row(0, 1), Err(Error::KOutOfRange { .. })));
    assert_eq!(index.kth_distance(&[1.0], 1, None).unwrap(), 3.0);
}

#[test]
fn hand_enumerated_queries() {
    let set = line(&[0.0, 1.0, 3.0]);
    let index = NeighborIndex::build(&set);
    assert_eq!(index.kth_distance_of_row(0, 1).unwrap(), 1.0);
    assert_eq!(index.kth_distance_of_row(0, 2).unwrap(), 3.0);
    assert_eq!(index.kth_distance(&[2.0], 1, None).unwrap(), 1.0);
    assert_eq!(index.count_within(&[0.0], 1.0, None).unwrap(), 2);
    assert_eq!(index.count_within(&[0.0], 0.5, None).unwrap(), 1);
    assert_eq!(index.count_within(&[0.0], 3.0, None).unwrap(), 3);
}

#[test]
fn rebuilding_gives_identical_answers() {
    let mut rng = rng(1);
    let set = uniform(300, 3, &mut rng);
    let a = NeighborIndex::build(&set);
    let b = NeighborIndex::build(&set);
    for k in [1, 4, 17] {
        assert_eq!(a.kth_dist2_all_rows(k).unwrap(), b.kth_dist2_all_rows(k).unwrap());
    }
}

#[test]
fn exactness_on_clustered_and_tied_data() {
    // integer lattice points produce many exact ties
    let rows: Vec<Vec<f64>> = (0..400).map(|i| vec![(i % 7) as f64, ((i / 7) % 5) as f64, (i % 3) as f64]).collect();
    let set = EmbeddingSet::from_rows(&rows).unwrap();
    let index = NeighborIndex::build(&set);
    for row in (0..set.n()).step_by(7) {
        let oracle = sorted_neighbours(&set, set.row(row), Some(row));
        for k in 1..=30 {
            let got = index.k_nearest(set.row(row), k, Some(row)).unwrap();
            let want: Vec<usize> = oracle[..k].iter().map(|p| p.1).collect();
            assert_eq!(got.iter().map(|n| n.index).collect::<Vec<_>>(), want);
            let r2 = oracle[k - 1].0;
            let count = index.count_within_squared(set.row(row), r2, Some(row)).unwrap();
            assert_eq!(count, brute_count(&set, set.row(row), r2, Some(row)));
            assert!(count >= k);
        }
    }
}

#[test]
fn isometry_invariance() {
    let mut rng = rng(2);
    for d in [1usize, 2, 8] {
        let set = uniform(500, d, &mut rng);
        let rot = random_rotation(d, &mut rng);
        let shift: Vec<f64> = (0..d).map(|i| 1.5 * i as f64 - 2.0).collect();
        let moved = rigid(&set, &rot, &shift);
        let (a, b) = (NeighborIndex::build(&set), NeighborIndex::build(&moved));
        for k in [1, 5, 20] {
            let da = a.kth_dist2_all_rows(k).unwrap();
            let db = b.kth_dist2_all_rows(k).unwrap();
            for (x, y) in da.iter().zip(&db) {
                assert!((x.sqrt() - y.sqrt()).abs() < 1e-9);
            }
        }
        // radii halfway between consecutive distinct distances are far from ties
        for row in (0..set.n()).step_by(25) {
            let oracle = sorted_neighbours(&set, set.row(row), None);
            for w in oracle.windows(2).take(30) {
                let r = 0.5 * (w[0].0.sqrt() + w[1].0.sqrt());
                if w[1].0.sqrt() - w[0].0.sqrt() < 1e-6 {
                    continue;
                }
                assert_eq!(
                    a.count_within(set.row(row), r, None).unwrap(),
                    b.count_within(moved.row(row), r, None).unwrap()
                );
            }
        }
    }
}

#[test]
fn mixed_ball_examples() {
    let a = line(&[0.0]);
    let b = line(&[1.0, 2.0]);
    let (ia, ib) = (NeighborIndex::build(&a), NeighborIndex::build(&b));
    let ball = mixed_ball_stats(&ia, &ib, Side::B, 0, 2).unwrap();
    assert_eq!((ball.radius(), ball.count_a, ball.count_b), (1.0, 1, 1));

    let far = line(&[100.0]);
    let near = line(&[0.0, 1.0]);
    let (i_far, i_near) = (NeighborIndex::build(&far), NeighborIndex::build(&near));
    let ball = mixed_ball_stats(&i_far, &i_near, Side::B, 0, 1).unwrap();
    assert_eq!((ball.radius(), ball.count_a, ball.count_b), (1.0, 0, 1));
    assert!(mixed_ball_stats(&i_far, &i_near, Side::B, 0, 3).is_err());
}

#[test]
fn duplicated_set_mixed_ball_is_deterministic() {
    let mut rng = rng(3);
    let set = uniform(60, 2, &mut rng);
    let (ia, ib) = (NeighborIndex::build(&set), NeighborIndex::build(&set));
    for row in 0..set.n() {
        // the twin sits at distance 0, so k = 1 splits exactly into (1, 0)
        let ball = mixed_ball_stats(&ia, &ib, Side::B, row, 1).unwrap();
        assert_eq!((ball.count_a, ball.count_b, ball.radius2), (1, 0, 0.0));
        for k in 2..6 {
            let first = mixed_ball_stats(&ia, &ib, Side::B, row, k).unwrap();
            let again = mixed_ball_stats(&ia, &ib, Side::B, row, k).unwrap();
            assert_eq!(first, again);
            assert!(first.count_a + first.count_b >= k);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kth_distance_monotone_in_k(seed in 0u64..1000, d in 1usize..5) {
        let mut rng = rng(seed);
        let set = uniform(80, d, &mut rng);
        let index = NeighborIndex::build(&set);
        for row in 0..set.n() {
            let ks: Vec<f64> = (1..=20).map(|k| index.kth_distance_of_row(row, k).unwrap()).collect();
            prop_assert!(ks.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn count_monotone_in_radius(seed in 0u64..1000, r1 in 0.0f64..5.0, dr in 0.0f64..5.0) {
        let mut rng = rng(seed);
        let set = uniform(120, 2, &mut rng);
        let index = NeighborIndex::build(&set);
        let q = set.row(0);
        prop_assert!(index.count_within(q, r1, None).unwrap() <= index.count_within(q, r1 + dr, None).unwrap());
    }
}
