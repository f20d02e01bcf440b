mod common;

use advwalk::proximity::{shifted_ppmi, transition_matrix, ScaleMatrix};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn sparse_ppmi_matches_dense_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for case in 0..12 {
        let n = rng.random_range(2..60);
        let p = rng.random_range(0.02..0.3);
        let g = random_graph(&mut rng, n, p, case % 2 == 0);
        let order = 1 + case % 3;
        let shift = 1.0 / n as f64;
        let sparse = shifted_ppmi(&g, order, shift).unwrap().to_dense();
        let dense = dense_ppmi(&g, order, shift);
        for i in 0..n {
            for j in 0..n {
                assert!((sparse[i][j] - dense[i][j]).abs() < 1e-10, "({i},{j}) order {order}");
            }
        }
    }
}

#[test]
fn transition_rows_are_stochastic() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let g = random_graph(&mut rng, 80, 0.1, true);
    let p = transition_matrix(&g);
    for i in 0..g.node_count() {
        assert!((p.row_sum(i) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn scale_is_zero_at_the_maximum_and_one_when_absent() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let g = random_graph(&mut rng, 50, 0.1, false);
    let s = ScaleMatrix::for_graph(&g, 2).unwrap();
    let (mut at_max, mut absent) = (false, false);
    for i in 0..g.node_count() {
        for j in 0..g.node_count() {
            let m = s.ppmi().get(i, j);
            if m == s.max_m() {
                assert_eq!(s.phi(i, j), 0.0);
                at_max = true;
            }
            if m == 0.0 {
                assert_eq!(s.phi(i, j), 1.0);
                absent = true;
            }
        }
    }
    assert!(at_max && absent);
}
