//! Matrices printed in the worked examples, transcribed as dense rows.
#![allow(dead_code)]

pub fn example1_m() -> Vec<Vec<u8>> {
    vec![vec![0, 0, 0, 1, 0, 1, 0, 0], vec![1, 0, 0, 0, 1, 0, 0, 1]]
}

pub fn example1_u() -> Vec<Vec<u8>> {
    vec![
        vec![0, 0, 0, 0, 1, 1, 1, 1],
        vec![0, 0, 1, 1, 0, 0, 1, 1],
        vec![0, 1, 0, 1, 0, 1, 0, 1],
        vec![1, 1, 1, 1, 0, 0, 0, 0],
        vec![1, 1, 0, 0, 1, 1, 0, 0],
        vec![1, 0, 1, 0, 1, 0, 1, 0],
    ]
}

pub fn example1_a_prime() -> Vec<Vec<u8>> {
    vec![
        vec![0, 0, 0, 0, 0, 1, 0, 0],
        vec![0, 0, 0, 1, 0, 0, 0, 0],
        vec![0, 0, 0, 1, 0, 1, 0, 0],
        vec![0, 0, 0, 1, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 0, 1, 0, 0],
        vec![0, 0, 0, 0, 0, 0, 0, 0],
        vec![0, 0, 0, 0, 1, 0, 0, 1],
        vec![0, 0, 0, 0, 0, 0, 0, 1],
        vec![0, 0, 0, 0, 0, 0, 0, 1],
        vec![1, 0, 0, 0, 0, 0, 0, 0],
        vec![1, 0, 0, 0, 1, 0, 0, 0],
        vec![1, 0, 0, 0, 1, 0, 0, 0],
    ]
}

/// The 3x8 Hilbert-based block for `v = [0;1;1;0;1;0;0;1]`.
pub fn example2_v() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 1.0, 1.0 / 2.0, 0.0, 1.0 / 3.0, 0.0, 0.0, 1.0 / 4.0],
        vec![0.0, 1.0 / 2.0, 1.0 / 3.0, 0.0, 1.0 / 4.0, 0.0, 0.0, 1.0 / 5.0],
        vec![0.0, 1.0 / 3.0, 1.0 / 4.0, 0.0, 1.0 / 5.0, 0.0, 0.0, 1.0 / 6.0],
    ]
}
