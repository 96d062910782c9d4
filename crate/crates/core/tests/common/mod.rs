//! Test oracles shared by the integration tests.
#![allow(dead_code)]

use evogan::tensor::Matrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-5;

/// Central finite differences of `f` at `x`, one coordinate at a time.
pub fn numeric_grad(x: &Matrix, h: f64, f: impl Fn(&Matrix) -> f64) -> Matrix {
    let mut g = Matrix::zeros(x.rows(), x.cols());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + h;
        let up = f(&probe);
        probe.data_mut()[i] = orig - h;
        let down = f(&probe);
        probe.data_mut()[i] = orig;
        g.data_mut()[i] = (up - down) / (2.0 * h);
    }
    g
}

/// `|a - b| / max(|a|, |b|, floor)` over whole matrices.
pub fn rel_err(a: &Matrix, b: &Matrix, floor: f64) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let diff: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    diff / a.frobenius_norm().max(b.frobenius_norm()).max(floor)
}

pub fn rel_scalar(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, classes: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..classes)).collect()
}

/// Scores on the dyadic grid `k / 1024` in `[-4, 4]`; every sum and
/// difference of such values is exact in `f64`.
pub fn dyadic_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-4096i64..=4096) as f64 / 1024.0)
        .collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Rows whose maximum is attained once.
pub fn has_unique_row_max(m: &Matrix) -> bool {
    m.iter_rows().all(|r| {
        let top = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        r.iter().filter(|&&v| v == top).count() == 1
    })
}
