use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::losses::UnlabeledBatch;
use crate::rng::seeded;
use crate::tensor::Matrix;

/// Class means with pairwise (or neighbour) distance `sep`, centred at the
/// origin. With `dim >= classes` they are scaled simplex vertices
/// `sep / sqrt(2) * e_k`; otherwise they sit on a circle in the first two
/// coordinates.
pub fn mixture_means(classes: usize, dim: usize, sep: f64) -> Matrix {
    let mut means = Matrix::zeros(classes, dim);
    if dim >= classes {
        let scale = sep / 2f64.sqrt();
        for k in 0..classes {
            for j in 0..classes {
                let v = if j == k { scale } else { 0.0 } - scale / classes as f64;
                means.set(k, j, v);
            }
        }
    } else {
        let radius = sep / (2.0 * (PI / classes as f64).sin());
        for k in 0..classes {
            let angle = 2.0 * PI * k as f64 / classes as f64;
            means.set(k, 0, radius * angle.cos());
            means.set(k, 1, radius * angle.sin());
        }
    }
    means
}

/// `per_class` samples from `N(mean_k, I)` for each class. Rows are grouped
/// by class; every row starts in the training split.
pub fn gen_gaussian_mixture(classes: usize, per_class: usize, dim: usize, sep: f64, seed: u64) -> Result<Dataset> {
    if classes < 2 {
        return Err(Error::Config(format!("need at least 2 classes, got {classes}")));
    }
    if dim < 2 {
        return Err(Error::Config(format!("need dimension >= 2, got {dim}")));
    }
    if per_class == 0 {
        return Err(Error::Config("per_class must be positive".into()));
    }
    if !(sep.is_finite() && sep >= 0.0) {
        return Err(Error::Config(format!("separation must be finite and >= 0, got {sep}")));
    }
    let means = mixture_means(classes, dim, sep);
    let mut rng = seeded(seed);
    let n = classes * per_class;
    let mut data = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for k in 0..classes {
        for _ in 0..per_class {
            for j in 0..dim {
                let z: f64 = rng.sample(StandardNormal);
                data.push(means.get(k, j) + z);
            }
            labels.push(k);
        }
    }
    Ok(Dataset {
        features: Matrix::from_vec(n, dim, data)?,
        labels,
        classes,
        train: (0..n).collect(),
        test: Vec::new(),
        provenance: Provenance::Synthetic {
            classes,
            per_class,
            dim,
            sep,
            seed,
        },
    })
}

/// `pairs` samples `a x_i + (1 - a) x_j` over uniformly drawn training rows
/// `i != j` (any classes).
pub fn mix_universum(ds: &Dataset, pairs: usize, a: f64, seed: u64) -> Result<UnlabeledBatch> {
    if !(0.5..=1.0).contains(&a) {
        return Err(Error::Domain(format!("mixing ratio must lie in [0.5, 1], got {a}")));
    }
    let n = ds.train.len();
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 training rows to mix, got {n}")));
    }
    let dim = ds.dim();
    let mut rng = seeded(seed);
    let mut data = Vec::with_capacity(pairs * dim);
    for _ in 0..pairs {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let (xi, xj) = (ds.features.row(ds.train[i]), ds.features.row(ds.train[j]));
        data.extend(xi.iter().zip(xj).map(|(p, q)| a * p + (1.0 - a) * q));
    }
    Ok(UnlabeledBatch::new(Matrix::from_vec(pairs, dim, data)?))
}
