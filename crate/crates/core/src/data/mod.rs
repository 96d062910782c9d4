//! Datasets: synthetic Gaussian mixtures, mixing-ratio universum samples,
//! IDX image files, train/test splits and seeded minibatches.

mod idx;
mod synthetic;

pub use idx::{load_idx, write_idx};
pub use synthetic::{gen_gaussian_mixture, mix_universum, mixture_means};

use std::path::PathBuf;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::losses::LabeledBatch;
use crate::rng::{seeded, SeedStream};
use crate::tensor::Matrix;

/// Where a dataset came from; together with the seeds it determines the content.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Synthetic {
        classes: usize,
        per_class: usize,
        dim: usize,
        sep: f64,
        seed: u64,
    },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        image_rows: usize,
        image_cols: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Random train/test partition: `n_train` rows for training, the rest
    /// for testing.
    pub fn split(mut self, n_train: usize, seed: u64) -> Result<Self> {
        if n_train > self.len() {
            return Err(Error::Domain(format!(
                "cannot take {n_train} training rows from {}",
                self.len()
            )));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut seeded(seed));
        self.test = order.split_off(n_train);
        self.train = order;
        Ok(self)
    }

    /// Labeled batch of the given rows.
    pub fn batch(&self, rows: &[usize]) -> LabeledBatch {
        LabeledBatch {
            features: self.features.select_rows(rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    pub fn train_batch(&self) -> LabeledBatch {
        self.batch(&self.train)
    }

    pub fn test_batch(&self) -> LabeledBatch {
        self.batch(&self.test)
    }
}

/// `m` distinct training rows drawn uniformly; advances `rng`.
pub fn sample_batch(ds: &Dataset, m: usize, rng: &mut SeedStream) -> Result<LabeledBatch> {
    let rows = sample_rows(ds.train.len(), m, rng)?;
    let picked: Vec<usize> = rows.into_iter().map(|i| ds.train[i]).collect();
    Ok(ds.batch(&picked))
}

/// `m` distinct indices from `0..n`.
pub(crate) fn sample_rows(n: usize, m: usize, rng: &mut SeedStream) -> Result<Vec<usize>> {
    if m > n {
        return Err(Error::Domain(format!("batch of {m} from {n} rows")));
    }
    Ok(rand::seq::index::sample(rng, n, m).into_vec())
}
