//! Evaluation metrics.
//!
//! The Fréchet value here is a diagonal-covariance distance between
//! discriminator feature distributions. It is a cheap proxy and is not
//! comparable to Inception-based FID numbers.

use crate::error::{Error, Result};
use crate::losses::contradiction_residual;
use crate::models::Prediction;
use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Misclassifications plus contradictions.
    pub error: f64,
    pub contradiction_rate: f64,
    pub entropy_bits: f64,
    pub mean_residual: f64,
    pub frechet_proxy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassificationStats {
    pub accuracy: f64,
    pub error: f64,
    pub contradiction_rate: f64,
}

/// Accuracy against labels; a contradiction never matches a label.
pub fn classification_error(preds: &[Prediction], labels: &[usize]) -> Result<ClassificationStats> {
    if preds.len() != labels.len() {
        return Err(Error::Domain(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Domain("no predictions to score".into()));
    }
    let n = preds.len() as f64;
    let correct = preds
        .iter()
        .zip(labels)
        .filter(|(p, &y)| **p == Prediction::Class(y))
        .count() as f64;
    let contradictions = preds
        .iter()
        .filter(|p| **p == Prediction::Contradiction)
        .count() as f64;
    let accuracy = correct / n;
    Ok(ClassificationStats {
        accuracy,
        error: 1.0 - accuracy,
        contradiction_rate: contradictions / n,
    })
}

/// Shannon entropy (bits) of the predicted-class histogram, contradictions
/// excluded.
pub fn label_entropy(preds: &[Prediction], classes: usize) -> Result<f64> {
    let mut counts = vec![0usize; classes];
    for p in preds {
        if let Prediction::Class(k) = *p {
            let slot = counts
                .get_mut(k)
                .ok_or_else(|| Error::Domain(format!("class {k} out of range 0..{classes}")))?;
            *slot += 1;
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::Domain("no class predictions to histogram".into()));
    }
    let total = total as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let c = c as f64;
            c / total * (total / c).log2()
        })
        .sum())
}

fn mean_and_var(m: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let means = m.col_means();
    let mut var = vec![0.0; m.cols()];
    for row in m.iter_rows() {
        for ((v, x), mu) in var.iter_mut().zip(row).zip(means.data()) {
            *v += (x - mu) * (x - mu);
        }
    }
    let denom = (m.rows() - 1) as f64;
    var.iter_mut().for_each(|v| *v /= denom);
    (means.into_vec(), var)
}

/// `|mu_r - mu_f|^2 + sum_j (s_rj + s_fj - 2 sqrt(s_rj s_fj))` with per-column
/// sample variances `s`.
pub fn frechet_feature_distance(real: &Matrix, fake: &Matrix) -> Result<f64> {
    if real.rows() < 2 || fake.rows() < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 rows per side, got {} and {}",
            real.rows(),
            fake.rows()
        )));
    }
    if real.cols() != fake.cols() {
        return Err(Error::shape(
            "frechet_feature_distance",
            format!("{} vs {} feature columns", real.cols(), fake.cols()),
        ));
    }
    let (mu_r, var_r) = mean_and_var(real);
    let (mu_f, var_f) = mean_and_var(fake);
    let mean_term: f64 = mu_r.iter().zip(&mu_f).map(|(a, b)| (a - b) * (a - b)).sum();
    let cov_term: f64 = var_r
        .iter()
        .zip(&var_f)
        .map(|(a, b)| a + b - 2.0 * (a * b).sqrt())
        .sum();
    // (sqrt a - sqrt b)^2 >= 0; rounding can dip a hair below
    Ok((mean_term + cov_term).max(0.0))
}

/// Mean and max of the per-row contradiction residual.
pub fn residual_stats(scores: &Matrix) -> Result<(f64, f64)> {
    if scores.rows() == 0 {
        return Err(Error::Domain("no score rows".into()));
    }
    let r = contradiction_residual(scores);
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let max = r.iter().copied().fold(0.0, f64::max);
    Ok((mean, max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Prediction::{Class, Contradiction};

    #[test]
    fn classification_examples() {
        let s = classification_error(&[Class(0), Class(1)], &[0, 1]).unwrap();
        assert_eq!(s.accuracy, 1.0);
        let s = classification_error(&[Class(0), Contradiction], &[0, 1]).unwrap();
        assert_eq!((s.accuracy, s.contradiction_rate), (0.5, 0.5));
        let s = classification_error(&[Class(0), Class(1), Contradiction], &[0, 0, 0]).unwrap();
        assert_eq!(s.accuracy, 1.0 / 3.0);
        assert_eq!(s.accuracy + s.error, 1.0);
        assert!(classification_error(&[Class(0)], &[0, 1]).is_err());
    }

    #[test]
    fn entropy_examples() {
        let uniform: Vec<Prediction> = (0..1000).map(|i| Class(i % 10)).collect();
        assert!((label_entropy(&uniform, 10).unwrap() - 3.32).abs() < 0.01);
        assert!(label_entropy(&[Class(3); 7], 10).unwrap().to_bits() == 0.0f64.to_bits());
        assert_eq!(label_entropy(&[Class(0), Class(1)], 2).unwrap(), 1.0);
        assert_eq!(label_entropy(&[Class(0), Class(1), Contradiction], 2).unwrap(), 1.0);
        assert!(label_entropy(&[Contradiction], 2).is_err());
        assert!(label_entropy(&[Class(4)], 2).is_err());
    }

    #[test]
    fn frechet_examples() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [2.0, -1.0], [1.0, 0.5]]);
        assert_eq!(frechet_feature_distance(&a, &a).unwrap(), 0.0);
        // means [1,0] vs [0,0], equal variances
        let r = Matrix::from_rows(&[[0.0, 1.0], [2.0, -1.0]]);
        let f = Matrix::from_rows(&[[-1.0, 1.0], [1.0, -1.0]]);
        let var_r = mean_and_var(&r).1;
        assert_eq!(var_r, vec![2.0, 2.0]);
        assert!((frechet_feature_distance(&r, &f).unwrap() - 1.0).abs() < 1e-12);
        // equal means, variances 1 vs 4 in one dimension
        let v1 = Matrix::from_rows(&[[-0.5f64.sqrt()], [0.5f64.sqrt()]]);
        let v4 = Matrix::from_rows(&[[-2.0f64.sqrt()], [2.0f64.sqrt()]]);
        assert!((frechet_feature_distance(&v1, &v4).unwrap() - 1.0).abs() < 1e-12);
        assert!(frechet_feature_distance(&Matrix::zeros(1, 2), &a).is_err());
    }

    #[test]
    fn frechet_is_symmetric() {
        let a = Matrix::from_rows(&[[0.0, 1.0], [2.0, -1.0], [1.0, 0.5]]);
        let b = Matrix::from_rows(&[[3.0, 1.0], [-2.0, 0.0], [0.3, 0.7], [1.0, 1.0]]);
        assert_eq!(
            frechet_feature_distance(&a, &b).unwrap(),
            frechet_feature_distance(&b, &a).unwrap()
        );
    }

    #[test]
    fn residual_examples() {
        assert_eq!(residual_stats(&Matrix::from_rows(&[[1.0, 1.0], [3.0, 3.0]])).unwrap(), (0.0, 0.0));
        assert_eq!(residual_stats(&Matrix::from_rows(&[[2.0, 0.0]])).unwrap(), (2.0, 2.0));
        assert_eq!(residual_stats(&Matrix::from_rows(&[[1.0, 1.0], [2.0, 0.0]])).unwrap(), (1.0, 2.0));
        assert!(residual_stats(&Matrix::zeros(0, 2)).is_err());
    }
}
