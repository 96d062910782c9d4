//! Discriminator (feature map plus linear class heads), generator MLP, the
//! strict-maximum decision rule, and checkpoint files.

mod checkpoint;
mod discriminator;
mod generator;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use discriminator::{disc_forward, BoundDiscriminator, DiscOutput, Discriminator};
pub use generator::{gen_forward, BoundGenerator, Generator, DEFAULT_NOISE_DIM};

use rand::Rng;

use crate::error::Result;
use crate::tensor::{Matrix, Tape, Tensor};

pub const DEFAULT_LEAK: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    Identity,
    Relu,
    LeakyRelu(f64),
}

impl Activation {
    pub(crate) fn apply<'t>(self, x: Tensor<'t>) -> Tensor<'t> {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.relu(),
            Activation::LeakyRelu(a) => x.leaky_relu(a),
        }
    }

    pub(crate) fn apply_values(self, x: &mut Matrix) {
        match self {
            Activation::Identity => {}
            Activation::Relu => x.data_mut().iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::LeakyRelu(a) => x.data_mut().iter_mut().for_each(|v| {
                if *v <= 0.0 {
                    *v *= a
                }
            }),
        }
    }
}

/// Fully connected layer `act(x W + b)` with `W: in x out`, `b: 1 x out`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Matrix,
    pub activation: Activation,
}

impl Dense {
    /// Glorot-uniform weights, zero bias.
    pub fn init<R: Rng>(inputs: usize, outputs: usize, activation: Activation, rng: &mut R) -> Self {
        Dense {
            weight: glorot_uniform(inputs, outputs, rng),
            bias: Matrix::zeros(1, outputs),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weight.cols()
    }

    pub(crate) fn forward_values(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = x.matmul(&self.weight)?;
        let cols = out.cols();
        for row in out.data_mut().chunks_exact_mut(cols.max(1)) {
            for (v, b) in row.iter_mut().zip(self.bias.data()) {
                *v += b;
            }
        }
        self.activation.apply_values(&mut out);
        Ok(out)
    }
}

/// Uniform(-a, a) with `a = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Matrix {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out).map(|_| rng.random_range(-a..a)).collect();
    Matrix::from_vec(fan_in, fan_out, data).expect("glorot shape")
}

/// Layer bound to a tape as `(weight, bias, activation)`.
#[derive(Clone, Copy)]
pub(crate) struct BoundDense<'t> {
    weight: Tensor<'t>,
    bias: Tensor<'t>,
    activation: Activation,
}

impl<'t> BoundDense<'t> {
    fn bind(layer: &Dense, tape: &'t Tape, trainable: bool) -> Self {
        BoundDense {
            weight: tape.leaf(layer.weight.clone(), trainable),
            bias: tape.leaf(layer.bias.clone(), trainable),
            activation: layer.activation,
        }
    }

    fn forward(&self, x: Tensor<'t>) -> Result<Tensor<'t>> {
        Ok(self.activation.apply(x.matmul(self.weight)?.add(self.bias)?))
    }
}

fn grad_or_zeros(t: Tensor<'_>) -> Matrix {
    t.grad().unwrap_or_else(|| {
        let (r, c) = t.shape();
        Matrix::zeros(r, c)
    })
}

/// Trainable parameter access in a fixed order.
pub trait Parameterized {
    fn params(&self) -> Vec<&Matrix>;
    fn params_mut(&mut self) -> Vec<&mut Matrix>;

    /// All parameter values concatenated.
    fn flat_params(&self) -> Vec<f64> {
        self.params().iter().flat_map(|m| m.data().iter().copied()).collect()
    }
}

/// Outcome of the decision rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Prediction {
    Class(usize),
    /// No class strictly dominates every other one.
    Contradiction,
}

impl Prediction {
    pub fn class(self) -> Option<usize> {
        match self {
            Prediction::Class(k) => Some(k),
            Prediction::Contradiction => None,
        }
    }
}

/// Class `k` if `s_k > s_l + tie_tol` for every `l != k`, else a contradiction.
pub fn decide(scores: &[f64], tie_tol: f64) -> Prediction {
    let Some((best, &top)) = scores
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &f64)>, (k, v)| match acc {
            Some((_, b)) if *b >= *v => acc,
            _ => Some((k, v)),
        })
    else {
        return Prediction::Contradiction;
    };
    let dominates = scores
        .iter()
        .enumerate()
        .all(|(l, &s)| l == best || top > s + tie_tol);
    if dominates {
        Prediction::Class(best)
    } else {
        Prediction::Contradiction
    }
}

/// Applies [`decide`] to every row.
pub fn decide_rows(scores: &Matrix, tie_tol: f64) -> Vec<Prediction> {
    scores.iter_rows().map(|r| decide(r, tie_tol)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decide_examples() {
        assert_eq!(decide(&[2.0, 0.0], 0.0), Prediction::Class(0));
        assert_eq!(decide(&[1.0, 1.0], 0.0), Prediction::Contradiction);
        assert_eq!(decide(&[1.0, 1.0 - 1e-9], 1e-6), Prediction::Contradiction);
        assert_eq!(decide(&[1.0, 1.0 - 1e-9], 0.0), Prediction::Class(0));
        assert_eq!(decide(&[0.0, 3.0, 1.0], 0.0), Prediction::Class(1));
        assert_eq!(decide(&[], 0.0), Prediction::Contradiction);
    }

    #[test]
    fn decide_is_shift_invariant() {
        let rows: [[f64; 3]; 3] = [[0.5, 0.1, -0.3], [1.0, 1.0, 0.0], [-2.0, 4.0, 3.5]];
        for r in rows {
            let shifted: Vec<f64> = r.iter().map(|v| v + 8.0).collect();
            assert_eq!(decide(&r, 0.0), decide(&shifted, 0.0));
        }
    }

    #[test]
    fn glorot_bounds() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let w = glorot_uniform(10, 5, &mut rng);
        let a = (6.0f64 / 15.0).sqrt();
        assert!(w.data().iter().all(|v| v.abs() < a));
    }
}
