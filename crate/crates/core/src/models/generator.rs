use rand::Rng;

use super::{grad_or_zeros, Activation, BoundDense, Dense, Parameterized, DEFAULT_LEAK};
use crate::error::{Error, Result};
use crate::tensor::{Matrix, Tape, Tensor};

pub const DEFAULT_NOISE_DIM: usize = 16;

/// Noise-to-sample MLP with leaky-relu hidden layers and a linear output.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub layers: Vec<Dense>,
}

impl Generator {
    pub fn mlp<R: Rng>(noise_dim: usize, hidden: &[usize], output_dim: usize, rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut width = noise_dim;
        for &h in hidden {
            layers.push(Dense::init(width, h, Activation::LeakyRelu(DEFAULT_LEAK), rng));
            width = h;
        }
        layers.push(Dense::init(width, output_dim, Activation::Identity, rng));
        Generator { layers }
    }

    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Domain("generator needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::shape(
                    "Generator",
                    format!("layer widths {} -> {}", pair[0].outputs(), pair[1].inputs()),
                ));
            }
        }
        Ok(Generator { layers })
    }

    pub fn noise_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    /// Uniform(-1, 1) noise batch.
    pub fn sample_noise<R: Rng>(&self, count: usize, rng: &mut R) -> Matrix {
        let data = (0..count * self.noise_dim())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Matrix::from_vec(count, self.noise_dim(), data).expect("noise shape")
    }

    pub fn bind<'t>(&self, tape: &'t Tape, trainable: bool) -> BoundGenerator<'t> {
        BoundGenerator {
            layers: self.layers.iter().map(|l| BoundDense::bind(l, tape, trainable)).collect(),
        }
    }

    pub fn forward_values(&self, noise: &Matrix) -> Result<Matrix> {
        if noise.cols() != self.noise_dim() {
            return Err(Error::shape(
                "gen_forward",
                format!("noise width {} vs expected {}", noise.cols(), self.noise_dim()),
            ));
        }
        let mut x = noise.clone();
        for layer in &self.layers {
            x = layer.forward_values(&x)?;
        }
        Ok(x)
    }
}

impl Parameterized for Generator {
    fn params(&self) -> Vec<&Matrix> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias]).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }
}

/// A [`Generator`] whose parameters live on a tape.
pub struct BoundGenerator<'t> {
    layers: Vec<BoundDense<'t>>,
}

impl<'t> BoundGenerator<'t> {
    pub fn forward(&self, noise: Tensor<'t>) -> Result<Tensor<'t>> {
        let expected = self.layers[0].weight.shape().0;
        if noise.shape().1 != expected {
            return Err(Error::shape(
                "gen_forward",
                format!("noise width {} vs expected {expected}", noise.shape().1),
            ));
        }
        let mut x = noise;
        for layer in &self.layers {
            x = layer.forward(x)?;
        }
        Ok(x)
    }

    pub fn grads(&self) -> Vec<Matrix> {
        self.layers
            .iter()
            .flat_map(|l| [grad_or_zeros(l.weight), grad_or_zeros(l.bias)])
            .collect()
    }
}

/// Generated batch for `noise`, with generator parameters as constants.
pub fn gen_forward<'t>(tape: &'t Tape, gen: &Generator, noise: Tensor<'t>) -> Result<Tensor<'t>> {
    gen.bind(tape, false).forward(noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_generator_outputs_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut g = Generator::mlp(4, &[8], 2, &mut rng);
        for p in g.params_mut() {
            p.data_mut().fill(0.0);
        }
        let noise = g.sample_noise(6, &mut rng);
        assert!(g.forward_values(&noise).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_layer_passes_noise_through() {
        let layer = Dense {
            weight: Matrix::identity(3),
            bias: Matrix::zeros(1, 3),
            activation: Activation::Identity,
        };
        let g = Generator::new(vec![layer]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = g.sample_noise(4, &mut rng);
        assert_eq!(g.forward_values(&noise).unwrap(), noise);
        let tape = Tape::new();
        let out = g.bind(&tape, false).forward(tape.constant(noise.clone())).unwrap();
        assert_eq!(out.value(), noise);
        assert!(noise.data().iter().all(|v| (-1.0..1.0).contains(v)));
    }

    #[test]
    fn noise_width_is_checked() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = Generator::mlp(4, &[8], 2, &mut rng);
        assert!(g.forward_values(&Matrix::zeros(1, 3)).is_err());
        assert!(Generator::new(vec![]).is_err());
    }
}
