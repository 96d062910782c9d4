use rand::Rng;

use super::{grad_or_zeros, Activation, BoundDense, Dense, Parameterized, DEFAULT_LEAK};
use crate::error::{Error, Result};
use crate::tensor::{Matrix, Tape, Tensor};

/// Feature map `phi` (a stack of dense layers) followed by one linear head
/// per class: `scores = phi(x) W^T`, `W: L x p`.
#[derive(Clone, Debug, PartialEq)]
pub struct Discriminator {
    pub phi: Vec<Dense>,
    pub heads: Matrix,
}

impl Discriminator {
    /// MLP feature map with leaky-relu hidden layers. `hidden = []` gives the
    /// linear model `scores = x W^T`.
    pub fn mlp<R: Rng>(input_dim: usize, hidden: &[usize], classes: usize, rng: &mut R) -> Self {
        let mut phi = Vec::with_capacity(hidden.len());
        let mut width = input_dim;
        for &h in hidden {
            phi.push(Dense::init(width, h, Activation::LeakyRelu(DEFAULT_LEAK), rng));
            width = h;
        }
        let heads = super::glorot_uniform(classes, width, rng);
        Discriminator { phi, heads }
    }

    pub fn new(phi: Vec<Dense>, heads: Matrix) -> Result<Self> {
        let d = Discriminator { phi, heads };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for pair in self.phi.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::shape(
                    "Discriminator",
                    format!("layer widths {} -> {}", pair[0].outputs(), pair[1].inputs()),
                ));
            }
        }
        if let Some(last) = self.phi.last() {
            if last.outputs() != self.feature_dim() {
                return Err(Error::shape(
                    "Discriminator",
                    format!("feature width {} vs head width {}", last.outputs(), self.feature_dim()),
                ));
            }
        }
        if self.classes() < 2 {
            return Err(Error::Domain("discriminator needs at least 2 heads".into()));
        }
        Ok(())
    }

    pub fn classes(&self) -> usize {
        self.heads.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.heads.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.phi.first().map_or(self.feature_dim(), Dense::inputs)
    }

    pub fn bind<'t>(&self, tape: &'t Tape, trainable: bool) -> BoundDiscriminator<'t> {
        BoundDiscriminator {
            layers: self.phi.iter().map(|l| BoundDense::bind(l, tape, trainable)).collect(),
            heads: tape.leaf(self.heads.clone(), trainable),
        }
    }

    /// Tape-free evaluation returning `(features, scores)`.
    pub fn forward_values(&self, x: &Matrix) -> Result<(Matrix, Matrix)> {
        if x.cols() != self.input_dim() {
            return Err(Error::shape(
                "disc_forward",
                format!("input width {} vs expected {}", x.cols(), self.input_dim()),
            ));
        }
        let mut feats = x.clone();
        for layer in &self.phi {
            feats = layer.forward_values(&feats)?;
        }
        let mut scores = Matrix::zeros(feats.rows(), self.classes());
        crate::tensor::gemm_nt(&feats, &self.heads, &mut scores);
        Ok((feats, scores))
    }

    pub fn scores(&self, x: &Matrix) -> Result<Matrix> {
        Ok(self.forward_values(x)?.1)
    }
}

impl Parameterized for Discriminator {
    fn params(&self) -> Vec<&Matrix> {
        let mut out: Vec<&Matrix> = self.phi.iter().flat_map(|l| [&l.weight, &l.bias]).collect();
        out.push(&self.heads);
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out: Vec<&mut Matrix> = self
            .phi
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect();
        out.push(&mut self.heads);
        out
    }
}

/// Features and class scores of one forward pass.
#[derive(Clone, Copy, Debug)]
pub struct DiscOutput<'t> {
    pub features: Tensor<'t>,
    pub scores: Tensor<'t>,
}

/// A [`Discriminator`] whose parameters live on a tape.
pub struct BoundDiscriminator<'t> {
    layers: Vec<BoundDense<'t>>,
    heads: Tensor<'t>,
}

impl<'t> BoundDiscriminator<'t> {
    pub fn forward(&self, x: Tensor<'t>) -> Result<DiscOutput<'t>> {
        let expected = self
            .layers
            .first()
            .map_or(self.heads.shape().1, |l| l.weight.shape().0);
        if x.shape().1 != expected {
            return Err(Error::shape(
                "disc_forward",
                format!("input width {} vs expected {expected}", x.shape().1),
            ));
        }
        let mut feats = x;
        for layer in &self.layers {
            feats = layer.forward(feats)?;
        }
        let scores = feats.matmul(self.heads.transpose())?;
        Ok(DiscOutput { features: feats, scores })
    }

    /// Gradients in [`Parameterized`] order; zeros where none flowed.
    pub fn grads(&self) -> Vec<Matrix> {
        let mut out: Vec<Matrix> = self
            .layers
            .iter()
            .flat_map(|l| [grad_or_zeros(l.weight), grad_or_zeros(l.bias)])
            .collect();
        out.push(grad_or_zeros(self.heads));
        out
    }
}

/// `(features, scores)` of `disc` on `x`, with parameters as constants.
pub fn disc_forward<'t>(tape: &'t Tape, disc: &Discriminator, x: Tensor<'t>) -> Result<DiscOutput<'t>> {
    disc.bind(tape, false).forward(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_features_reproduce_inputs() {
        let d = Discriminator::new(vec![], Matrix::identity(2)).unwrap();
        let tape = Tape::new();
        let x = tape.constant(Matrix::from_rows(&[[2.0, 0.0]]));
        let out = disc_forward(&tape, &d, x).unwrap();
        assert_eq!(out.scores.value(), Matrix::from_rows(&[[2.0, 0.0]]));
        assert_eq!(d.scores(&x.value()).unwrap(), Matrix::from_rows(&[[2.0, 0.0]]));
    }

    #[test]
    fn zero_weights_give_zero_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut d = Discriminator::mlp(3, &[4], 2, &mut rng);
        for p in d.params_mut() {
            p.data_mut().fill(0.0);
        }
        let s = d.scores(&Matrix::filled(5, 3, 1.7)).unwrap();
        assert!(s.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tape_and_value_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = Discriminator::mlp(4, &[6, 5], 3, &mut rng);
        let x = crate::models::glorot_uniform(7, 4, &mut rng);
        let tape = Tape::new();
        let out = d.bind(&tape, true).forward(tape.constant(x.clone())).unwrap();
        let (f, s) = d.forward_values(&x).unwrap();
        for (a, b) in out.scores.value().data().iter().zip(s.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(out.features.shape(), f.shape());
    }

    #[test]
    fn shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = Discriminator::mlp(4, &[6], 3, &mut rng);
        assert!(matches!(d.scores(&Matrix::zeros(2, 5)), Err(Error::Shape { .. })));
        let tape = Tape::new();
        let bad = tape.constant(Matrix::zeros(2, 3));
        assert!(disc_forward(&tape, &d, bad).is_err());

        let mut broken = d.clone();
        broken.heads = Matrix::zeros(3, 2);
        assert!(broken.validate().is_err());
    }
}
