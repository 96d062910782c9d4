//! Minimal dense 2-D tensors with reverse-mode differentiation.
//!
//! Values are `f64` matrices; batches are rows. A [`Tape`] owns every node
//! created during one forward pass and [`Tensor`] is a cheap copyable handle
//! into it. Subgradients at kinks take the "constant branch": `relu'(0) = 0`,
//! `|x|'(0) = 0`, and `max(x, c)` / `min(x, c)` have derivative 0 when
//! `x == c`.

mod matrix;
mod tape;

pub use matrix::Matrix;
pub(crate) use matrix::gemm_nt;
pub use tape::{Axis, Tape, Tensor};

#[cfg(test)]
mod tests;
