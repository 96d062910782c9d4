use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment estimates, one pair per parameter matrix.
#[derive(Clone, Debug, Default)]
pub struct AdamState {
    m: Vec<Matrix>,
    v: Vec<Matrix>,
    t: u64,
}

impl AdamState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update, in place. Moments are allocated on
    /// the first call.
    pub fn step(&mut self, params: Vec<&mut Matrix>, grads: &[Matrix], cfg: &AdamConfig) {
        assert_eq!(params.len(), grads.len(), "one gradient per parameter");
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| Matrix::zeros(g.rows(), g.cols())).collect();
            self.v = self.m.clone();
        }
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - cfg.beta1.powi(t);
        let c2 = 1.0 - cfg.beta2.powi(t);
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            assert_eq!(p.shape(), g.shape(), "gradient shape");
            let iter = p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut());
            for (((p, &g), m), v) in iter {
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = Matrix::from_rows(&[[0.5, -2.0]]);
        let before = p.clone();
        let mut st = AdamState::new();
        for _ in 0..5 {
            st.step(vec![&mut p], &[Matrix::zeros(1, 2)], &AdamConfig::default());
        }
        assert_eq!(p, before);
        assert_eq!(st.steps(), 5);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps)
        let mut p = Matrix::scalar(0.0);
        AdamState::new().step(vec![&mut p], &[Matrix::scalar(1.0)], &AdamConfig::default());
        assert!((p.get(0, 0) + 0.001).abs() < 1e-6);
    }

    #[test]
    fn trajectories_are_reproducible() {
        let run = || {
            let mut p = Matrix::from_rows(&[[1.0, 2.0, -3.0]]);
            let mut st = AdamState::new();
            for k in 0..50 {
                let g = p.map(|x| 2.0 * x + (k as f64).sin());
                st.step(vec![&mut p], &[g], &AdamConfig::default());
            }
            p.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut p = Matrix::from_rows(&[[3.0, -4.0]]);
        let mut st = AdamState::new();
        let cfg = AdamConfig {
            lr: 0.05,
            ..AdamConfig::default()
        };
        for _ in 0..2000 {
            let g = p.map(|x| 2.0 * x);
            st.step(vec![&mut p], &[g], &cfg);
        }
        assert!(p.frobenius_norm() < 1e-2);
    }
}
