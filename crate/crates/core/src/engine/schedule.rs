use crate::error::{Error, Result};

/// Published staircase of `eps` values, universum first, semi-supervised last.
pub const DEFAULT_EPS_SET: [f64; 7] = [-0.05, -0.01, -0.005, -0.001, -0.0005, -0.0001, 1.0];
pub const DEFAULT_EVOLVE_PERIOD: u64 = 5000;

/// Piecewise-constant map from iteration to `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionSchedule {
    pub eps_set: Vec<f64>,
    pub evolve_period: u64,
}

impl Default for EvolutionSchedule {
    fn default() -> Self {
        EvolutionSchedule {
            eps_set: DEFAULT_EPS_SET.to_vec(),
            evolve_period: DEFAULT_EVOLVE_PERIOD,
        }
    }
}

impl EvolutionSchedule {
    pub fn new(eps_set: Vec<f64>, evolve_period: u64) -> Result<Self> {
        let s = EvolutionSchedule {
            eps_set,
            evolve_period,
        };
        s.validate()?;
        Ok(s)
    }

    /// Fixed universum schedule (plain U-GAN).
    pub fn universum_only(eps: f64) -> Result<Self> {
        Self::new(vec![eps], DEFAULT_EVOLVE_PERIOD)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_set.is_empty() {
            return Err(Error::Config("eps set must not be empty".into()));
        }
        if self.evolve_period == 0 {
            return Err(Error::Config("evolve period must be positive".into()));
        }
        let last = self.eps_set.len() - 1;
        for (i, &e) in self.eps_set.iter().enumerate() {
            let ok = e < 0.0 || (i == last && e == 1.0);
            if !ok {
                return Err(Error::Config(format!(
                    "eps set entry {i} is {e}; entries must be negative, except a final 1.0"
                )));
            }
        }
        Ok(())
    }

    /// `eps_set[iter / evolve_period]`, clamped to the last entry.
    pub fn epsilon_at(&self, iter: u64) -> f64 {
        let idx = (iter / self.evolve_period).min(self.eps_set.len() as u64 - 1);
        self.eps_set[idx as usize]
    }

    /// Whether the schedule ever reaches the semi-supervised regime.
    pub fn evolves(&self) -> bool {
        self.eps_set.last().is_some_and(|&e| e >= 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_staircase() {
        let s = EvolutionSchedule::default();
        assert_eq!(s.epsilon_at(0), -0.05);
        assert_eq!(s.epsilon_at(4999), -0.05);
        assert_eq!(s.epsilon_at(5000), -0.01);
        assert_eq!(s.epsilon_at(10_000), -0.005);
        assert_eq!(s.epsilon_at(29_999), -0.0001);
        assert_eq!(s.epsilon_at(30_000), 1.0);
        assert_eq!(s.epsilon_at(1_000_000), 1.0);
        assert!(s.evolves());
    }

    #[test]
    fn breakpoints_only_at_period_multiples() {
        let s = EvolutionSchedule::new(vec![-0.3, -0.2, -0.1], 7).unwrap();
        for it in 1..40u64 {
            let changed = s.epsilon_at(it) != s.epsilon_at(it - 1);
            assert_eq!(changed, it % 7 == 0 && it / 7 < 3, "iter {it}");
        }
    }

    #[test]
    fn validation() {
        assert!(EvolutionSchedule::new(vec![], 5).is_err());
        assert!(EvolutionSchedule::new(vec![-0.1], 0).is_err());
        assert!(EvolutionSchedule::new(vec![1.0, -0.1], 5).is_err());
        assert!(EvolutionSchedule::new(vec![-0.1, 0.5], 5).is_err());
        let u = EvolutionSchedule::universum_only(-0.05).unwrap();
        assert!(!u.evolves());
        assert_eq!(u.epsilon_at(123_456), -0.05);
    }
}
