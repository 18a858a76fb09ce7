//! Simulation check of the expected total utility under uniform random
//! allocation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Trials per independent generator stream.
const CHUNK: usize = 4096;

pub const MIN_TRIALS: usize = 1000;

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
        }
    }
}

/// `(mean, standard_error)` of the total utility of `n_x` instances, each
/// assigned independently and uniformly to one of `utilities.len()` classes.
///
/// Generator: ChaCha8 seeded from `seed`, with chunk `i` of the trials drawn
/// from stream `i`, so results do not depend on the thread count.
pub fn monte_carlo_expected_utility(
    n_x: usize,
    utilities: &[f64],
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_TRIALS} trials required, got {trials}"
        )));
    }
    if utilities.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one class utility required".into(),
        ));
    }
    let k = utilities.len();
    let chunks = trials.div_ceil(CHUNK);
    let moments = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let todo = CHUNK.min(trials - c * CHUNK);
            let mut m = Moments::default();
            for _ in 0..todo {
                let total: f64 = (0..n_x).map(|_| utilities[rng.random_range(0..k)]).sum();
                m.push(total);
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    let variance = moments.m2 / (moments.count - 1) as f64;
    Ok((moments.mean, (variance / moments.count as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit_utility::expected_random_utility;

    #[test]
    fn two_class_example_within_four_standard_errors() {
        let (mean, se) = monte_carlo_expected_utility(8, &[1.0, 4.0], 100_000, 7).unwrap();
        assert!((mean - 20.0).abs() <= 4.0 * se, "mean {mean}, se {se}");
        assert!(se > 0.0);
    }

    #[test]
    fn single_class_is_exact() {
        let (mean, se) = monte_carlo_expected_utility(5, &[3.0], 5000, 1).unwrap();
        assert_eq!(mean, 15.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn empty_group_has_zero_utility() {
        let (mean, se) = monte_carlo_expected_utility(0, &[1.0, 2.0, 3.0], 2000, 3).unwrap();
        assert_eq!(mean, 0.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn deterministic_and_validated() {
        let a = monte_carlo_expected_utility(10, &[1.0, 2.0, 7.0], 10_000, 42).unwrap();
        let b = monte_carlo_expected_utility(10, &[1.0, 2.0, 7.0], 10_000, 42).unwrap();
        assert_eq!(a, b);
        assert!((a.0 - expected_random_utility(10, &[1.0, 2.0, 7.0])).abs() <= 4.0 * a.1);
        assert!(monte_carlo_expected_utility(3, &[1.0], 999, 0).is_err());
        assert!(monte_carlo_expected_utility(3, &[], 1000, 0).is_err());
    }

    #[test]
    fn merged_moments_match_a_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut merged = Moments::default();
        for chunk in xs.chunks(130) {
            let mut m = Moments::default();
            chunk.iter().for_each(|&x| m.push(x));
            merged = merged.merge(m);
        }
        assert!((whole.mean - merged.mean).abs() < 1e-9);
        assert!((whole.m2 - merged.m2).abs() < 1e-6 * whole.m2);
    }
}
