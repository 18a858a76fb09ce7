//! Benchmark fixtures for the audit searches.

use fairaudit_core::synth::{synth_population, MarginalSpec};
use fairaudit_core::{Dataset, UtilityBounds};

/// `k` classes of `per_class` rows over `m` PSVs. Class 0 under-covers the
/// first `m / 3` PSVs; the rest share one fraction ladder across classes.
pub fn skewed_population(m: usize, k: usize, per_class: usize, seed: u64) -> Dataset {
    let skewed = m / 3;
    let fractions = (0..k)
        .map(|c| {
            (0..m)
                .map(|j| match (j < skewed, c == 0) {
                    (true, true) => 0.1,
                    (true, false) => 0.4,
                    _ => 0.2 + 0.5 * j as f64 / m as f64,
                })
                .collect()
        })
        .collect();
    let spec = MarginalSpec {
        class_sizes: vec![per_class; k],
        psv_names: (0..m).map(|j| format!("v{j}")).collect(),
        fractions,
        utilities: None,
        class_names: None,
        groups: Vec::new(),
    };
    synth_population(&spec, seed).expect("fixture spec is valid")
}

/// Bounds `[1, 2]` everywhere except `[3, 4]` for class 0.
pub fn skewed_bounds(k: usize) -> UtilityBounds {
    let mut lower = vec![1.0; k];
    let mut upper = vec![2.0; k];
    lower[0] = 3.0;
    upper[0] = 4.0;
    UtilityBounds::new(lower, upper).expect("lower <= upper")
}
