//! Shared fixtures for the benchmarks.

use wclt::{CostFunction, Coupling, Distribution, PairedSample};

pub const W2: CostFunction = CostFunction::Power { alpha: 2.0 };

/// The Gaussian benchmark pair `N(0,1)` against `N(1,4)`.
pub fn gaussian_pair() -> (Distribution, Distribution) {
    (
        Distribution::Gaussian { mean: 0.0, sd: 1.0 },
        Distribution::Gaussian { mean: 1.0, sd: 2.0 },
    )
}

/// Pareto(6) against a shifted, rescaled copy of itself.
pub fn pareto_pair() -> (Distribution, Distribution) {
    let base = Distribution::Pareto { shape: 6.0 };
    let shifted = Distribution::LocationScale {
        base: Box::new(base.clone()),
        scale: 1.5,
        shift: 0.5,
    };
    (base, shifted)
}

/// Independent sample of size `n` from the Gaussian pair.
pub fn gaussian_sample(n: usize, seed: u64) -> PairedSample {
    let (f, g) = gaussian_pair();
    Coupling::Independent.sample_pairs(&f, &g, n, seed).expect("valid fixture")
}
