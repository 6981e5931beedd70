//! Shared inputs for the benchmarks.

use ridgelet_core::phantom::{make_phantom, sample_poisson, PhantomSpec};
use ridgelet_core::{CountImage, IntensityImage};

/// The inhomogeneous test phantom at the experiment settings and one noisy
/// draw of it.
pub fn phantom_pair(size: usize, seed: u64) -> (IntensityImage, CountImage) {
    let clean = make_phantom(&PhantomSpec::inhomogeneous(size, 0.05, 10.0)).expect("valid phantom");
    let noisy = sample_poisson(&clean, seed);
    (clean, noisy)
}

/// A deterministic test signal of length `n`.
pub fn signal(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i * 37) % 11) as f64 + (i as f64 * 0.1).sin()).collect()
}
