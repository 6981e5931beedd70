//! Poisson variate generation.
//!
//! Sequential-search inversion below `INVERSION_CUTOFF`, Hörmann's PTRS
//! (transformed rejection with squeeze) at and above it.

use rand::Rng;
use statrs::function::gamma::ln_gamma;

const INVERSION_CUTOFF: f64 = 10.0;

pub fn sample<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if lambda.is_nan() || lambda <= 0.0 {
        return 0;
    }
    if lambda < INVERSION_CUTOFF {
        inversion(rng, lambda)
    } else {
        ptrs(rng, lambda)
    }
}

fn inversion<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    // The cap only triggers when u is within rounding of 1.
    while u > cdf && k < 1000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

fn ptrs<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -lambda + k * loglam - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Poisson probability mass `P(X = k)` for `X ~ Po(lambda)`.
pub fn pmf(k: u64, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let k = k as f64;
    (k * lambda.ln() - lambda - ln_gamma(k + 1.0)).exp()
}

/// Smallest `k` such that `P(X > k) < tail`.
pub fn upper_support(lambda: f64, tail: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    // Walk the pmf from the mode; the cdf is accumulated in log-safe steps.
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    if p == 0.0 {
        // Large lambda: start from a conservative normal bound instead.
        let start = (lambda - 10.0 * lambda.sqrt()).max(0.0).floor() as u64;
        k = start;
        cdf = 0.0;
        p = pmf(k, lambda);
        cdf += p;
    }
    while 1.0 - cdf >= tail {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
        if p < tail * 1e-3 && k as f64 > lambda {
            break;
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(lambda: f64, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..n).map(|_| sample(&mut rng, lambda) as f64).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
        (m, v)
    }

    #[test]
    fn both_regimes_match_poisson_moments() {
        let n = 200_000;
        for &lambda in &[0.05, 3.0, 9.99, 10.0, 45.0, 1000.0] {
            let (m, v) = moments(lambda, n, 11);
            let se = (lambda / n as f64).sqrt();
            assert!((m - lambda).abs() <= 5.0 * se, "lambda {lambda}: mean {m}");
            assert!((v / lambda - 1.0).abs() < 0.05, "lambda {lambda}: var {v}");
        }
    }

    #[test]
    fn zero_intensity_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..100).all(|_| sample(&mut rng, 0.0) == 0));
    }

    #[test]
    fn pmf_sums_to_one_over_upper_support() {
        for &lambda in &[0.05, 4.0, 20.0, 300.0] {
            let k = upper_support(lambda, 1e-12);
            let s: f64 = (0..=k).map(|i| pmf(i, lambda)).sum();
            assert!((s - 1.0).abs() < 1e-10, "lambda {lambda}: {s}");
        }
    }
}
