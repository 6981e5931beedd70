//! Scaled Poisson differences.
//!
//! A wavelet coefficient `W = sum_i ψ_i x_i` of independent Poisson `x_i`
//! splits into a positive part (indices with `ψ_i >= 0`) and a negative part.
//! Each part is replaced by a single scaled Poisson `α Po(λ̃)` with the same
//! mean and variance:
//!
//! ```text
//! α λ̃  = sum λ|ψ|        λ̃ = (sum λ|ψ|)² / sum λψ²
//! α² λ̃ = sum λψ²         α  =  sum λψ² / sum λ|ψ|
//! ```
//!
//! giving `W ≈ α⁺ Po(λ̃⁺) − α⁻ Po(λ̃⁻)`. The approximation is exact whenever
//! all weights on a side share one magnitude (Haar atoms, unit weights).

use rand::Rng;

use crate::error::{Error, Result};
use crate::poisson;
use crate::seed::rng_for;

/// Tail mass ignored when enumerating Poisson supports.
pub const SUPPORT_TAIL: f64 = 1e-12;
/// Tolerance for matching irrational lattice points.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Per-coordinate tail for the brute-force coefficient pmf.
pub const EXACT_TAIL: f64 = 1e-10;
/// Largest atom support the brute-force pmf will enumerate.
pub const MAX_EXACT_SUPPORT: usize = 8;
const MAX_EXACT_POINTS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpdParams {
    pub lambda_plus: f64,
    pub alpha_plus: f64,
    pub lambda_minus: f64,
    pub alpha_minus: f64,
}

/// `Difference` is `α⁺W⁺ − α⁻W⁻`; `Sum` is `α⁺W⁺ + α⁻W⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdVariant {
    Difference,
    Sum,
}

impl SpdVariant {
    fn sign(self) -> f64 {
        match self {
            SpdVariant::Difference => -1.0,
            SpdVariant::Sum => 1.0,
        }
    }
}

/// A discrete distribution on the reals: sorted `(value, mass)` pairs.
pub type DiscretePmf = Vec<(f64, f64)>;

fn side(sum_abs: f64, sum_sq: f64) -> (f64, f64) {
    if sum_abs > 0.0 && sum_sq > 0.0 {
        (sum_abs * sum_abs / sum_sq, sum_sq / sum_abs)
    } else {
        (0.0, 0.0)
    }
}

/// Per-side sums `(sum λ|ψ|, sum λψ²)` for `ψ >= 0` and `ψ < 0`.
pub fn side_moments(atom: &[f64], intensities: &[f64]) -> Result<[(f64, f64); 2]> {
    if atom.len() != intensities.len() {
        return Err(Error::Dimensions(format!(
            "atom has {} taps but {} intensities",
            atom.len(),
            intensities.len()
        )));
    }
    let mut plus = (0.0, 0.0);
    let mut minus = (0.0, 0.0);
    for (&psi, &lam) in atom.iter().zip(intensities) {
        if lam < 0.0 {
            return Err(Error::invalid("intensity", format!("{lam} < 0")));
        }
        let acc = if psi >= 0.0 { &mut plus } else { &mut minus };
        acc.0 += lam * psi.abs();
        acc.1 += lam * psi * psi;
    }
    Ok([plus, minus])
}

pub fn moment_match(atom: &[f64], intensities: &[f64]) -> Result<SpdParams> {
    let [plus, minus] = side_moments(atom, intensities)?;
    let (lambda_plus, alpha_plus) = side(plus.0, plus.1);
    let (lambda_minus, alpha_minus) = side(minus.0, minus.1);
    Ok(SpdParams {
        lambda_plus,
        alpha_plus,
        lambda_minus,
        alpha_minus,
    })
}

impl SpdParams {
    pub fn mean_var(&self, variant: SpdVariant) -> (f64, f64) {
        let mp = self.alpha_plus * self.lambda_plus;
        let mm = self.alpha_minus * self.lambda_minus;
        let var = self.alpha_plus.powi(2) * self.lambda_plus
            + self.alpha_minus.powi(2) * self.lambda_minus;
        (mp + variant.sign() * mm, var)
    }

    pub fn swapped(&self) -> Self {
        Self {
            lambda_plus: self.lambda_minus,
            alpha_plus: self.alpha_minus,
            lambda_minus: self.lambda_plus,
            alpha_minus: self.alpha_plus,
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, variant: SpdVariant, rng: &mut R) -> f64 {
        let p = poisson::sample(rng, self.lambda_plus) as f64;
        let m = poisson::sample(rng, self.lambda_minus) as f64;
        self.alpha_plus * p + variant.sign() * self.alpha_minus * m
    }

    fn plus_active(&self) -> bool {
        self.lambda_plus > 0.0 && self.alpha_plus > 0.0
    }

    fn minus_active(&self) -> bool {
        self.lambda_minus > 0.0 && self.alpha_minus > 0.0
    }
}

pub fn spd_mean_var(p: &SpdParams, variant: SpdVariant) -> (f64, f64) {
    p.mean_var(variant)
}

pub fn spd_sample(p: &SpdParams, variant: SpdVariant, seed: u64) -> f64 {
    p.sample_with(variant, &mut rng_for(seed, "spd-sample", 0))
}

/// Probability mass at `w`, summing `Po(m; λ̃⁺) Po(n; λ̃⁻)` over all lattice
/// points `α⁺m ± α⁻n` within `tol` of `w`. Off-support points get zero.
pub fn spd_pmf(p: &SpdParams, variant: SpdVariant, w: f64, tol: f64) -> f64 {
    let m_max = if p.plus_active() {
        poisson::upper_support(p.lambda_plus, SUPPORT_TAIL)
    } else {
        0
    };
    let n_max = if p.minus_active() {
        poisson::upper_support(p.lambda_minus, SUPPORT_TAIL)
    } else {
        0
    };
    let sign = variant.sign();
    let mut mass = 0.0;
    for m in 0..=m_max {
        let base = p.alpha_plus * m as f64;
        let n = if p.minus_active() {
            let target = (w - base) / (sign * p.alpha_minus);
            let n = target.round();
            if n < 0.0 || n > n_max as f64 {
                continue;
            }
            n as u64
        } else {
            0
        };
        let value = base + sign * p.alpha_minus * n as f64;
        if (value - w).abs() <= tol {
            mass += poisson::pmf(m, p.lambda_plus) * poisson::pmf(n, p.lambda_minus);
        }
    }
    mass
}

/// Merge adjacent values closer than `tol`, keeping the first value.
fn merge_sorted(mut pts: Vec<(f64, f64)>, tol: f64) -> DiscretePmf {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: DiscretePmf = Vec::with_capacity(pts.len());
    for (v, m) in pts {
        match out.last_mut() {
            Some(last) if (v - last.0).abs() <= tol => last.1 += m,
            _ => out.push((v, m)),
        }
    }
    out
}

/// Whole support of the SPD law, truncated where Poisson tails drop below
/// [`SUPPORT_TAIL`].
pub fn spd_support(p: &SpdParams, variant: SpdVariant, tol: f64) -> DiscretePmf {
    let side_pmf = |active: bool, lambda: f64| -> Vec<f64> {
        if !active {
            return vec![1.0];
        }
        let k = poisson::upper_support(lambda, SUPPORT_TAIL);
        (0..=k).map(|i| poisson::pmf(i, lambda)).collect()
    };
    let plus = side_pmf(p.plus_active(), p.lambda_plus);
    let minus = side_pmf(p.minus_active(), p.lambda_minus);
    let sign = variant.sign();
    let mut pts = Vec::with_capacity(plus.len() * minus.len());
    for (m, &pm) in plus.iter().enumerate() {
        for (n, &pn) in minus.iter().enumerate() {
            let v = p.alpha_plus * m as f64 + sign * p.alpha_minus * n as f64;
            pts.push((v, pm * pn));
        }
    }
    merge_sorted(pts, tol)
}

/// Brute-force law of `sum ψ_i x_i` for independent `x_i ~ Po(λ_i)`, by
/// enumerating each coordinate's outcomes up to tail [`EXACT_TAIL`].
pub fn exact_coefficient_pmf(atom: &[f64], intensities: &[f64], tol: f64) -> Result<DiscretePmf> {
    if atom.len() != intensities.len() {
        return Err(Error::Dimensions("atom and intensity lengths differ".into()));
    }
    let active: Vec<(f64, f64)> = atom
        .iter()
        .zip(intensities)
        .filter(|(&w, &l)| w != 0.0 && l > 0.0)
        .map(|(&w, &l)| (w, l))
        .collect();
    if active.len() > MAX_EXACT_SUPPORT {
        return Err(Error::EnumerationTooLarge(format!(
            "atom support {} > {MAX_EXACT_SUPPORT}",
            active.len()
        )));
    }
    let mut dist: DiscretePmf = vec![(0.0, 1.0)];
    for (w, lambda) in active {
        let k = poisson::upper_support(lambda, EXACT_TAIL);
        let outcomes: Vec<(f64, f64)> = (0..=k)
            .map(|i| (w * i as f64, poisson::pmf(i, lambda)))
            .collect();
        if dist.len() * outcomes.len() > MAX_EXACT_POINTS * 4 {
            return Err(Error::EnumerationTooLarge(format!(
                "{} x {} lattice points",
                dist.len(),
                outcomes.len()
            )));
        }
        let mut next = Vec::with_capacity(dist.len() * outcomes.len());
        for &(v, m) in &dist {
            for &(o, q) in &outcomes {
                next.push((v + o, m * q));
            }
        }
        dist = merge_sorted(next, tol);
        if dist.len() > MAX_EXACT_POINTS {
            return Err(Error::EnumerationTooLarge(format!(
                "{} distinct values",
                dist.len()
            )));
        }
    }
    Ok(dist)
}

/// Total-variation distance between two discrete laws on the reals, pairing
/// support points closer than `tol`.
pub fn total_variation(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(va, ma)), Some(&(vb, mb))) if (va - vb).abs() <= tol => {
                acc += (ma - mb).abs();
                i += 1;
                j += 1;
            }
            (Some(&(va, ma)), Some(&(vb, _))) if va < vb => {
                acc += ma;
                i += 1;
            }
            (Some(_), Some(&(_, mb))) => {
                acc += mb;
                j += 1;
            }
            (Some(&(_, ma)), None) => {
                acc += ma;
                i += 1;
            }
            (None, Some(&(_, mb))) => {
                acc += mb;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    0.5 * acc
}

/// Largest absolute difference between the two CDFs. Unlike TV distance
/// this stays informative when the supports are different lattices.
pub fn kolmogorov_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0, 0.0);
    let mut worst: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let va = a.get(i).map_or(f64::INFINITY, |x| x.0);
        let vb = b.get(j).map_or(f64::INFINITY, |x| x.0);
        let v = va.min(vb);
        while i < a.len() && a[i].0 == v {
            fa += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j].0 == v {
            fb += b[j].1;
            j += 1;
        }
        worst = worst.max((fa - fb).abs());
    }
    worst
}

/// Moment-matched parameters plus the TV distance between the SPD law and
/// the exact coefficient law. The distance is `None` when the exact law is
/// too large to enumerate.
pub fn wavelet_coeff_dist(atom: &[f64], intensities: &[f64]) -> Result<(SpdParams, Option<f64>)> {
    let params = moment_match(atom, intensities)?;
    let quality = match exact_coefficient_pmf(atom, intensities, DEFAULT_TOL) {
        Ok(exact) => {
            let approx = spd_support(&params, SpdVariant::Difference, DEFAULT_TOL);
            Some(total_variation(&approx, &exact, DEFAULT_TOL))
        }
        Err(Error::EnumerationTooLarge(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((params, quality))
}
