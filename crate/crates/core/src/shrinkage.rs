//! Soft thresholding of detail coefficients with per-band threshold
//! selection.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spd::{moment_match, SpdVariant};
use crate::wavelet::{atom_taps, Band, WaveletPyramid, WaveletSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selector {
    /// Minimise squared error against clean reference coefficients.
    Oracle,
    /// Stein risk with a Gaussian approximation of the coefficient noise.
    Sure,
    /// One absolute threshold for every band.
    Fixed(f64),
}

impl Selector {
    pub fn name(self) -> &'static str {
        match self {
            Selector::Oracle => "oracle",
            Selector::Sure => "sure",
            Selector::Fixed(_) => "fixed",
        }
    }

    /// Parses `oracle`, `sure`, or `fixed:<tau>`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" | "oracle-erm" => Some(Selector::Oracle),
            "sure" | "sure-gaussian-approx" => Some(Selector::Sure),
            other => other
                .strip_prefix("fixed:")
                .and_then(|t| t.parse::<f64>().ok())
                .filter(|t| t.is_finite() && *t >= 0.0)
                .map(Selector::Fixed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPolicy {
    pub selector: Selector,
    /// Number of candidate thresholds, both endpoints included.
    pub grid_points: usize,
    /// Largest candidate, in units of the band noise scale.
    pub grid_max: f64,
    /// One threshold per (level, angle block) rather than per level.
    pub per_band: bool,
    /// Consecutive projections sharing a threshold.
    pub angle_block: usize,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        Self {
            selector: Selector::Oracle,
            grid_points: 51,
            grid_max: 5.0,
            per_band: true,
            angle_block: 10,
        }
    }
}

impl ThresholdPolicy {
    pub fn with_selector(selector: Selector) -> Self {
        Self {
            selector,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 1 {
            return Err(Error::invalid("grid_points", "must be >= 1"));
        }
        if !(self.grid_max.is_finite() && self.grid_max >= 0.0) {
            return Err(Error::invalid("grid_max", format!("{} is not a finite value >= 0", self.grid_max)));
        }
        if self.angle_block == 0 {
            return Err(Error::invalid("angle_block", "must be >= 1"));
        }
        if let Selector::Fixed(t) = self.selector {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid("threshold", format!("{t} is not a finite value >= 0")));
            }
        }
        Ok(())
    }

    /// Candidate thresholds for a band whose noise scale is `scale`.
    pub fn grid(&self, scale: f64) -> Vec<f64> {
        let top = self.grid_max * scale;
        if self.grid_points == 1 {
            return vec![0.0];
        }
        let last = (self.grid_points - 1) as f64;
        (0..self.grid_points).map(|i| top * i as f64 / last).collect()
    }
}

/// Per-coefficient noise variance estimates for one detail band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandNoiseModel {
    pub variances: Vec<f64>,
}

impl BandNoiseModel {
    pub fn median(&self) -> f64 {
        median(&self.variances)
    }
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

pub fn soft_threshold(w: f64, tau: f64) -> f64 {
    let m = w.abs() - tau;
    if m > 0.0 {
        m.copysign(w)
    } else {
        0.0
    }
}

/// Noise variances for the detail band at `level`, from the co-located
/// approximation at the same level. The approximation is divided by the
/// lowpass gain so it estimates the local input intensity, which is then
/// spread over the detail atom and moment matched.
pub fn estimate_band_noise(
    approximation: &[f64],
    spec: &WaveletSpec,
    level: usize,
    signal_length: usize,
) -> Result<BandNoiseModel> {
    let expected = spec.band_len(signal_length, level);
    if approximation.len() != expected {
        return Err(Error::Dimensions(format!(
            "approximation has {} samples, level {level} band has {expected}",
            approximation.len()
        )));
    }
    let taps = atom_taps(spec, Band::Detail(level), signal_length)?;
    let weights: Vec<f64> = taps.iter().map(|&(_, w)| w).collect();
    let (_, unit_var) = moment_match(&weights, &vec![1.0; weights.len()])?.mean_var(SpdVariant::Difference);
    let gain = spec.filter.lowpass().iter().sum::<f64>().powi(level as i32);
    let variances = approximation
        .iter()
        .map(|&a| (a.max(0.0) / gain) * unit_var)
        .map(|v| if v.is_finite() { v.max(0.0) } else { 0.0 })
        .collect();
    Ok(BandNoiseModel { variances })
}

/// Noise models for every detail band of `p`, finest first.
pub fn estimate_pyramid_noise(p: &WaveletPyramid) -> Result<Vec<BandNoiseModel>> {
    (1..=p.levels())
        .map(|j| estimate_band_noise(&p.approximation_at(j)?, &p.spec, j, p.signal_length))
        .collect()
}

/// Sum of squared errors of soft thresholding `noisy` at `tau` against `clean`.
pub fn oracle_risk(noisy: &[f64], clean: &[f64], tau: f64) -> f64 {
    noisy
        .iter()
        .zip(clean)
        .map(|(&w, &c)| (soft_threshold(w, tau) - c).powi(2))
        .sum()
}

/// Stein risk estimate of soft thresholding at `tau` when coefficient `i`
/// has noise variance `variances[i]`.
pub fn sure_risk(noisy: &[f64], variances: &[f64], tau: f64) -> f64 {
    noisy
        .iter()
        .zip(variances)
        .map(|(&w, &v)| {
            let inside = if w.abs() <= tau { 1.0 } else { 0.0 };
            v * (1.0 - 2.0 * inside) + (w * w).min(tau * tau)
        })
        .sum()
}

/// Noise scale used to lay out the threshold grid.
pub fn band_scale(noisy: &[f64], noise: &BandNoiseModel) -> f64 {
    let med = noise.median();
    if med > 0.0 {
        return med.sqrt();
    }
    let n = noise.variances.len().max(1) as f64;
    let mean = noise.variances.iter().sum::<f64>() / n;
    if mean > 0.0 {
        return mean.sqrt();
    }
    noisy.iter().fold(0.0f64, |m, w| m.max(w.abs())) / 5.0
}

pub fn select_threshold(
    noisy: &[f64],
    noise: &BandNoiseModel,
    policy: &ThresholdPolicy,
    reference: Option<&[f64]>,
) -> Result<f64> {
    if let Selector::Fixed(t) = policy.selector {
        return Ok(t);
    }
    if noisy.is_empty() {
        return Ok(0.0);
    }
    if noise.variances.len() != noisy.len() {
        return Err(Error::Dimensions(format!(
            "{} coefficients but {} variances",
            noisy.len(),
            noise.variances.len()
        )));
    }
    let grid = policy.grid(band_scale(noisy, noise));
    let risk: Box<dyn Fn(f64) -> f64> = match policy.selector {
        Selector::Oracle => {
            let clean = reference.ok_or(Error::MissingReference("oracle selector"))?;
            if clean.len() != noisy.len() {
                return Err(Error::Dimensions(format!(
                    "{} coefficients but {} reference values",
                    noisy.len(),
                    clean.len()
                )));
            }
            Box::new(move |t| oracle_risk(noisy, clean, t))
        }
        Selector::Sure => Box::new(|t| sure_risk(noisy, &noise.variances, t)),
        Selector::Fixed(_) => unreachable!(),
    };
    Ok(argmin(&grid, risk))
}

fn argmin(grid: &[f64], risk: impl Fn(f64) -> f64) -> f64 {
    let mut best = (grid[0], risk(grid[0]));
    for &t in &grid[1..] {
        let r = risk(t);
        if r < best.1 {
            best = (t, r);
        }
    }
    best.0
}

/// Threshold chosen for one band.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRecord {
    pub level: usize,
    /// First and one-past-last projection of the band.
    pub projections: (usize, usize),
    pub scale: f64,
    pub tau: f64,
}

/// Soft-threshold the details of a set of projection pyramids. Coefficients
/// are pooled across `policy.angle_block` consecutive projections per level
/// (or across all projections when `per_band` is off). `noise[p][j-1]` is
/// the model for pyramid `p`, level `j`.
pub fn apply_shrinkage(
    pyramids: &[WaveletPyramid],
    policy: &ThresholdPolicy,
    noise: &[Vec<BandNoiseModel>],
    reference: Option<&[WaveletPyramid]>,
) -> Result<(Vec<WaveletPyramid>, Vec<ThresholdRecord>)> {
    policy.validate()?;
    if noise.len() != pyramids.len() {
        return Err(Error::Dimensions(format!(
            "{} pyramids but {} noise models",
            pyramids.len(),
            noise.len()
        )));
    }
    if let Some(r) = reference {
        if r.len() != pyramids.len() {
            return Err(Error::Dimensions(format!(
                "{} pyramids but {} reference pyramids",
                pyramids.len(),
                r.len()
            )));
        }
    }
    if policy.selector == Selector::Oracle && reference.is_none() {
        return Err(Error::MissingReference("oracle selector"));
    }
    let levels = pyramids.first().map_or(0, |p| p.levels());
    for (p, models) in pyramids.iter().zip(noise) {
        if p.levels() != levels || models.len() != levels {
            return Err(Error::Dimensions("inconsistent pyramid levels".into()));
        }
    }
    let block = if policy.per_band {
        policy.angle_block
    } else {
        pyramids.len().max(1)
    };
    let bands: Vec<(usize, usize, usize)> = (1..=levels)
        .flat_map(|j| {
            (0..pyramids.len())
                .step_by(block)
                .map(move |s| (j, s, (s + block).min(pyramids.len())))
        })
        .collect();

    let records: Vec<ThresholdRecord> = bands
        .par_iter()
        .map(|&(j, lo, hi)| {
            let noisy: Vec<f64> = pyramids[lo..hi].iter().flat_map(|p| p.detail(j).iter().copied()).collect();
            let model = BandNoiseModel {
                variances: noise[lo..hi]
                    .iter()
                    .flat_map(|m| m[j - 1].variances.iter().copied())
                    .collect(),
            };
            let clean: Option<Vec<f64>> = reference
                .map(|r| r[lo..hi].iter().flat_map(|p| p.detail(j).iter().copied()).collect());
            let tau = select_threshold(&noisy, &model, policy, clean.as_deref())?;
            Ok(ThresholdRecord {
                level: j,
                projections: (lo, hi),
                scale: band_scale(&noisy, &model),
                tau,
            })
        })
        .collect::<Result<_>>()?;

    let mut out = pyramids.to_vec();
    for r in &records {
        for p in &mut out[r.projections.0..r.projections.1] {
            for w in p.details[r.level - 1].iter_mut() {
                *w = soft_threshold(*w, r.tau);
            }
        }
    }
    Ok((out, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::{dwt_forward, dwt_inverse, Mode};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn soft_threshold_values() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        for w in [-2.5, 0.0, 1e-9, 7.0] {
            assert_eq!(soft_threshold(w, 0.0), w);
        }
    }

    proptest! {
        #[test]
        fn soft_threshold_is_contractive(a in -50.0f64..50.0, b in -50.0f64..50.0, t in 0.0f64..10.0, t2 in 0.0f64..10.0) {
            let s = soft_threshold(a, t);
            prop_assert!(s.abs() <= a.abs());
            prop_assert!(s == 0.0 || s.signum() == a.signum());
            prop_assert!((s - soft_threshold(b, t)).abs() <= (a - b).abs() + 1e-12);
            let (lo, hi) = if t <= t2 { (t, t2) } else { (t2, t) };
            prop_assert!(soft_threshold(a, hi).abs() <= soft_threshold(a, lo).abs());
        }
    }

    #[test]
    fn haar_level_one_variance_equals_intensity() {
        let spec = WaveletSpec::haar(1, Mode::Undecimated);
        let lambda = 3.7;
        let p = dwt_forward(&[lambda; 16], &spec).unwrap();
        let models = estimate_pyramid_noise(&p).unwrap();
        for v in &models[0].variances {
            assert!((v - lambda).abs() < 1e-12);
        }
    }

    #[test]
    fn deeper_haar_levels_also_track_intensity() {
        for mode in [Mode::Decimated, Mode::Undecimated] {
            let spec = WaveletSpec::haar(3, mode);
            let p = dwt_forward(&vec![2.0; 32], &spec).unwrap();
            for m in estimate_pyramid_noise(&p).unwrap() {
                assert!(m.variances.iter().all(|v| (v - 2.0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn zero_and_negative_approximation_give_zero_variance() {
        let spec = WaveletSpec::haar(1, Mode::Undecimated);
        let m = estimate_band_noise(&[0.0, -1.0, 0.0, 0.0], &spec, 1, 4).unwrap();
        assert!(m.variances.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noiseless_band_selects_zero() {
        let w = [3.0, -1.0, 0.5, 2.0, -4.0];
        let noise = BandNoiseModel { variances: vec![1.0; 5] };
        let tau = select_threshold(&w, &noise, &ThresholdPolicy::default(), Some(&w)).unwrap();
        assert_eq!(tau, 0.0);
    }

    #[test]
    fn pure_noise_band_zeroes_everything() {
        // Grid 0, 0.1, ..., 5; risk is strictly decreasing until every
        // coefficient is zeroed at tau = 1.3 and flat afterwards.
        let w = [0.3, -1.25, 0.8, 1.3, -0.05];
        let noise = BandNoiseModel { variances: vec![1.0; 5] };
        let policy = ThresholdPolicy::default();
        let grid = policy.grid(1.0);
        let risks: Vec<f64> = grid.iter().map(|&t| oracle_risk(&w, &[0.0; 5], t)).collect();
        assert!((risks[0] - w.iter().map(|x| x * x).sum::<f64>()).abs() < 1e-12);
        assert!(risks[13].abs() < 1e-12 && risks[12] > 0.0);
        assert!(risks.windows(2).all(|r| r[1] <= r[0] + 1e-15));
        let tau = select_threshold(&w, &noise, &policy, Some(&[0.0; 5])).unwrap();
        assert!((tau - 1.3).abs() < 1e-12);
        assert!(w.iter().all(|&x| soft_threshold(x, tau) == 0.0));
    }

    #[test]
    fn selected_tau_is_grid_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let clean: Vec<f64> = (0..40).map(|i| if i % 7 == 0 { rng.random_range(-8.0..8.0) } else { 0.0 }).collect();
            let noisy: Vec<f64> = clean.iter().map(|c| c + rng.random_range(-1.5..1.5)).collect();
            let noise = BandNoiseModel { variances: vec![0.75; 40] };
            let policy = ThresholdPolicy::default();
            let tau = select_threshold(&noisy, &noise, &policy, Some(&clean)).unwrap();
            let best = oracle_risk(&noisy, &clean, tau);
            for t in policy.grid(band_scale(&noisy, &noise)) {
                let r = oracle_risk(&noisy, &clean, t);
                assert!(best <= r);
                if t < tau {
                    assert!(r > best);
                }
            }
            assert!(best <= oracle_risk(&noisy, &clean, 0.0));
        }
    }

    #[test]
    fn sure_selector_and_errors() {
        let noise = BandNoiseModel { variances: vec![1.0; 3] };
        let policy = ThresholdPolicy::with_selector(Selector::Sure);
        let tau = select_threshold(&[0.1, -0.2, 0.05], &noise, &policy, None).unwrap();
        assert!(tau > 0.0);
        let e = select_threshold(&[1.0; 3], &noise, &ThresholdPolicy::default(), None).unwrap_err();
        assert!(matches!(e, Error::MissingReference(_)));
        let empty = BandNoiseModel { variances: vec![] };
        assert_eq!(select_threshold(&[], &empty, &policy, None).unwrap(), 0.0);
    }

    #[test]
    fn sure_is_unbiased_for_gaussian_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sigma = 1.0;
        let clean: Vec<f64> = (0..64).map(|i| if i % 5 == 0 { 4.0 } else { 0.3 * (i % 3) as f64 }).collect();
        let var = vec![sigma * sigma; clean.len()];
        let grid = ThresholdPolicy::default().grid(sigma);
        let normal = Normal::new(0.0, sigma).unwrap();
        let trials = 1000;
        let mut diffs = vec![Vec::with_capacity(trials); grid.len()];
        for _ in 0..trials {
            let noisy: Vec<f64> = clean.iter().map(|c| c + normal.sample(&mut rng)).collect();
            for (i, &t) in grid.iter().enumerate() {
                diffs[i].push(sure_risk(&noisy, &var, t) - oracle_risk(&noisy, &clean, t));
            }
        }
        for d in diffs {
            let n = d.len() as f64;
            let mean = d.iter().sum::<f64>() / n;
            let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!(mean.abs() <= 3.0 * sd / n.sqrt() + 1e-12, "mean {mean} sd {sd}");
        }
    }

    fn pyramids(count: usize, spec: &WaveletSpec, seed: u64) -> Vec<WaveletPyramid> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let x: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..5.0)).collect();
                dwt_forward(&x, spec).unwrap()
            })
            .collect()
    }

    #[test]
    fn zero_threshold_is_identity_and_keeps_approximation() {
        let spec = WaveletSpec::haar(2, Mode::Undecimated);
        let ps = pyramids(12, &spec, 1);
        let noise: Vec<_> = ps.iter().map(|p| estimate_pyramid_noise(p).unwrap()).collect();
        let policy = ThresholdPolicy::with_selector(Selector::Fixed(0.0));
        let (out, records) = apply_shrinkage(&ps, &policy, &noise, None).unwrap();
        assert_eq!(out, ps);
        assert_eq!(records.len(), 2 * 2);

        let policy = ThresholdPolicy::with_selector(Selector::Sure);
        let (out, _) = apply_shrinkage(&ps, &policy, &noise, None).unwrap();
        for (a, b) in out.iter().zip(&ps) {
            assert_eq!(a.approximation, b.approximation);
        }
    }

    #[test]
    fn huge_threshold_leaves_lowpass_smoothing() {
        let spec = WaveletSpec::haar(1, Mode::Decimated);
        let ps = pyramids(3, &spec, 2);
        let noise: Vec<_> = ps.iter().map(|p| estimate_pyramid_noise(p).unwrap()).collect();
        let policy = ThresholdPolicy::with_selector(Selector::Fixed(1e9));
        let (out, _) = apply_shrinkage(&ps, &policy, &noise, None).unwrap();
        for (p, orig) in out.iter().zip(&ps) {
            let x = dwt_inverse(p).unwrap();
            for (k, pair) in x.chunks(2).enumerate() {
                let mean = orig.approximation[k] / 2f64.sqrt();
                assert!((pair[0] - mean).abs() < 1e-12 && (pair[1] - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pooled_blocks_follow_policy() {
        let spec = WaveletSpec::haar(1, Mode::Undecimated);
        let ps = pyramids(25, &spec, 3);
        let noise: Vec<_> = ps.iter().map(|p| estimate_pyramid_noise(p).unwrap()).collect();
        let policy = ThresholdPolicy::with_selector(Selector::Sure);
        let (_, records) = apply_shrinkage(&ps, &policy, &noise, None).unwrap();
        let spans: Vec<_> = records.iter().map(|r| r.projections).collect();
        assert_eq!(spans, vec![(0, 10), (10, 20), (20, 25)]);
        let policy = ThresholdPolicy {
            per_band: false,
            ..policy
        };
        let (_, records) = apply_shrinkage(&ps, &policy, &noise, None).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].projections, (0, 25));
    }

    #[test]
    fn selector_parsing() {
        assert_eq!(Selector::parse("oracle"), Some(Selector::Oracle));
        assert_eq!(Selector::parse("SURE"), Some(Selector::Sure));
        assert_eq!(Selector::parse("fixed:2.5"), Some(Selector::Fixed(2.5)));
        assert_eq!(Selector::parse("fixed:-1"), None);
        assert_eq!(Selector::parse("bayes"), None);
    }
}
