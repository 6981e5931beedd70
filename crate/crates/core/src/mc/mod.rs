//! Monte-Carlo study of transform coefficients of Poisson images: sample many
//! noisy realisations of a phantom, transform each, and summarise the
//! per-coefficient means and variances against the noiseless prediction.

mod stats;

pub use stats::{mean_interval, ols, poisson_gof, Interval, LinearFit, Moments};

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::phantom::{make_phantom, sample_poisson, PhantomSpec};
use crate::radon::{forward, propagate_intensity, Geometry, Sinogram, Variant};
use crate::seed::derive_seed;
use crate::wavelet::{atom_taps, dwt_forward_padded, Band, Mode, WaveletSpec};

/// Confidence level of every reported interval.
pub const CONFIDENCE: f64 = 0.95;
/// Coefficients whose noiseless reference is below this fraction of the band
/// maximum are left out of the interval statistics and the scatter.
pub const INCLUSION_FLOOR: f64 = 0.01;
/// Significance level of the per-coefficient goodness-of-fit test.
pub const GOF_ALPHA: f64 = 0.01;
/// Samples are split into this many contiguous chunks; partial results are
/// merged in chunk order, so output does not depend on the thread count.
const CHUNKS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TransformConfig {
    pub variant: Variant,
    pub angles: usize,
    /// Wavelet applied along each projection; `None` for Radon only.
    pub wavelet: Option<WaveletSpec>,
}

impl TransformConfig {
    pub fn radon(variant: Variant, angles: usize) -> Self {
        Self {
            variant,
            angles,
            wavelet: None,
        }
    }

    pub fn ridgelet(variant: Variant, angles: usize, wavelet: WaveletSpec) -> Self {
        Self {
            variant,
            angles,
            wavelet: Some(wavelet),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandLabel {
    Radon,
    Approximation(usize),
    Detail(usize),
}

impl BandLabel {
    pub fn name(&self) -> String {
        match self {
            BandLabel::Radon => "radon".into(),
            BandLabel::Approximation(j) => format!("approximation{j}"),
            BandLabel::Detail(j) => format!("detail{j}"),
        }
    }

    pub fn is_detail(&self) -> bool {
        matches!(self, BandLabel::Detail(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GofSummary {
    pub tested: usize,
    pub passed: usize,
    pub alpha: f64,
}

impl GofSummary {
    pub fn pass_fraction(&self) -> f64 {
        if self.tested == 0 {
            0.0
        } else {
            self.passed as f64 / self.tested as f64
        }
    }
}

/// Summary of one coefficient band.
///
/// The intensity of a coefficient is the variance it would have if the
/// Radon coefficients were independent Poisson variables with their
/// noiseless means: the noiseless mean itself for the Radon band, and the
/// squared-atom weighted sum of Radon means for wavelet bands. The ratio is
/// the noiseless mean over the empirical variance for Radon and
/// approximation bands, and the intensity over the empirical variance for
/// detail bands (whose means vanish). Each per-coefficient ratio is corrected
/// for the `O(1/samples)` bias of dividing by an estimated variance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistReport {
    pub band: BandLabel,
    pub samples: usize,
    /// Coefficients entering the intervals and scatter.
    pub coefficients: usize,
    pub mean: Interval,
    pub variance: Interval,
    pub ratio: Interval,
    /// Monte-Carlo mean minus noiseless mean.
    pub mean_difference: Interval,
    /// Largest `|MC mean - noiseless mean|` in units of the Monte-Carlo
    /// standard error implied by the intensity, over coefficients with
    /// positive intensity.
    pub max_mean_z: f64,
    /// `(intensity, empirical variance)` per included coefficient.
    pub scatter: Vec<(f64, f64)>,
    pub fit: Option<LinearFit>,
    /// Poisson goodness of fit per coefficient; integer-valued bands only.
    pub gof: Option<GofSummary>,
}

/// Least-squares line of empirical variance on intensity.
pub fn variance_vs_intensity(report: &DistReport) -> Result<LinearFit> {
    ols(&report.scatter)
}

/// One line through the scatter of several reports.
pub fn pooled_fit(reports: &[&DistReport]) -> Result<LinearFit> {
    let pts: Vec<(f64, f64)> = reports.iter().flat_map(|r| r.scatter.iter().copied()).collect();
    ols(&pts)
}

/// Flattened bands of one sinogram under `transform`: the Radon band, then
/// (with a wavelet) the coarsest approximation and the details finest first.
/// Coefficients of wavelet bands are ordered projection by projection.
fn extract_bands(sino: &Sinogram, wavelet: Option<&WaveletSpec>) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![sino.data().to_vec()];
    if let Some(spec) = wavelet {
        let pyramids = sino
            .columns()
            .iter()
            .map(|c| dwt_forward_padded(c, spec))
            .collect::<Result<Vec<_>>>()?;
        out.push(pyramids.iter().flat_map(|p| p.approximation.iter().copied()).collect());
        for j in 1..=spec.levels {
            out.push(pyramids.iter().flat_map(|p| p.detail(j).iter().copied()).collect());
        }
    }
    Ok(out)
}

fn labels(wavelet: Option<&WaveletSpec>) -> Vec<BandLabel> {
    let mut out = vec![BandLabel::Radon];
    if let Some(spec) = wavelet {
        out.push(BandLabel::Approximation(spec.levels));
        out.extend((1..=spec.levels).map(BandLabel::Detail));
    }
    out
}

/// Squared-atom weighted sums of the noiseless sinogram columns for `band`.
fn band_intensity(sino: &Sinogram, spec: &WaveletSpec, band: Band) -> Result<Vec<f64>> {
    let level = match band {
        Band::Approximation(j) | Band::Detail(j) => j,
    };
    let n = spec.padded_length(sino.rows());
    let taps = atom_taps(spec, band, n)?;
    let stride = match spec.mode {
        Mode::Decimated => 1usize << level,
        Mode::Undecimated => 1,
    };
    let len = spec.band_len(n, level);
    let mut out = Vec::with_capacity(len * sino.cols());
    for col in sino.columns() {
        for k in 0..len {
            let x: f64 = taps
                .iter()
                .map(|&(off, w)| {
                    let i = (off + k * stride) % n;
                    if i < col.len() {
                        w * w * col[i]
                    } else {
                        0.0
                    }
                })
                .sum();
            out.push(x);
        }
    }
    Ok(out)
}

/// Noiseless description of one band.
struct BandModel {
    label: BandLabel,
    means: Vec<f64>,
    intensities: Vec<f64>,
    /// Coefficients whose noiseless reference clears [`INCLUSION_FLOOR`].
    included: Vec<usize>,
}

impl BandModel {
    fn new(label: BandLabel, means: Vec<f64>, intensities: Vec<f64>) -> Self {
        let refs = if label.is_detail() { &intensities } else { &means };
        let floor = INCLUSION_FLOOR * refs.iter().fold(0.0f64, |m, &v| m.max(v));
        let included = (0..refs.len()).filter(|&i| refs[i] > 0.0 && refs[i] >= floor).collect();
        Self {
            label,
            means,
            intensities,
            included,
        }
    }

    /// Noiseless quantity divided by the empirical variance in the ratio.
    fn reference(&self, i: usize) -> f64 {
        if self.label.is_detail() {
            self.intensities[i]
        } else {
            self.means[i]
        }
    }
}

struct Accumulator {
    /// Per-coefficient moments, per band.
    moments: Vec<Vec<Moments>>,
    /// Moments of the per-sample average over included coefficients.
    band_average: Vec<Moments>,
    histogram: Option<(usize, Vec<u32>)>,
}

impl Accumulator {
    fn new(models: &[BandModel], histogram_cap: Option<usize>) -> Self {
        Self {
            moments: models.iter().map(|m| vec![Moments::default(); m.means.len()]).collect(),
            band_average: vec![Moments::default(); models.len()],
            histogram: histogram_cap.map(|cap| (cap, vec![0; models[0].means.len() * (cap + 1)])),
        }
    }

    fn push(&mut self, models: &[BandModel], bands: &[Vec<f64>]) {
        for (b, vals) in bands.iter().enumerate() {
            for (m, &v) in self.moments[b].iter_mut().zip(vals) {
                m.push(v);
            }
            let inc = &models[b].included;
            if !inc.is_empty() {
                let avg = inc.iter().map(|&i| vals[i]).sum::<f64>() / inc.len() as f64;
                self.band_average[b].push(avg);
            }
        }
        if let Some((cap, hist)) = &mut self.histogram {
            let width = *cap + 1;
            for (i, &v) in bands[0].iter().enumerate() {
                let k = (v.max(0.0).round() as usize).min(*cap);
                hist[i * width + k] += 1;
            }
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.moments.iter_mut().zip(&other.moments) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        for (x, y) in self.band_average.iter_mut().zip(&other.band_average) {
            x.merge(y);
        }
        if let (Some((_, a)), Some((_, b))) = (&mut self.histogram, &other.histogram) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// Sample `samples` noisy copies of the phantom, transform each, and report
/// every band.
///
/// Every reported statistic is an average over the included coefficients.
/// Coefficients of one sample share pixels and are correlated, so each
/// interval is a normal approximation whose spread is estimated across
/// samples: directly from per-sample band averages for the mean, and from
/// first-order per-sample influence values (computed in a second pass over
/// the same draws) for the variance and ratio.
pub fn run_distribution_experiment(
    spec: &PhantomSpec,
    transform: &TransformConfig,
    samples: usize,
    seed: u64,
) -> Result<Vec<DistReport>> {
    if samples < 100 {
        return Err(Error::invalid("samples", format!("{samples} < 100")));
    }
    if transform.angles == 0 {
        return Err(Error::invalid("angles", "must be >= 1"));
    }
    let lambda = make_phantom(spec)?;
    let geometry = Geometry::for_image(transform.variant, lambda.width(), lambda.height(), transform.angles)?;
    let wavelet = transform.wavelet.as_ref();
    let noiseless = propagate_intensity(&lambda, &geometry)?;
    let mut means = extract_bands(&noiseless, wavelet)?.into_iter();

    let radon = means.next().expect("radon band");
    let mut models = vec![BandModel::new(BandLabel::Radon, radon.clone(), radon)];
    if let Some(w) = wavelet {
        for label in labels(wavelet).into_iter().skip(1) {
            let band = match label {
                BandLabel::Approximation(j) => Band::Approximation(j),
                BandLabel::Detail(j) => Band::Detail(j),
                BandLabel::Radon => unreachable!(),
            };
            let m = means.next().expect("one mean vector per band");
            models.push(BandModel::new(label, m, band_intensity(&noiseless, w, band)?));
        }
    }

    let histogram_cap = (transform.variant == Variant::Gdb).then(|| {
        let top = models[0].means.iter().fold(0.0f64, |m, &v| m.max(v));
        (top + 8.0 * top.sqrt() + 5.0).ceil() as usize
    });
    let chunks = CHUNKS.min(samples);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulator::new(&models, histogram_cap);
            for i in c * samples / chunks..(c + 1) * samples / chunks {
                let counts = sample_poisson(&lambda, derive_seed(seed, "mc-sample", i as u64));
                let sino = forward(&counts, &geometry)?;
                acc.push(&models, &extract_bands(&sino, wavelet)?);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Accumulator::new(&models, histogram_cap);
    for p in &partials {
        total.merge(p);
    }

    let selections: Vec<Selection> = models
        .iter()
        .zip(&total.moments)
        .map(|(model, moments)| Selection::new(model, moments))
        .collect::<Result<_>>()?;

    // Second pass over the same samples: per-sample influence of each draw
    // on the averaged variance and ratio.
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![(Moments::default(), Moments::default()); selections.len()];
            for i in c * samples / chunks..(c + 1) * samples / chunks {
                let counts = sample_poisson(&lambda, derive_seed(seed, "mc-sample", i as u64));
                let bands = extract_bands(&forward(&counts, &geometry)?, wavelet)?;
                for ((var_acc, ratio_acc), (sel, vals)) in acc.iter_mut().zip(selections.iter().zip(&bands)) {
                    let (dv, dr) = sel.influence(vals, samples);
                    var_acc.push(dv);
                    ratio_acc.push(dr);
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut influence = vec![(Moments::default(), Moments::default()); selections.len()];
    for p in &partials {
        for (a, b) in influence.iter_mut().zip(p) {
            a.0.merge(&b.0);
            a.1.merge(&b.1);
        }
    }

    models
        .iter()
        .enumerate()
        .map(|(b, model)| {
            let gof = if b == 0 { total.histogram.as_ref() } else { None };
            summarise(
                model,
                &selections[b],
                samples,
                &total.moments[b],
                &total.band_average[b],
                &influence[b],
                gof,
            )
        })
        .collect()
}

/// Included coefficients with a positive empirical variance, with the
/// first-pass estimates needed to linearise the band statistics.
struct Selection {
    index: Vec<usize>,
    mean: Vec<f64>,
    variance: Vec<f64>,
    /// Bias-corrected ratio per coefficient.
    ratio: Vec<f64>,
    /// Derivative of the band-average ratio with respect to each variance.
    ratio_slope: Vec<f64>,
}

impl Selection {
    fn new(model: &BandModel, moments: &[Moments]) -> Result<Self> {
        let index: Vec<usize> = model
            .included
            .iter()
            .copied()
            .filter(|&i| moments[i].variance() > 0.0)
            .collect();
        if index.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "band {} has {} usable coefficients",
                model.label.name(),
                index.len()
            )));
        }
        let k = index.len() as f64;
        let mut sel = Selection {
            index: Vec::new(),
            mean: Vec::new(),
            variance: Vec::new(),
            ratio: Vec::new(),
            ratio_slope: Vec::new(),
        };
        for &i in &index {
            let m = &moments[i];
            let v = m.variance();
            let correction = 1.0 - m.variance_of_variance() / (v * v);
            sel.mean.push(m.mean);
            sel.variance.push(v);
            sel.ratio.push(model.reference(i) / v * correction);
            sel.ratio_slope.push(-model.reference(i) / (v * v * k));
        }
        sel.index = index;
        Ok(sel)
    }

    /// Contribution of one sample to the band-average variance and ratio,
    /// to first order.
    fn influence(&self, values: &[f64], samples: usize) -> (f64, f64) {
        let scale = samples as f64 / (samples as f64 - 1.0);
        let k = self.index.len() as f64;
        let (mut dv, mut dr) = (0.0, 0.0);
        for (j, &i) in self.index.iter().enumerate() {
            let d = scale * (values[i] - self.mean[j]).powi(2) - self.variance[j];
            dv += d / k;
            dr += self.ratio_slope[j] * d;
        }
        (dv, dr)
    }
}

fn sample_interval(m: &Moments, center: f64) -> Interval {
    let z = Normal::standard().inverse_cdf(0.5 + CONFIDENCE / 2.0);
    let half = z * (m.variance() / m.n as f64).sqrt();
    Interval {
        lower: center - half,
        upper: center + half,
    }
}

fn summarise(
    model: &BandModel,
    sel: &Selection,
    samples: usize,
    moments: &[Moments],
    band_average: &Moments,
    influence: &(Moments, Moments),
    histogram: Option<&(usize, Vec<u32>)>,
) -> Result<DistReport> {
    let n = samples as f64;
    let k = sel.index.len() as f64;
    let scatter: Vec<(f64, f64)> = sel
        .index
        .iter()
        .zip(&sel.variance)
        .map(|(&i, &v)| (model.intensities[i], v))
        .collect();
    let max_mean_z = moments
        .iter()
        .zip(model.means.iter().zip(&model.intensities))
        .filter(|(_, (_, &x))| x > 0.0)
        .map(|(m, (&mu, &x))| (m.mean - mu).abs() / (x / n).sqrt())
        .fold(0.0f64, f64::max);
    let noiseless_average =
        model.included.iter().map(|&i| model.means[i]).sum::<f64>() / model.included.len() as f64;

    let gof = histogram.map(|(cap, hist)| {
        let width = cap + 1;
        let mut tested = 0;
        let mut passed = 0;
        for (i, &mu) in model.means.iter().enumerate() {
            if let Some(p) = poisson_gof(&hist[i * width..(i + 1) * width], mu, 5.0) {
                tested += 1;
                if p >= GOF_ALPHA {
                    passed += 1;
                }
            }
        }
        GofSummary {
            tested,
            passed,
            alpha: GOF_ALPHA,
        }
    });

    Ok(DistReport {
        band: model.label,
        samples,
        coefficients: sel.index.len(),
        mean: sample_interval(band_average, band_average.mean),
        variance: sample_interval(&influence.0, sel.variance.iter().sum::<f64>() / k),
        ratio: sample_interval(&influence.1, sel.ratio.iter().sum::<f64>() / k),
        mean_difference: sample_interval(band_average, band_average.mean - noiseless_average),
        max_mean_z,
        fit: ols(&scatter).ok(),
        scatter,
        gof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::Mode;

    #[test]
    fn gdb_homogeneous_is_poisson() {
        let spec = PhantomSpec::homogeneous(16, 0.5);
        let reports = run_distribution_experiment(&spec, &TransformConfig::radon(Variant::Gdb, 1), 400, 3).unwrap();
        let r = &reports[0];
        assert_eq!(r.band, BandLabel::Radon);
        assert!((r.ratio.center() - 1.0).abs() < 0.05, "{:?}", r.ratio);
        assert!(r.mean_difference.contains(0.0), "{:?}", r.mean_difference);
        assert!(r.max_mean_z < 5.0);
        let gof = r.gof.unwrap();
        assert!(gof.pass_fraction() >= 0.95, "{gof:?}");
        let fit = r.fit.unwrap();
        assert!((fit.slope - 1.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = PhantomSpec::inhomogeneous(16, 0.5, 10.0);
        let t = TransformConfig::ridgelet(Variant::Rotation, 12, WaveletSpec::haar(1, Mode::Undecimated));
        let a = run_distribution_experiment(&spec, &t, 100, 9).unwrap();
        let b = run_distribution_experiment(&spec, &t, 100, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        let c = run_distribution_experiment(&spec, &t, 100, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn haar_intensity_matches_squared_atom_sum() {
        let spec = PhantomSpec::homogeneous(16, 1.0);
        let t = TransformConfig::ridgelet(Variant::Gdb, 1, WaveletSpec::haar(1, Mode::Decimated));
        let reports = run_distribution_experiment(&spec, &t, 200, 1).unwrap();
        let approx = &reports[1];
        let detail = &reports[2];
        // Independent Poisson inputs: the approximation ratio is sqrt(2) and
        // the detail variance tracks the intensity with unit slope.
        assert!((approx.ratio.center() - 2f64.sqrt()).abs() < 0.08, "{:?}", approx.ratio);
        assert!((detail.ratio.center() - 1.0).abs() < 0.08, "{:?}", detail.ratio);
    }

    #[test]
    fn rejects_small_sample_counts() {
        let spec = PhantomSpec::homogeneous(8, 1.0);
        let e = run_distribution_experiment(&spec, &TransformConfig::radon(Variant::Gdb, 1), 50, 0).unwrap_err();
        assert!(matches!(e, Error::Invalid { .. }));
    }
}
