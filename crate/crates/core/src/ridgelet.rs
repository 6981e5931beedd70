//! Ridgelet transform (a 1-D wavelet transform along the offset axis of every
//! Radon projection) and the shrinkage denoiser built on it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{CountImage, Grid, IntensityImage};
use crate::radon::{fbp_invert, forward, Geometry, Sinogram, Variant};
use crate::shrinkage::{apply_shrinkage, estimate_pyramid_noise, Selector, ThresholdPolicy, ThresholdRecord};
use crate::wavelet::{dwt_forward_padded, dwt_inverse, Mode, WaveletPyramid, WaveletSpec};

/// Where the coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Computed from an image through a Radon transform.
    Radon(Geometry),
    /// Computed directly from a measured sinogram stored as an image whose
    /// columns are projections and rows are offsets.
    Sinogram { width: usize, height: usize },
}

/// Which array the denoiser is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Image,
    Sinogram,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Image => "image",
            Domain::Sinogram => "sinogram",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "image" => Some(Domain::Image),
            "sinogram" => Some(Domain::Sinogram),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeletCoeffs {
    pub layout: Layout,
    /// One pyramid per projection, in column order.
    pub pyramids: Vec<WaveletPyramid>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseConfig {
    pub variant: Variant,
    pub angles: usize,
    pub wavelet: WaveletSpec,
    pub policy: ThresholdPolicy,
    pub domain: Domain,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Rotation,
            angles: 180,
            wavelet: WaveletSpec::haar(1, Mode::Undecimated),
            policy: ThresholdPolicy::default(),
            domain: Domain::Image,
        }
    }
}

impl DenoiseConfig {
    /// Three-level undecimated Haar with the SURE selector, applied directly
    /// to a sinogram.
    pub fn pet() -> Self {
        Self {
            wavelet: WaveletSpec::haar(3, Mode::Undecimated),
            policy: ThresholdPolicy::with_selector(Selector::Sure),
            domain: Domain::Sinogram,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.angles == 0 {
            return Err(Error::invalid("angles", "must be >= 1"));
        }
        if self.wavelet.levels == 0 {
            return Err(Error::invalid("wavelet.levels", "must be >= 1"));
        }
        self.policy.validate()
    }
}

fn transform_columns(columns: &[Vec<f64>], spec: &WaveletSpec) -> Result<Vec<WaveletPyramid>> {
    columns.par_iter().map(|c| dwt_forward_padded(c, spec)).collect()
}

fn grid_columns<G: Grid + ?Sized>(img: &G) -> Vec<Vec<f64>> {
    (0..img.width())
        .map(|x| (0..img.height()).map(|y| img.value(x, y)).collect())
        .collect()
}

/// Wavelet transform of every projection of an existing sinogram.
pub fn ridgelet_from_sinogram(sino: &Sinogram, spec: &WaveletSpec) -> Result<RidgeletCoeffs> {
    Ok(RidgeletCoeffs {
        layout: Layout::Radon(*sino.geometry()),
        pyramids: transform_columns(&sino.columns(), spec)?,
    })
}

/// Radon transform of `img` followed by a wavelet transform of each
/// projection.
pub fn ridgelet_forward<G: Grid + ?Sized>(img: &G, config: &DenoiseConfig) -> Result<RidgeletCoeffs> {
    config.validate()?;
    match config.domain {
        Domain::Image => {
            let geometry = Geometry::for_image(config.variant, img.width(), img.height(), config.angles)?;
            ridgelet_from_sinogram(&forward(img, &geometry)?, &config.wavelet)
        }
        Domain::Sinogram => Ok(RidgeletCoeffs {
            layout: Layout::Sinogram {
                width: img.width(),
                height: img.height(),
            },
            pyramids: transform_columns(&grid_columns(img), &config.wavelet)?,
        }),
    }
}

/// Inverse wavelet transform of every projection, without the Radon inverse.
pub fn inverse_columns(c: &RidgeletCoeffs) -> Result<Vec<Vec<f64>>> {
    c.pyramids.par_iter().map(dwt_inverse).collect()
}

/// Invert the coefficients back to an image (negative values clamped to 0).
/// Sinogram-layout coefficients are returned as the denoised sinogram image.
pub fn ridgelet_inverse(c: &RidgeletCoeffs) -> Result<IntensityImage> {
    match c.layout {
        Layout::Radon(Geometry::Gdb(_)) => Err(Error::UnsupportedVariant("ridgelet_inverse (gdb)")),
        Layout::Radon(geometry) => fbp_invert(&Sinogram::from_columns(geometry, &inverse_columns(c)?)?),
        Layout::Sinogram { width, height } => {
            let cols = inverse_columns(c)?;
            if cols.len() != width || cols.iter().any(|col| col.len() != height) {
                return Err(Error::Dimensions("coefficients do not match sinogram shape".into()));
            }
            let values = (0..width * height).map(|i| cols[i % width][i / width]).collect();
            IntensityImage::from_clamped(width, height, values)
        }
    }
}

#[derive(Debug, Clone)]
pub struct DenoiseOutput {
    pub image: IntensityImage,
    pub thresholds: Vec<ThresholdRecord>,
}

/// Shrinkage denoising of Poisson counts. `reference` (the clean intensity)
/// is required by the oracle selector and ignored otherwise.
pub fn denoise(noisy: &CountImage, config: &DenoiseConfig, reference: Option<&IntensityImage>) -> Result<DenoiseOutput> {
    config.validate()?;
    let coeffs = ridgelet_forward(noisy, config)?;
    let clean = match (config.policy.selector, reference) {
        (Selector::Oracle, None) => return Err(Error::MissingReference("oracle selector")),
        (Selector::Oracle, Some(r)) => {
            if (r.width(), r.height()) != (noisy.width(), noisy.height()) {
                return Err(Error::Dimensions(format!(
                    "reference is {}x{}, input is {}x{}",
                    r.width(),
                    r.height(),
                    noisy.width(),
                    noisy.height()
                )));
            }
            Some(ridgelet_forward(r, config)?.pyramids)
        }
        _ => None,
    };
    let noise = coeffs
        .pyramids
        .par_iter()
        .map(estimate_pyramid_noise)
        .collect::<Result<Vec<_>>>()?;
    let (pyramids, thresholds) = apply_shrinkage(&coeffs.pyramids, &config.policy, &noise, clean.as_deref())?;
    let image = ridgelet_inverse(&RidgeletCoeffs {
        layout: coeffs.layout,
        pyramids,
    })?;
    Ok(DenoiseOutput { image, thresholds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::compare;
    use crate::phantom::{make_phantom, sample_poisson, PhantomSpec};
    use crate::radon::{drt_rotation, RotationGeometry};
    use crate::wavelet::dwt_forward;

    fn smooth_disk(n: usize) -> IntensityImage {
        let c = (n as f64 - 1.0) / 2.0;
        let r = n as f64 * 0.4;
        let values = (0..n * n)
            .map(|k| {
                let d = ((k % n) as f64 - c).hypot((k / n) as f64 - c) / r;
                if d < 1.0 {
                    10.0 * (1.0 - d * d).powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        IntensityImage::new(n, n, values).unwrap()
    }

    fn interior_rel_l2(a: &IntensityImage, b: &IntensityImage) -> f64 {
        let n = a.width();
        let c = (n as f64 - 1.0) / 2.0;
        let (mut num, mut den) = (0.0, 0.0);
        for y in 0..n {
            for x in 0..n {
                if (x as f64 - c).hypot(y as f64 - c) <= 0.32 * n as f64 {
                    num += (a.get(x, y) - b.get(x, y)).powi(2);
                    den += b.get(x, y).powi(2);
                }
            }
        }
        (num / den).sqrt()
    }

    #[test]
    fn composition_matches_parts() {
        let mut img = IntensityImage::filled(16, 16, 0.0).unwrap().into_values();
        img[5 * 16 + 9] = 1.0;
        let img = IntensityImage::new(16, 16, img).unwrap();
        let config = DenoiseConfig {
            angles: 24,
            wavelet: WaveletSpec::haar(2, Mode::Decimated),
            ..DenoiseConfig::default()
        };
        let c = ridgelet_forward(&img, &config).unwrap();
        let sino = drt_rotation(&img, &RotationGeometry::new(16, 16, 24));
        assert_eq!(c.pyramids.len(), 24);
        for (k, p) in c.pyramids.iter().enumerate() {
            let col = sino.column(k);
            let mut padded = col.clone();
            padded.resize(config.wavelet.padded_length(col.len()), 0.0);
            let direct = dwt_forward(&padded, &config.wavelet).unwrap();
            assert_eq!(p.details, direct.details);
            assert_eq!(p.approximation, direct.approximation);
        }
    }

    #[test]
    fn homogeneous_detail_mean_is_near_zero() {
        let img = IntensityImage::filled(32, 32, 1.0).unwrap();
        let c = ridgelet_forward(&img, &DenoiseConfig::default()).unwrap();
        let (mut sum, mut abs, mut n) = (0.0, 0.0, 0.0);
        for p in &c.pyramids {
            for &d in p.detail(1) {
                sum += d;
                abs += d.abs();
                n += 1.0;
            }
        }
        assert!((sum / n).abs() < 1e-9 * (abs / n).max(1.0));
    }

    #[test]
    fn zero_image_gives_zero_coefficients_and_back() {
        let img = IntensityImage::filled(16, 16, 0.0).unwrap();
        let c = ridgelet_forward(&img, &DenoiseConfig::default()).unwrap();
        assert!(c.pyramids.iter().all(|p| p.bands().all(|(_, b)| b.iter().all(|&v| v == 0.0))));
        assert!(ridgelet_inverse(&c).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn round_trip_within_fbp_tolerance() {
        let img = smooth_disk(64);
        for levels in [1, 3] {
            let config = DenoiseConfig {
                wavelet: WaveletSpec::haar(levels, Mode::Undecimated),
                ..DenoiseConfig::default()
            };
            let back = ridgelet_inverse(&ridgelet_forward(&img, &config).unwrap()).unwrap();
            let direct = fbp_invert(&drt_rotation(&img, &RotationGeometry::new(64, 64, 180))).unwrap();
            assert!(interior_rel_l2(&back, &img) <= 0.02);
            let diff = back.values().iter().zip(direct.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-9);
        }
    }

    #[test]
    fn gdb_inverse_is_unsupported() {
        let img = IntensityImage::filled(8, 8, 1.0).unwrap();
        let config = DenoiseConfig {
            variant: Variant::Gdb,
            ..DenoiseConfig::default()
        };
        let c = ridgelet_forward(&img, &config).unwrap();
        assert_eq!(c.pyramids.len(), 32);
        assert!(matches!(ridgelet_inverse(&c), Err(Error::UnsupportedVariant(_))));
    }

    #[test]
    fn zero_threshold_reproduces_fbp() {
        let lambda = make_phantom(&PhantomSpec::inhomogeneous(32, 0.05, 10.0)).unwrap();
        let counts = sample_poisson(&lambda, 4);
        let config = DenoiseConfig {
            policy: ThresholdPolicy::with_selector(Selector::Fixed(0.0)),
            ..DenoiseConfig::default()
        };
        let out = denoise(&counts, &config, None).unwrap();
        let direct = fbp_invert(&drt_rotation(&counts, &RotationGeometry::new(32, 32, 180))).unwrap();
        for (a, b) in out.image.values().iter().zip(direct.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_input_is_preserved() {
        let lambda = smooth_disk(64);
        let counts: Vec<u64> = lambda.values().iter().map(|v| (100.0 * v).round() as u64).collect();
        let counts = CountImage::new(64, 64, counts).unwrap();
        let rounded = counts.to_intensity();
        let out = denoise(&counts, &DenoiseConfig::default(), Some(&rounded)).unwrap();
        assert!(out.thresholds.iter().all(|t| t.tau == 0.0));
        assert!(interior_rel_l2(&out.image, &rounded) <= 0.02);
    }

    #[test]
    fn oracle_denoising_improves_psnr() {
        let lambda = make_phantom(&PhantomSpec::inhomogeneous(64, 0.05, 10.0)).unwrap();
        let counts = sample_poisson(&lambda, 17);
        let out = denoise(&counts, &DenoiseConfig::default(), Some(&lambda)).unwrap();
        assert!(out.image.values().iter().all(|&v| v >= 0.0));
        let noisy = compare(&counts.to_intensity(), &lambda).unwrap();
        let clean = compare(&out.image, &lambda).unwrap();
        assert!(clean.psnr > noisy.psnr, "{} vs {}", clean.psnr, noisy.psnr);
        assert!(matches!(
            denoise(&counts, &DenoiseConfig::default(), None),
            Err(Error::MissingReference(_))
        ));
    }

    #[test]
    fn sinogram_mode_keeps_shape() {
        let spec = PhantomSpec::synthetic_sinogram(32, 0.05, 2000.0, 60);
        let lambda = make_phantom(&spec).unwrap();
        let counts = sample_poisson(&lambda, 3);
        let out = denoise(&counts, &DenoiseConfig::pet(), None).unwrap();
        assert_eq!((out.image.width(), out.image.height()), (lambda.width(), lambda.height()));
        let noisy = compare(&counts.to_intensity(), &lambda).unwrap();
        let clean = compare(&out.image, &lambda).unwrap();
        assert!(clean.mse < noisy.mse);
        assert!(clean.ssim > noisy.ssim);
    }
}
