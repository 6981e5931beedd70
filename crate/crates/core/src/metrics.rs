//! Global image quality metrics.

use crate::error::{Error, Result};
use crate::image::IntensityImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub mse: f64,
    pub ssim: f64,
    /// `+inf` when the images are identical.
    pub psnr: f64,
    pub dynamic_range: f64,
    pub peak: f64,
}

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimensions(format!("{} vs {} values", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::Dimensions("empty image".into()));
    }
    Ok(())
}

pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    check(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64)
}

/// SSIM from whole-image statistics (one window covering everything).
pub fn ssim_global(a: &[f64], b: &[f64], dynamic_range: f64) -> Result<f64> {
    check(a, b)?;
    if !(dynamic_range > 0.0 && dynamic_range.is_finite()) {
        return Err(Error::invalid("dynamic_range", format!("{dynamic_range} must be > 0")));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
        cov += (x - ma) * (y - mb);
    }
    va /= n;
    vb /= n;
    cov /= n;
    let (sa, sb) = (va.sqrt(), vb.sqrt());
    let c1 = (0.01 * dynamic_range).powi(2);
    let c2 = (0.03 * dynamic_range).powi(2);
    let c3 = c2 / 2.0;
    let l = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    let c = (2.0 * sa * sb + c2) / (va + vb + c2);
    let s = (cov + c3) / (sa * sb + c3);
    Ok(l * c * s)
}

/// Peak signal-to-noise ratio in decibels; `+inf` when the MSE is zero.
pub fn psnr(a: &[f64], b: &[f64], peak: f64) -> Result<f64> {
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::invalid("peak", format!("{peak} must be > 0")));
    }
    Ok(psnr_from_mse(mse(a, b)?, peak))
}

pub fn psnr_from_mse(mse: f64, peak: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    }
}

/// All metrics of `estimate` against `reference`, with the reference peak
/// used as both dynamic range and PSNR peak.
pub fn compare(estimate: &IntensityImage, reference: &IntensityImage) -> Result<MetricReport> {
    if (estimate.width(), estimate.height()) != (reference.width(), reference.height()) {
        return Err(Error::Dimensions(format!(
            "{}x{} vs {}x{}",
            estimate.width(),
            estimate.height(),
            reference.width(),
            reference.height()
        )));
    }
    let peak = reference.max();
    let range = if peak > 0.0 { peak } else { 1.0 };
    let (a, b) = (estimate.values(), reference.values());
    let mse = mse(a, b)?;
    Ok(MetricReport {
        mse,
        ssim: ssim_global(a, b, range)?,
        psnr: psnr_from_mse(mse, range),
        dynamic_range: range,
        peak: range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 3.0], &[4.0, 0.0]).unwrap(), 12.5);
        assert!((mse(&[1.5, 2.5, 9.5], &[1.0, 2.0, 9.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(Error::Dimensions(_))));
    }

    #[test]
    fn ssim_hand_evaluated() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0];
        let b = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 8.0, 7.0, 10.0, 9.0, 12.0, 11.0, 14.0, 13.0, 16.0, 15.0];
        // Means 8.5 for both, variances 21.25 for both, covariance
        // 21.25 - 0.5 = 20.75: each swapped pair contributes -1 to the sum.
        let big_l = 16.0f64;
        let c2 = (0.03 * big_l).powi(2);
        let c3 = c2 / 2.0;
        let expected = (20.75 + c3) / (21.25 + c3);
        assert!((ssim_global(&a, &b, big_l).unwrap() - expected).abs() < 1e-12);
        assert_eq!(ssim_global(&a, &a, big_l).unwrap(), 1.0);
    }

    #[test]
    fn anticorrelated_images_have_negative_ssim() {
        let a: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| 15.0 - x).collect();
        assert!(ssim_global(&a, &b, 15.0).unwrap() < 0.0);
    }

    #[test]
    fn psnr_examples() {
        let a = [0.0, 0.0];
        let b = [1.0, -1.0];
        let p = psnr(&a, &b, 255.0).unwrap();
        assert!((p - 48.130_803_608_679_1).abs() < 1e-9);
        let p2 = psnr(&a, &b, 510.0).unwrap();
        assert!((p2 - p - 10.0 * 4f64.log10()).abs() < 1e-12);
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn compare_uses_reference_peak() {
        let r = IntensityImage::new(2, 1, vec![2.0, 4.0]).unwrap();
        let e = IntensityImage::new(2, 1, vec![2.0, 3.0]).unwrap();
        let m = compare(&e, &r).unwrap();
        assert_eq!(m.peak, 4.0);
        assert_eq!(m.mse, 0.5);
        assert!((m.psnr - 10.0 * 32f64.log10()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn metrics_are_symmetric(v in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 2..40)) {
            let (a, b): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            prop_assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
            let s = ssim_global(&a, &b, 10.0).unwrap();
            prop_assert!((s - ssim_global(&b, &a, 10.0).unwrap()).abs() < 1e-12);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s));
        }

        #[test]
        fn psnr_decreases_with_mse(m1 in 1e-6f64..1e3, k in 1.0001f64..10.0) {
            prop_assert!(psnr_from_mse(m1 * k, 7.0) < psnr_from_mse(m1, 7.0));
        }
    }
}
