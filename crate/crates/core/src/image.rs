//! Dense row-major image grids.
//!
//! Pixel `(x, y)` is column `x`, row `y`; storage index is `y * width + x`.
//! The Radon code writes `X_{i,j}` for column `i`, row `j`, which is the same
//! convention.

use crate::error::{Error, Result};

/// Noiseless nonnegative intensity map (expected counts per pixel).
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

/// Observed Poisson counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountImage {
    width: usize,
    height: usize,
    values: Vec<u64>,
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::Dimensions(format!("{width}x{height} image")));
    }
    if width * height != len {
        return Err(Error::Dimensions(format!(
            "{width}x{height} needs {} values, got {len}",
            width * height
        )));
    }
    Ok(())
}

impl IntensityImage {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(
                "intensity",
                format!("values must be finite and >= 0, found {v}"),
            ));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Build from arbitrary reals, clamping negatives (and NaN) to zero.
    pub fn from_clamped(width: usize, height: usize, mut values: Vec<f64>) -> Result<Self> {
        for v in values.iter_mut() {
            if v.is_nan() || *v < 0.0 {
                *v = 0.0;
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

impl CountImage {
    pub fn new(width: usize, height: usize, values: Vec<u64>) -> Result<Self> {
        check_dims(width, height, values.len())?;
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.values[y * self.width + x]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    /// Counts viewed as an intensity map (lossless for counts below 2^53).
    pub fn to_intensity(&self) -> IntensityImage {
        IntensityImage {
            width: self.width,
            height: self.height,
            values: self.to_f64(),
        }
    }
}

/// Read access shared by both image kinds, so transforms accept either.
pub trait Grid: Sync {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn value(&self, x: usize, y: usize) -> f64;
}

impl Grid for IntensityImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    #[inline]
    fn value(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

impl Grid for CountImage {
    fn width(&self) -> usize {
        self.width
    }
    fn height(&self) -> usize {
        self.height
    }
    #[inline]
    fn value(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x] as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_bad_dims() {
        assert!(IntensityImage::new(2, 2, vec![0.0, 1.0, -1.0, 0.0]).is_err());
        assert!(IntensityImage::new(0, 2, vec![]).is_err());
        assert!(CountImage::new(3, 2, vec![0; 5]).is_err());
    }

    #[test]
    fn clamped_constructor_zeroes_negatives() {
        let img = IntensityImage::from_clamped(2, 1, vec![-3.0, 2.0]).unwrap();
        assert_eq!(img.values(), &[0.0, 2.0]);
    }
}
