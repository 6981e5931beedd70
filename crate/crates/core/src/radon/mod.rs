//! Discrete Radon transforms.
//!
//! Two forward transforms are provided: the recursive dyadic-line transform
//! ([`drt_gdb`]), whose coefficients are exact sums of pixels and therefore
//! exactly Poisson for Poisson input, and a rotation-based projector
//! ([`drt_rotation`]) paired with filtered backprojection ([`fbp_invert`]) for
//! the denoising pipeline.
//!
//! Pixel `X_{i,j}` is column `i`, row `j`.

mod fbp;
mod gdb;
mod rotation;

pub use fbp::{fbp_invert, ram_lak_kernel};
pub use gdb::{drt_gdb, gdb_lines, DiscreteLine, GdbGeometry};
pub use rotation::{drt_rotation, projection_weights, RotationGeometry};

use crate::error::Result;
use crate::image::{Grid, IntensityImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Rotation,
    Gdb,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Rotation => "rotation",
            Variant::Gdb => "gdb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rotation" => Some(Variant::Rotation),
            "gdb" => Some(Variant::Gdb),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Rotation(RotationGeometry),
    Gdb(GdbGeometry),
}

impl Geometry {
    pub fn variant(&self) -> Variant {
        match self {
            Geometry::Rotation(_) => Variant::Rotation,
            Geometry::Gdb(_) => Variant::Gdb,
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Geometry::Rotation(g) => g.bins(),
            Geometry::Gdb(g) => g.offsets(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Geometry::Rotation(g) => g.angles,
            Geometry::Gdb(g) => 4 * g.n,
        }
    }

    /// Geometry for transforming a `width x height` image with `variant`.
    pub fn for_image(variant: Variant, width: usize, height: usize, angles: usize) -> Result<Self> {
        Ok(match variant {
            Variant::Rotation => Geometry::Rotation(RotationGeometry::new(width, height, angles)),
            Variant::Gdb => Geometry::Gdb(GdbGeometry::for_image(width, height)?),
        })
    }
}

/// Radon-domain coefficients. Rows are line offsets, columns are projections
/// (angles for the rotation variant, `quadrant * N + slope` for GDB).
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    geometry: Geometry,
    data: Vec<f64>,
}

impl Sinogram {
    pub fn zeros(geometry: Geometry) -> Self {
        Self {
            data: vec![0.0; geometry.rows() * geometry.cols()],
            geometry,
        }
    }

    pub fn from_data(geometry: Geometry, data: Vec<f64>) -> Result<Self> {
        if data.len() != geometry.rows() * geometry.cols() {
            return Err(crate::Error::Dimensions(format!(
                "sinogram needs {}x{} values, got {}",
                geometry.rows(),
                geometry.cols(),
                data.len()
            )));
        }
        Ok(Self { geometry, data })
    }

    /// Build from per-projection columns.
    pub fn from_columns(geometry: Geometry, columns: &[Vec<f64>]) -> Result<Self> {
        let (rows, cols) = (geometry.rows(), geometry.cols());
        if columns.len() != cols || columns.iter().any(|c| c.len() != rows) {
            return Err(crate::Error::Dimensions(format!(
                "expected {cols} columns of length {rows}"
            )));
        }
        let mut data = vec![0.0; rows * cols];
        for (c, col) in columns.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                data[r * cols + c] = v;
            }
        }
        Ok(Self { geometry, data })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn variant(&self) -> Variant {
        self.geometry.variant()
    }

    pub fn rows(&self) -> usize {
        self.geometry.rows()
    }

    pub fn cols(&self) -> usize {
        self.geometry.cols()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        let cols = self.cols();
        (0..self.rows()).map(|r| self.data[r * cols + col]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols()).map(|c| self.column(c)).collect()
    }
}

/// Forward transform of any image with the given geometry.
pub fn forward<G: Grid + ?Sized>(img: &G, geometry: &Geometry) -> Result<Sinogram> {
    match geometry {
        Geometry::Rotation(g) => Ok(drt_rotation(img, g)),
        Geometry::Gdb(g) => drt_gdb_with(img, g),
    }
}

fn drt_gdb_with<G: Grid + ?Sized>(img: &G, geometry: &GdbGeometry) -> Result<Sinogram> {
    let s = drt_gdb(img)?;
    if s.geometry() != &Geometry::Gdb(*geometry) {
        return Err(crate::Error::Dimensions(
            "image does not match the requested GDB geometry".into(),
        ));
    }
    Ok(s)
}

/// Radon-domain intensity of a noiseless image.
///
/// Every coefficient of either transform is a fixed linear combination of
/// pixels, so the expected transform of `T(Λ)` is the transform of `Λ`.
/// For the GDB variant the weights are all one and each coefficient is
/// Poisson with exactly this intensity.
pub fn propagate_intensity(lambda: &IntensityImage, geometry: &Geometry) -> Result<Sinogram> {
    forward(lambda, geometry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::IntensityImage;

    proptest::proptest! {
        #[test]
        fn transforms_are_linear(
            n in 1usize..4,
            a in 0.0f64..5.0,
            b in 0.0f64..5.0,
            seed in proptest::prelude::any::<u64>(),
        ) {
            let n = 1 << n;
            let image = |salt: u64| {
                let values = (0..n * n)
                    .map(|k| ((seed ^ salt).wrapping_mul(k as u64 + 1) % 97) as f64 / 7.0)
                    .collect();
                IntensityImage::new(n, n, values).unwrap()
            };
            let (x, y) = (image(1), image(2));
            let mix = IntensityImage::new(
                n,
                n,
                x.values().iter().zip(y.values()).map(|(p, q)| a * p + b * q).collect(),
            )
            .unwrap();
            for variant in [Variant::Rotation, Variant::Gdb] {
                let g = Geometry::for_image(variant, n, n, 13).unwrap();
                let (fx, fy, fm) = (forward(&x, &g).unwrap(), forward(&y, &g).unwrap(), forward(&mix, &g).unwrap());
                for ((p, q), m) in fx.data().iter().zip(fy.data()).zip(fm.data()) {
                    let want = a * p + b * q;
                    proptest::prop_assert!((m - want).abs() <= 1e-9 * want.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn columns_round_trip() {
        let g = Geometry::Rotation(RotationGeometry::new(4, 4, 3));
        let data: Vec<f64> = (0..g.rows() * g.cols()).map(|v| v as f64).collect();
        let s = Sinogram::from_data(g, data).unwrap();
        let back = Sinogram::from_columns(g, &s.columns()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn zero_intensity_propagates_to_zero() {
        let img = IntensityImage::filled(16, 16, 0.0).unwrap();
        for variant in [Variant::Rotation, Variant::Gdb] {
            let g = Geometry::for_image(variant, 16, 16, 30).unwrap();
            let s = propagate_intensity(&img, &g).unwrap();
            assert!(s.data().iter().all(|&v| v == 0.0));
        }
    }
}
