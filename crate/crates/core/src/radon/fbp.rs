//! Filtered backprojection with the Ram-Lak ramp filter.

use rayon::prelude::*;

use super::{Sinogram, Variant};
use crate::error::{Error, Result};
use crate::image::IntensityImage;

/// Spatial Ram-Lak kernel for unit sample spacing, indexed `-(len-1)..len`:
/// `h(0) = 1/4`, `h(n) = -1/(π n)²` for odd `n`, zero for even `n`.
pub fn ram_lak_kernel(len: usize) -> Vec<f64> {
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    (0..2 * len - 1)
        .map(|idx| {
            let n = idx as i64 - (len as i64 - 1);
            if n == 0 {
                0.25
            } else if n % 2 != 0 {
                -1.0 / (pi2 * (n * n) as f64)
            } else {
                0.0
            }
        })
        .collect()
}

fn ramp_filter(projection: &[f64], kernel: &[f64]) -> Vec<f64> {
    let len = projection.len();
    (0..len)
        .map(|b| {
            projection
                .iter()
                .enumerate()
                .map(|(k, &p)| p * kernel[b + len - 1 - k])
                .sum()
        })
        .collect()
}

/// Invert a rotation-variant sinogram. Negative outputs are clamped to zero.
pub fn fbp_invert(sino: &Sinogram) -> Result<IntensityImage> {
    let g = match sino.geometry() {
        super::Geometry::Rotation(g) => *g,
        super::Geometry::Gdb(_) => return Err(Error::UnsupportedVariant("fbp_invert (gdb)")),
    };
    debug_assert_eq!(sino.variant(), Variant::Rotation);
    let bins = g.bins();
    let kernel = ram_lak_kernel(bins);
    let filtered: Vec<Vec<f64>> = (0..g.angles)
        .into_par_iter()
        .map(|k| ramp_filter(&sino.column(k), &kernel))
        .collect();
    let trig: Vec<(f64, f64)> = (0..g.angles).map(|k| g.theta(k).sin_cos()).collect();
    let scale = std::f64::consts::PI / g.angles as f64;
    let mut values = vec![0.0; g.width * g.height];
    values
        .par_chunks_mut(g.width)
        .enumerate()
        .for_each(|(y, row)| {
            for (x, out) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (q, &(sin, cos)) in filtered.iter().zip(&trig) {
                    let p = g.bin_position(x as f64, y as f64, cos, sin);
                    let b = p.floor();
                    let frac = p - b;
                    let b = b as usize;
                    let hi = if b + 1 < bins { q[b + 1] } else { 0.0 };
                    acc += q[b] * (1.0 - frac) + hi * frac;
                }
                *out = acc * scale;
            }
        });
    IntensityImage::from_clamped(g.width, g.height, values)
}
