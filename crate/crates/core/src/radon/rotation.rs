//! Rotation-based DRT.
//!
//! Each pixel is treated as a unit square. Its center is rotated into the
//! projection frame and its projected footprint (a trapezoid, the shadow of
//! the square at angle θ) is integrated over unit offset bins. The weights of
//! one pixel sum to one, so every projection carries exactly the image mass,
//! and each lies in `[0, 1]`, so a coefficient `sum w_i X_i` of Poisson
//! pixels has mean/variance `sum w λ / sum w² λ >= 1`. At θ = 0 the
//! footprint is exactly one bin and projections are plain column sums.

use rayon::prelude::*;

use super::{Geometry, Sinogram};
use crate::image::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RotationGeometry {
    pub width: usize,
    pub height: usize,
    pub angles: usize,
    /// Offsets run over `-half_bins..=half_bins`.
    pub half_bins: usize,
}

impl RotationGeometry {
    pub fn new(width: usize, height: usize, angles: usize) -> Self {
        let (cx, cy) = center(width, height);
        let rx = cx.max(width as f64 - 1.0 - cx);
        let ry = cy.max(height as f64 - 1.0 - cy);
        let half_bins = rx.hypot(ry).ceil() as usize + 1;
        Self {
            width,
            height,
            angles,
            half_bins,
        }
    }

    pub fn bins(&self) -> usize {
        2 * self.half_bins + 1
    }

    /// Angle of projection `k`, evenly spaced over `[0, π)`.
    pub fn theta(&self, k: usize) -> f64 {
        std::f64::consts::PI * k as f64 / self.angles as f64
    }

    pub fn center(&self) -> (f64, f64) {
        center(self.width, self.height)
    }

    /// Continuous bin coordinate of pixel `(x, y)` at angle `theta`, with the
    /// image `y` axis pointing down.
    #[inline]
    pub(crate) fn bin_position(&self, x: f64, y: f64, cos: f64, sin: f64) -> f64 {
        let (cx, cy) = self.center();
        (x - cx) * cos + (cy - y) * sin + self.half_bins as f64 + self.bin_shift()
    }

    /// Half-bin shift for even widths, so that at zero angle every column
    /// lands exactly on one bin.
    fn bin_shift(&self) -> f64 {
        if self.width.is_multiple_of(2) {
            0.5
        } else {
            0.0
        }
    }

    /// Bin index holding column `x` at zero angle.
    pub fn zero_angle_bin(&self, x: usize) -> usize {
        self.bin_position(x as f64, 0.0, 1.0, 0.0) as usize
    }
}

/// Geometric image center. For even sizes this falls between pixels, which
/// keeps every pixel off the rotation axis.
fn center(width: usize, height: usize) -> (f64, f64) {
    ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0)
}

/// CDF of the projected footprint of a unit pixel: the convolution of two
/// unit-mass boxes of widths `a` and `b`, centered at zero.
#[inline]
fn footprint_cdf(t: f64, a: f64, b: f64) -> f64 {
    let (w1, w2) = if a < b { (a, b) } else { (b, a) };
    let s = 0.5 * (w1 + w2);
    if t <= -s {
        return 0.0;
    }
    if t >= s {
        return 1.0;
    }
    if w1 < 1e-12 {
        return (t + 0.5 * w2) / w2;
    }
    let d = 0.5 * (w2 - w1);
    if t <= -d {
        (t + s) * (t + s) / (2.0 * w1 * w2)
    } else if t <= d {
        w1 / (2.0 * w2) + (t + d) / w2
    } else {
        1.0 - (s - t) * (s - t) / (2.0 * w1 * w2)
    }
}

/// Bin weights of one pixel whose center projects to bin coordinate `p`.
/// Bin `b` covers `[b - 1/2, b + 1/2)`. Calls `emit(bin, weight)`.
#[inline]
fn footprint_weights(p: f64, cos: f64, sin: f64, mut emit: impl FnMut(usize, f64)) {
    let (a, b) = (cos.abs(), sin.abs());
    let half = 0.5 * (a + b);
    let first = (p - half + 0.5).floor().max(0.0) as usize;
    let last = (p + half + 0.5).floor() as usize;
    let mut prev = footprint_cdf(first as f64 - 0.5 - p, a, b);
    for bin in first..=last {
        let next = footprint_cdf(bin as f64 + 0.5 - p, a, b);
        let w = next - prev;
        if w > 0.0 {
            emit(bin, w);
        }
        prev = next;
    }
}

/// Per-pixel weights of every coefficient at angle index `k`, as
/// `(bin, pixel index, weight)` triples. Used by tests and diagnostics.
pub fn projection_weights(geometry: &RotationGeometry, k: usize) -> Vec<(usize, usize, f64)> {
    let (sin, cos) = geometry.theta(k).sin_cos();
    let mut out = Vec::new();
    for y in 0..geometry.height {
        for x in 0..geometry.width {
            let p = geometry.bin_position(x as f64, y as f64, cos, sin);
            footprint_weights(p, cos, sin, |b, w| out.push((b, y * geometry.width + x, w)));
        }
    }
    out
}

pub fn drt_rotation<G: Grid + ?Sized>(img: &G, geometry: &RotationGeometry) -> Sinogram {
    let (w, h) = (img.width(), img.height());
    assert_eq!((w, h), (geometry.width, geometry.height), "geometry mismatch");
    let bins = geometry.bins();
    let columns: Vec<Vec<f64>> = (0..geometry.angles)
        .into_par_iter()
        .map(|k| {
            let (sin, cos) = geometry.theta(k).sin_cos();
            let mut col = vec![0.0; bins];
            for y in 0..h {
                for x in 0..w {
                    let v = img.value(x, y);
                    if v == 0.0 {
                        continue;
                    }
                    let p = geometry.bin_position(x as f64, y as f64, cos, sin);
                    footprint_weights(p, cos, sin, |b, wt| col[b] += v * wt);
                }
            }
            col
        })
        .collect();
    Sinogram::from_columns(Geometry::Rotation(*geometry), &columns)
        .expect("columns match geometry")
}
