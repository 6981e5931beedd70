//! Recursive dyadic-line DRT.
//!
//! `D_N(h, s)` starts at row `h` in column 0 and ends at row `h + s` in
//! column `N - 1`, visiting exactly one pixel per column. Lines are built by
//! joining two half-size lines:
//!
//! ```text
//! D_N(h, 2s)     = D_{N/2}(h, s) ++ D_{N/2}(h + s, s)
//! D_N(h, 2s + 1) = D_{N/2}(h, s) ++ D_{N/2}(h + s + 1, s)
//! ```
//!
//! The transform reuses the half-size partial sums, giving `O(N^2 log N)`.
//! Slopes cover one octant; the other three come from transposing and
//! flipping the image:
//!
//! | quadrant | summand            |
//! |----------|--------------------|
//! | 1        | `X[i, j]`          |
//! | 2        | `X[j, i]`          |
//! | 3        | `X[i, N-1-j]`      |
//! | 4        | `X[N-1-j, i]`      |
//!
//! Offsets `h` run over `-(N-1)..=N-1`; every other line misses the image.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::{Geometry, Sinogram};
use crate::error::{Error, Result};
use crate::image::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GdbGeometry {
    /// Padded power-of-two side length.
    pub n: usize,
    pub original_width: usize,
    pub original_height: usize,
}

impl GdbGeometry {
    pub fn for_image(width: usize, height: usize) -> Result<Self> {
        if width != height {
            return Err(Error::Dimensions(format!(
                "GDB transform needs a square image, got {width}x{height}"
            )));
        }
        if width == 0 {
            return Err(Error::Dimensions("empty image".into()));
        }
        Ok(Self {
            n: width.next_power_of_two(),
            original_width: width,
            original_height: height,
        })
    }

    /// Number of offsets `h` per projection (`2N - 1`).
    pub fn offsets(&self) -> usize {
        2 * self.n - 1
    }

    /// Row index of offset `h`.
    pub fn row_of(&self, h: i64) -> usize {
        (h + self.n as i64 - 1) as usize
    }

    pub fn offset_of(&self, row: usize) -> i64 {
        row as i64 - (self.n as i64 - 1)
    }

    /// Column index of `(quadrant, slope)`; quadrants are 1-based.
    pub fn col_of(&self, quadrant: usize, slope: usize) -> usize {
        (quadrant - 1) * self.n + slope
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteLine {
    pub h: i64,
    pub s: usize,
    /// `(column, row)` pairs, one per column, in column order.
    pub points: Vec<(usize, i64)>,
}

type ProfileCache = Mutex<HashMap<(usize, usize), Arc<[i64]>>>;

fn profile_cache() -> &'static ProfileCache {
    static CACHE: OnceLock<ProfileCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Row offsets of `D_n(0, s)`, one per column. `D_n(h, s)` is this profile
/// shifted by `h`.
fn line_profile(n: usize, s: usize) -> Arc<[i64]> {
    if let Some(p) = profile_cache().lock().unwrap().get(&(n, s)) {
        return p.clone();
    }
    let profile: Arc<[i64]> = if n == 1 {
        Arc::from(vec![0i64])
    } else {
        let half = line_profile(n / 2, s / 2);
        let jump = (s / 2 + s % 2) as i64;
        half.iter()
            .copied()
            .chain(half.iter().map(|&r| r + jump))
            .collect()
    };
    profile_cache()
        .lock()
        .unwrap()
        .insert((n, s), profile.clone());
    profile
}

/// The discrete line `D_N(h, s)`.
pub fn gdb_lines(n: usize, h: i64, s: usize) -> Result<DiscreteLine> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if s >= n {
        return Err(Error::SlopeOutOfRange { size: n, slope: s });
    }
    let profile = line_profile(n, s);
    Ok(DiscreteLine {
        h,
        s,
        points: profile.iter().enumerate().map(|(i, &r)| (i, h + r)).collect(),
    })
}

/// Flipped, zero-padded copy of the image for `quadrant` as a column-major
/// `n x n` array (`y[i * n + j]` is column `i`, row `j`).
fn quadrant_image<G: Grid + ?Sized>(img: &G, n: usize, quadrant: usize) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let at = |i: usize, j: usize| -> f64 {
        if i < w && j < h {
            img.value(i, j)
        } else {
            0.0
        }
    };
    let mut y = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            y[i * n + j] = match quadrant {
                1 => at(i, j),
                2 => at(j, i),
                3 => at(i, n - 1 - j),
                4 => at(n - 1 - j, i),
                _ => unreachable!(),
            };
        }
    }
    y
}

/// First-quadrant transform of a column-major `n x n` array. Returns
/// `out[s * offsets + row_of(h)]`.
fn octant_transform(y: &[f64], n: usize) -> Vec<f64> {
    let offsets = 2 * n - 1;
    let h0 = n as i64 - 1;
    // Level 1: one block per column, slope 0.
    let mut cur = vec![0.0; n * offsets];
    for b in 0..n {
        for j in 0..n {
            cur[b * offsets + (j as i64 + h0) as usize] = y[b * n + j];
        }
    }
    let mut width = 1;
    while width < n {
        let next_width = 2 * width;
        let blocks = n / next_width;
        let mut next = vec![0.0; n * offsets];
        for b in 0..blocks {
            let left = 2 * b;
            let right = 2 * b + 1;
            for s in 0..width {
                let lbase = (left * width + s) * offsets;
                let rbase = (right * width + s) * offsets;
                for (parity, jump) in [(0usize, s), (1, s + 1)] {
                    let out_base = (b * next_width + 2 * s + parity) * offsets;
                    for row in 0..offsets {
                        let r2 = row + jump;
                        let right_sum = if r2 < offsets { cur[rbase + r2] } else { 0.0 };
                        next[out_base + row] = cur[lbase + row] + right_sum;
                    }
                }
            }
        }
        cur = next;
        width = next_width;
    }
    cur
}

/// GDB transform of a square image. Non-power-of-two sides are zero-padded
/// to the next power of two; the geometry records the original size.
pub fn drt_gdb<G: Grid + ?Sized>(img: &G) -> Result<Sinogram> {
    let geometry = GdbGeometry::for_image(img.width(), img.height())?;
    let n = geometry.n;
    let offsets = geometry.offsets();
    let quadrants: Vec<Vec<f64>> = (1..=4)
        .into_par_iter()
        .map(|q| octant_transform(&quadrant_image(img, n, q), n))
        .collect();
    let cols = 4 * n;
    let mut data = vec![0.0; offsets * cols];
    for (qi, t) in quadrants.iter().enumerate() {
        for s in 0..n {
            let col = qi * n + s;
            for row in 0..offsets {
                data[row * cols + col] = t[s * offsets + row];
            }
        }
    }
    Sinogram::from_data(Geometry::Gdb(geometry), data)
}
