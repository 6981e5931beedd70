//! Test images and Poisson observation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{CountImage, IntensityImage};
use crate::poisson;
use crate::radon::{self, RotationGeometry};
use crate::seed::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    Homogeneous,
    Inhomogeneous,
    SyntheticSinogram,
}

impl PhantomKind {
    pub fn name(self) -> &'static str {
        match self {
            PhantomKind::Homogeneous => "homogeneous",
            PhantomKind::Inhomogeneous => "inhomogeneous",
            PhantomKind::SyntheticSinogram => "synthetic-sinogram",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "homogeneous" => Some(PhantomKind::Homogeneous),
            "inhomogeneous" => Some(PhantomKind::Inhomogeneous),
            "synthetic-sinogram" | "sinogram" => Some(PhantomKind::SyntheticSinogram),
            _ => None,
        }
    }
}

/// A structure added on top of the background. Coordinates are in pixels,
/// with pixel centers at integer positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disk { cx: f64, cy: f64, radius: f64 },
    Bar { x: usize, y: usize, width: usize, height: usize },
}

impl Shape {
    fn inside(&self, size: usize) -> bool {
        let last = size as f64 - 1.0;
        match *self {
            Shape::Disk { cx, cy, radius } => {
                radius >= 0.0
                    && cx - radius >= 0.0
                    && cy - radius >= 0.0
                    && cx + radius <= last
                    && cy + radius <= last
            }
            Shape::Bar {
                x,
                y,
                width,
                height,
            } => width >= 1 && height >= 1 && x + width <= size && y + height <= size,
        }
    }

    fn contains(&self, px: usize, py: usize) -> bool {
        match *self {
            Shape::Disk { cx, cy, radius } => {
                let dx = px as f64 - cx;
                let dy = py as f64 - cy;
                dx * dx + dy * dy <= radius * radius
            }
            Shape::Bar {
                x,
                y,
                width,
                height,
            } => px >= x && px < x + width && py >= y && py < y + height,
        }
    }
}

/// The default inhomogeneous structures: a centered disk of radius `size/8`
/// and an off-center `size/16 x size/3` bar.
pub fn default_structures(size: usize) -> Vec<Shape> {
    let c = (size as f64 - 1.0) / 2.0;
    let bar_w = (size / 16).max(1);
    let bar_h = (size / 3).max(1);
    vec![
        Shape::Disk {
            cx: c,
            cy: c,
            radius: size as f64 / 8.0,
        },
        Shape::Bar {
            x: size / 8,
            y: size / 3,
            width: bar_w,
            height: bar_h.min(size - size / 3),
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    /// Pixels per side.
    pub size: usize,
    /// Expected counts per background pixel.
    pub background_intensity: f64,
    /// Structure intensity as a multiple of the background.
    pub structure_gain: f64,
    pub structures: Vec<Shape>,
    /// Sinogram peak as a multiple of `background_intensity`.
    pub peak_factor: f64,
    /// Projection angles for the synthetic sinogram.
    pub angles: usize,
    pub rng_seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            kind: PhantomKind::Homogeneous,
            size: 64,
            background_intensity: 0.05,
            structure_gain: 10.0,
            structures: default_structures(64),
            peak_factor: 2000.0,
            angles: 180,
            rng_seed: 0,
        }
    }
}

impl PhantomSpec {
    pub fn homogeneous(size: usize, lambda: f64) -> Self {
        Self {
            kind: PhantomKind::Homogeneous,
            size,
            background_intensity: lambda,
            structures: Vec::new(),
            ..Self::default()
        }
    }

    pub fn inhomogeneous(size: usize, lambda: f64, gain: f64) -> Self {
        Self {
            kind: PhantomKind::Inhomogeneous,
            size,
            background_intensity: lambda,
            structure_gain: gain,
            structures: default_structures(size),
            ..Self::default()
        }
    }

    pub fn synthetic_sinogram(size: usize, lambda: f64, peak_factor: f64, angles: usize) -> Self {
        Self {
            kind: PhantomKind::SyntheticSinogram,
            size,
            background_intensity: lambda,
            peak_factor,
            angles,
            structures: Vec::new(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::invalid("size", "must be >= 1"));
        }
        if !(self.background_intensity >= 0.0 && self.background_intensity.is_finite()) {
            return Err(Error::invalid("background_intensity", "must be finite and >= 0"));
        }
        if !(self.structure_gain >= 0.0 && self.structure_gain.is_finite()) {
            return Err(Error::invalid("structure_gain", "must be finite and >= 0"));
        }
        if self.kind == PhantomKind::Inhomogeneous {
            for (index, shape) in self.structures.iter().enumerate() {
                if !shape.inside(self.size) {
                    return Err(Error::ShapeOutsideImage {
                        index,
                        size: self.size,
                    });
                }
            }
        }
        if self.kind == PhantomKind::SyntheticSinogram {
            if self.angles == 0 {
                return Err(Error::invalid("angles", "must be >= 1"));
            }
            if !(self.peak_factor >= 0.0 && self.peak_factor.is_finite()) {
                return Err(Error::invalid("peak_factor", "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

pub fn make_phantom(spec: &PhantomSpec) -> Result<IntensityImage> {
    spec.validate()?;
    let n = spec.size;
    let lambda = spec.background_intensity;
    match spec.kind {
        PhantomKind::Homogeneous => IntensityImage::filled(n, n, lambda),
        PhantomKind::Inhomogeneous => {
            let high = spec.structure_gain * lambda;
            let mut values = vec![lambda; n * n];
            for y in 0..n {
                for x in 0..n {
                    if spec.structures.iter().any(|s| s.contains(x, y)) {
                        values[y * n + x] = high;
                    }
                }
            }
            IntensityImage::new(n, n, values)
        }
        PhantomKind::SyntheticSinogram => {
            let head = head_phantom(n);
            let geometry = RotationGeometry::new(n, n, spec.angles);
            let sino = radon::drt_rotation(&head, &geometry);
            let peak = sino.data().iter().copied().fold(0.0, f64::max);
            let scale = if peak > 0.0 {
                lambda * spec.peak_factor / peak
            } else {
                0.0
            };
            let values = sino.data().iter().map(|v| (v * scale).max(0.0)).collect();
            IntensityImage::new(sino.cols(), sino.rows(), values)
        }
    }
}

// (a, b, x0, y0, phi in degrees, value): the modified Shepp-Logan ellipses,
// whose nested values keep every region nonnegative.
const HEAD_ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (0.69, 0.92, 0.0, 0.0, 0.0, 1.0),
    (0.6624, 0.874, 0.0, -0.0184, 0.0, -0.8),
    (0.11, 0.31, 0.22, 0.0, -18.0, -0.2),
    (0.16, 0.41, -0.22, 0.0, 18.0, -0.2),
    (0.21, 0.25, 0.0, 0.35, 0.0, 0.1),
    (0.046, 0.046, 0.0, 0.1, 0.0, 0.1),
    (0.046, 0.046, 0.0, -0.1, 0.0, 0.1),
    (0.046, 0.023, -0.08, -0.605, 0.0, 0.1),
    (0.023, 0.023, 0.0, -0.606, 0.0, 0.1),
    (0.023, 0.046, 0.06, -0.605, 0.0, 0.1),
];

/// Piecewise-constant ellipse head phantom on an `n x n` grid.
pub fn head_phantom(n: usize) -> IntensityImage {
    let half = n as f64 / 2.0;
    let c = (n as f64 - 1.0) / 2.0;
    let mut values = vec![0.0; n * n];
    for y in 0..n {
        for x in 0..n {
            let u = (x as f64 - c) / half;
            let v = (c - y as f64) / half;
            let mut acc = 0.0;
            for &(a, b, x0, y0, phi, val) in HEAD_ELLIPSES.iter() {
                let (s, co) = phi.to_radians().sin_cos();
                let du = u - x0;
                let dv = v - y0;
                let ru = du * co + dv * s;
                let rv = -du * s + dv * co;
                if (ru / a).powi(2) + (rv / b).powi(2) <= 1.0 {
                    acc += val;
                }
            }
            values[y * n + x] = acc;
        }
    }
    IntensityImage::from_clamped(n, n, values).expect("dimensions are consistent")
}

/// Draw an independent Poisson count per pixel.
///
/// Each row gets its own stream derived from `seed`, so the result does not
/// depend on how rayon schedules rows.
pub fn sample_poisson(img: &IntensityImage, seed: u64) -> CountImage {
    let w = img.width();
    let mut values = vec![0u64; w * img.height()];
    values
        .par_chunks_mut(w)
        .zip(img.values().par_chunks(w))
        .enumerate()
        .for_each(|(y, (out, lam))| {
            let mut rng = rng_for(seed, "poisson-row", y as u64);
            for (o, &l) in out.iter_mut().zip(lam) {
                *o = poisson::sample(&mut rng, l);
            }
        });
    CountImage::new(w, img.height(), values).expect("dimensions are consistent")
}
