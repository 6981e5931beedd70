//! One-dimensional multi-level wavelet transforms with periodic extension.
//!
//! Analysis at one stage is `a[k] = sum_m h[m] x[(2k + m) mod n]` (decimated)
//! or `a[k] = sum_m h[m] x[(k + m·2^(j-1)) mod n]` (undecimated, level `j`),
//! and likewise for the highpass `g`. Any orthonormal lowpass works; the
//! highpass is its alternating flip `g[m] = (-1)^m h[L-1-m]`, which for Haar
//! gives `(1/√2, -1/√2)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    name: String,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl Filter {
    /// Orthonormal filter pair from a lowpass tap list.
    pub fn from_lowpass(name: &str, lowpass: Vec<f64>) -> Result<Self> {
        let len = lowpass.len();
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::Wavelet(format!(
                "{name}: lowpass needs an even number of taps, got {len}"
            )));
        }
        for shift in (0..len).step_by(2) {
            let dot: f64 = (0..len - shift).map(|m| lowpass[m] * lowpass[m + shift]).sum();
            let want = if shift == 0 { 1.0 } else { 0.0 };
            if (dot - want).abs() > 1e-12 {
                return Err(Error::Wavelet(format!(
                    "{name}: taps are not orthonormal at shift {shift}"
                )));
            }
        }
        let sum: f64 = lowpass.iter().sum();
        if (sum - std::f64::consts::SQRT_2).abs() > 1e-12 {
            return Err(Error::Wavelet(format!("{name}: lowpass gain {sum} != √2")));
        }
        let highpass = (0..len)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * lowpass[len - 1 - m]
            })
            .collect();
        Ok(Self {
            name: name.to_string(),
            lowpass,
            highpass,
        })
    }

    pub fn haar() -> Self {
        let t = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_lowpass("haar", vec![t, t]).expect("haar taps are orthonormal")
    }

    /// Four-tap Daubechies filter.
    pub fn db2() -> Self {
        let s3 = 3f64.sqrt();
        let d = 4.0 * std::f64::consts::SQRT_2;
        Self::from_lowpass(
            "db2",
            vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d],
        )
        .expect("db2 taps are orthonormal")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "haar" => Ok(Self::haar()),
            "db2" => Ok(Self::db2()),
            other => Err(Error::Wavelet(format!("unknown wavelet '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Decimated,
    Undecimated,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Decimated => "decimated",
            Mode::Undecimated => "undecimated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "decimated" => Some(Mode::Decimated),
            "undecimated" => Some(Mode::Undecimated),
            _ => None,
        }
    }
}

/// Boundary rule. Only periodic extension is supported; it keeps the
/// transform exactly orthogonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extension {
    #[default]
    Periodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    pub filter: Filter,
    pub levels: usize,
    pub mode: Mode,
    pub extension: Extension,
}

impl WaveletSpec {
    pub fn new(filter: Filter, levels: usize, mode: Mode) -> Self {
        Self {
            filter,
            levels,
            mode,
            extension: Extension::Periodic,
        }
    }

    pub fn haar(levels: usize, mode: Mode) -> Self {
        Self::new(Filter::haar(), levels, mode)
    }

    /// Check that a signal of `len` samples can be transformed.
    pub fn check_length(&self, len: usize) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::Wavelet("levels must be >= 1".into()));
        }
        if len < 2 {
            return Err(Error::Wavelet(format!("signal length {len} < 2")));
        }
        if self.mode == Mode::Decimated {
            let block = 1usize
                .checked_shl(self.levels as u32)
                .filter(|&b| b <= len)
                .ok_or_else(|| {
                    Error::Wavelet(format!(
                        "{} decimated levels exceed log2 of length {len}",
                        self.levels
                    ))
                })?;
            if !len.is_multiple_of(block) {
                return Err(Error::NeedsPadding {
                    length: len,
                    levels: self.levels,
                    required: len.div_ceil(block) * block,
                });
            }
        }
        Ok(())
    }

    /// Smallest length `>= len` accepted by [`dwt_forward`].
    pub fn padded_length(&self, len: usize) -> usize {
        match self.mode {
            Mode::Decimated => {
                let block = 1usize << self.levels;
                len.max(block).div_ceil(block) * block
            }
            Mode::Undecimated => len.max(2),
        }
    }

    /// Number of samples in a band at `level` for a signal of `len` samples.
    pub fn band_len(&self, len: usize, level: usize) -> usize {
        match self.mode {
            Mode::Decimated => len >> level,
            Mode::Undecimated => len,
        }
    }
}

/// Which band of a pyramid; levels are 1-based, 1 is the finest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Approximation(usize),
    Detail(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletPyramid {
    /// Coarsest approximation (level `spec.levels`).
    pub approximation: Vec<f64>,
    /// Detail bands, finest first.
    pub details: Vec<Vec<f64>>,
    pub spec: WaveletSpec,
    /// Length of the signal before any zero padding.
    pub original_length: usize,
    /// Length actually transformed.
    pub signal_length: usize,
}

impl WaveletPyramid {
    pub fn zeros(spec: &WaveletSpec, len: usize) -> Result<Self> {
        spec.check_length(len)?;
        Ok(Self {
            approximation: vec![0.0; spec.band_len(len, spec.levels)],
            details: (1..=spec.levels).map(|j| vec![0.0; spec.band_len(len, j)]).collect(),
            spec: spec.clone(),
            original_length: len,
            signal_length: len,
        })
    }

    pub fn levels(&self) -> usize {
        self.spec.levels
    }

    pub fn detail(&self, level: usize) -> &[f64] {
        &self.details[level - 1]
    }

    /// Approximation at any level `0..=levels`, rebuilt from the coarser
    /// bands. Level 0 is the (padded) signal itself.
    pub fn approximation_at(&self, level: usize) -> Result<Vec<f64>> {
        if level > self.levels() {
            return Err(Error::AtomOutOfRange(format!(
                "approximation level {level} > {}",
                self.levels()
            )));
        }
        self.check_consistent()?;
        let mut a = self.approximation.clone();
        for j in (level + 1..=self.levels()).rev() {
            a = synthesis_stage(&self.spec, j, &a, &self.details[j - 1]);
        }
        Ok(a)
    }

    fn check_consistent(&self) -> Result<()> {
        let spec = &self.spec;
        let n = self.signal_length;
        spec.check_length(n)?;
        let bad = |what: String| Err(Error::Wavelet(format!("band length mismatch: {what}")));
        if self.details.len() != spec.levels {
            return bad(format!("{} detail bands for {} levels", self.details.len(), spec.levels));
        }
        for (j, d) in self.details.iter().enumerate() {
            if d.len() != spec.band_len(n, j + 1) {
                return bad(format!("detail level {} has {} samples", j + 1, d.len()));
            }
        }
        if self.approximation.len() != spec.band_len(n, spec.levels) {
            return bad(format!("approximation has {} samples", self.approximation.len()));
        }
        if self.original_length > n {
            return bad(format!("original length {} > {n}", self.original_length));
        }
        Ok(())
    }

    /// Visit every coefficient band in order: approximation, then details
    /// finest first.
    pub fn bands(&self) -> impl Iterator<Item = (Band, &[f64])> {
        std::iter::once((Band::Approximation(self.levels()), self.approximation.as_slice())).chain(
            self.details
                .iter()
                .enumerate()
                .map(|(j, d)| (Band::Detail(j + 1), d.as_slice())),
        )
    }
}

fn analysis_stage(spec: &WaveletSpec, level: usize, x: &[f64], taps: &[f64]) -> Vec<f64> {
    let n = x.len();
    match spec.mode {
        Mode::Decimated => (0..n / 2)
            .map(|k| {
                taps.iter()
                    .enumerate()
                    .map(|(m, &t)| t * x[(2 * k + m) % n])
                    .sum()
            })
            .collect(),
        Mode::Undecimated => {
            let d = 1usize << (level - 1);
            (0..n)
                .map(|k| {
                    taps.iter()
                        .enumerate()
                        .map(|(m, &t)| t * x[(k + m * d) % n])
                        .sum()
                })
                .collect()
        }
    }
}

/// Transpose of [`analysis_stage`] for one filter, accumulated into `out`.
fn adjoint_stage(spec: &WaveletSpec, level: usize, y: &[f64], taps: &[f64], out: &mut [f64]) {
    let n = out.len();
    match spec.mode {
        Mode::Decimated => {
            for (k, &v) in y.iter().enumerate() {
                for (m, &t) in taps.iter().enumerate() {
                    out[(2 * k + m) % n] += t * v;
                }
            }
        }
        Mode::Undecimated => {
            let d = 1usize << (level - 1);
            for (k, &v) in y.iter().enumerate() {
                for (m, &t) in taps.iter().enumerate() {
                    out[(k + m * d) % n] += t * v;
                }
            }
        }
    }
}

fn synthesis_stage(spec: &WaveletSpec, level: usize, approx: &[f64], detail: &[f64]) -> Vec<f64> {
    let n = match spec.mode {
        Mode::Decimated => 2 * approx.len(),
        Mode::Undecimated => approx.len(),
    };
    let mut out = vec![0.0; n];
    adjoint_stage(spec, level, approx, spec.filter.lowpass(), &mut out);
    adjoint_stage(spec, level, detail, spec.filter.highpass(), &mut out);
    if spec.mode == Mode::Undecimated {
        // Both polyphase reconstructions are complete; average them.
        for v in out.iter_mut() {
            *v *= 0.5;
        }
    }
    out
}

pub fn dwt_forward(x: &[f64], spec: &WaveletSpec) -> Result<WaveletPyramid> {
    spec.check_length(x.len())?;
    let mut approx = x.to_vec();
    let mut details = Vec::with_capacity(spec.levels);
    for level in 1..=spec.levels {
        let d = analysis_stage(spec, level, &approx, spec.filter.highpass());
        approx = analysis_stage(spec, level, &approx, spec.filter.lowpass());
        details.push(d);
    }
    Ok(WaveletPyramid {
        approximation: approx,
        details,
        spec: spec.clone(),
        original_length: x.len(),
        signal_length: x.len(),
    })
}

/// Zero-pad `x` to [`WaveletSpec::padded_length`] and transform; the
/// inverse crops back to `x.len()`.
pub fn dwt_forward_padded(x: &[f64], spec: &WaveletSpec) -> Result<WaveletPyramid> {
    let len = spec.padded_length(x.len());
    let mut padded = x.to_vec();
    padded.resize(len, 0.0);
    let mut p = dwt_forward(&padded, spec)?;
    p.original_length = x.len();
    Ok(p)
}

pub fn dwt_inverse(p: &WaveletPyramid) -> Result<Vec<f64>> {
    let mut x = p.approximation_at(0)?;
    x.truncate(p.original_length);
    Ok(x)
}

/// Analysis vector of coefficient `k` in `band` for signals of length `n`:
/// the coefficient equals the inner product of this vector with the input.
pub fn wavelet_atom(spec: &WaveletSpec, band: Band, k: usize, n: usize) -> Result<Vec<f64>> {
    spec.check_length(n)?;
    let (level, top_taps) = match band {
        Band::Approximation(j) => (j, spec.filter.lowpass()),
        Band::Detail(j) => (j, spec.filter.highpass()),
    };
    if level == 0 || level > spec.levels {
        return Err(Error::AtomOutOfRange(format!(
            "level {level} not in 1..={}",
            spec.levels
        )));
    }
    let band_len = spec.band_len(n, level);
    if k >= band_len {
        return Err(Error::AtomOutOfRange(format!(
            "position {k} >= band length {band_len}"
        )));
    }
    let mut y = vec![0.0; band_len];
    y[k] = 1.0;
    let mut v = vec![0.0; spec.band_len(n, level - 1)];
    adjoint_stage(spec, level, &y, top_taps, &mut v);
    for j in (1..level).rev() {
        let mut next = vec![0.0; spec.band_len(n, j - 1)];
        adjoint_stage(spec, j, &v, spec.filter.lowpass(), &mut next);
        v = next;
    }
    Ok(v)
}

/// Nonzero taps of the atom at position 0 as `(offset, weight)` pairs. Atoms
/// at other positions are periodic shifts of this pattern (by `k·2^level`
/// when decimated, by `k` otherwise).
pub fn atom_taps(spec: &WaveletSpec, band: Band, n: usize) -> Result<Vec<(usize, f64)>> {
    Ok(wavelet_atom(spec, band, 0, n)?
        .into_iter()
        .enumerate()
        .filter(|(_, w)| *w != 0.0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const R2: f64 = std::f64::consts::SQRT_2;

    fn lcg(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 * 10.0 - 5.0
            })
            .collect()
    }

    #[test]
    fn haar_one_level_by_hand() {
        let p = dwt_forward(&[2.0, 4.0, 6.0, 8.0], &WaveletSpec::haar(1, Mode::Decimated)).unwrap();
        let want_a = [6.0 / R2, 14.0 / R2];
        let want_d = [-2.0 / R2, -2.0 / R2];
        for (g, w) in p.approximation.iter().zip(want_a) {
            assert!((g - w).abs() < 1e-14);
        }
        for (g, w) in p.details[0].iter().zip(want_d) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn constants_have_zero_details() {
        for mode in [Mode::Decimated, Mode::Undecimated] {
            for filter in [Filter::haar(), Filter::db2()] {
                let spec = WaveletSpec::new(filter, 3, mode);
                let p = dwt_forward(&[3.5; 16], &spec).unwrap();
                for d in &p.details {
                    assert!(d.iter().all(|v| v.abs() < 1e-13));
                }
            }
        }
    }

    #[test]
    fn decimated_parseval() {
        let x = lcg(64, 3);
        for filter in [Filter::haar(), Filter::db2()] {
            let p = dwt_forward(&x, &WaveletSpec::new(filter, 3, Mode::Decimated)).unwrap();
            let e_in: f64 = x.iter().map(|v| v * v).sum();
            let e_out: f64 = p.bands().flat_map(|(_, b)| b.iter()).map(|v| v * v).sum();
            assert!((e_in - e_out).abs() < 1e-12 * e_in.max(1.0), "{e_in} {e_out}");
        }
    }

    #[test]
    fn decimated_band_lengths_sum_to_signal() {
        let p = dwt_forward(&lcg(64, 1), &WaveletSpec::haar(3, Mode::Decimated)).unwrap();
        let total: usize = p.bands().map(|(_, b)| b.len()).sum();
        assert_eq!(total, 64);
        let u = dwt_forward(&lcg(10, 1), &WaveletSpec::haar(3, Mode::Undecimated)).unwrap();
        assert!(u.bands().all(|(_, b)| b.len() == 10));
    }

    #[test]
    fn undivisible_length_names_padding() {
        match dwt_forward(&[0.0; 12], &WaveletSpec::haar(3, Mode::Decimated)) {
            Err(Error::NeedsPadding { required, .. }) => assert_eq!(required, 16),
            other => panic!("unexpected {other:?}"),
        }
        let p = dwt_forward_padded(&lcg(12, 2), &WaveletSpec::haar(3, Mode::Decimated)).unwrap();
        assert_eq!(p.signal_length, 16);
        assert_eq!(dwt_inverse(&p).unwrap().len(), 12);
    }

    #[test]
    fn round_trip_matrix() {
        for mode in [Mode::Decimated, Mode::Undecimated] {
            for levels in 1..=3 {
                for len in [4usize, 8, 64] {
                    if mode == Mode::Decimated && (1 << levels) > len {
                        continue;
                    }
                    let x = lcg(len, (len * levels) as u64);
                    let spec = WaveletSpec::haar(levels, mode);
                    let back = dwt_inverse(&dwt_forward(&x, &spec).unwrap()).unwrap();
                    let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!(err <= 1e-10, "{mode:?} L{levels} n{len}: {err}");
                }
            }
        }
    }

    #[test]
    fn zero_pyramid_inverts_to_zero() {
        let p = WaveletPyramid::zeros(&WaveletSpec::haar(2, Mode::Undecimated), 9).unwrap();
        assert!(dwt_inverse(&p).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mismatched_band_is_an_error() {
        let mut p = dwt_forward(&lcg(8, 5), &WaveletSpec::haar(2, Mode::Decimated)).unwrap();
        p.details[1].push(0.0);
        assert!(dwt_inverse(&p).is_err());
    }

    #[test]
    fn dropping_details_gives_block_means() {
        // Decimated Haar with details zeroed reconstructs each 2^L block by
        // its mean.
        let x = lcg(32, 9);
        for levels in 1..=3 {
            let mut p = dwt_forward(&x, &WaveletSpec::haar(levels, Mode::Decimated)).unwrap();
            for d in p.details.iter_mut() {
                d.iter_mut().for_each(|v| *v = 0.0);
            }
            let back = dwt_inverse(&p).unwrap();
            let block = 1 << levels;
            for (b, chunk) in x.chunks(block).enumerate() {
                let mean = chunk.iter().sum::<f64>() / block as f64;
                for i in 0..block {
                    assert!((back[b * block + i] - mean).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn haar_atoms_by_hand() {
        let spec = WaveletSpec::haar(1, Mode::Decimated);
        let a = wavelet_atom(&spec, Band::Detail(1), 0, 4).unwrap();
        assert_eq!(a.len(), 4);
        let want = [1.0 / R2, -1.0 / R2, 0.0, 0.0];
        for (g, w) in a.iter().zip(want) {
            assert!((g - w).abs() < 1e-15);
        }
        let spec2 = WaveletSpec::haar(2, Mode::Decimated);
        let a = wavelet_atom(&spec2, Band::Approximation(2), 0, 4).unwrap();
        for g in a {
            assert!((g - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn atom_out_of_range() {
        let spec = WaveletSpec::haar(2, Mode::Decimated);
        assert!(wavelet_atom(&spec, Band::Detail(3), 0, 8).is_err());
        assert!(wavelet_atom(&spec, Band::Detail(2), 2, 8).is_err());
        assert!(wavelet_atom(&spec, Band::Approximation(0), 0, 8).is_err());
    }

    #[test]
    fn atoms_reproduce_every_coefficient() {
        for mode in [Mode::Decimated, Mode::Undecimated] {
            for filter in [Filter::haar(), Filter::db2()] {
                let spec = WaveletSpec::new(filter, 3, mode);
                let n = 16;
                let x = lcg(n, 77);
                let p = dwt_forward(&x, &spec).unwrap();
                for (band, coeffs) in p.bands() {
                    for (k, &c) in coeffs.iter().enumerate() {
                        let atom = wavelet_atom(&spec, band, k, n).unwrap();
                        let dot: f64 = atom.iter().zip(&x).map(|(a, b)| a * b).sum();
                        assert!((dot - c).abs() < 1e-12, "{mode:?} {band:?} {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn bad_filter_rejected() {
        assert!(Filter::from_lowpass("bad", vec![1.0, 1.0]).is_err());
        assert!(Filter::from_lowpass("odd", vec![1.0]).is_err());
        assert!(Filter::by_name("sym8").is_err());
    }

    proptest! {
        #[test]
        fn perfect_reconstruction(
            x in proptest::collection::vec(-100.0f64..100.0, 2..80),
            levels in 1usize..4,
            undecimated in any::<bool>(),
            db2 in any::<bool>(),
        ) {
            let filter = if db2 { Filter::db2() } else { Filter::haar() };
            let mode = if undecimated { Mode::Undecimated } else { Mode::Decimated };
            let spec = WaveletSpec::new(filter, levels, mode);
            let p = dwt_forward_padded(&x, &spec).unwrap();
            let back = dwt_inverse(&p).unwrap();
            prop_assert_eq!(back.len(), x.len());
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }

        #[test]
        fn undecimated_commutes_with_circular_shift(
            x in proptest::collection::vec(-10.0f64..10.0, 4..40),
            shift in 0usize..40,
            levels in 1usize..4,
        ) {
            let spec = WaveletSpec::haar(levels, Mode::Undecimated);
            let n = x.len();
            let shift = shift % n;
            let shifted: Vec<f64> = (0..n).map(|i| x[(i + n - shift) % n]).collect();
            let p = dwt_forward(&x, &spec).unwrap();
            let q = dwt_forward(&shifted, &spec).unwrap();
            for ((_, a), (_, b)) in p.bands().zip(q.bands()) {
                for i in 0..n {
                    prop_assert!((a[(i + n - shift) % n] - b[i]).abs() < 1e-12);
                }
            }
        }
    }
}
