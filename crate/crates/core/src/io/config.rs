//! Flat `key = value` run configuration.
//!
//! Keys are dotted (`phantom.size = 64`); a `[section]` line prefixes the
//! keys that follow it. `#` starts a comment. A `preset = pet` line anywhere
//! in the file applies the preset before the other keys.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mc::TransformConfig;
use crate::phantom::{default_structures, PhantomKind, PhantomSpec};
use crate::radon::Variant;
use crate::ridgelet::{DenoiseConfig, Domain};
use crate::shrinkage::{Selector, ThresholdPolicy};
use crate::wavelet::{Filter, Mode, WaveletSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: String,
    pub phantom: PhantomSpec,
    pub variant: Variant,
    pub angles: usize,
    pub wavelet: WaveletSpec,
    pub policy: ThresholdPolicy,
    pub domain: Domain,
    pub samples: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

/// Keys, defaults and meaning, as printed by `--help` and the README.
pub const DEFAULTS_TABLE: &str = "\
phantom.kind                  inhomogeneous   homogeneous | inhomogeneous | synthetic-sinogram
phantom.size                  64              pixels per side
phantom.background_intensity  0.05            expected counts per background pixel
phantom.structure_gain        10              structure intensity / background
phantom.peak_factor           2000            synthetic sinogram peak / background
phantom.angles                180             synthetic sinogram projections
transform.variant             rotation        rotation | gdb
transform.angles              180             projections of the rotation transform
wavelet.filter                haar            haar | db2
wavelet.levels                1
wavelet.mode                  undecimated     decimated | undecimated
shrinkage.selector            oracle          oracle | sure | fixed:<tau>
shrinkage.grid_points         51
shrinkage.grid_max            5               largest threshold in noise-scale units
shrinkage.per_band            true            one threshold per angle block (else per level)
shrinkage.angle_block         10              projections sharing a threshold
denoise.domain                image           image | sinogram
run.samples                   1000            Monte-Carlo samples
run.seed                      0
run.output_dir                out
";

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: "default".into(),
            phantom: PhantomSpec::inhomogeneous(64, 0.05, 10.0),
            variant: Variant::Rotation,
            angles: 180,
            wavelet: WaveletSpec::haar(1, Mode::Undecimated),
            policy: ThresholdPolicy::default(),
            domain: Domain::Image,
            samples: 1000,
            seed: 0,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Sinogram-domain denoising of the synthetic sinogram with three-level
    /// undecimated Haar and the SURE selector.
    pub fn pet() -> Self {
        let d = Self::default();
        let pet = DenoiseConfig::pet();
        Self {
            preset: "pet".into(),
            phantom: PhantomSpec::synthetic_sinogram(d.phantom.size, d.phantom.background_intensity, 2000.0, 180),
            wavelet: pet.wavelet,
            policy: pet.policy,
            domain: pet.domain,
            ..d
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "pet" => Some(Self::pet()),
            _ => None,
        }
    }

    pub fn denoise_config(&self) -> DenoiseConfig {
        DenoiseConfig {
            variant: self.variant,
            angles: self.angles,
            wavelet: self.wavelet.clone(),
            policy: self.policy.clone(),
            domain: self.domain,
        }
    }

    pub fn transform_config(&self, with_wavelet: bool) -> TransformConfig {
        TransformConfig {
            variant: self.variant,
            angles: self.angles,
            wavelet: with_wavelet.then(|| self.wavelet.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.phantom.validate()?;
        if self.angles == 0 {
            return Err(Error::invalid("transform.angles", "must be >= 1"));
        }
        if self.wavelet.levels == 0 {
            return Err(Error::invalid("wavelet.levels", "must be >= 1"));
        }
        if self.samples < 100 {
            return Err(Error::invalid("run.samples", format!("{} < 100", self.samples)));
        }
        self.policy.validate()
    }

    /// Set one dotted key. `line` is only used for error reporting.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("{key}: expected {what}, got {value:?}"),
        };
        let num = |what: &str| value.parse::<f64>().map_err(|_| bad(what));
        let count = |what: &str| value.parse::<usize>().map_err(|_| bad(what));
        match key {
            "preset" => {}
            "phantom.kind" => self.phantom.kind = PhantomKind::parse(value).ok_or_else(|| bad("a phantom kind"))?,
            "phantom.size" => self.phantom.size = count("an integer")?,
            "phantom.background_intensity" => self.phantom.background_intensity = num("a number")?,
            "phantom.structure_gain" => self.phantom.structure_gain = num("a number")?,
            "phantom.peak_factor" => self.phantom.peak_factor = num("a number")?,
            "phantom.angles" => self.phantom.angles = count("an integer")?,
            "transform.variant" => self.variant = Variant::parse(value).ok_or_else(|| bad("rotation or gdb"))?,
            "transform.angles" => self.angles = count("an integer")?,
            "wavelet.filter" => self.wavelet.filter = Filter::by_name(value).map_err(|_| bad("haar or db2"))?,
            "wavelet.levels" => self.wavelet.levels = count("an integer")?,
            "wavelet.mode" => self.wavelet.mode = Mode::parse(value).ok_or_else(|| bad("decimated or undecimated"))?,
            "shrinkage.selector" => {
                self.policy.selector = Selector::parse(value).ok_or_else(|| bad("oracle, sure or fixed:<tau>"))?
            }
            "shrinkage.grid_points" => self.policy.grid_points = count("an integer")?,
            "shrinkage.grid_max" => self.policy.grid_max = num("a number")?,
            "shrinkage.per_band" => self.policy.per_band = value.parse().map_err(|_| bad("true or false"))?,
            "shrinkage.angle_block" => self.policy.angle_block = count("an integer")?,
            "denoise.domain" => self.domain = Domain::parse(value).ok_or_else(|| bad("image or sinogram"))?,
            "run.samples" => self.samples = count("an integer")?,
            "run.seed" => self.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "run.output_dir" => self.output_dir = PathBuf::from(value),
            _ => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key {key:?}"),
                })
            }
        }
        Ok(())
    }

    /// The configuration as config-file text; parsing it gives `self` back.
    pub fn to_text(&self) -> String {
        let p = &self.phantom;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("preset", self.preset.clone());
        kv("phantom.kind", p.kind.name().into());
        kv("phantom.size", p.size.to_string());
        kv("phantom.background_intensity", p.background_intensity.to_string());
        kv("phantom.structure_gain", p.structure_gain.to_string());
        kv("phantom.peak_factor", p.peak_factor.to_string());
        kv("phantom.angles", p.angles.to_string());
        kv("transform.variant", self.variant.name().into());
        kv("transform.angles", self.angles.to_string());
        kv("wavelet.filter", self.wavelet.filter.name().into());
        kv("wavelet.levels", self.wavelet.levels.to_string());
        kv("wavelet.mode", self.wavelet.mode.name().into());
        let selector = match self.policy.selector {
            Selector::Fixed(t) => format!("fixed:{t}"),
            s => s.name().into(),
        };
        kv("shrinkage.selector", selector);
        kv("shrinkage.grid_points", self.policy.grid_points.to_string());
        kv("shrinkage.grid_max", self.policy.grid_max.to_string());
        kv("shrinkage.per_band", self.policy.per_band.to_string());
        kv("shrinkage.angle_block", self.policy.angle_block.to_string());
        kv("denoise.domain", self.domain.name().into());
        kv("run.samples", self.samples.to_string());
        kv("run.seed", self.seed.to_string());
        kv("run.output_dir", self.output_dir.display().to_string());
        out
    }
}

fn entries(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut section = String::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(Error::Parse {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(Error::Parse {
            line: line_no,
            message: format!("expected key = value, got {line:?}"),
        })?;
        let k = k.trim();
        let key = if section.is_empty() || k == "preset" {
            k.to_string()
        } else {
            format!("{section}.{k}")
        };
        out.push((line_no, key, v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let entries = entries(text)?;
    let mut cfg = RunConfig::default();
    for (line, key, value) in &entries {
        if key == "preset" {
            cfg = RunConfig::preset(value).ok_or(Error::Parse {
                line: *line,
                message: format!("unknown preset {value:?}"),
            })?;
        }
    }
    let mut size_or_kind_changed = false;
    for (line, key, value) in &entries {
        cfg.set(key, value, *line)?;
        size_or_kind_changed |= key == "phantom.size" || key == "phantom.kind";
    }
    if size_or_kind_changed || cfg.phantom.structures.is_empty() {
        cfg.phantom.structures = match cfg.phantom.kind {
            PhantomKind::Inhomogeneous => default_structures(cfg.phantom.size),
            _ => Vec::new(),
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&super::read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.phantom.background_intensity, 0.05);
        assert_eq!(cfg.phantom.structure_gain, 10.0);
        assert_eq!(cfg.samples, 1000);
        assert_eq!(cfg.wavelet, WaveletSpec::haar(1, Mode::Undecimated));
        for key in cfg.to_text().lines().map(|l| l.split(" = ").next().unwrap()) {
            if key != "preset" {
                assert!(DEFAULTS_TABLE.contains(key), "{key} undocumented");
            }
        }
    }

    #[test]
    fn negative_intensity_names_the_field() {
        let e = parse_config("phantom.background_intensity = -1").unwrap_err();
        match e {
            Error::Invalid { field, .. } => assert_eq!(field, "background_intensity"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pet_preset() {
        let cfg = parse_config("# PET-style run\npreset = pet\n").unwrap();
        assert_eq!(cfg.wavelet, WaveletSpec::haar(3, Mode::Undecimated));
        assert_eq!(cfg.policy.selector, Selector::Sure);
        assert_eq!(cfg.domain, Domain::Sinogram);
        assert_eq!(cfg.phantom.kind, PhantomKind::SyntheticSinogram);
        let cfg = parse_config("wavelet.levels = 2\npreset = pet\n").unwrap();
        assert_eq!(cfg.wavelet.levels, 2);
    }

    #[test]
    fn sections_and_round_trip() {
        let cfg = parse_config("[phantom]\nsize = 32\nkind = inhomogeneous\n[run]\nseed = 7\n").unwrap();
        assert_eq!(cfg.phantom.size, 32);
        assert_eq!(cfg.phantom.structures, default_structures(32));
        assert_eq!(cfg.seed, 7);
        assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
        let fixed = parse_config("shrinkage.selector = fixed:2.5").unwrap();
        assert_eq!(parse_config(&fixed.to_text()).unwrap(), fixed);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let e = parse_config("run.seed = 1\nbogus.key = 3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
        let e = parse_config("\n\nno equals sign\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = parse_config("transform.angles = many").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        assert!(matches!(parse_config("preset = ct"), Err(Error::Parse { .. })));
        assert!(matches!(parse_config("run.samples = 10"), Err(Error::Invalid { .. })));
    }
}
