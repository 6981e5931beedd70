//! File formats, run configuration and experiment persistence.

mod config;
mod csv;
mod pgm;
mod report;
mod svg;

pub use config::{load_config, parse_config, RunConfig, DEFAULTS_TABLE};
pub use csv::{
    format_value, read_grid_csv, read_sinogram_csv, sinogram_to_csv, write_grid_csv, write_sinogram_csv, GridCsv,
};
pub use pgm::{read_pgm, read_pgm_bytes, write_pgm, write_pgm_bytes};
pub use report::{
    dist_report_csv, scatter_csv, thresholds_csv, write_pyramid_bundle, RunReport, MetricRow,
};
pub use svg::{emit_scatter_svg, scatter_svg};

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{CountImage, IntensityImage};

/// Environment variable that replaces the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "RIDGELET_OUTPUT_DIR";

/// Output directory after applying the environment override.
pub fn resolve_output_dir(configured: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => configured.to_path_buf(),
    }
}

/// Read a whole text file; errors name the path.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::file(path, e))
}

/// Write `bytes` to a temporary sibling and rename it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::file(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::file(path, e)
    })?;
    Ok(())
}

/// An image read from disk: PGM files hold counts, CSV grids hold reals.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedImage {
    Counts(CountImage),
    Intensity(IntensityImage),
}

impl LoadedImage {
    pub fn to_intensity(&self) -> IntensityImage {
        match self {
            LoadedImage::Counts(c) => c.to_intensity(),
            LoadedImage::Intensity(i) => i.clone(),
        }
    }

    /// Counts as stored, or real values rounded to the nearest count.
    pub fn to_counts(&self) -> Result<CountImage> {
        match self {
            LoadedImage::Counts(c) => Ok(c.clone()),
            LoadedImage::Intensity(i) => CountImage::new(
                i.width(),
                i.height(),
                i.values().iter().map(|v| v.round() as u64).collect(),
            ),
        }
    }
}

/// Read a `.pgm` or `.csv` image, chosen by extension.
pub fn read_image(path: &Path) -> Result<LoadedImage> {
    match extension(path).as_deref() {
        Some("pgm") => Ok(LoadedImage::Counts(read_pgm(path)?)),
        Some("csv") => {
            let g = read_grid_csv(path)?;
            Ok(LoadedImage::Intensity(IntensityImage::new(g.width, g.height, g.values)?))
        }
        _ => Err(Error::Format(format!("unknown image extension: {}", path.display()))),
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}
