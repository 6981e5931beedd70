//! CSV renderings of experiment results and the run report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::csv::format_value;
use super::{atomic_write, RunConfig};
use crate::error::Result;
use crate::mc::{BandLabel, DistReport, Interval};
use crate::metrics::MetricReport;
use crate::ridgelet::{Layout, RidgeletCoeffs};
use crate::shrinkage::ThresholdRecord;
use crate::wavelet::Band;

fn push_row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

/// One row per band and statistic: `band,statistic,value,lower,upper`.
pub fn dist_report_csv(reports: &[DistReport]) -> String {
    let mut out = String::from("band,statistic,value,lower,upper\n");
    for r in reports {
        let band = r.band.name();
        let interval = |out: &mut String, name: &str, iv: &Interval| {
            push_row(
                out,
                &[
                    band.clone(),
                    name.into(),
                    format_value(iv.center()),
                    format_value(iv.lower),
                    format_value(iv.upper),
                ],
            )
        };
        let scalar = |out: &mut String, name: &str, v: f64| {
            push_row(out, &[band.clone(), name.into(), format_value(v), String::new(), String::new()])
        };
        scalar(&mut out, "samples", r.samples as f64);
        scalar(&mut out, "coefficients", r.coefficients as f64);
        interval(&mut out, "mean", &r.mean);
        interval(&mut out, "variance", &r.variance);
        interval(&mut out, "mean_variance_ratio", &r.ratio);
        interval(&mut out, "mean_difference", &r.mean_difference);
        scalar(&mut out, "max_mean_z", r.max_mean_z);
        if let Some(f) = &r.fit {
            scalar(&mut out, "fit_slope", f.slope);
            scalar(&mut out, "fit_intercept", f.intercept);
            scalar(&mut out, "fit_r_squared", f.r_squared);
        }
        if let Some(g) = &r.gof {
            scalar(&mut out, "gof_tested", g.tested as f64);
            scalar(&mut out, "gof_pass_fraction", g.pass_fraction());
        }
    }
    out
}

/// `band,intensity,variance` for every scatter point.
pub fn scatter_csv(reports: &[DistReport]) -> String {
    let mut out = String::from("band,intensity,variance\n");
    for r in reports {
        let band = r.band.name();
        for &(x, v) in &r.scatter {
            let _ = writeln!(out, "{band},{},{}", format_value(x), format_value(v));
        }
    }
    out
}

pub fn thresholds_csv(records: &[ThresholdRecord]) -> String {
    let mut out = String::from("level,first_projection,end_projection,scale,tau\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.level,
            r.projections.0,
            r.projections.1,
            format_value(r.scale),
            format_value(r.tau)
        );
    }
    out
}

/// Write one CSV per band (rows are projections) plus `pyramids.txt`
/// describing the transform. Returns the files written.
pub fn write_pyramid_bundle(dir: &Path, coeffs: &RidgeletCoeffs) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let Some(first) = coeffs.pyramids.first() else {
        return Ok(files);
    };
    let mut bands = vec![Band::Approximation(first.levels())];
    bands.extend((1..=first.levels()).map(Band::Detail));
    for band in bands {
        let (name, rows): (String, Vec<&[f64]>) = match band {
            Band::Approximation(j) => (
                BandLabel::Approximation(j).name(),
                coeffs.pyramids.iter().map(|p| p.approximation.as_slice()).collect(),
            ),
            Band::Detail(j) => (
                BandLabel::Detail(j).name(),
                coeffs.pyramids.iter().map(|p| p.detail(j)).collect(),
            ),
        };
        let width = rows.first().map_or(0, |r| r.len());
        let mut text = format!("# kind=band band={name} width={width} height={}\n", rows.len());
        for row in rows {
            let line: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
            text.push_str(&line.join(","));
            text.push('\n');
        }
        let path = dir.join(format!("band_{name}.csv"));
        atomic_write(&path, text.as_bytes())?;
        files.push(path);
    }
    let spec = &first.spec;
    let layout = match coeffs.layout {
        Layout::Radon(g) => format!("radon variant={} rows={} cols={}", g.variant().name(), g.rows(), g.cols()),
        Layout::Sinogram { width, height } => format!("sinogram width={width} height={height}"),
    };
    let text = format!(
        "layout = {layout}\nfilter = {}\nlevels = {}\nmode = {}\nprojections = {}\noriginal_length = {}\nsignal_length = {}\n",
        spec.filter.name(),
        spec.levels,
        spec.mode.name(),
        coeffs.pyramids.len(),
        first.original_length,
        first.signal_length,
    );
    let path = dir.join("pyramids.txt");
    atomic_write(&path, text.as_bytes())?;
    files.push(path);
    Ok(files)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub label: String,
    pub report: MetricReport,
}

/// Everything a subcommand produced. Timings go to their own file so the CSV
/// outputs stay byte-identical across reruns.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub command: String,
    pub config: Option<RunConfig>,
    pub timings: Vec<(String, f64)>,
    pub metrics: Vec<MetricRow>,
    pub thresholds: Vec<ThresholdRecord>,
    /// Artifact files, in the order written.
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn new(command: &str, config: Option<RunConfig>) -> Self {
        Self {
            command: command.into(),
            config,
            ..Self::default()
        }
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.timings.push((stage.into(), start.elapsed().as_secs_f64()));
        out
    }

    /// Write an artifact into `dir` and record it.
    pub fn artifact(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        atomic_write(&path, bytes)?;
        self.files.push(path.clone());
        Ok(path)
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("row,mse,ssim,psnr,dynamic_range,peak\n");
        for m in &self.metrics {
            let r = &m.report;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                m.label,
                format_value(r.mse),
                format_value(r.ssim),
                format_value(r.psnr),
                format_value(r.dynamic_range),
                format_value(r.peak)
            );
        }
        out
    }

    /// Write the config echo, metrics, thresholds, timings and finally the
    /// manifest of every file. Returns the manifest path.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf> {
        if let Some(cfg) = &self.config {
            let text = cfg.to_text();
            self.artifact(dir, "config.txt", text.as_bytes())?;
        }
        if !self.metrics.is_empty() {
            let text = self.metrics_csv();
            self.artifact(dir, "report.csv", text.as_bytes())?;
        }
        if !self.thresholds.is_empty() {
            let text = thresholds_csv(&self.thresholds);
            self.artifact(dir, "thresholds.csv", text.as_bytes())?;
        }
        let mut timings = format!("command = {}\n", self.command);
        for (stage, secs) in &self.timings {
            let _ = writeln!(timings, "{stage} = {secs:.6}");
        }
        self.artifact(dir, "timings.txt", timings.as_bytes())?;
        let manifest = dir.join("manifest.txt");
        let mut text = String::new();
        for f in self.files.iter().chain(std::iter::once(&manifest)) {
            let name = f.strip_prefix(dir).unwrap_or(f);
            let _ = writeln!(text, "{}", name.display());
        }
        atomic_write(&manifest, text.as_bytes())?;
        Ok(manifest)
    }
}
