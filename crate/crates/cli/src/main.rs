use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ridgelet_core::io::{
    dist_report_csv, emit_scatter_svg, parse_config, read_image, read_text, resolve_output_dir, scatter_csv, write_grid_csv,
    write_pgm, write_pyramid_bundle, write_sinogram_csv, MetricRow, RunConfig, RunReport, DEFAULTS_TABLE,
};
use ridgelet_core::mc::run_distribution_experiment;
use ridgelet_core::metrics::{compare, MetricReport};
use ridgelet_core::phantom::{make_phantom, sample_poisson};
use ridgelet_core::radon::{forward, Geometry};
use ridgelet_core::ridgelet::{denoise, ridgelet_forward};
use ridgelet_core::seed::derive_seed;
use ridgelet_core::shrinkage::Selector;
use ridgelet_core::{CountImage, Error, IntensityImage, Result};

#[derive(Parser)]
#[command(name = "ridgelet", version, about = "Poisson-noise ridgelet experiments")]
#[command(after_help = "Run `ridgelet help-config` for the config keys and their defaults.")]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named preset (default, pet) applied before the config file's keys.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides both the config and the RIDGELET_OUTPUT_DIR variable.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    Radon,
    Ridgelet,
}

#[derive(Subcommand)]
enum Command {
    /// Draw the phantom and one Poisson realisation of it.
    Simulate,
    /// Radon or ridgelet transform of an image (the phantom by default).
    Transform {
        #[arg(value_enum)]
        kind: TransformKind,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Monte-Carlo check of the coefficient noise model.
    VerifyDist {
        #[arg(long, value_enum, default_value = "radon")]
        transform: TransformKind,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Shrinkage denoising of a count image (a fresh simulation by default).
    Denoise {
        /// oracle, sure or fixed:<tau>
        #[arg(long)]
        selector: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Clean intensity; needed by the oracle selector when --input is given.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// MSE, SSIM and PSNR of an estimate against a reference.
    Metrics { estimate: PathBuf, reference: PathBuf },
    /// Print the config keys and their defaults.
    HelpConfig,
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut text = match &cli.config {
        Some(p) => read_text(p)?,
        None => String::new(),
    };
    if let Some(preset) = &cli.preset {
        text.push_str(&format!("\npreset = {preset}\n"));
    }
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.output_dir = match &cli.output_dir {
        Some(dir) => dir.clone(),
        None => resolve_output_dir(&cfg.output_dir),
    };
    Ok(cfg)
}

fn simulate_pair(cfg: &RunConfig) -> Result<(IntensityImage, CountImage)> {
    let clean = make_phantom(&cfg.phantom)?;
    let noisy = sample_poisson(&clean, derive_seed(cfg.seed, "simulate", 0));
    Ok((clean, noisy))
}

fn print_metrics(label: &str, m: &MetricReport) {
    println!("{label}: mse={} ssim={} psnr={}", m.mse, m.ssim, m.psnr);
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = build_config(&cli)?;
    let dir = cfg.output_dir.clone();
    let name = match &cli.command {
        Command::Simulate => "simulate",
        Command::Transform { .. } => "transform",
        Command::VerifyDist { .. } => "verify-dist",
        Command::Denoise { .. } => "denoise",
        Command::Metrics { .. } => "metrics",
        Command::HelpConfig => {
            print!("{DEFAULTS_TABLE}");
            return Ok(());
        }
    };
    match cli.command {
        Command::Simulate => {
            let mut report = RunReport::new(name, Some(cfg.clone()));
            let (clean, noisy) = report.time("simulate", || simulate_pair(&cfg))?;
            save_grid(&mut report, &dir.join("clean.csv"), &clean, "intensity")?;
            let path = dir.join("noisy.pgm");
            write_pgm(&path, &noisy)?;
            report.files.push(path);
            finish(report, &dir)
        }
        Command::Transform { kind, input } => {
            let mut report = RunReport::new(name, Some(cfg.clone()));
            let img = match &input {
                Some(p) => read_image(p)?.to_intensity(),
                None => make_phantom(&cfg.phantom)?,
            };
            match kind {
                TransformKind::Radon => {
                    let geometry = Geometry::for_image(cfg.variant, img.width(), img.height(), cfg.angles)?;
                    let sino = report.time("radon", || forward(&img, &geometry))?;
                    let path = dir.join("sinogram.csv");
                    write_sinogram_csv(&path, &sino)?;
                    report.files.push(path);
                }
                TransformKind::Ridgelet => {
                    let coeffs = report.time("ridgelet", || ridgelet_forward(&img, &cfg.denoise_config()))?;
                    report.files.extend(write_pyramid_bundle(&dir, &coeffs)?);
                }
            }
            finish(report, &dir)
        }
        Command::VerifyDist { transform, samples } => {
            if let Some(n) = samples {
                cfg.samples = n;
                cfg.validate()?;
            }
            let mut report = RunReport::new(name, Some(cfg.clone()));
            let tc = cfg.transform_config(matches!(transform, TransformKind::Ridgelet));
            let dists = report.time("experiment", || {
                run_distribution_experiment(&cfg.phantom, &tc, cfg.samples, cfg.seed)
            })?;
            report.artifact(&dir, "dist_report.csv", dist_report_csv(&dists).as_bytes())?;
            report.artifact(&dir, "scatter.csv", scatter_csv(&dists).as_bytes())?;
            for d in &dists {
                if d.scatter.is_empty() {
                    continue;
                }
                let band = d.band.name();
                let title = format!("{band} band, {} transform, {} samples", cfg.variant.name(), d.samples);
                let path = dir.join(format!("scatter_{band}.svg"));
                emit_scatter_svg(&d.scatter, d.fit.as_ref(), &title, &path)?;
                report.files.push(path);
                println!(
                    "{band}: ratio=[{:.4}, {:.4}] mean_difference=[{:.4}, {:.4}]",
                    d.ratio.lower, d.ratio.upper, d.mean_difference.lower, d.mean_difference.upper
                );
            }
            finish(report, &dir)
        }
        Command::Denoise {
            selector,
            input,
            reference,
        } => {
            if let Some(s) = selector {
                cfg.policy.selector = Selector::parse(&s).ok_or_else(|| Error::Invalid {
                    field: "selector".into(),
                    reason: format!("expected oracle, sure or fixed:<tau>, got {s:?}"),
                })?;
            }
            let mut report = RunReport::new(name, Some(cfg.clone()));
            let (noisy, clean) = match input {
                Some(p) => {
                    let noisy = read_image(&p)?.to_counts()?;
                    let clean = reference.map(|r| read_image(&r).map(|i| i.to_intensity())).transpose()?;
                    (noisy, clean)
                }
                None => {
                    let (clean, noisy) = report.time("simulate", || simulate_pair(&cfg))?;
                    save_grid(&mut report, &dir.join("clean.csv"), &clean, "intensity")?;
                    let path = dir.join("noisy.pgm");
                    write_pgm(&path, &noisy)?;
                    report.files.push(path);
                    (noisy, Some(clean))
                }
            };
            let out = report.time("denoise", || denoise(&noisy, &cfg.denoise_config(), clean.as_ref()))?;
            save_grid(&mut report, &dir.join("denoised.csv"), &out.image, "denoised")?;
            report.thresholds = out.thresholds;
            if let Some(clean) = &clean {
                for (label, img) in [("noisy", &noisy.to_intensity()), ("denoised", &out.image)] {
                    let m = compare(img, clean)?;
                    print_metrics(label, &m);
                    report.metrics.push(MetricRow {
                        label: label.into(),
                        report: m,
                    });
                }
            }
            finish(report, &dir)
        }
        Command::Metrics { estimate, reference } => {
            let mut report = RunReport::new(name, None);
            let m = compare(&read_image(&estimate)?.to_intensity(), &read_image(&reference)?.to_intensity())?;
            println!("mse={} ssim={} psnr={}", m.mse, m.ssim, m.psnr);
            report.metrics.push(MetricRow {
                label: "estimate".into(),
                report: m,
            });
            finish(report, &dir)
        }
        Command::HelpConfig => unreachable!("handled above"),
    }
}

fn save_grid(report: &mut RunReport, path: &Path, img: &IntensityImage, kind: &str) -> Result<()> {
    write_grid_csv(path, img, kind)?;
    report.files.push(path.to_path_buf());
    Ok(())
}

fn finish(report: RunReport, dir: &Path) -> Result<()> {
    let manifest = report.finish(dir)?;
    println!("manifest={}", manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: kind=usage message={first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error: kind={} message={message}", e.kind());
            ExitCode::FAILURE
        }
    }
}
