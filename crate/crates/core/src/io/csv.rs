//! Headered CSV for real-valued grids and sinograms.
//!
//! The first line is `# key=value ...` metadata; every following line is one
//! row. Values are printed with 17 significant digits so they read back
//! bit-exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::atomic_write;
use crate::error::{Error, Result};
use crate::image::IntensityImage;
use crate::radon::{Geometry, GdbGeometry, RotationGeometry, Sinogram, Variant};

pub fn format_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCsv {
    pub meta: BTreeMap<String, String>,
    pub width: usize,
    pub height: usize,
    /// Row-major values.
    pub values: Vec<f64>,
}

fn render(meta: &[(&str, String)], width: usize, values: &[f64]) -> String {
    let mut out = String::from("#");
    for (k, v) in meta {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    for row in values.chunks(width.max(1)) {
        let line: Vec<String> = row.iter().map(|&v| format_value(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_grid_csv(path: &Path, img: &IntensityImage, kind: &str) -> Result<()> {
    let meta = [
        ("kind", kind.to_string()),
        ("width", img.width().to_string()),
        ("height", img.height().to_string()),
    ];
    atomic_write(path, render(&meta, img.width(), img.values()).as_bytes())
}

fn parse_grid(text: &str) -> Result<GridCsv> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let header = header.strip_prefix('#').ok_or(Error::Parse {
        line: 1,
        message: "missing '#' metadata header".into(),
    })?;
    let mut meta = BTreeMap::new();
    for pair in header.split_whitespace() {
        let (k, v) = pair.split_once('=').ok_or(Error::Parse {
            line: 1,
            message: format!("bad metadata entry {pair:?}"),
        })?;
        meta.insert(k.to_string(), v.to_string());
    }
    let dim = |key: &str| -> Result<usize> {
        meta.get(key)
            .and_then(|v| v.parse().ok())
            .ok_or(Error::Parse {
                line: 1,
                message: format!("missing or bad {key}"),
            })
    };
    let (width, height) = (dim("width")?, dim("height")?);
    let mut values = Vec::with_capacity(width * height);
    let mut rows = 0;
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| match t.trim() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                t => t.parse::<f64>(),
            })
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        if row.len() != width {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("{} values, expected {width}", row.len()),
            });
        }
        values.extend(row);
        rows += 1;
    }
    if rows != height {
        return Err(Error::Format(format!("{rows} rows, header says {height}")));
    }
    Ok(GridCsv {
        meta,
        width,
        height,
        values,
    })
}

pub fn read_grid_csv(path: &Path) -> Result<GridCsv> {
    parse_grid(&super::read_text(path)?)
}

/// CSV text of a sinogram; the header records everything needed to rebuild
/// its geometry.
pub fn sinogram_to_csv(sino: &Sinogram) -> String {
    let mut meta = vec![("kind", "sinogram".to_string()), ("variant", sino.variant().name().to_string())];
    match sino.geometry() {
        Geometry::Rotation(g) => {
            meta.push(("image_width", g.width.to_string()));
            meta.push(("image_height", g.height.to_string()));
            meta.push(("angles", g.angles.to_string()));
        }
        Geometry::Gdb(g) => {
            meta.push(("n", g.n.to_string()));
            meta.push(("image_width", g.original_width.to_string()));
            meta.push(("image_height", g.original_height.to_string()));
        }
    }
    meta.push(("width", sino.cols().to_string()));
    meta.push(("height", sino.rows().to_string()));
    render(&meta, sino.cols(), sino.data())
}

pub fn write_sinogram_csv(path: &Path, sino: &Sinogram) -> Result<()> {
    atomic_write(path, sinogram_to_csv(sino).as_bytes())
}

pub fn read_sinogram_csv(path: &Path) -> Result<Sinogram> {
    let g = read_grid_csv(path)?;
    let get = |k: &str| -> Result<usize> {
        g.meta
            .get(k)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Format(format!("sinogram header lacks {k}")))
    };
    let variant = g
        .meta
        .get("variant")
        .and_then(|v| Variant::parse(v))
        .ok_or_else(|| Error::Format("sinogram header lacks a valid variant".into()))?;
    let geometry = match variant {
        Variant::Rotation => Geometry::Rotation(RotationGeometry::new(
            get("image_width")?,
            get("image_height")?,
            get("angles")?,
        )),
        Variant::Gdb => {
            let geometry = GdbGeometry::for_image(get("image_width")?, get("image_height")?)?;
            if geometry.n != get("n")? {
                return Err(Error::Format("gdb size does not match image size".into()));
            }
            Geometry::Gdb(geometry)
        }
    };
    if (geometry.cols(), geometry.rows()) != (g.width, g.height) {
        return Err(Error::Format("sinogram shape does not match its geometry".into()));
    }
    Sinogram::from_data(geometry, g.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radon::{drt_gdb, drt_rotation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_reals_round_trip_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let values: Vec<f64> = (0..35).map(|_| rng.random::<f64>() * 10f64.powi(rng.random_range(-12..12))).collect();
        let img = IntensityImage::new(7, 5, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        write_grid_csv(&p, &img, "intensity").unwrap();
        let back = read_grid_csv(&p).unwrap();
        assert_eq!(back.values, img.values());
        assert_eq!(back.meta["kind"], "intensity");
    }

    #[test]
    fn sinograms_round_trip_with_geometry() {
        let img = IntensityImage::new(6, 6, (0..36).map(|v| v as f64 / 7.0).collect()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for sino in [
            drt_rotation(&img, &RotationGeometry::new(6, 6, 9)),
            drt_gdb(&img).unwrap(),
        ] {
            let p = dir.path().join("s.csv");
            write_sinogram_csv(&p, &sino).unwrap();
            assert_eq!(read_sinogram_csv(&p).unwrap(), sino);
        }
    }

    #[test]
    fn malformed_files_report_lines() {
        assert!(matches!(parse_grid(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_grid("width=1 height=1\n1"), Err(Error::Parse { line: 1, .. })));
        let e = parse_grid("# width=2 height=2\n1,2\n3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = parse_grid("# width=2 height=2\n1,x\n3,4\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(matches!(parse_grid("# width=1 height=2\n1\n"), Err(Error::Format(_))));
    }
}
