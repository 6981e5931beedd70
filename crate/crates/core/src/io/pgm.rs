//! Binary (P5) PGM writer; P5 and ASCII (P2) reader.

use std::fs;
use std::path::Path;

use super::atomic_write;
use crate::error::{Error, Result};
use crate::image::CountImage;

/// Encode as P5 with the smallest 8- or 16-bit maxval covering the data.
pub fn write_pgm_bytes(img: &CountImage) -> Result<Vec<u8>> {
    let peak = img.values().iter().copied().max().unwrap_or(0);
    if peak > 65535 {
        return Err(Error::PgmOverflow { value: peak });
    }
    let maxval = peak.max(1);
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    if maxval < 256 {
        out.extend(img.values().iter().map(|&v| v as u8));
    } else {
        for &v in img.values() {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
    }
    Ok(out)
}

pub fn write_pgm(path: &Path, img: &CountImage) -> Result<()> {
    atomic_write(path, &write_pgm_bytes(img)?)
}

/// Whitespace-separated header tokens, skipping `#` comments.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn token(&mut self) -> Result<&str> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.bytes.get(self.pos) == Some(&b'#') {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| Error::Format("non-ASCII PGM header".into()))
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        let t = self.token()?;
        t.parse().map_err(|_| Error::Format(format!("bad PGM {what}: {t:?}")))
    }
}

pub fn read_pgm_bytes(bytes: &[u8]) -> Result<CountImage> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token()?.to_string();
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} not in 1..=65535")));
    }
    let n = width * height;
    let values: Vec<u64> = match magic.as_str() {
        "P5" => {
            // Exactly one whitespace byte separates the header from the raster.
            let data = &bytes[(h.pos + 1).min(bytes.len())..];
            let size = if maxval < 256 { 1 } else { 2 };
            if data.len() < n * size {
                return Err(Error::Format(format!("PGM raster has {} bytes, need {}", data.len(), n * size)));
            }
            if size == 1 {
                data[..n].iter().map(|&b| b as u64).collect()
            } else {
                data[..2 * n].chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as u64).collect()
            }
        }
        "P2" => (0..n).map(|_| h.number("sample").map(|v| v as u64)).collect::<Result<_>>()?,
        other => return Err(Error::Format(format!("unsupported PGM magic {other:?}"))),
    };
    if let Some(&v) = values.iter().find(|&&v| v > maxval as u64) {
        return Err(Error::Format(format!("PGM sample {v} exceeds maxval {maxval}")));
    }
    CountImage::new(width, height, values)
}

pub fn read_pgm(path: &Path) -> Result<CountImage> {
    read_pgm_bytes(&fs::read(path).map_err(|e| Error::file(path, e))?)
}
