//! 8-bit grayscale images, binary PGM I/O and disjoint pixel-pair partitioning.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest intensity of an 8-bit image.
pub const MAX_INTENSITY: u8 = 255;

/// Number of distinct pixel pairs, `256 * 256`.
pub const PAIR_DOMAIN: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Dimension(format!(
                "{width}x{height} image needs {} pixels, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    /// Copies out the `w x h` window whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, w: usize, h: usize) -> Result<GrayImage> {
        if row + h > self.height || col + w > self.width {
            return Err(Error::Dimension(format!(
                "crop {w}x{h}+{col}+{row} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(w * h);
        for r in row..row + h {
            let start = r * self.width + col;
            data.extend_from_slice(&self.data[start..start + w]);
        }
        GrayImage::new(w, h, data)
    }

    /// Peak signal-to-noise ratio against `other`, in dB.
    pub fn psnr(&self, other: &GrayImage) -> f64 {
        let mse = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| {
                let d = a as f64 - b as f64;
                d * d
            })
            .sum::<f64>()
            / self.data.len() as f64;
        if mse == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (255.0 * 255.0 / mse).log10()
        }
    }
}

/// An ordered pair of intensities, the unit every transform operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelPair {
    pub x: u8,
    pub y: u8,
}

impl PixelPair {
    pub const fn new(x: u8, y: u8) -> Self {
        Self { x, y }
    }

    /// Packed index `x * 256 + y` into a dense 256x256 table.
    #[inline]
    pub const fn index(self) -> usize {
        ((self.x as usize) << 8) | self.y as usize
    }

    #[inline]
    pub const fn from_index(index: usize) -> Self {
        Self {
            x: (index >> 8) as u8,
            y: (index & 0xff) as u8,
        }
    }

    /// Iterates the full 256x256 domain in index order.
    pub fn all() -> impl Iterator<Item = PixelPair> {
        (0..PAIR_DOMAIN).map(PixelPair::from_index)
    }
}

impl fmt::Display for PixelPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// How the image is cut into disjoint adjacent pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// `(r, 2c)` with `(r, 2c+1)`, row-major.
    #[default]
    Horizontal,
    /// `(2r, c)` with `(2r+1, c)`, row-pair-major.
    Vertical,
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::Horizontal => "horizontal",
            Pairing::Vertical => "vertical",
        })
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "horizontal" | "h" => Ok(Pairing::Horizontal),
            "vertical" | "v" => Ok(Pairing::Vertical),
            other => Err(Error::InvalidArgument(format!("unknown pairing '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairOrigin {
    pub width: usize,
    pub height: usize,
    /// Pixels left without a partner (odd trailing column or row).
    pub residual: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSequence {
    pub pairs: Vec<PixelPair>,
    pub pairing: Pairing,
    pub origin: PairOrigin,
}

impl PairSequence {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pixel_count(&self) -> usize {
        self.origin.width * self.origin.height
    }

    /// Same partition and origin, new pair values.
    pub fn with_pairs(&self, pairs: Vec<PixelPair>) -> PairSequence {
        debug_assert_eq!(pairs.len(), self.pairs.len());
        PairSequence {
            pairs,
            pairing: self.pairing,
            origin: self.origin,
        }
    }
}

/// Splits `img` into disjoint pairs. Unpaired pixels are counted in
/// `origin.residual`; fetch their values with [`residual_pixels`].
pub fn partition_pairs(img: &GrayImage, pairing: Pairing) -> PairSequence {
    let mut pairs = Vec::with_capacity(img.pixel_count() / 2);
    let residual = for_each_pair(img, pairing, |p| pairs.push(p));
    PairSequence {
        pairs,
        pairing,
        origin: PairOrigin {
            width: img.width,
            height: img.height,
            residual,
        },
    }
}

/// Visits the pairs of [`partition_pairs`] in order without collecting them.
/// Returns the number of unpaired pixels.
pub fn for_each_pair(img: &GrayImage, pairing: Pairing, mut f: impl FnMut(PixelPair)) -> usize {
    let (w, h) = (img.width, img.height);
    match pairing {
        Pairing::Horizontal => {
            for r in 0..h {
                let row = &img.data[r * w..(r + 1) * w];
                row.chunks_exact(2).for_each(|c| f(PixelPair::new(c[0], c[1])));
            }
            (w % 2) * h
        }
        Pairing::Vertical => {
            for r in (0..h - h % 2).step_by(2) {
                let top = &img.data[r * w..(r + 1) * w];
                let bottom = &img.data[(r + 1) * w..(r + 2) * w];
                top.iter().zip(bottom).for_each(|(&a, &b)| f(PixelPair::new(a, b)));
            }
            (h % 2) * w
        }
    }
}

/// Values of the pixels [`partition_pairs`] leaves unpaired, in raster order.
pub fn residual_pixels(img: &GrayImage, pairing: Pairing) -> Vec<u8> {
    let (w, h) = (img.width, img.height);
    match pairing {
        Pairing::Horizontal if w % 2 == 1 => (0..h).map(|r| img.data[r * w + w - 1]).collect(),
        Pairing::Vertical if h % 2 == 1 => img.data[(h - 1) * w..].to_vec(),
        _ => Vec::new(),
    }
}

/// Inverse of [`partition_pairs`]: places the pairs and the residual pixels
/// back at their raster positions.
pub fn reconstruct_image(seq: &PairSequence, residual: &[u8]) -> Result<GrayImage> {
    let PairOrigin {
        width: w,
        height: h,
        residual: n_res,
    } = seq.origin;
    if residual.len() != n_res {
        return Err(Error::Dimension(format!(
            "expected {n_res} residual pixels, got {}",
            residual.len()
        )));
    }
    let expected_pairs = match seq.pairing {
        Pairing::Horizontal => (w / 2) * h,
        Pairing::Vertical => w * (h / 2),
    };
    if seq.pairs.len() != expected_pairs {
        return Err(Error::Dimension(format!(
            "{w}x{h} {} partition has {expected_pairs} pairs, got {}",
            seq.pairing,
            seq.pairs.len()
        )));
    }
    let mut data = vec![0u8; w * h];
    match seq.pairing {
        Pairing::Horizontal => {
            let per_row = w / 2;
            for (i, p) in seq.pairs.iter().enumerate() {
                let (r, c) = (i / per_row, 2 * (i % per_row));
                data[r * w + c] = p.x;
                data[r * w + c + 1] = p.y;
            }
            for (r, &v) in residual.iter().enumerate() {
                data[r * w + w - 1] = v;
            }
        }
        Pairing::Vertical => {
            for (i, p) in seq.pairs.iter().enumerate() {
                let (r, c) = (2 * (i / w), i % w);
                data[r * w + c] = p.x;
                data[(r + 1) * w + c] = p.y;
            }
            if !residual.is_empty() {
                data[(h - 1) * w..].copy_from_slice(residual);
            }
        }
    }
    GrayImage::new(w, h, data)
}

/// Parses a binary (`P5`) PGM with maxval 255. Header comments are allowed.
pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::Parse {
            offset: 0,
            reason: "missing P5 magic".into(),
        });
    }
    cur.pos = 2;
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedFormat(format!(
            "maxval {maxval} at byte {maxval_at}; only 8-bit (255) images are supported"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(Error::Parse {
                offset: cur.pos,
                reason: "expected whitespace before raster".into(),
            })
        }
    }
    let need = width * height;
    let raster = &bytes[cur.pos..];
    if raster.len() < need {
        return Err(Error::Parse {
            offset: bytes.len(),
            reason: format!("raster truncated: need {need} bytes, have {}", raster.len()),
        });
    }
    GrayImage::new(width, height, raster[..need].to_vec()).map_err(|e| Error::Parse {
        offset: 2,
        reason: e.to_string(),
    })
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_blank(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_blank();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse {
                offset: start,
                reason: format!("expected {what}"),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                offset: start,
                reason: format!("{what} out of range"),
            })
    }
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    parse_pgm(&fs::read(path)?)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(img))?;
    Ok(())
}
