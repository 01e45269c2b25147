//! Seeded Bernoulli watermarks.
//!
//! Bits come from `ChaCha8Rng::seed_from_u64(seed)`: bit `i` is one when the
//! `i`-th `f64` drawn from `[0, 1)` is below `p`. The generator is portable,
//! so a `(n, p, seed)` triple names the same bits on every platform.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Watermark {
    #[serde(skip)]
    pub bits: Vec<bool>,
    pub p: f64,
    pub seed: u64,
}

impl Watermark {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones_fraction(&self) -> f64 {
        if self.bits.is_empty() {
            return 0.0;
        }
        self.bits.iter().filter(|&&b| b).count() as f64 / self.bits.len() as f64
    }
}

pub fn gen_watermark(n: usize, p: f64, seed: u64) -> Result<Watermark> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = (0..n).map(|_| rng.gen::<f64>() < p).collect();
    Ok(Watermark { bits, p, seed })
}

/// Packs bits MSB-first behind a little-endian `u64` bit count.
pub fn encode_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = (bits.len() as u64).to_le_bytes().to_vec();
    for chunk in bits.chunks(8) {
        let mut byte = 0u8;
        for (i, &b) in chunk.iter().enumerate() {
            byte |= (b as u8) << (7 - i);
        }
        out.push(byte);
    }
    out
}

pub fn decode_bits(bytes: &[u8]) -> Result<Vec<bool>> {
    let header: [u8; 8] = bytes
        .get(..8)
        .and_then(|h| h.try_into().ok())
        .ok_or(Error::Parse {
            offset: bytes.len(),
            reason: "missing bit-count header".into(),
        })?;
    let n = u64::from_le_bytes(header) as usize;
    let body = &bytes[8..];
    if body.len() != n.div_ceil(8) {
        return Err(Error::Parse {
            offset: 8,
            reason: format!("{n} bits need {} bytes, found {}", n.div_ceil(8), body.len()),
        });
    }
    Ok((0..n).map(|i| body[i / 8] >> (7 - i % 8) & 1 == 1).collect())
}

pub fn save_bits(bits: &[bool], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_bits(bits))?;
    Ok(())
}

pub fn load_bits(path: impl AsRef<Path>) -> Result<Vec<bool>> {
    decode_bits(&fs::read(path)?)
}
