//! Adaptive binary arithmetic coder.
//!
//! 32-bit integer coder with deferred carry ("bits plus follow") and an
//! order-0 adaptive model whose counts start at one each. The decoder is
//! told the symbol count; it reads past the end of the code exactly 30
//! padding bits, so any more than that means the stream was cut short.

use crate::error::{Error, Result};

const TOP: u64 = (1 << 32) - 1;
const HALF: u64 = 1 << 31;
const QUARTER: u64 = 1 << 30;
const MAX_TOTAL: u64 = 1 << 24;
const LEGAL_PADDING: usize = 30;

#[derive(Debug, Clone, Copy)]
struct Model {
    zeros: u64,
    ones: u64,
}

impl Model {
    fn new() -> Self {
        Self { zeros: 1, ones: 1 }
    }

    /// Upper end of the zero sub-interval of `[low, high]`.
    fn split(&self, low: u64, high: u64) -> u64 {
        let range = high - low + 1;
        low + range * self.zeros / (self.zeros + self.ones) - 1
    }

    fn update(&mut self, bit: bool) {
        if bit {
            self.ones += 1;
        } else {
            self.zeros += 1;
        }
        if self.zeros + self.ones > MAX_TOTAL {
            self.zeros = self.zeros.div_ceil(2);
            self.ones = self.ones.div_ceil(2);
        }
    }
}

struct BitWriter {
    out: Vec<bool>,
    pending: usize,
}

impl BitWriter {
    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        self.out.extend(std::iter::repeat_n(!bit, self.pending));
        self.pending = 0;
    }
}

pub fn arith_encode(bits: &[bool]) -> Vec<bool> {
    let mut model = Model::new();
    let (mut low, mut high) = (0u64, TOP);
    let mut w = BitWriter {
        out: Vec::with_capacity(bits.len() / 2 + 8),
        pending: 0,
    };
    for &bit in bits {
        let split = model.split(low, high);
        if bit {
            low = split + 1;
        } else {
            high = split;
        }
        loop {
            if high < HALF {
                w.emit(false);
            } else if low >= HALF {
                w.emit(true);
                low -= HALF;
                high -= HALF;
            } else if low >= QUARTER && high < HALF + QUARTER {
                w.pending += 1;
                low -= QUARTER;
                high -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
        }
        model.update(bit);
    }
    w.pending += 1;
    w.emit(low >= QUARTER);
    w.out
}

pub fn arith_decode(code: &[bool], n: usize) -> Result<Vec<bool>> {
    let mut pos = 0usize;
    let mut next = || {
        let b = code.get(pos).copied().unwrap_or(false);
        pos += 1;
        b as u64
    };
    let mut value = 0u64;
    for _ in 0..32 {
        value = (value << 1) | next();
    }
    let mut model = Model::new();
    let (mut low, mut high) = (0u64, TOP);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let split = model.split(low, high);
        let bit = value > split;
        if bit {
            low = split + 1;
        } else {
            high = split;
        }
        loop {
            if high < HALF {
            } else if low >= HALF {
                low -= HALF;
                high -= HALF;
                value -= HALF;
            } else if low >= QUARTER && high < HALF + QUARTER {
                low -= QUARTER;
                high -= QUARTER;
                value -= QUARTER;
            } else {
                break;
            }
            low <<= 1;
            high = (high << 1) | 1;
            value = (value << 1) | next();
        }
        model.update(bit);
        out.push(bit);
    }
    if pos > code.len() + LEGAL_PADDING {
        return Err(Error::TruncatedStream);
    }
    Ok(out)
}
