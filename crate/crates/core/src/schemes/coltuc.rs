//! Coltuc reversible contrast mapping: `(x, y) -> (2x - y, 2y - x)` with the
//! LSB of `x'` marking transformed pairs and the LSB of `y'` carrying data.

use crate::imaging::PixelPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Case {
    /// Inside the transform domain, not both odd: forward map, LSB(x') = 1.
    Transform,
    /// Both odd and decodable as such: LSB(x) = 0, data in LSB(y).
    OddOdd,
    /// Everything else: LSB(x) = 0, the true LSB(x) is saved as a flag.
    Flag,
}

#[inline]
pub(crate) fn in_domain(x: i32, y: i32) -> bool {
    (0..=255).contains(&(2 * x - y)) && (0..=255).contains(&(2 * y - x))
}

/// Odd-odd pairs whose three LSB-cleared neighbours are also transformable.
/// A non-transformable pair `q` with `q | 1 == p` would otherwise be read back
/// as an odd-odd carrier by the decoder.
#[inline]
fn odd_odd_carrier(x: i32, y: i32) -> bool {
    x & 1 == 1
        && y & 1 == 1
        && in_domain(x, y)
        && in_domain(x - 1, y)
        && in_domain(x, y - 1)
        && in_domain(x - 1, y - 1)
}

#[inline]
pub(crate) fn case(p: PixelPair) -> Case {
    let (x, y) = (p.x as i32, p.y as i32);
    if in_domain(x, y) && !(x & 1 == 1 && y & 1 == 1) {
        Case::Transform
    } else if odd_odd_carrier(x, y) {
        Case::OddOdd
    } else {
        Case::Flag
    }
}

#[inline]
pub(crate) fn forward(p: PixelPair, bit: bool) -> PixelPair {
    let (x, y) = (p.x as i32, p.y as i32);
    match case(p) {
        Case::Transform => PixelPair::new(((2 * x - y) | 1) as u8, (((2 * y - x) & !1) | bit as i32) as u8),
        Case::OddOdd => PixelPair::new(p.x & !1, (p.y & !1) | bit as u8),
        Case::Flag => PixelPair::new(p.x & !1, p.y),
    }
}

/// What the decoder can tell about a watermarked pair on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Decoded {
    /// Carrier: original pair and the embedded bit.
    Carrier(PixelPair, bool),
    /// Flagged pair: needs the saved LSB of `x` to be restored.
    Flagged,
}

#[inline]
pub(crate) fn decode(p: PixelPair) -> Decoded {
    let (x, y) = (p.x as i32, p.y as i32);
    let bit = y & 1 == 1;
    if x & 1 == 1 {
        let (a, b) = (x & !1, y & !1);
        // ceil((2a + b) / 3), ceil((a + 2b) / 3)
        let ox = (2 * a + b + 2) / 3;
        let oy = (a + 2 * b + 2) / 3;
        Decoded::Carrier(PixelPair::new(ox as u8, oy as u8), bit)
    } else if odd_odd_carrier(x | 1, y | 1) {
        Decoded::Carrier(PixelPair::new(p.x | 1, p.y | 1), bit)
    } else {
        Decoded::Flagged
    }
}
