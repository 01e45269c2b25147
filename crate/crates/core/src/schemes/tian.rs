//! Tian's difference expansion on the integer average `l` and difference `h`.

use crate::imaging::PixelPair;

#[inline]
pub(crate) fn average_difference(p: PixelPair) -> (i32, i32) {
    let (x, y) = (p.x as i32, p.y as i32);
    ((x + y) >> 1, x - y)
}

/// Largest `|h'|` that keeps both reconstructed pixels inside `[0, 255]`.
#[inline]
fn headroom(l: i32) -> i32 {
    (2 * (255 - l)).min(2 * l + 1)
}

#[inline]
pub(crate) fn is_expandable(l: i32, h: i32) -> bool {
    let bound = headroom(l);
    (0..2).all(|b| (2 * h + b).abs() <= bound)
}

#[inline]
pub(crate) fn is_changeable(l: i32, h: i32) -> bool {
    let bound = headroom(l);
    let base = 2 * h.div_euclid(2);
    (0..2).all(|b| (base + b).abs() <= bound)
}

/// Rebuilds a pair from its average and (new) difference.
#[inline]
pub(crate) fn compose(l: i32, h: i32) -> PixelPair {
    let x = l + (h + 1).div_euclid(2);
    let y = l - h.div_euclid(2);
    debug_assert!((0..=255).contains(&x) && (0..=255).contains(&y), "l={l} h={h}");
    PixelPair::new(x as u8, y as u8)
}

/// Difference after embedding `bit` into an expanded pair.
#[inline]
pub(crate) fn expand(h: i32, bit: bool) -> i32 {
    2 * h + bit as i32
}

/// Difference after replacing the LSB of `h` with `bit`.
#[inline]
pub(crate) fn change(h: i32, bit: bool) -> i32 {
    2 * h.div_euclid(2) + bit as i32
}
