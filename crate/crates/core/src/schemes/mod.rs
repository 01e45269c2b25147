//! Pixel-pair watermarking schemes.
//!
//! A scheme decides, for every pair `ξ`, whether it carries a bit (`ξ ∈ D_E`),
//! which flag bit it contributes (`f_ξ`, `None` for the null bit), which
//! location-map bit it contributes (`l_ξ`, `None` when the scheme has no map),
//! and where it moves under bit 0, bit 1 or the null transition. Everything
//! else in the crate only sees this interface, so a new pair-based scheme is
//! added by implementing [`classify`](Scheme::classify),
//! [`children`](Scheme::children) and [`invert`](Scheme::invert) for a new
//! [`SchemeKind`].

mod coltuc;
mod grid;
mod tian;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::PixelPair;

pub use grid::{SchemeGrid, StreamKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// Difference expansion with a compressed location map and compressed
    /// LSB flags.
    Tian,
    /// Reversible contrast mapping; raw LSB flags, no location map.
    Coltuc,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Tian => "tian",
            SchemeKind::Coltuc => "coltuc",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tian" => Ok(SchemeKind::Tian),
            "coltuc" | "rcm" => Ok(SchemeKind::Coltuc),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Default distortion threshold on `|x - y|`.
pub const DEFAULT_THETA_H: u16 = 255;

/// A configured scheme. Cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scheme {
    kind: SchemeKind,
    theta_h: u16,
}

/// Static facts about a scheme, recorded in every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    pub name: SchemeKind,
    pub has_location_map: bool,
    pub flag_stream_compressed: bool,
    pub theta_h: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairClassification {
    pub embeddable: bool,
    pub flag: Option<bool>,
    pub loc: Option<bool>,
}

/// Where a pair can go in one pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairChildren {
    Embed { zero: PixelPair, one: PixelPair },
    Phi(PixelPair),
}

impl PairChildren {
    pub fn is_embeddable(&self) -> bool {
        matches!(self, PairChildren::Embed { .. })
    }

    /// `T(ξ, i)`: the child under `bit`; the null bit for inert pairs.
    pub fn follow(&self, bit: bool) -> PixelPair {
        match *self {
            PairChildren::Embed { zero, one } => {
                if bit {
                    one
                } else {
                    zero
                }
            }
            PairChildren::Phi(p) => p,
        }
    }
}

/// Supplies the side information a decoder needs, in encoder order.
pub trait AuxBitSource {
    /// Location-map bit for the next pair. Called once per pair, and only for
    /// schemes with a location map.
    fn next_location_bit(&mut self) -> Option<bool>;
    /// Next saved flag bit.
    fn next_flag_bit(&mut self) -> Option<bool>;
}

/// [`AuxBitSource`] over in-memory bit vectors.
#[derive(Debug, Clone, Default)]
pub struct AuxStreams<'a> {
    loc: &'a [bool],
    flags: &'a [bool],
    loc_pos: usize,
    flag_pos: usize,
}

impl<'a> AuxStreams<'a> {
    pub fn new(loc: &'a [bool], flags: &'a [bool]) -> Self {
        Self {
            loc,
            flags,
            loc_pos: 0,
            flag_pos: 0,
        }
    }

    pub fn flags_consumed(&self) -> usize {
        self.flag_pos
    }
}

impl AuxBitSource for AuxStreams<'_> {
    fn next_location_bit(&mut self) -> Option<bool> {
        let b = self.loc.get(self.loc_pos).copied();
        self.loc_pos += 1;
        b
    }

    fn next_flag_bit(&mut self) -> Option<bool> {
        let b = self.flags.get(self.flag_pos).copied();
        self.flag_pos += 1;
        b
    }
}

impl Scheme {
    pub fn new(kind: SchemeKind, theta_h: u16) -> Result<Self> {
        if !(1..=255).contains(&theta_h) {
            return Err(Error::InvalidArgument(format!(
                "theta_h must lie in [1, 255], got {theta_h}"
            )));
        }
        Ok(Self { kind, theta_h })
    }

    pub fn tian() -> Self {
        Self {
            kind: SchemeKind::Tian,
            theta_h: DEFAULT_THETA_H,
        }
    }

    pub fn coltuc() -> Self {
        Self {
            kind: SchemeKind::Coltuc,
            theta_h: DEFAULT_THETA_H,
        }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn theta_h(&self) -> u16 {
        self.theta_h
    }

    pub fn has_location_map(&self) -> bool {
        self.kind == SchemeKind::Tian
    }

    pub fn flag_stream_compressed(&self) -> bool {
        self.kind == SchemeKind::Tian
    }

    pub fn descriptor(&self) -> SchemeDescriptor {
        SchemeDescriptor {
            name: self.kind,
            has_location_map: self.has_location_map(),
            flag_stream_compressed: self.flag_stream_compressed(),
            theta_h: self.theta_h,
        }
    }

    /// Tian pairs that are expanded (location bit 1): expandable and within
    /// the distortion threshold.
    fn tian_expands(&self, l: i32, h: i32) -> bool {
        tian::is_expandable(l, h) && h.unsigned_abs() < self.theta_h as u32
    }

    pub fn classify(&self, xi: PixelPair) -> PairClassification {
        match self.kind {
            SchemeKind::Tian => {
                let (l, h) = tian::average_difference(xi);
                let changeable = tian::is_changeable(l, h);
                let expands = changeable && self.tian_expands(l, h);
                PairClassification {
                    embeddable: changeable,
                    flag: (changeable && !expands).then_some(h & 1 == 1),
                    loc: Some(expands),
                }
            }
            SchemeKind::Coltuc => match coltuc::case(xi) {
                coltuc::Case::Transform | coltuc::Case::OddOdd => PairClassification {
                    embeddable: true,
                    flag: None,
                    loc: None,
                },
                coltuc::Case::Flag => PairClassification {
                    embeddable: false,
                    flag: Some(xi.x & 1 == 1),
                    loc: None,
                },
            },
        }
    }

    pub fn children(&self, xi: PixelPair) -> PairChildren {
        match self.kind {
            SchemeKind::Tian => {
                let (l, h) = tian::average_difference(xi);
                if !tian::is_changeable(l, h) {
                    return PairChildren::Phi(xi);
                }
                let step: fn(i32, bool) -> i32 = if self.tian_expands(l, h) {
                    tian::expand
                } else {
                    tian::change
                };
                PairChildren::Embed {
                    zero: tian::compose(l, step(h, false)),
                    one: tian::compose(l, step(h, true)),
                }
            }
            SchemeKind::Coltuc => match coltuc::case(xi) {
                coltuc::Case::Flag => PairChildren::Phi(coltuc::forward(xi, false)),
                _ => PairChildren::Embed {
                    zero: coltuc::forward(xi, false),
                    one: coltuc::forward(xi, true),
                },
            },
        }
    }

    /// Recovers the pre-transform pair and the bit it carried (`None` for the
    /// null bit). Consumes one location bit per call for schemes with a
    /// location map, and one flag bit when the pair was flagged.
    pub fn invert(
        &self,
        xi: PixelPair,
        aux: &mut impl AuxBitSource,
    ) -> Result<(PixelPair, Option<bool>)> {
        match self.kind {
            SchemeKind::Tian => {
                let loc = aux.next_location_bit().ok_or(Error::AuxExhausted)?;
                let (l, h) = tian::average_difference(xi);
                if !tian::is_changeable(l, h) {
                    if loc {
                        return Err(Error::InvalidArgument(format!(
                            "location bit set on unchangeable pair {xi}"
                        )));
                    }
                    return Ok((xi, None));
                }
                let bit = h & 1 == 1;
                let original_h = if loc {
                    h.div_euclid(2)
                } else {
                    let lsb = aux.next_flag_bit().ok_or(Error::AuxExhausted)?;
                    tian::change(h, lsb)
                };
                if loc && !self.tian_expands(l, original_h) {
                    return Err(Error::InvalidArgument(format!(
                        "location bit set on {xi}, whose contraction is not expandable"
                    )));
                }
                Ok((tian::compose(l, original_h), Some(bit)))
            }
            SchemeKind::Coltuc => match coltuc::decode(xi) {
                coltuc::Decoded::Carrier(p, bit) => Ok((p, Some(bit))),
                coltuc::Decoded::Flagged => {
                    let lsb = aux.next_flag_bit().ok_or(Error::AuxExhausted)?;
                    Ok((PixelPair::new((xi.x & !1) | lsb as u8, xi.y), None))
                }
            },
        }
    }

    /// Whether a watermarked pair carries a bit. The decoder relies on this
    /// matching [`classify`](Self::classify) of the original pair.
    pub fn carries_bit(&self, watermarked: PixelPair) -> bool {
        match self.kind {
            SchemeKind::Tian => {
                let (l, h) = tian::average_difference(watermarked);
                tian::is_changeable(l, h)
            }
            SchemeKind::Coltuc => matches!(coltuc::decode(watermarked), coltuc::Decoded::Carrier(..)),
        }
    }

    /// The bit a watermarked carrier pair holds, readable before any aux data.
    pub fn carried_bit(&self, watermarked: PixelPair) -> bool {
        match self.kind {
            SchemeKind::Tian => (watermarked.x as i32 - watermarked.y as i32) & 1 == 1,
            SchemeKind::Coltuc => watermarked.y & 1 == 1,
        }
    }

    /// Dense lookup tables over the whole pair domain.
    pub fn grid(&self) -> SchemeGrid {
        SchemeGrid::build(*self)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(x: u8, y: u8) -> PixelPair {
        PixelPair::new(x, y)
    }

    #[test]
    fn coltuc_tree_edges() {
        let s = Scheme::coltuc();
        assert!(s.classify(pp(10, 12)).embeddable);
        assert_eq!(
            s.children(pp(10, 12)),
            PairChildren::Embed {
                zero: pp(9, 14),
                one: pp(9, 15)
            }
        );
        assert_eq!(
            s.children(pp(9, 14)),
            PairChildren::Embed {
                zero: pp(5, 18),
                one: pp(5, 19)
            }
        );
        let c = s.classify(pp(5, 18));
        assert_eq!((c.embeddable, c.flag, c.loc), (false, Some(true), None));
        assert_eq!(s.children(pp(5, 18)), PairChildren::Phi(pp(4, 18)));
        // Odd-odd carrier: LSB(x) cleared, data in LSB(y).
        assert_eq!(
            s.children(pp(9, 15)),
            PairChildren::Embed {
                zero: pp(8, 14),
                one: pp(8, 15)
            }
        );
    }

    #[test]
    fn coltuc_inversions() {
        let s = Scheme::coltuc();
        let mut none = AuxStreams::default();
        assert_eq!(s.invert(pp(9, 15), &mut none).unwrap(), (pp(10, 12), Some(true)));
        let flags = [true];
        let mut aux = AuxStreams::new(&[], &flags);
        assert_eq!(s.invert(pp(4, 18), &mut aux).unwrap(), (pp(5, 18), None));
        let mut empty = AuxStreams::default();
        assert!(matches!(s.invert(pp(4, 18), &mut empty), Err(Error::AuxExhausted)));
    }

    #[test]
    fn tian_examples() {
        let s = Scheme::tian();
        assert!(!s.classify(pp(0, 255)).embeddable);
        let c = s.classify(pp(206, 201));
        assert_eq!((c.embeddable, c.flag, c.loc), (true, None, Some(true)));
        assert_eq!(s.children(pp(206, 201)).follow(true), pp(209, 198));
        let loc = [true];
        let mut aux = AuxStreams::new(&loc, &[]);
        assert_eq!(s.invert(pp(209, 198), &mut aux).unwrap(), (pp(206, 201), Some(true)));
    }

    #[test]
    fn tian_changed_pair_round_trip() {
        // l = 200, h = 100: changeable but not expandable.
        let s = Scheme::tian();
        let xi = pp(250, 150);
        let c = s.classify(xi);
        assert_eq!((c.embeddable, c.flag, c.loc), (true, Some(false), Some(false)));
        let child = s.children(xi).follow(true);
        let (loc, flags) = ([false], [false]);
        let mut aux = AuxStreams::new(&loc, &flags);
        assert_eq!(s.invert(child, &mut aux).unwrap(), (xi, Some(true)));
    }

    #[test]
    fn theta_h_limits_expansion() {
        let s = Scheme::new(SchemeKind::Tian, 4).unwrap();
        assert_eq!(s.classify(pp(100, 97)).loc, Some(true));
        assert_eq!(s.classify(pp(100, 96)).loc, Some(false));
        let c = s.classify(pp(100, 90));
        assert_eq!((c.embeddable, c.loc, c.flag), (true, Some(false), Some(false)));
        assert!(Scheme::new(SchemeKind::Tian, 0).is_err());
    }

    #[test]
    fn scheme_names_parse() {
        assert_eq!("tian".parse::<SchemeKind>().unwrap(), SchemeKind::Tian);
        assert_eq!("Coltuc".parse::<SchemeKind>().unwrap(), SchemeKind::Coltuc);
        assert!("weng".parse::<SchemeKind>().is_err());
    }
}
