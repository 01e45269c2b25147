use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{PairChildren, PairClassification, Scheme};
use crate::error::{Error, Result};
use crate::imaging::{GrayImage, PixelPair, PAIR_DOMAIN};

/// The per-pair bit `b_ξ` whose size or ones-count is being tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StreamKind {
    /// `size(i_ξ)`: 1 on `D_E`.
    #[serde(rename = "I")]
    Embed,
    /// `size(f_ξ)`: 1 on `D_F`.
    #[serde(rename = "F")]
    Flag,
    /// `f_ξ`: 1 on `D¹_F`.
    #[serde(rename = "ones_F")]
    FlagOnes,
    /// `1 - f_ξ` on `D_F`, 0 elsewhere (the inverted flag stream).
    #[serde(rename = "zeros_F")]
    FlagZeros,
    /// `l_ξ`: 1 on `D¹_L`.
    #[serde(rename = "ones_L")]
    LocOnes,
}

impl StreamKind {
    pub const ALL: [StreamKind; 5] = [
        StreamKind::Embed,
        StreamKind::Flag,
        StreamKind::FlagOnes,
        StreamKind::FlagZeros,
        StreamKind::LocOnes,
    ];

    /// The four kinds both estimators report.
    pub const ESTIMATED: [StreamKind; 4] = [
        StreamKind::Embed,
        StreamKind::Flag,
        StreamKind::FlagOnes,
        StreamKind::LocOnes,
    ];

    pub fn code(self) -> u8 {
        match self {
            StreamKind::Embed => 0,
            StreamKind::Flag => 1,
            StreamKind::FlagOnes => 2,
            StreamKind::FlagZeros => 3,
            StreamKind::LocOnes => 4,
        }
    }

    pub fn bit(self, c: &PairClassification) -> bool {
        match self {
            StreamKind::Embed => c.embeddable,
            StreamKind::Flag => c.flag.is_some(),
            StreamKind::FlagOnes => c.flag == Some(true),
            StreamKind::FlagZeros => c.flag == Some(false),
            StreamKind::LocOnes => c.loc == Some(true),
        }
    }
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamKind::Embed => "I",
            StreamKind::Flag => "F",
            StreamKind::FlagOnes => "ones_F",
            StreamKind::FlagZeros => "zeros_F",
            StreamKind::LocOnes => "ones_L",
        })
    }
}

impl FromStr for StreamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StreamKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown stream kind '{s}'")))
    }
}

/// A scheme tabulated over all 65 536 pairs.
///
/// For inert pairs both successor slots hold `ξ^φ`, so a transition is always
/// `next[bit][ξ]`.
#[derive(Debug, Clone)]
pub struct SchemeGrid {
    scheme: Scheme,
    class: Vec<PairClassification>,
    next0: Vec<u16>,
    next1: Vec<u16>,
    emb: Vec<bool>,
    /// Cells counting towards each of [`StreamKind::ESTIMATED`].
    cells: [Vec<u16>; 4],
}

impl SchemeGrid {
    pub fn build(scheme: Scheme) -> Self {
        let mut class = Vec::with_capacity(PAIR_DOMAIN);
        let mut next0 = Vec::with_capacity(PAIR_DOMAIN);
        let mut next1 = Vec::with_capacity(PAIR_DOMAIN);
        for xi in PixelPair::all() {
            class.push(scheme.classify(xi));
            let (a, b) = match scheme.children(xi) {
                PairChildren::Embed { zero, one } => (zero, one),
                PairChildren::Phi(p) => (p, p),
            };
            next0.push(a.index() as u16);
            next1.push(b.index() as u16);
        }
        let cells = StreamKind::ESTIMATED.map(|k| {
            (0..PAIR_DOMAIN)
                .filter(|&i| k.bit(&class[i]))
                .map(|i| i as u16)
                .collect()
        });
        Self {
            scheme,
            emb: class.iter().map(|c| c.embeddable).collect(),
            class,
            next0,
            next1,
            cells,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    #[inline]
    pub fn classification(&self, index: usize) -> &PairClassification {
        &self.class[index]
    }

    #[inline]
    pub fn embeddable(&self, index: usize) -> bool {
        self.class[index].embeddable
    }

    #[inline]
    pub fn next(&self, index: usize, bit: bool) -> usize {
        if bit {
            self.next1[index] as usize
        } else {
            self.next0[index] as usize
        }
    }

    /// Cells of each of [`StreamKind::ESTIMATED`], in index order.
    pub(crate) fn kind_cells(&self) -> &[Vec<u16>; 4] {
        &self.cells
    }

    pub(crate) fn successors(&self) -> (&[u16; PAIR_DOMAIN], &[u16; PAIR_DOMAIN]) {
        (
            self.next0.as_slice().try_into().expect("full grid"),
            self.next1.as_slice().try_into().expect("full grid"),
        )
    }

    pub(crate) fn embeddable_mask(&self) -> &[bool; PAIR_DOMAIN] {
        self.emb.as_slice().try_into().expect("full grid")
    }

    #[inline]
    pub fn base(&self, kind: StreamKind, index: usize) -> bool {
        kind.bit(&self.class[index])
    }

    /// `b_ξ` (or `size(b_ξ)`) as a dense 0/1 table.
    pub fn indicator(&self, kind: StreamKind) -> Vec<f64> {
        self.class.iter().map(|c| kind.bit(c) as u8 as f64).collect()
    }

    pub fn region_size(&self, kind: StreamKind) -> usize {
        self.class.iter().filter(|c| kind.bit(c)).count()
    }

    /// The region of `kind` as a 256x256 mask, white inside. Row `x`,
    /// column `y`.
    pub fn region_mask(&self, kind: StreamKind) -> GrayImage {
        let data = self
            .class
            .iter()
            .map(|c| if kind.bit(c) { 255 } else { 0 })
            .collect();
        GrayImage::new(256, 256, data).expect("256x256 mask")
    }
}
