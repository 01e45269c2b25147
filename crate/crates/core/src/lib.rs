//! Multi-pass embedding capacity estimation for pixel-pair reversible
//! watermarking.
//!
//! The crate answers "how many watermark bits fit into this cover image after
//! `P` passes of Tian difference expansion or Coltuc reversible contrast
//! mapping?" without running the embedder. Two estimators are provided:
//!
//! - [`cooc`]: advances the pairwise co-occurrence matrix of the image pass by
//!   pass, optionally re-weighting the bit probability for auxiliary data
//!   (the adaptive CAP variant).
//! - [`tree`]: tabulates per-pair expectations over the pixel-pair tree once,
//!   then answers any image with a single weighted sum.
//!
//! [`bounds`] gives an upper bound over all possible bitstreams, and
//! [`oracle`] is a complete reference embedder/extractor used to check every
//! estimate against ground truth.

pub mod bounds;
pub mod capacity;
pub mod cooc;
pub mod error;
pub mod imaging;
pub mod numeric;
pub mod oracle;
pub mod report;
pub mod schemes;
pub mod tree;

pub use error::{Error, Result};
pub use imaging::{GrayImage, Pairing, PairSequence, PixelPair};
pub use schemes::{Scheme, SchemeKind};
