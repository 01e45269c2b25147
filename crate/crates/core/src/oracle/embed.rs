//! Reference multi-pass embedder and extractor.
//!
//! Every pass re-partitions nothing: the same disjoint pairs are transformed
//! again. The bits of a pass fill the embeddable pairs in pair order, and the
//! auxiliary data goes first:
//!
//! - Coltuc: raw flag bits, one per flagged pair. The decoder counts flagged
//!   pairs itself, so no length is stored.
//! - Tian: `len(F^C)` as 32 bits, the arithmetic-coded flags, `len(L^C)` as
//!   32 bits, then the arithmetic-coded location map over all pairs.
//!
//! The watermark fills what is left. A pass whose auxiliary data does not fit
//! is not performed and embedding stops there.

use serde::{Deserialize, Serialize};

use super::arith::{arith_decode, arith_encode};
use crate::error::{Error, Result};
use crate::imaging::{partition_pairs, reconstruct_image, residual_pixels, GrayImage, PairSequence, Pairing, PixelPair};
use crate::schemes::{AuxStreams, Scheme, SchemeGrid, SchemeKind};

/// Identifies the payload layout described in the module docs.
pub const LAYOUT_VERSION: u32 = 1;

const LENGTH_BITS: usize = 32;

/// The side information one pass produces, fixed by the cover pairs alone.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuxStreamsOwned {
    /// Flag bits in pair order.
    pub flags: Vec<bool>,
    /// Location bits for every pair; empty for schemes without a map.
    pub loc: Vec<bool>,
}

/// Output of [`embed_pass`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPass {
    pub pairs: PairSequence,
    pub aux: AuxStreamsOwned,
    /// Number of embeddable pairs, i.e. payload bits consumed.
    pub embedded: usize,
}

/// Statistics of one completed pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassStats {
    pub pass: usize,
    pub embedded_bits: usize,
    pub watermark_bits: usize,
    /// Raw flags embedded as-is (0 when flags are compressed).
    pub flag_bits: usize,
    /// Compressed flag stream including its length prefix.
    pub compressed_flag_bits: usize,
    /// Compressed location map including its length prefix.
    pub compressed_locmap_bits: usize,
    /// Flags generated by the pass, compressed or not.
    pub flag_count: usize,
    pub locmap_ones: usize,
}

impl PassStats {
    pub fn aux_bits(&self) -> usize {
        self.flag_bits + self.compressed_flag_bits + self.compressed_locmap_bits
    }
}

/// Ground truth of one multi-pass embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedRecord {
    pub scheme: String,
    pub theta_h: u16,
    pub pairing: Pairing,
    pub layout_version: u32,
    pub passes_requested: usize,
    pub passes_completed: usize,
    pub passes: Vec<PassStats>,
    /// Watermark bits embedded over all completed passes.
    pub achieved_capacity: usize,
    /// Auxiliary size of the first pass that did not fit, if any.
    pub stopped_at: Option<StoppedPass>,
    #[serde(skip)]
    pub watermarked: Option<GrayImage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppedPass {
    pub pass: usize,
    pub embeddable: usize,
    pub aux_bits: usize,
}

impl EmbedRecord {
    /// Watermark bits embedded after each completed pass, cumulatively.
    pub fn cumulative_capacity(&self) -> Vec<usize> {
        let mut acc = 0;
        self.passes
            .iter()
            .map(|s| {
                acc += s.watermark_bits;
                acc
            })
            .collect()
    }
}

/// Flags and location bits a pass over `pairs` will generate.
pub fn aux_streams(grid: &SchemeGrid, pairs: &PairSequence) -> AuxStreamsOwned {
    let mut aux = AuxStreamsOwned::default();
    let with_loc = grid.scheme().has_location_map();
    if with_loc {
        aux.loc.reserve(pairs.len());
    }
    for p in &pairs.pairs {
        let c = grid.classification(p.index());
        if let Some(f) = c.flag {
            aux.flags.push(f);
        }
        if with_loc {
            aux.loc.push(c.loc == Some(true));
        }
    }
    aux
}

/// Transforms every pair once. Embeddable pairs take the next payload bit,
/// inert pairs their null-bit transition.
pub fn embed_pass(grid: &SchemeGrid, pairs: &PairSequence, payload: &[bool]) -> Result<EmbeddedPass> {
    let aux = aux_streams(grid, pairs);
    let mut used = 0usize;
    let mut out = Vec::with_capacity(pairs.len());
    for p in &pairs.pairs {
        let i = p.index();
        let next = if grid.embeddable(i) {
            let bit = *payload.get(used).ok_or(Error::PayloadUnderrun {
                needed: used + 1,
                available: payload.len(),
            })?;
            used += 1;
            grid.next(i, bit)
        } else {
            grid.next(i, false)
        };
        out.push(PixelPair::from_index(next));
    }
    Ok(EmbeddedPass {
        pairs: pairs.with_pairs(out),
        aux,
        embedded: used,
    })
}

fn push_u32(out: &mut Vec<bool>, v: usize) {
    let v = u32::try_from(v).expect("stream length fits in 32 bits");
    out.extend((0..LENGTH_BITS).rev().map(|i| v >> i & 1 == 1));
}

fn read_u32(bits: &[bool], pos: &mut usize) -> Option<usize> {
    let s = bits.get(*pos..*pos + LENGTH_BITS)?;
    *pos += LENGTH_BITS;
    Some(s.iter().fold(0usize, |acc, &b| acc << 1 | b as usize))
}

/// The auxiliary prefix of a pass payload, with its accounting.
fn serialize_aux(scheme: Scheme, aux: &AuxStreamsOwned) -> (Vec<bool>, PassStats) {
    let mut stats = PassStats {
        pass: 0,
        embedded_bits: 0,
        watermark_bits: 0,
        flag_bits: 0,
        compressed_flag_bits: 0,
        compressed_locmap_bits: 0,
        flag_count: aux.flags.len(),
        locmap_ones: aux.loc.iter().filter(|&&b| b).count(),
    };
    match scheme.kind() {
        SchemeKind::Coltuc => {
            stats.flag_bits = aux.flags.len();
            (aux.flags.clone(), stats)
        }
        SchemeKind::Tian => {
            let cf = arith_encode(&aux.flags);
            let cl = arith_encode(&aux.loc);
            let mut out = Vec::with_capacity(2 * LENGTH_BITS + cf.len() + cl.len());
            push_u32(&mut out, cf.len());
            out.extend_from_slice(&cf);
            push_u32(&mut out, cl.len());
            out.extend_from_slice(&cl);
            stats.compressed_flag_bits = LENGTH_BITS + cf.len();
            stats.compressed_locmap_bits = LENGTH_BITS + cl.len();
            (out, stats)
        }
    }
}

/// Embeds `watermark` over up to `passes` passes, stopping early at the first
/// pass whose auxiliary data exceeds its embeddable pairs.
pub fn embed_multi(
    grid: &SchemeGrid,
    img: &GrayImage,
    pairing: Pairing,
    watermark: &[bool],
    passes: usize,
) -> Result<EmbedRecord> {
    if passes == 0 {
        return Err(Error::InvalidArgument("pass count must be at least 1".into()));
    }
    let scheme = grid.scheme();
    let residual = residual_pixels(img, pairing);
    let mut seq = partition_pairs(img, pairing);
    let mut stats = Vec::with_capacity(passes);
    let mut cursor = 0usize;
    let mut stopped_at = None;
    let mut payload = Vec::with_capacity(seq.len());
    for pass in 0..passes {
        let aux = aux_streams(grid, &seq);
        let embeddable = seq.pairs.iter().filter(|p| grid.embeddable(p.index())).count();
        let (aux_bits, mut st) = serialize_aux(scheme, &aux);
        if aux_bits.len() > embeddable {
            stopped_at = Some(StoppedPass {
                pass,
                embeddable,
                aux_bits: aux_bits.len(),
            });
            break;
        }
        let room = embeddable - aux_bits.len();
        let wm = watermark.get(cursor..cursor + room).ok_or(Error::PayloadUnderrun {
            needed: cursor + room,
            available: watermark.len(),
        })?;
        cursor += room;
        payload.clear();
        payload.extend_from_slice(&aux_bits);
        payload.extend_from_slice(wm);
        let done = embed_pass(grid, &seq, &payload)?;
        debug_assert_eq!(done.embedded, embeddable);
        st.pass = pass;
        st.embedded_bits = embeddable;
        st.watermark_bits = room;
        stats.push(st);
        seq = done.pairs;
    }
    Ok(EmbedRecord {
        scheme: scheme.kind().to_string(),
        theta_h: scheme.theta_h(),
        pairing,
        layout_version: LAYOUT_VERSION,
        passes_requested: passes,
        passes_completed: stats.len(),
        achieved_capacity: cursor,
        passes: stats,
        stopped_at,
        watermarked: Some(reconstruct_image(&seq, &residual)?),
    })
}

fn decode_err(pass: usize, pair: usize, reason: impl Into<String>) -> Error {
    Error::Decode {
        pass,
        pair,
        reason: reason.into(),
    }
}

/// Undoes one pass. Returns the previous pairs and the watermark bits of
/// the pass.
pub fn extract_pass(scheme: Scheme, pass: usize, pairs: &PairSequence) -> Result<(PairSequence, Vec<bool>)> {
    let carried: Vec<bool> = pairs
        .pairs
        .iter()
        .filter(|&&p| scheme.carries_bit(p))
        .map(|&p| scheme.carried_bit(p))
        .collect();
    let mut pos = 0usize;
    let aux = match scheme.kind() {
        SchemeKind::Coltuc => {
            let flagged = pairs.pairs.len() - carried.len();
            if flagged > carried.len() {
                return Err(decode_err(pass, 0, "more flagged pairs than carried bits"));
            }
            pos = flagged;
            AuxStreamsOwned {
                flags: carried[..flagged].to_vec(),
                loc: Vec::new(),
            }
        }
        SchemeKind::Tian => {
            let truncated = || decode_err(pass, 0, "auxiliary header runs past the carried bits");
            let len_f = read_u32(&carried, &mut pos).ok_or_else(truncated)?;
            let cf = carried.get(pos..pos + len_f).ok_or_else(truncated)?;
            pos += len_f;
            let len_l = read_u32(&carried, &mut pos).ok_or_else(truncated)?;
            let cl = carried.get(pos..pos + len_l).ok_or_else(truncated)?;
            pos += len_l;
            let loc = arith_decode(cl, pairs.len()).map_err(|e| decode_err(pass, 0, format!("location map: {e}")))?;
            let n_flags = pairs
                .pairs
                .iter()
                .zip(&loc)
                .filter(|(&p, &l)| !l && scheme.carries_bit(p))
                .count();
            let flags = arith_decode(cf, n_flags).map_err(|e| decode_err(pass, 0, format!("flags: {e}")))?;
            AuxStreamsOwned { flags, loc }
        }
    };
    let mut src = AuxStreams::new(&aux.loc, &aux.flags);
    let mut out = Vec::with_capacity(pairs.len());
    for (j, &p) in pairs.pairs.iter().enumerate() {
        let (orig, _) = scheme
            .invert(p, &mut src)
            .map_err(|e| decode_err(pass, j, e.to_string()))?;
        out.push(orig);
    }
    if src.flags_consumed() != aux.flags.len() {
        return Err(decode_err(
            pass,
            pairs.len(),
            format!("{} flags decoded, {} used", aux.flags.len(), src.flags_consumed()),
        ));
    }
    Ok((pairs.with_pairs(out), carried[pos..].to_vec()))
}

/// Recovers the cover image and the watermark from an image watermarked
/// with `passes` completed passes.
pub fn extract_and_restore(
    scheme: Scheme,
    watermarked: &GrayImage,
    pairing: Pairing,
    passes: usize,
) -> Result<(GrayImage, Vec<bool>)> {
    let residual = residual_pixels(watermarked, pairing);
    let mut seq = partition_pairs(watermarked, pairing);
    let mut parts = Vec::with_capacity(passes);
    for pass in (0..passes).rev() {
        let (prev, bits) = extract_pass(scheme, pass, &seq)?;
        parts.push(bits);
        seq = prev;
    }
    let watermark = parts.into_iter().rev().flatten().collect();
    Ok((reconstruct_image(&seq, &residual)?, watermark))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(pairs: &[(u8, u8)]) -> PairSequence {
        let data: Vec<u8> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
        partition_pairs(&GrayImage::new(data.len(), 1, data).unwrap(), Pairing::Horizontal)
    }

    fn xy(s: &PairSequence) -> Vec<(u8, u8)> {
        s.pairs.iter().map(|p| (p.x, p.y)).collect()
    }

    #[test]
    fn coltuc_pass_examples() {
        let g = Scheme::coltuc().grid();
        let out = embed_pass(&g, &seq(&[(10, 12)]), &[true]).unwrap();
        assert_eq!(xy(&out.pairs), vec![(9, 15)]);
        let out = embed_pass(&g, &seq(&[(5, 18)]), &[]).unwrap();
        assert_eq!(xy(&out.pairs), vec![(4, 18)]);
        assert_eq!(out.aux.flags, vec![true]);
        assert!(matches!(
            embed_pass(&g, &seq(&[(10, 12)]), &[]),
            Err(Error::PayloadUnderrun { .. })
        ));
    }

    #[test]
    fn tian_pass_example() {
        let g = Scheme::tian().grid();
        let out = embed_pass(&g, &seq(&[(206, 201)]), &[true]).unwrap();
        assert_eq!(xy(&out.pairs), vec![(209, 198)]);
        assert_eq!(out.aux.loc, vec![true]);
        assert!(out.aux.flags.is_empty());
    }

    #[test]
    fn coltuc_multi_pass_on_two_pixels() {
        let g = Scheme::coltuc().grid();
        let img = GrayImage::new(2, 1, vec![10, 12]).unwrap();
        let r = embed_multi(&g, &img, Pairing::Horizontal, &[true], 1).unwrap();
        assert_eq!(r.watermarked.as_ref().unwrap().data(), &[9, 15]);
        assert_eq!(r.achieved_capacity, 1);
        for second in [false, true] {
            let r = embed_multi(&g, &img, Pairing::Horizontal, &[true, second], 2).unwrap();
            assert_eq!(r.watermarked.as_ref().unwrap().data(), &[8, 14 + second as u8]);
            let (cover, wm) = extract_and_restore(g.scheme(), r.watermarked.as_ref().unwrap(), Pairing::Horizontal, 2).unwrap();
            assert_eq!(cover, img);
            assert_eq!(wm, vec![true, second]);
        }
    }

    #[test]
    fn infeasible_pass_stops_embedding() {
        let g = Scheme::coltuc().grid();
        // (5, 18) is inert with a flag and nothing can carry it.
        let img = GrayImage::new(2, 1, vec![5, 18]).unwrap();
        let r = embed_multi(&g, &img, Pairing::Horizontal, &[], 3).unwrap();
        assert_eq!((r.passes_completed, r.achieved_capacity), (0, 0));
        assert_eq!(r.watermarked.as_ref().unwrap(), &img);
        assert_eq!(r.stopped_at.unwrap().aux_bits, 1);
    }
}
