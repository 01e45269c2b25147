//! Pairwise co-occurrence matrix and its pass-by-pass evolution.
//!
//! `C_k(ξ)` is the expected number of image pairs sitting at `ξ` after `k`
//! passes. One pass moves the mass of every embeddable `ξ` to `ξ⁰` and `ξ¹`
//! in proportion `1 - p : p`, and the mass of every inert `ξ` to `ξ^φ`.
//! Stream sizes of pass `k` are sums of `C_k` over the matching regions.

use std::cell::RefCell;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::capacity;
use crate::error::{Error, Result};
use crate::imaging::{for_each_pair, GrayImage, PairSequence, Pairing, PixelPair, PAIR_DOMAIN};
use crate::numeric::CompensatedSum;
use crate::schemes::{SchemeGrid, StreamKind};

/// Sparse 256x256 tally, entries sorted by packed pair index.
#[derive(Debug, Clone, PartialEq)]
pub struct CoocMatrix {
    entries: Vec<(u16, f64)>,
    total: f64,
}

impl CoocMatrix {
    /// Builds from explicit `(pair, count)` entries. Duplicate pairs add up.
    pub fn from_entries(entries: impl IntoIterator<Item = (PixelPair, f64)>) -> Result<Self> {
        let mut dense = vec![0.0; PAIR_DOMAIN];
        for (p, c) in entries {
            if c < 0.0 || !c.is_finite() {
                return Err(Error::InvalidArgument(format!("count {c} at {p} is not a finite non-negative value")));
            }
            dense[p.index()] += c;
        }
        Ok(Self::from_dense(&dense))
    }

    /// Collects the non-zero cells of a dense table.
    pub fn from_dense(dense: &[f64]) -> Self {
        assert_eq!(dense.len(), PAIR_DOMAIN);
        let entries: Vec<(u16, f64)> = dense
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (i as u16, c))
            .collect();
        let total = entries.iter().map(|e| e.1).collect::<CompensatedSum>().value();
        Self { entries, total }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Number of non-zero cells.
    pub fn support(&self) -> usize {
        self.entries.len()
    }

    /// Support cells off the main diagonal.
    pub fn off_diagonal_support(&self) -> usize {
        self.entries
            .iter()
            .filter(|(i, _)| {
                let p = PixelPair::from_index(*i as usize);
                p.x != p.y
            })
            .count()
    }

    pub fn get(&self, p: PixelPair) -> f64 {
        let key = p.index() as u16;
        self.entries
            .binary_search_by_key(&key, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// `(pair, count)` in ascending pair-index order.
    pub fn iter(&self) -> impl Iterator<Item = (PixelPair, f64)> + '_ {
        self.entries
            .iter()
            .map(|&(i, c)| (PixelPair::from_index(i as usize), c))
    }

    pub(crate) fn raw_entries(&self) -> &[(u16, f64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; PAIR_DOMAIN];
        for &(i, c) in &self.entries {
            d[i as usize] = c;
        }
        d
    }

    /// One `x y count` line per non-zero cell.
    pub fn to_triplets(&self) -> String {
        let mut s = String::new();
        for (p, c) in self.iter() {
            writeln!(s, "{} {} {}", p.x, p.y, c).unwrap();
        }
        s
    }

    pub fn parse_triplets(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::InvalidArgument(format!("line {}: expected 'x y count'", n + 1));
            let mut it = line.split_whitespace();
            let x: u8 = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let y: u8 = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let c: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            if it.next().is_some() {
                return Err(bad());
            }
            entries.push((PixelPair::new(x, y), c));
        }
        Self::from_entries(entries)
    }
}

/// `C_0(ξ) = Σ_j I(ξ = ξ_j)`.
pub fn build_cooc(seq: &PairSequence) -> Result<CoocMatrix> {
    if seq.is_empty() {
        return Err(Error::EmptyPairs);
    }
    let mut counts = Scratch::<u32>::zeroed();
    for p in &seq.pairs {
        counts[p.index()] += 1;
    }
    Ok(from_counts(&counts, seq.len()))
}

/// Keeps the cells passing `keep`, in index order. Branch-free: the support
/// is scattered over the grid, so a filter would mispredict on most cells.
fn compact<T>(dense: &[T], keep: impl Fn(&T) -> bool, entry: impl Fn(usize, &T) -> (u16, f64)) -> Vec<(u16, f64)> {
    let support = dense.iter().filter(|v| keep(v)).count();
    let mut out = vec![(0u16, 0.0); support + 1];
    let mut len = 0;
    for (i, v) in dense.iter().enumerate() {
        out[len] = entry(i, v);
        len += usize::from(keep(v));
    }
    out.truncate(support);
    out
}

fn from_counts(counts: &[u32], n: usize) -> CoocMatrix {
    let entries = compact(counts, |&c| c != 0, |i, &c| (i as u16, f64::from(c)));
    CoocMatrix { entries, total: n as f64 }
}

/// Everything the estimators need to know about a cover image.
#[derive(Debug, Clone)]
pub struct ImageStats {
    pub cooc: CoocMatrix,
    pub pairing: Pairing,
    pub pixel_count: usize,
    pub residual_pixels: usize,
}

impl ImageStats {
    /// Counts pairs straight from the pixels without materializing them.
    pub fn from_image(img: &GrayImage, pairing: Pairing) -> Result<Self> {
        let mut counts = Scratch::<u32>::zeroed();
        let mut n = 0usize;
        let residual = for_each_pair(img, pairing, |p| {
            counts[p.index()] += 1;
            n += 1;
        });
        if n == 0 {
            return Err(Error::EmptyPairs);
        }
        Ok(Self {
            cooc: from_counts(&counts, n),
            pairing,
            pixel_count: img.pixel_count(),
            residual_pixels: residual,
        })
    }

    /// `N`, the number of pairs.
    pub fn pair_count(&self) -> f64 {
        self.cooc.total()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")))
    }
}

/// One pass of the update: `C_{k+1}` from `C_k` at bit probability `p`.
pub fn advance(grid: &SchemeGrid, c: &CoocMatrix, p: f64) -> Result<CoocMatrix> {
    check_probability(p)?;
    // A cell receives at most a handful of contributions, so plain sums
    // lose nothing a compensated one would keep.
    let mut acc = Scratch::<f64>::zeroed();
    for &(i, mass) in &c.entries {
        let i = i as usize;
        // Inert pairs have both successors at ξ^φ; a zero weight on the
        // second keeps the loop free of branches.
        let q = if grid.embeddable(i) { p } else { 0.0 };
        acc[grid.next(i, false)] += (1.0 - q) * mass;
        acc[grid.next(i, true)] += q * mass;
    }
    let entries = compact(&acc, |&v| v != 0.0, |i, &v| (i as u16, v));
    // Mass moves, it is never created or destroyed.
    Ok(CoocMatrix {
        entries,
        total: c.total,
    })
}

/// Dense variant of [`advance`] over the full 65 536-cell grid.
pub fn advance_dense(grid: &SchemeGrid, c: &[f64], p: f64) -> Result<Vec<f64>> {
    check_probability(p)?;
    if c.len() != PAIR_DOMAIN {
        return Err(Error::InvalidArgument(format!("dense matrix has {} cells", c.len())));
    }
    let mut out = vec![0.0; PAIR_DOMAIN];
    advance_into(grid, c, p, &mut out);
    Ok(out)
}

pub fn advance_into(grid: &SchemeGrid, src: &[f64], p: f64, dst: &mut [f64]) {
    // Fixed-size views let the u16 successor indices go unchecked.
    let src: &[f64; PAIR_DOMAIN] = src.try_into().expect("dense source");
    let dst: &mut [f64; PAIR_DOMAIN] = dst.try_into().expect("dense target");
    let (next0, next1) = grid.successors();
    let emb = grid.embeddable_mask();
    dst.fill(0.0);
    for i in 0..PAIR_DOMAIN {
        let mass = src[i];
        // Inert cells have both successors at ξ^φ; a zero weight on the
        // second keeps the loop free of branches.
        let q = if emb[i] { p } else { 0.0 };
        dst[next0[i] as usize] += (1.0 - q) * mass;
        dst[next1[i] as usize] += q * mass;
    }
}

fn tally_dense(grid: &SchemeGrid, c: &[f64], k: usize, total: f64) -> StageTallies {
    let c: &[f64; PAIR_DOMAIN] = c.try_into().expect("dense matrix");
    let acc = grid.kind_cells().each_ref().map(|cells| {
        // Independent lanes break the add chain.
        let mut lanes = [0.0; 4];
        let chunks = cells.chunks_exact(4);
        let rest: f64 = chunks.remainder().iter().map(|&i| c[i as usize]).sum();
        for q in chunks {
            for (l, &i) in lanes.iter_mut().zip(q) {
                *l += c[i as usize];
            }
        }
        lanes.iter().sum::<f64>() + rest
    });
    StageTallies {
        k,
        size_i: acc[0],
        size_f: acc[1],
        ones_f: acc[2],
        ones_l: acc[3],
        size_l: if grid.scheme().has_location_map() { total } else { 0.0 },
    }
}

/// A zeroed grid-sized buffer drawn from a per-thread pool. Fresh
/// allocations of this size come straight from the OS and fault in page by
/// page, which costs about as much as a whole estimator stage; the pool
/// keeps repeated estimates from paying that again.
#[derive(Debug)]
struct Scratch<T: Pooled>(Vec<T>);

trait Pooled: Copy + Default + 'static {
    fn pool() -> &'static std::thread::LocalKey<RefCell<Vec<Vec<Self>>>>;
}

thread_local! {
    static F64_POOL: RefCell<Vec<Vec<f64>>> = const { RefCell::new(Vec::new()) };
    static U32_POOL: RefCell<Vec<Vec<u32>>> = const { RefCell::new(Vec::new()) };
}

impl Pooled for f64 {
    fn pool() -> &'static std::thread::LocalKey<RefCell<Vec<Vec<f64>>>> {
        &F64_POOL
    }
}

impl Pooled for u32 {
    fn pool() -> &'static std::thread::LocalKey<RefCell<Vec<Vec<u32>>>> {
        &U32_POOL
    }
}

const POOL_CAP: usize = 4;

impl<T: Pooled> Scratch<T> {
    fn zeroed() -> Self {
        match T::pool().with(|p| p.borrow_mut().pop()) {
            Some(mut v) => {
                v.fill(T::default());
                Self(v)
            }
            None => Self(vec![T::default(); PAIR_DOMAIN]),
        }
    }
}

impl<T: Pooled> Clone for Scratch<T> {
    fn clone(&self) -> Self {
        let mut s = Self::zeroed();
        s.0.copy_from_slice(&self.0);
        s
    }
}

impl<T: Pooled> Drop for Scratch<T> {
    fn drop(&mut self) {
        let v = std::mem::take(&mut self.0);
        // The pool may already be gone while the thread shuts down.
        let _ = T::pool().try_with(|p| {
            let mut p = p.borrow_mut();
            if p.len() < POOL_CAP {
                p.push(v);
            }
        });
    }
}

impl<T: Pooled> std::ops::Deref for Scratch<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T: Pooled> std::ops::DerefMut for Scratch<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

/// Stream sizes and ones-counts of one pass.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTallies {
    pub k: usize,
    /// `size(I_k)`: mass on embeddable pairs.
    pub size_i: f64,
    /// `size(F_k)`
    pub size_f: f64,
    /// `ones(F_k)`
    pub ones_f: f64,
    /// `ones(L_k)`
    pub ones_l: f64,
    /// `size(L_k)`: `N` for schemes with a location map, else 0.
    pub size_l: f64,
}

impl StageTallies {
    pub fn get(&self, kind: StreamKind) -> f64 {
        match kind {
            StreamKind::Embed => self.size_i,
            StreamKind::Flag => self.size_f,
            StreamKind::FlagOnes => self.ones_f,
            StreamKind::FlagZeros => self.size_f - self.ones_f,
            StreamKind::LocOnes => self.ones_l,
        }
    }
}

pub fn tally(grid: &SchemeGrid, c: &CoocMatrix) -> StageTallies {
    tally_at(grid, c, 0)
}

fn tally_at(grid: &SchemeGrid, c: &CoocMatrix, k: usize) -> StageTallies {
    let mut i_ = CompensatedSum::default();
    let mut f = CompensatedSum::default();
    let mut f1 = CompensatedSum::default();
    let mut l1 = CompensatedSum::default();
    for &(idx, mass) in &c.entries {
        let cl = grid.classification(idx as usize);
        if cl.embeddable {
            i_.add(mass);
        }
        if let Some(bit) = cl.flag {
            f.add(mass);
            if bit {
                f1.add(mass);
            }
        }
        if cl.loc == Some(true) {
            l1.add(mass);
        }
    }
    StageTallies {
        k,
        size_i: i_.value(),
        size_f: f.value(),
        ones_f: f1.value(),
        ones_l: l1.value(),
        size_l: if grid.scheme().has_location_map() {
            c.total
        } else {
            0.0
        },
    }
}

/// Walks the passes one at a time, advancing only when the next stage is
/// asked for. Mass spreads over most of the grid within a few passes, so
/// the state is kept dense in two buffers that swap each pass.
#[derive(Debug, Clone)]
pub struct CoocStepper<'g> {
    grid: &'g SchemeGrid,
    c: Scratch<f64>,
    spare: Scratch<f64>,
    total: f64,
    p_w: f64,
    adaptive: bool,
    k: usize,
    pending: Option<f64>,
}

/// One stage as produced by [`CoocStepper`].
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub tallies: StageTallies,
    /// Probability the stage is advanced with.
    pub p: f64,
    pub warning: Option<String>,
}

impl<'g> CoocStepper<'g> {
    /// Fixed `p` when `adaptive` is false, CAP probabilities otherwise.
    pub fn new(grid: &'g SchemeGrid, c0: &CoocMatrix, p_w: f64, adaptive: bool) -> Result<Self> {
        check_probability(p_w)?;
        let mut c = Scratch::zeroed();
        for &(i, m) in &c0.entries {
            c[i as usize] = m;
        }
        Ok(Self {
            grid,
            c,
            spare: Scratch::zeroed(),
            total: c0.total,
            p_w,
            adaptive,
            k: 0,
            pending: None,
        })
    }

    pub fn next_stage(&mut self) -> Result<Step> {
        if let Some(p) = self.pending.take() {
            advance_into(self.grid, &self.c, p, &mut self.spare);
            std::mem::swap(&mut self.c, &mut self.spare);
            self.k += 1;
        }
        let t = tally_dense(self.grid, &self.c, self.k, self.total);
        let (p, warning) = if self.adaptive {
            let (p, clamped) = adaptive_probability(self.grid, &t, self.p_w);
            let w = clamped.then(|| {
                format!(
                    "stage {}: auxiliary payload exceeds embeddable mass; p_k clamped to {p}",
                    self.k
                )
            });
            (p, w)
        } else {
            (self.p_w, None)
        };
        self.pending = Some(p);
        Ok(Step {
            tallies: t,
            p,
            warning,
        })
    }

    /// The matrix of the most recent stage.
    pub fn matrix(&self) -> CoocMatrix {
        CoocMatrix {
            entries: compact(&self.c, |&v| v != 0.0, |i, &v| (i as u16, v)),
            total: self.total,
        }
    }
}

/// Tallies for passes `0..passes` at a fixed bit probability.
pub fn run_fixed_p(grid: &SchemeGrid, c0: &CoocMatrix, p: f64, passes: usize) -> Result<Vec<StageTallies>> {
    check_passes(passes)?;
    let mut s = CoocStepper::new(grid, c0, p, false)?;
    (0..passes).map(|_| Ok(s.next_stage()?.tallies)).collect()
}

fn check_passes(passes: usize) -> Result<()> {
    if passes == 0 {
        Err(Error::InvalidArgument("pass count must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Output of the adaptive-probability run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapRun {
    pub tallies: Vec<StageTallies>,
    /// Bit probability `p_k` used to advance out of each stage.
    pub p_sequence: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Probability of a one in the embedded stream of a stage, given the
/// watermark probability and the estimated auxiliary payload.
///
/// Compressed streams are taken as balanced; raw flags contribute their
/// estimated ones. When nothing is embeddable the watermark probability is
/// returned. The second value reports whether the raw mix left `[0, 1]`.
pub fn adaptive_probability(grid: &SchemeGrid, t: &StageTallies, p_w: f64) -> (f64, bool) {
    if t.size_i <= 0.0 {
        return (p_w, false);
    }
    let aux = capacity::aux_sizes(grid.scheme(), t);
    let size_a = aux.total();
    let p_a = if size_a > 0.0 {
        (aux.raw_flag_ones + 0.5 * (aux.compressed_loc + aux.compressed_flag)) / size_a
    } else {
        0.0
    };
    let p_k = ((t.size_i - size_a) * p_w + size_a * p_a) / t.size_i;
    let clamped = p_k.clamp(0.0, 1.0);
    (clamped, clamped != p_k)
}

/// Co-occurrence iteration with a per-stage bit probability that accounts
/// for the auxiliary data mixed into the watermark.
pub fn run_cap(grid: &SchemeGrid, c0: &CoocMatrix, p_w: f64, passes: usize) -> Result<CapRun> {
    check_passes(passes)?;
    let mut s = CoocStepper::new(grid, c0, p_w, true)?;
    let mut run = CapRun {
        tallies: Vec::with_capacity(passes),
        p_sequence: Vec::with_capacity(passes),
        warnings: Vec::new(),
    };
    for _ in 0..passes {
        let step = s.next_stage()?;
        run.tallies.push(step.tallies);
        run.p_sequence.push(step.p);
        run.warnings.extend(step.warning);
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::partition_pairs;
    use crate::schemes::Scheme;

    fn pp(x: u8, y: u8) -> PixelPair {
        PixelPair::new(x, y)
    }

    fn single(p: PixelPair, c: f64) -> CoocMatrix {
        CoocMatrix::from_entries([(p, c)]).unwrap()
    }

    #[test]
    fn builds_counts() {
        let seq = partition_pairs(
            &GrayImage::new(6, 1, vec![10, 12, 10, 12, 9, 14]).unwrap(),
            Pairing::Horizontal,
        );
        let c = build_cooc(&seq).unwrap();
        assert_eq!(c.get(pp(10, 12)), 2.0);
        assert_eq!(c.get(pp(9, 14)), 1.0);
        assert_eq!(c.total(), 3.0);
        assert_eq!(c.support(), 2);
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let seq = partition_pairs(&GrayImage::new(1, 3, vec![1, 2, 3]).unwrap(), Pairing::Horizontal);
        assert!(matches!(build_cooc(&seq), Err(Error::EmptyPairs)));
    }

    #[test]
    fn advance_splits_and_moves_mass() {
        let g = Scheme::coltuc().grid();
        let c1 = advance(&g, &single(pp(10, 12), 1.0), 0.5).unwrap();
        assert_eq!(c1.get(pp(9, 14)), 0.5);
        assert_eq!(c1.get(pp(9, 15)), 0.5);
        let c1 = advance(&g, &single(pp(5, 18), 3.0), 0.3).unwrap();
        assert_eq!(c1.get(pp(4, 18)), 3.0);
        assert_eq!(c1.support(), 1);
        let c1 = advance(&g, &single(pp(10, 12), 1.0), 0.0).unwrap();
        assert_eq!((c1.get(pp(9, 14)), c1.support()), (1.0, 1));
        assert!(advance(&g, &c1, 1.5).is_err());
        assert!(advance(&g, &c1, -0.1).is_err());
    }

    #[test]
    fn tally_examples() {
        let g = Scheme::coltuc().grid();
        let t = tally(&g, &single(pp(10, 12), 1.0));
        assert_eq!((t.size_i, t.size_f), (1.0, 0.0));
        let t = tally(&g, &single(pp(5, 18), 2.0));
        assert_eq!((t.size_i, t.size_f, t.ones_f, t.size_l), (0.0, 2.0, 2.0, 0.0));
        let t = tally(&Scheme::tian().grid(), &single(pp(0, 255), 4.0));
        assert_eq!((t.size_i, t.size_f, t.ones_f, t.ones_l, t.size_l), (0.0, 0.0, 0.0, 0.0, 4.0));
    }

    #[test]
    fn fixed_p_follows_tree() {
        let g = Scheme::coltuc().grid();
        let c0 = single(pp(10, 12), 1.0);
        let ts = run_fixed_p(&g, &c0, 0.6, 4).unwrap();
        let sizes: Vec<f64> = ts.iter().map(|t| t.size_i).collect();
        assert_eq!(sizes.len(), 4);
        assert_eq!(sizes[0], 1.0);
        assert_eq!(sizes[1], 1.0);
        assert!((sizes[2] - 0.6).abs() < 1e-15);
        assert_eq!(sizes[3], 0.0);
        assert_eq!(run_fixed_p(&g, &c0, 0.6, 1).unwrap(), vec![tally(&g, &c0)]);
        assert!(run_fixed_p(&g, &c0, 0.6, 0).is_err());
        let c1 = advance(&g, &c0, 1.0).unwrap();
        assert_eq!((c1.get(pp(9, 15)), c1.support()), (1.0, 1));
    }

    #[test]
    fn cap_single_stage_uses_c0() {
        let g = Scheme::coltuc().grid();
        let c0 = CoocMatrix::from_entries([(pp(10, 12), 90.0), (pp(5, 18), 10.0)]).unwrap();
        let run = run_cap(&g, &c0, 0.5, 1).unwrap();
        assert_eq!(run.p_sequence.len(), 1);
        // 10 raw flag bits, all ones: p_0 = (80 * 0.5 + 10 * 1.0) / 90.
        assert!((run.p_sequence[0] - 50.0 / 90.0).abs() < 1e-15);
    }

    #[test]
    fn triplet_text_round_trip() {
        let c = CoocMatrix::from_entries([(pp(1, 2), 3.0), (pp(200, 7), 0.25)]).unwrap();
        let back = CoocMatrix::parse_triplets(&c.to_triplets()).unwrap();
        assert_eq!(back, c);
        assert!(CoocMatrix::parse_triplets("1 2").is_err());
        assert!(CoocMatrix::from_entries([(pp(0, 0), -1.0)]).is_err());
    }

    #[test]
    fn direct_counts_match_pair_sequence() {
        let data: Vec<u8> = (0..35u32).map(|i| (i * 37 % 11) as u8).collect();
        let img = GrayImage::new(7, 5, data).unwrap();
        for pairing in [Pairing::Horizontal, Pairing::Vertical] {
            let stats = ImageStats::from_image(&img, pairing).unwrap();
            let seq = partition_pairs(&img, pairing);
            assert_eq!(stats.cooc, build_cooc(&seq).unwrap());
            assert_eq!(stats.residual_pixels, seq.origin.residual);
        }
    }

    #[test]
    fn dense_stepper_matches_sparse_advance() {
        let g = Scheme::tian().grid();
        let c0 = CoocMatrix::from_entries([(pp(100, 97), 3.0), (pp(40, 41), 2.0), (pp(7, 200), 1.0)]).unwrap();
        let mut s = CoocStepper::new(&g, &c0, 0.3, false).unwrap();
        let mut c = c0.clone();
        for _ in 0..4 {
            let step = s.next_stage().unwrap();
            assert_eq!(s.matrix(), c);
            let t = tally(&g, &c);
            for kind in StreamKind::ESTIMATED {
                assert!((step.tallies.get(kind) - t.get(kind)).abs() < 1e-12);
            }
            c = advance(&g, &c, 0.3).unwrap();
        }
    }
}
