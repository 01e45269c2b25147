//! Pixel-pair tree expectations.
//!
//! Every pair `ξ` spans a tree of possible futures: embeddable nodes branch
//! to `ξ⁰` with weight `1 - p` and to `ξ¹` with weight `p`, inert nodes
//! continue to `ξ^φ`. The expected bit a pair contributes at stage `k` obeys
//!
//! ```text
//! E(ξ, B_0) = b_ξ
//! E(ξ, B_k) = (1 - p) E(ξ⁰, B_{k-1}) + p E(ξ¹, B_{k-1})   ξ embeddable
//!           = E(ξ^φ, B_{k-1})                              otherwise
//! ```
//!
//! so a whole stage is one gather over the 65 536-cell grid. Paths are
//! never enumerated. Because every expectation is a polynomial in `p`, the
//! same recursion run over coefficient vectors gives an image- and
//! `p`-independent offline table; the online step is then a single weighted
//! sum over the support of `C_0`.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooc::{CoocMatrix, StageTallies};
use crate::error::{Error, Result};
use crate::imaging::PAIR_DOMAIN;
use crate::numeric::CompensatedSum;
use crate::schemes::{Scheme, SchemeGrid, StreamKind};

/// Largest pass count [`TreeEstimator`] tabulates. Deeper runs go through
/// [`stage_tallies`], which needs no tables.
pub const MAX_POLY_PASSES: usize = 16;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "WMCAP_CACHE_DIR";

const CACHE_MAGIC: &[u8; 4] = b"WMCP";
const CACHE_VERSION: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Expected bit at pass `k` (0-based).
    Pass(usize),
    /// Expected bit count summed over the first `P` passes.
    Total(usize),
}

/// Dense per-pair expectations for one stream kind.
#[derive(Debug, Clone)]
pub struct ExpectationTable {
    pub kind: StreamKind,
    pub stage: Stage,
    pub p: f64,
    pub scheme: Scheme,
    pub values: Vec<f64>,
}

impl ExpectationTable {
    /// `Σ_ξ C_0(ξ) E(ξ)` over the support of `C_0`.
    pub fn weighted_sum(&self, c0: &CoocMatrix) -> f64 {
        c0.raw_entries()
            .iter()
            .map(|&(i, c)| c * self.values[i as usize])
            .collect::<CompensatedSum>()
            .value()
    }
}

fn check_args(passes: usize, p: f64) -> Result<()> {
    if passes == 0 {
        return Err(Error::InvalidArgument("pass count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// One application of the recursion: the table one stage deeper.
pub fn stage_step(grid: &SchemeGrid, prev: &[f64], p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    (0..PAIR_DOMAIN)
        .into_par_iter()
        .with_min_len(4096)
        .map(|i| {
            if grid.embeddable(i) {
                q * prev[grid.next(i, false)] + p * prev[grid.next(i, true)]
            } else {
                prev[grid.next(i, false)]
            }
        })
        .collect()
}

/// `E(·, B_k)` for `k = 0 .. passes - 1`.
pub fn build_stage_tables(grid: &SchemeGrid, kind: StreamKind, passes: usize, p: f64) -> Result<Vec<ExpectationTable>> {
    check_args(passes, p)?;
    let mut out: Vec<ExpectationTable> = Vec::with_capacity(passes);
    let mut values = grid.indicator(kind);
    for k in 0..passes {
        if k > 0 {
            values = stage_step(grid, &values, p);
        }
        out.push(ExpectationTable {
            kind,
            stage: Stage::Pass(k),
            p,
            scheme: grid.scheme(),
            values: values.clone(),
        });
    }
    Ok(out)
}

/// `E_P(·, B)` built as `E_1 = b`, `E_m = b + step(E_{m-1})`, each level
/// reusing the one before it.
pub fn build_total_table(grid: &SchemeGrid, kind: StreamKind, passes: usize, p: f64) -> Result<ExpectationTable> {
    check_args(passes, p)?;
    let base = grid.indicator(kind);
    let mut values = base.clone();
    for _ in 1..passes {
        values = stage_step(grid, &values, p);
        for (v, b) in values.iter_mut().zip(&base) {
            *v += b;
        }
    }
    Ok(ExpectationTable {
        kind,
        stage: Stage::Total(passes),
        p,
        scheme: grid.scheme(),
        values,
    })
}

/// Weighted sums of a set of tables, refusing tables built for another scheme.
pub fn estimate_totals(scheme: Scheme, tables: &[ExpectationTable], c0: &CoocMatrix) -> Result<Vec<(StreamKind, Stage, f64)>> {
    tables
        .iter()
        .map(|t| {
            if t.scheme != scheme {
                return Err(Error::TableMismatch(format!(
                    "table for {} ({:?}) used with {}",
                    t.scheme, t.kind, scheme
                )));
            }
            Ok((t.kind, t.stage, t.weighted_sum(c0)))
        })
        .collect()
}

/// Stage tallies from stage tables at fixed `p`, one stage resident at a
/// time per kind.
pub fn stage_tallies(grid: &SchemeGrid, c0: &CoocMatrix, p: f64, passes: usize) -> Result<Vec<StageTallies>> {
    check_args(passes, p)?;
    let mut tables: Vec<Vec<f64>> = StreamKind::ESTIMATED.iter().map(|&k| grid.indicator(k)).collect();
    let size_l = if grid.scheme().has_location_map() { c0.total() } else { 0.0 };
    let mut out = Vec::with_capacity(passes);
    for k in 0..passes {
        if k > 0 {
            for t in tables.iter_mut() {
                *t = stage_step(grid, t, p);
            }
        }
        let sum = |t: &[f64]| {
            c0.raw_entries()
                .iter()
                .map(|&(i, c)| c * t[i as usize])
                .collect::<CompensatedSum>()
                .value()
        };
        out.push(StageTallies {
            k,
            size_i: sum(&tables[0]),
            size_f: sum(&tables[1]),
            ones_f: sum(&tables[2]),
            ones_l: sum(&tables[3]),
            size_l,
        });
    }
    Ok(out)
}

/// Per-pair polynomial coefficients in `p`, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTable {
    pub kind: StreamKind,
    pub stage: Stage,
    pub scheme: Scheme,
    /// Coefficients per pair; the polynomial degree is `width - 1`.
    pub width: usize,
    pub coeffs: Vec<f64>,
}

impl PolyTable {
    fn constant(grid: &SchemeGrid, kind: StreamKind, stage: Stage) -> Self {
        Self {
            kind,
            stage,
            scheme: grid.scheme(),
            width: 1,
            coeffs: grid.indicator(kind),
        }
    }

    pub fn coefficients(&self, index: usize) -> &[f64] {
        &self.coeffs[index * self.width..(index + 1) * self.width]
    }

    pub fn eval_at(&self, index: usize, p: f64) -> f64 {
        horner(self.coefficients(index), p)
    }

    pub fn evaluate(&self, p: f64) -> ExpectationTable {
        ExpectationTable {
            kind: self.kind,
            stage: self.stage,
            p,
            scheme: self.scheme,
            values: (0..PAIR_DOMAIN).map(|i| self.eval_at(i, p)).collect(),
        }
    }

    /// The recursion over coefficient vectors: `(1-p) a + p b` becomes
    /// `c[j] = a[j] + b[j-1] - a[j-1]`.
    fn step(&self, grid: &SchemeGrid) -> PolyTable {
        let w = self.width;
        let nw = w + 1;
        let mut coeffs = vec![0.0; PAIR_DOMAIN * nw];
        coeffs
            .par_chunks_mut(nw)
            .with_min_len(2048)
            .enumerate()
            .for_each(|(i, out)| {
                let a = self.coefficients(grid.next(i, false));
                if grid.embeddable(i) {
                    let b = self.coefficients(grid.next(i, true));
                    out[0] = a[0];
                    for j in 1..w {
                        out[j] = a[j] + b[j - 1] - a[j - 1];
                    }
                    out[w] = b[w - 1] - a[w - 1];
                } else {
                    out[..w].copy_from_slice(a);
                }
            });
        PolyTable {
            kind: self.kind,
            stage: self.stage,
            scheme: self.scheme,
            width: nw,
            coeffs,
        }
    }
}

fn horner(c: &[f64], p: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * p + v)
}

/// Stage polynomials for `k = 0 .. passes - 1`; stage `k` has degree `k`.
pub fn build_stage_polys(grid: &SchemeGrid, kind: StreamKind, passes: usize) -> Result<Vec<PolyTable>> {
    check_args(passes, 0.0)?;
    let mut out = vec![PolyTable::constant(grid, kind, Stage::Pass(0))];
    for k in 1..passes {
        let mut next = out[k - 1].step(grid);
        next.stage = Stage::Pass(k);
        out.push(next);
    }
    Ok(out)
}

/// Polynomial form of `E_P(·, B)`; degree at most `P - 1`.
pub fn build_poly_tables(grid: &SchemeGrid, kind: StreamKind, passes: usize) -> Result<PolyTable> {
    check_args(passes, 0.0)?;
    let base = grid.indicator(kind);
    let mut t = PolyTable::constant(grid, kind, Stage::Total(1));
    for m in 2..=passes {
        t = t.step(grid);
        for (i, b) in base.iter().enumerate() {
            t.coeffs[i * t.width] += b;
        }
        t.stage = Stage::Total(m);
    }
    Ok(t)
}

/// Offline tables for one scheme and pass count; answers any image and any
/// `p` by a weighted sum over `C_0`.
///
/// Stage `k` is stored as one block per pair holding the `k + 1`
/// coefficients of every estimated kind back to back, so evaluating a
/// stage walks the support of `C_0` through contiguous memory. The
/// coefficients are small integers (the largest at 16 passes is 6435), so
/// they are stored as `i16` to halve the memory the online sum walks.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEstimator {
    scheme: Scheme,
    passes: usize,
    /// Positions in [`StreamKind::ESTIMATED`] of the kinds stored. A kind
    /// whose region is empty is zero at every stage and is left out.
    kinds: Vec<usize>,
    stages: Vec<Vec<i16>>,
    /// Embedded minus flag coefficients per stage, for schemes whose
    /// auxiliary data is the raw flag stream alone. Their stage capacity is
    /// then linear in the tallies and needs one polynomial instead of three.
    net: Option<Vec<Vec<i16>>>,
}

const KINDS: usize = StreamKind::ESTIMATED.len();

/// Stage polynomials already summed over an image, one per kind and stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePolys {
    pub passes: usize,
    pub size_l: f64,
    /// Indexed `[k][kind]` in [`StreamKind::ESTIMATED`] order.
    pub coeffs: Vec<Vec<Vec<f64>>>,
}

impl ImagePolys {
    pub fn tallies(&self, p: f64) -> Result<Vec<StageTallies>> {
        check_args(self.passes, p)?;
        Ok((0..self.passes)
            .map(|k| {
                let v = |kind: usize| horner(&self.coeffs[k][kind], p);
                StageTallies {
                    k,
                    size_i: v(0),
                    size_f: v(1),
                    ones_f: v(2),
                    ones_l: v(3),
                    size_l: self.size_l,
                }
            })
            .collect())
    }
}

impl TreeEstimator {
    /// Builds (or loads from `WMCAP_CACHE_DIR`) the stage polynomials.
    pub fn new(grid: &SchemeGrid, passes: usize) -> Result<Self> {
        let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
        Self::with_cache(grid, passes, dir.as_deref())
    }

    pub fn with_cache(grid: &SchemeGrid, passes: usize, cache_dir: Option<&Path>) -> Result<Self> {
        check_args(passes, 0.0)?;
        if passes > MAX_POLY_PASSES {
            return Err(Error::InvalidArgument(format!(
                "polynomial tables cover at most {MAX_POLY_PASSES} passes, not {passes}"
            )));
        }
        match cache_dir {
            Some(dir) => {
                let path = cache_path(dir, grid.scheme(), passes);
                if let Ok(est) = read_cache(&path, grid.scheme(), &stored_kinds(grid), passes) {
                    return Ok(est);
                }
                let est = Self::build(grid, passes)?;
                write_cache(&path, &est)?;
                Ok(est)
            }
            _ => Self::build(grid, passes),
        }
    }

    fn build(grid: &SchemeGrid, passes: usize) -> Result<Self> {
        let net = if linear_capacity(grid.scheme()) {
            let emb = build_stage_polys(grid, StreamKind::Embed, passes)?;
            let flag = build_stage_polys(grid, StreamKind::Flag, passes)?;
            let net = emb
                .iter()
                .zip(&flag)
                .map(|(e, f)| {
                    e.coeffs
                        .iter()
                        .zip(&f.coeffs)
                        .map(|(a, b)| to_exact_i16(a - b))
                        .collect::<Result<Vec<i16>>>()
                })
                .collect::<Result<_>>()?;
            Some(net)
        } else {
            None
        };
        let kinds = stored_kinds(grid);
        let n = kinds.len();
        let mut stages: Vec<Vec<i16>> = (0..passes).map(|k| vec![0; PAIR_DOMAIN * n * (k + 1)]).collect();
        for (slot, &j) in kinds.iter().enumerate() {
            let kind = StreamKind::ESTIMATED[j];
            for (k, t) in build_stage_polys(grid, kind, passes)?.into_iter().enumerate() {
                let w = k + 1;
                for i in 0..PAIR_DOMAIN {
                    let at = (i * n + slot) * w;
                    for (dst, &v) in stages[k][at..at + w].iter_mut().zip(t.coefficients(i)) {
                        *dst = to_exact_i16(v)?;
                    }
                }
            }
        }
        Ok(Self {
            scheme: grid.scheme(),
            passes,
            kinds,
            stages,
            net,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    /// Coefficients of `kind` at stage `k` for pair `index`; `None` when
    /// the kind is zero throughout.
    pub fn coefficients(&self, kind: StreamKind, k: usize, index: usize) -> Option<&[i16]> {
        let j = StreamKind::ESTIMATED
            .iter()
            .position(|&x| x == kind)
            .expect("kind is estimated");
        let slot = self.kinds.iter().position(|&x| x == j)?;
        let w = k + 1;
        let at = (index * self.kinds.len() + slot) * w;
        Some(&self.stages[k][at..at + w])
    }

    fn size_l(&self, c0: &CoocMatrix) -> f64 {
        if self.scheme.has_location_map() {
            c0.total()
        } else {
            0.0
        }
    }

    /// Tallies of stage `k` at probability `p`.
    pub fn stage_tally(&self, c0: &CoocMatrix, k: usize, p: f64) -> Result<StageTallies> {
        check_args(self.passes, p)?;
        if k >= self.passes {
            return Err(Error::InvalidArgument(format!(
                "stage {k} is beyond the {} tabulated passes",
                self.passes
            )));
        }
        let acc = self.stage_coeffs(c0, k);
        let v = |j: usize| horner(&acc[j * (k + 1)..(j + 1) * (k + 1)], p);
        Ok(StageTallies {
            k,
            size_i: v(0),
            size_f: v(1),
            ones_f: v(2),
            ones_l: v(3),
            size_l: self.size_l(c0),
        })
    }

    /// Exact capacity of stage `k` through the net-gain polynomials, or
    /// `None` when the scheme compresses its auxiliary data.
    pub fn stage_net_gain(&self, c0: &CoocMatrix, k: usize, p: f64) -> Result<Option<f64>> {
        check_args(self.passes, p)?;
        if k >= self.passes {
            return Err(Error::InvalidArgument(format!(
                "stage {k} is beyond the {} tabulated passes",
                self.passes
            )));
        }
        let Some(net) = &self.net else {
            return Ok(None);
        };
        let entries = c0.raw_entries();
        macro_rules! by_width {
            ($($w:literal)*) => {
                match k + 1 {
                    $($w => accumulate::<$w>(&net[k], entries).to_vec(),)*
                    w => accumulate_dyn(&net[k], entries, w),
                }
            };
        }
        let coeffs = by_width!(1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16);
        Ok(Some(horner(&coeffs, p)))
    }

    /// Stage `k` coefficients summed over the image, every estimated kind
    /// back to back. Counts and coefficients are integers, so the sums are
    /// exact.
    fn stage_coeffs(&self, c0: &CoocMatrix, k: usize) -> Vec<f64> {
        let table = &self.stages[k];
        let entries = c0.raw_entries();
        // A block width known at compile time lets the inner loop unroll
        // and vectorize: three or four kinds times up to 16 coefficients.
        macro_rules! by_width {
            ($($w:literal)*) => {
                match self.kinds.len() * (k + 1) {
                    $($w => accumulate::<$w>(table, entries).to_vec(),)*
                    w => accumulate_dyn(table, entries, w),
                }
            };
        }
        let stored = by_width!(3 4 6 8 9 12 15 16 18 20 21 24 27 28 30 32 33 36 39 40 42 44 45 48 52 56 60 64);
        let w = k + 1;
        let mut out = vec![0.0; KINDS * w];
        for (slot, &j) in self.kinds.iter().enumerate() {
            out[j * w..(j + 1) * w].copy_from_slice(&stored[slot * w..(slot + 1) * w]);
        }
        out
    }

    pub fn stage_tallies(&self, c0: &CoocMatrix, p: f64) -> Result<Vec<StageTallies>> {
        (0..self.passes).map(|k| self.stage_tally(c0, k, p)).collect()
    }

    /// Collapses the per-pair polynomials onto an image, after which any
    /// `p` costs a handful of operations.
    pub fn image_polys(&self, c0: &CoocMatrix) -> ImagePolys {
        let coeffs = (0..self.passes)
            .map(|k| self.stage_coeffs(c0, k).chunks_exact(k + 1).map(<[f64]>::to_vec).collect())
            .collect();
        ImagePolys {
            passes: self.passes,
            size_l: self.size_l(c0),
            coeffs,
        }
    }
}

fn accumulate<const W: usize>(table: &[i16], entries: &[(u16, f64)]) -> [f64; W] {
    let mut acc = [0.0; W];
    for &(i, c) in entries {
        let at = i as usize * W;
        let block: &[i16; W] = table[at..at + W].try_into().expect("block width");
        for (a, &v) in acc.iter_mut().zip(block) {
            *a += c * f64::from(v);
        }
    }
    acc
}

fn accumulate_dyn(table: &[i16], entries: &[(u16, f64)], w: usize) -> Vec<f64> {
    let mut acc = vec![0.0; w];
    for &(i, c) in entries {
        let block = &table[i as usize * w..(i as usize + 1) * w];
        for (a, &v) in acc.iter_mut().zip(block) {
            *a += c * f64::from(v);
        }
    }
    acc
}

fn to_exact_i16(v: f64) -> Result<i16> {
    if v.fract() == 0.0 && v.abs() <= f64::from(i16::MAX) {
        Ok(v as i16)
    } else {
        Err(Error::InvalidArgument(format!("tree coefficient {v} does not fit the table format")))
    }
}

fn linear_capacity(scheme: Scheme) -> bool {
    !scheme.flag_stream_compressed() && !scheme.has_location_map()
}

fn stored_kinds(grid: &SchemeGrid) -> Vec<usize> {
    (0..KINDS)
        .filter(|&j| grid.region_size(StreamKind::ESTIMATED[j]) > 0)
        .collect()
}

fn kind_mask(kinds: &[usize]) -> u8 {
    kinds.iter().fold(0, |m, &j| m | (1 << j))
}

fn cache_path(dir: &Path, scheme: Scheme, passes: usize) -> PathBuf {
    dir.join(format!(
        "{}-t{}-p{}-v{}.bin",
        scheme.kind(),
        scheme.theta_h(),
        passes,
        CACHE_VERSION
    ))
}

fn cache_header(scheme: Scheme, kinds: &[usize], passes: usize) -> Vec<u8> {
    let mut h = Vec::with_capacity(20);
    h.extend_from_slice(CACHE_MAGIC);
    h.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    h.push(scheme.kind() as u8);
    h.push(kind_mask(kinds));
    h.extend_from_slice(&scheme.theta_h().to_le_bytes());
    h.extend_from_slice(&(passes as u32).to_le_bytes());
    h.extend_from_slice(&(PAIR_DOMAIN as u32).to_le_bytes());
    h
}

fn read_cache(path: &Path, scheme: Scheme, kinds: &[usize], passes: usize) -> Result<TreeEstimator> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let header = cache_header(scheme, kinds, passes);
    let n = kinds.len() + usize::from(linear_capacity(scheme));
    let values = PAIR_DOMAIN * n * passes * (passes + 1) / 2;
    if bytes.len() != header.len() + values * 2 || bytes[..header.len()] != header[..] {
        return Err(Error::Cache(format!("{} does not match the requested tables", path.display())));
    }
    let mut body = bytes[header.len()..]
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes(c.try_into().expect("2-byte chunk")));
    let mut tables = |width: usize| -> Vec<Vec<i16>> {
        (0..passes)
            .map(|k| body.by_ref().take(PAIR_DOMAIN * width * (k + 1)).collect())
            .collect()
    };
    let stages = tables(kinds.len());
    let net = linear_capacity(scheme).then(|| tables(1));
    Ok(TreeEstimator {
        scheme,
        passes,
        kinds: kinds.to_vec(),
        stages,
        net,
    })
}

fn write_cache(path: &Path, est: &TreeEstimator) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut buf = cache_header(est.scheme, &est.kinds, est.passes);
    for v in est.stages.iter().chain(est.net.iter().flatten()).flatten() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    // Write then rename so a concurrent reader never sees a partial file.
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
