//! Entropy-based compressed sizes and capacity assembly.
//!
//! Each pass embeds `size(I_k)` bits, of which the auxiliary streams take a
//! share: raw flags for schemes that embed them as-is, and entropy-sized
//! compressed flags and location map for schemes that compress them. What
//! remains is the watermark capacity of the pass.

use serde::{Deserialize, Serialize};

use crate::cooc::{self, ImageStats, StageTallies};
use crate::error::{Error, Result};
use crate::imaging::Pairing;
use crate::numeric::compensated_sum;
use crate::schemes::{Scheme, SchemeGrid};
use crate::tree::{self, TreeEstimator};

/// `H_0(q) = -q log2 q - (1-q) log2 (1-q)`, with `H_0(0) = H_0(1) = 0`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("entropy argument {q} outside [0, 1]")));
    }
    Ok(entropy_unchecked(q))
}

pub(crate) fn entropy_unchecked(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

/// `n H_0(r / n)`, the ideal size of an order-0 compressed stream.
pub fn compressed_size(size: f64, ones: f64) -> Result<f64> {
    if size < 0.0 || ones < 0.0 {
        return Err(Error::InvalidArgument("stream sizes must be non-negative".into()));
    }
    // Estimates carry rounding noise; only reject a real excess.
    if ones > size * (1.0 + 1e-12) + 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "ones count {ones} exceeds stream size {size}"
        )));
    }
    if size == 0.0 {
        return Ok(0.0);
    }
    Ok(size * entropy_unchecked((ones / size).min(1.0)))
}

/// Maps an expected stream to its compressed size. The entropy bound is the
/// default; a measured coder ratio can be swapped in for verification.
pub trait CompressionModel {
    fn compressed_size(&self, size: f64, ones: f64) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EntropyModel;

impl CompressionModel for EntropyModel {
    fn compressed_size(&self, size: f64, ones: f64) -> Result<f64> {
        compressed_size(size, ones)
    }
}

/// Entropy scaled by a fixed factor plus a per-stream overhead.
#[derive(Debug, Clone, Copy)]
pub struct ScaledEntropy {
    pub factor: f64,
    pub overhead_bits: f64,
}

impl CompressionModel for ScaledEntropy {
    fn compressed_size(&self, size: f64, ones: f64) -> Result<f64> {
        Ok(compressed_size(size, ones)? * self.factor + self.overhead_bits)
    }
}

/// Auxiliary stream sizes of one pass.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AuxSizes {
    /// Flags embedded verbatim.
    pub raw_flag: f64,
    pub raw_flag_ones: f64,
    pub compressed_flag: f64,
    pub compressed_loc: f64,
}

impl AuxSizes {
    pub fn total(&self) -> f64 {
        self.raw_flag + self.compressed_flag + self.compressed_loc
    }
}

pub fn aux_sizes(scheme: Scheme, t: &StageTallies) -> AuxSizes {
    aux_sizes_with(&EntropyModel, scheme, t).expect("tallies are consistent")
}

pub fn aux_sizes_with(model: &dyn CompressionModel, scheme: Scheme, t: &StageTallies) -> Result<AuxSizes> {
    let mut aux = AuxSizes::default();
    if scheme.flag_stream_compressed() {
        aux.compressed_flag = model.compressed_size(t.size_f, t.ones_f)?;
    } else {
        aux.raw_flag = t.size_f;
        aux.raw_flag_ones = t.ones_f;
    }
    if scheme.has_location_map() {
        aux.compressed_loc = model.compressed_size(t.size_l, t.ones_l)?;
    }
    Ok(aux)
}

/// Which estimator produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Pixel-pair tree expectations at fixed `p`.
    Tree,
    /// Co-occurrence iteration at fixed `p`.
    Cooc,
    /// Co-occurrence iteration with per-stage adaptive `p_k`.
    Cap,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Estimator::Tree => "tree",
            Estimator::Cooc => "cooc",
            Estimator::Cap => "cap",
        })
    }
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tree" | "ta" => Ok(Estimator::Tree),
            "cooc" => Ok(Estimator::Cooc),
            "cap" => Ok(Estimator::Cap),
            _ => Err(Error::InvalidArgument(format!("unknown estimator '{s}'"))),
        }
    }
}

/// One pass of a capacity report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub k: usize,
    pub size_i: f64,
    /// Raw flag bits charged against capacity (0 when flags are compressed).
    pub size_f: f64,
    pub size_fc: f64,
    pub size_lc: f64,
    pub capacity: f64,
    pub infeasible: bool,
    pub p: f64,
    pub tallies: StageTallies,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub size_i: f64,
    pub size_f: f64,
    pub size_fc: f64,
    pub size_lc: f64,
    pub capacity: f64,
    /// Capacity over the full pixel count, unpaired pixels included.
    pub capacity_bpp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub scheme: String,
    pub theta_h: u16,
    pub pairing: Pairing,
    pub p_w: f64,
    pub passes: usize,
    pub estimator: Estimator,
    pub pixel_count: usize,
    pub pair_count: f64,
    pub bpp_basis: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub stages: Vec<StageRecord>,
    pub totals: Totals,
    pub meta: ReportMeta,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl CapacityReport {
    pub fn capacity(&self) -> f64 {
        self.totals.capacity
    }

    /// Cumulative capacity after each pass.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.stages
            .iter()
            .map(|s| {
                acc += s.capacity;
                acc
            })
            .collect()
    }
}

/// Context that travels into report metadata.
#[derive(Debug, Clone, Copy)]
pub struct ReportContext {
    pub pairing: Pairing,
    pub p_w: f64,
    pub estimator: Estimator,
    pub pixel_count: usize,
    pub pair_count: f64,
}

pub fn assemble_capacity(
    scheme: Scheme,
    tallies: &[StageTallies],
    p_used: &[f64],
    ctx: ReportContext,
) -> Result<CapacityReport> {
    assemble_capacity_with(&EntropyModel, scheme, tallies, p_used, ctx)
}

pub fn assemble_capacity_with(
    model: &dyn CompressionModel,
    scheme: Scheme,
    tallies: &[StageTallies],
    p_used: &[f64],
    ctx: ReportContext,
) -> Result<CapacityReport> {
    if p_used.len() != tallies.len() {
        return Err(Error::InvalidArgument("one probability per stage is required".into()));
    }
    let mut stages = Vec::with_capacity(tallies.len());
    for (t, &p) in tallies.iter().zip(p_used) {
        let aux = aux_sizes_with(model, scheme, t)?;
        let capacity = t.size_i - aux.total();
        stages.push(StageRecord {
            k: t.k,
            size_i: t.size_i,
            size_f: aux.raw_flag,
            size_fc: aux.compressed_flag,
            size_lc: aux.compressed_loc,
            capacity,
            infeasible: capacity < 0.0,
            p,
            tallies: *t,
        });
    }
    let sum = |f: fn(&StageRecord) -> f64| compensated_sum(stages.iter().map(f));
    let capacity = sum(|s| s.capacity);
    let totals = Totals {
        size_i: sum(|s| s.size_i),
        size_f: sum(|s| s.size_f),
        size_fc: sum(|s| s.size_fc),
        size_lc: sum(|s| s.size_lc),
        capacity,
        capacity_bpp: if ctx.pixel_count > 0 {
            capacity / ctx.pixel_count as f64
        } else {
            0.0
        },
    };
    Ok(CapacityReport {
        totals,
        meta: ReportMeta {
            scheme: scheme.kind().to_string(),
            theta_h: scheme.theta_h(),
            pairing: ctx.pairing,
            p_w: ctx.p_w,
            passes: stages.len(),
            estimator: ctx.estimator,
            pixel_count: ctx.pixel_count,
            pair_count: ctx.pair_count,
            bpp_basis: "all pixels".into(),
        },
        stages,
        warnings: Vec::new(),
    })
}

/// Per-stage tallies and the probability each stage was advanced with.
pub fn stage_tallies(
    grid: &SchemeGrid,
    stats: &ImageStats,
    p_w: f64,
    passes: usize,
    estimator: Estimator,
) -> Result<(Vec<StageTallies>, Vec<f64>, Vec<String>)> {
    match estimator {
        Estimator::Cooc => {
            let t = cooc::run_fixed_p(grid, &stats.cooc, p_w, passes)?;
            let n = t.len();
            Ok((t, vec![p_w; n], Vec::new()))
        }
        Estimator::Cap => {
            let run = cooc::run_cap(grid, &stats.cooc, p_w, passes)?;
            Ok((run.tallies, run.p_sequence, run.warnings))
        }
        Estimator::Tree => {
            let t = tree::stage_tallies(grid, &stats.cooc, p_w, passes)?;
            let n = t.len();
            Ok((t, vec![p_w; n], Vec::new()))
        }
    }
}

/// Runs one estimator end to end.
pub fn estimate(
    grid: &SchemeGrid,
    stats: &ImageStats,
    p_w: f64,
    passes: usize,
    estimator: Estimator,
) -> Result<CapacityReport> {
    let (tallies, ps, warnings) = stage_tallies(grid, stats, p_w, passes, estimator)?;
    let mut report = assemble_capacity(grid.scheme(), &tallies, &ps, context(stats, p_w, estimator))?;
    report.warnings = warnings;
    Ok(report)
}

pub fn context(stats: &ImageStats, p_w: f64, estimator: Estimator) -> ReportContext {
    ReportContext {
        pairing: stats.pairing,
        p_w,
        estimator,
        pixel_count: stats.pixel_count,
        pair_count: stats.pair_count(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPasses {
    /// Number of passes worth running: every stage before it has positive capacity.
    pub passes: usize,
    /// No stage up to the search limit reached zero.
    pub hit_limit: bool,
    /// Stage capacities of every evaluated pass, including the first non-positive one.
    pub trajectory: Vec<f64>,
    pub report: CapacityReport,
}

/// Feeds stages one at a time and stops at the first stage whose capacity
/// is zero or below. That stage is kept in the trajectory but not in the
/// report.
fn search_optimal(
    scheme: Scheme,
    ctx: ReportContext,
    max_passes: usize,
    mut next: impl FnMut(usize) -> Result<(StageTallies, f64, Option<String>)>,
) -> Result<OptimalPasses> {
    if max_passes == 0 {
        return Err(Error::InvalidArgument("pass limit must be at least 1".into()));
    }
    let mut tallies = Vec::new();
    let mut ps = Vec::new();
    let mut warnings = Vec::new();
    let mut trajectory = Vec::new();
    let mut passes = max_passes;
    for k in 0..max_passes {
        let (t, p, w) = next(k)?;
        warnings.extend(w);
        let cap = t.size_i - aux_sizes(scheme, &t).total();
        trajectory.push(cap);
        if cap <= 0.0 {
            passes = k;
            break;
        }
        tallies.push(t);
        ps.push(p);
    }
    let mut report = assemble_capacity(scheme, &tallies, &ps, ctx)?;
    report.warnings = warnings;
    Ok(OptimalPasses {
        passes,
        hit_limit: trajectory.len() == max_passes && passes == max_passes,
        trajectory,
        report,
    })
}

/// The first stage whose capacity drops to zero or below ends the useful
/// passes.
pub fn optimal_passes(
    grid: &SchemeGrid,
    stats: &ImageStats,
    p_w: f64,
    estimator: Estimator,
    max_passes: usize,
) -> Result<OptimalPasses> {
    let ctx = context(stats, p_w, estimator);
    match estimator {
        Estimator::Cooc | Estimator::Cap => {
            let mut s = cooc::CoocStepper::new(grid, &stats.cooc, p_w, estimator == Estimator::Cap)?;
            search_optimal(grid.scheme(), ctx, max_passes, |_| {
                let step = s.next_stage()?;
                Ok((step.tallies, step.p, step.warning))
            })
        }
        Estimator::Tree => {
            let all = tree::stage_tallies(grid, &stats.cooc, p_w, max_passes.max(1))?;
            search_optimal(grid.scheme(), ctx, max_passes, |k| Ok((all[k], p_w, None)))
        }
    }
}

/// Where the optimal pass search ends, without the per-stage breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalCapacity {
    pub passes: usize,
    /// Capacity summed over the useful passes, bits.
    pub capacity: f64,
    pub capacity_bpp: f64,
    pub hit_limit: bool,
}

/// Capacity-only search on prebuilt tree tables. Schemes without
/// compressed auxiliary data take one polynomial per stage; the others go
/// through the full tallies.
pub fn optimal_capacity_tree(est: &TreeEstimator, stats: &ImageStats, p_w: f64) -> Result<OptimalCapacity> {
    let mut capacity = 0.0;
    let mut passes = est.passes();
    for k in 0..est.passes() {
        let cap = match est.stage_net_gain(&stats.cooc, k, p_w)? {
            Some(c) => c,
            None => {
                let t = est.stage_tally(&stats.cooc, k, p_w)?;
                t.size_i - aux_sizes(est.scheme(), &t).total()
            }
        };
        if cap <= 0.0 {
            passes = k;
            break;
        }
        capacity += cap;
    }
    Ok(OptimalCapacity {
        passes,
        capacity,
        capacity_bpp: capacity / stats.pixel_count as f64,
        hit_limit: passes == est.passes(),
    })
}

/// [`optimal_passes`] on prebuilt tree tables; the search is limited to the
/// passes the tables cover.
pub fn optimal_passes_tree(est: &TreeEstimator, stats: &ImageStats, p_w: f64) -> Result<OptimalPasses> {
    let ctx = context(stats, p_w, Estimator::Tree);
    search_optimal(est.scheme(), ctx, est.passes(), |k| {
        Ok((est.stage_tally(&stats.cooc, k, p_w)?, p_w, None))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ReportContext {
        ReportContext {
            pairing: Pairing::Horizontal,
            p_w: 0.5,
            estimator: Estimator::Cooc,
            pixel_count: 200,
            pair_count: 100.0,
        }
    }

    fn stage(size_i: f64, size_f: f64, ones_f: f64, ones_l: f64, size_l: f64) -> StageTallies {
        StageTallies {
            k: 0,
            size_i,
            size_f,
            ones_f,
            ones_l,
            size_l,
        }
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.11).unwrap() - 0.499916).abs() < 1e-6);
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn compressed_sizes() {
        assert_eq!(compressed_size(1000.0, 500.0).unwrap(), 1000.0);
        assert_eq!(compressed_size(1000.0, 0.0).unwrap(), 0.0);
        assert_eq!(compressed_size(0.0, 0.0).unwrap(), 0.0);
        let v = compressed_size(131072.0, 117964.0).unwrap();
        assert!((v - 61474.726344).abs() < 1e-5, "{v}");
        assert!(compressed_size(10.0, 11.0).is_err());
    }

    #[test]
    fn coltuc_assembly_subtracts_raw_flags() {
        let r = assemble_capacity(Scheme::coltuc(), &[stage(100.0, 10.0, 4.0, 0.0, 0.0)], &[0.5], ctx()).unwrap();
        assert_eq!(r.totals.capacity, 90.0);
        assert_eq!((r.totals.size_fc, r.totals.size_lc), (0.0, 0.0));
        assert_eq!(r.totals.capacity_bpp, 0.45);
    }

    #[test]
    fn tian_assembly_compresses_streams() {
        let r = assemble_capacity(Scheme::tian(), &[stage(100.0, 10.0, 5.0, 100.0, 100.0)], &[0.5], ctx()).unwrap();
        let s = &r.stages[0];
        assert_eq!((s.size_f, s.size_fc, s.size_lc), (0.0, 10.0, 0.0));
        assert_eq!(r.totals.capacity, 90.0);
        let r = assemble_capacity(Scheme::tian(), &[stage(10.0, 0.0, 0.0, 50.0, 100.0)], &[0.5], ctx()).unwrap();
        assert_eq!(r.totals.capacity, -90.0);
        assert!(r.stages[0].infeasible);
    }
}
