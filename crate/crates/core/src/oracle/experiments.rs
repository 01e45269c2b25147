//! Repeated-embedding experiments: spread over watermarks and timing.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embed::embed_multi;
use super::watermark::gen_watermark;
use crate::bounds::max_capacity_search;
use crate::capacity::{estimate, optimal_capacity_tree, optimal_passes, optimal_passes_tree, Estimator};
use crate::cooc::ImageStats;
use crate::error::{Error, Result};
use crate::imaging::{GrayImage, Pairing};
use crate::report::SweepRow;
use crate::schemes::SchemeGrid;
use crate::tree::TreeEstimator;

/// Cumulative watermark bits after each of `passes` passes, one row per seed.
/// Passes after an early stop repeat the last value.
pub fn oracle_capacities(
    grid: &SchemeGrid,
    img: &GrayImage,
    pairing: Pairing,
    p: f64,
    passes: usize,
    seeds: &[u64],
) -> Result<Vec<Vec<f64>>> {
    // Every pass embeds at most one bit per pair.
    let n = img.pixel_count() / 2 * passes;
    seeds
        .par_iter()
        .map(|&seed| {
            let wm = gen_watermark(n, p, seed)?;
            let rec = embed_multi(grid, img, pairing, &wm.bits, passes)?;
            let mut cum: Vec<f64> = rec.cumulative_capacity().into_iter().map(|c| c as f64).collect();
            let last = cum.last().copied().unwrap_or(0.0);
            cum.resize(passes, last);
            Ok(cum)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub p: f64,
    pub passes: usize,
    pub trials: usize,
    /// Mean cumulative capacity per stage, bits per pixel.
    pub mean_bpp: Vec<f64>,
    /// Sample standard deviation of the cumulative capacity per stage, bpp.
    pub std_bpp: Vec<f64>,
}

/// Embeds one watermark per seed and reports the spread of the cumulative
/// capacity at each stage.
pub fn variance_experiment(
    grid: &SchemeGrid,
    img: &GrayImage,
    pairing: Pairing,
    p: f64,
    passes: usize,
    seeds: &[u64],
) -> Result<VarianceReport> {
    if seeds.len() < 2 {
        return Err(Error::InvalidArgument("at least two trials are needed for a spread".into()));
    }
    let rows = oracle_capacities(grid, img, pairing, p, passes, seeds)?;
    let px = img.pixel_count() as f64;
    let t = rows.len() as f64;
    let mut mean_bpp = Vec::with_capacity(passes);
    let mut std_bpp = Vec::with_capacity(passes);
    for k in 0..passes {
        let col: Vec<f64> = rows.iter().map(|r| r[k] / px).collect();
        let m = col.iter().sum::<f64>() / t;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (t - 1.0);
        mean_bpp.push(m);
        std_bpp.push(var.sqrt());
    }
    Ok(VarianceReport {
        p,
        passes,
        trials: seeds.len(),
        mean_bpp,
        std_bpp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    /// Pass limit of every search.
    pub max_passes: usize,
    pub p: f64,
    pub runs: usize,
    /// Passes actually embedded before the payload no longer fit.
    pub aw_passes: usize,
    /// Optimal pass counts found by the two estimators.
    pub cap_passes: usize,
    pub ta_passes: usize,
    /// Median seconds of actual watermarking.
    pub t_aw: f64,
    /// Median seconds of the adaptive co-occurrence estimator.
    pub t_cap: f64,
    /// Median seconds of the online tree estimator.
    pub t_ta: f64,
    /// One-off seconds to build the tree estimator's polynomial tables.
    pub t_ta_offline: f64,
    pub aw_over_ta: f64,
    pub aw_over_cap: f64,
}

fn median_secs(runs: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut t = Vec::with_capacity(runs);
    for _ in 0..runs {
        let start = Instant::now();
        f()?;
        t.push(start.elapsed().as_secs_f64());
    }
    t.sort_by(f64::total_cmp);
    Ok(t[t.len() / 2])
}

/// Times the computation of the optimal multi-pass capacity, single-threaded.
///
/// Watermarking embeds pass after pass until the auxiliary data no longer
/// fits or `max_passes` is reached. Both estimators step stage by stage until
/// a stage has no positive capacity. Each timed run starts from the cover
/// image. The scheme lookup tables and the tree estimator's offline tables
/// are built beforehand.
pub fn timing_bench(
    grid: &SchemeGrid,
    img: &GrayImage,
    pairing: Pairing,
    p: f64,
    max_passes: usize,
    runs: usize,
) -> Result<TimingReport> {
    if runs < 5 {
        return Err(Error::InvalidArgument("timing needs at least 5 runs".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| {
        let start = Instant::now();
        let tree = TreeEstimator::new(grid, max_passes)?;
        let t_ta_offline = start.elapsed().as_secs_f64();
        let wm = gen_watermark(img.pixel_count() / 2 * max_passes, p, 0)?;
        let mut aw_passes = 0;
        let t_aw = median_secs(runs, || {
            aw_passes = std::hint::black_box(embed_multi(grid, img, pairing, &wm.bits, max_passes)?).passes_completed;
            Ok(())
        })?;
        let mut cap_passes = 0;
        let t_cap = median_secs(runs, || {
            let stats = ImageStats::from_image(img, pairing)?;
            cap_passes = std::hint::black_box(optimal_passes(grid, &stats, p, Estimator::Cap, max_passes)?).passes;
            Ok(())
        })?;
        let mut ta_passes = 0;
        let t_ta = median_secs(runs, || {
            let stats = ImageStats::from_image(img, pairing)?;
            ta_passes = std::hint::black_box(optimal_capacity_tree(&tree, &stats, p)?).passes;
            Ok(())
        })?;
        Ok(TimingReport {
            max_passes,
            p,
            runs,
            aw_passes,
            cap_passes,
            ta_passes,
            t_aw,
            t_cap,
            t_ta,
            t_ta_offline,
            aw_over_ta: t_aw / t_ta,
            aw_over_cap: t_aw / t_cap,
        })
    })
}

/// One stage (or the total) of an estimate checked against watermarking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Estimated capacity, bits.
    pub estimate: f64,
    /// Mean capacity over the trials, bits.
    pub oracle_mean: f64,
    /// Sample standard deviation over the trials; 0 for a single trial.
    pub oracle_std: f64,
    /// `(estimate - mean) / mean`; absent when the mean is 0.
    pub rel_error: Option<f64>,
}

impl Comparison {
    fn new(estimate: f64, samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std = if samples.len() > 1 {
            (samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            estimate,
            oracle_mean: mean,
            oracle_std: std,
            rel_error: (mean != 0.0).then(|| (estimate - mean) / mean),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub estimator: Estimator,
    pub p: f64,
    pub passes: usize,
    pub seeds: Vec<u64>,
    /// Per-stage capacity.
    pub stages: Vec<Comparison>,
    /// Cumulative capacity after all passes.
    pub total: Comparison,
    pub warnings: Vec<String>,
}

/// Runs `estimator` and the embedder once per seed, and compares them stage
/// by stage.
pub fn verify_estimate(
    grid: &SchemeGrid,
    img: &GrayImage,
    pairing: Pairing,
    p: f64,
    passes: usize,
    estimator: Estimator,
    seeds: &[u64],
) -> Result<VerifyReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    let stats = ImageStats::from_image(img, pairing)?;
    let est = estimate(grid, &stats, p, passes, estimator)?;
    let rows = oracle_capacities(grid, img, pairing, p, passes, seeds)?;
    let mut warnings = est.warnings.clone();
    if seeds.len() == 1 {
        warnings.push("single trial: standard deviation is undefined and reported as 0".into());
    }
    let stage_bits = |row: &[f64], k: usize| if k == 0 { row[0] } else { row[k] - row[k - 1] };
    let stages = (0..passes)
        .map(|k| {
            let samples: Vec<f64> = rows.iter().map(|r| stage_bits(r, k)).collect();
            Comparison::new(est.stages[k].capacity, &samples)
        })
        .collect();
    let totals: Vec<f64> = rows.iter().map(|r| r[passes - 1]).collect();
    Ok(VerifyReport {
        estimator,
        p,
        passes,
        seeds: seeds.to_vec(),
        stages,
        total: Comparison::new(est.capacity(), &totals),
        warnings,
    })
}

/// Sweep methods, in output order.
pub const SWEEP_METHODS: [&str; 4] = ["aw", "cap", "ta", "maxcap"];

/// Optimal capacity against `p` for watermarking (mean over `seeds`), CAP,
/// the tree estimator and the bound. Probabilities run in parallel; rows come
/// back ordered by `p`, then method.
pub fn sweep(
    grid: &SchemeGrid,
    img: &GrayImage,
    pairing: Pairing,
    ps: &[f64],
    max_passes: usize,
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one trial is needed".into()));
    }
    let stats = ImageStats::from_image(img, pairing)?;
    let tree = TreeEstimator::new(grid, max_passes)?;
    let bound = max_capacity_search(grid, &stats.cooc, max_passes)?;
    let px = img.pixel_count() as f64;
    let n = img.pixel_count() / 2 * max_passes;
    let per_p: Vec<Vec<SweepRow>> = ps
        .par_iter()
        .map(|&p| {
            let mut aw_bits = 0.0;
            let mut aw_passes = 0;
            for &seed in seeds {
                let wm = gen_watermark(n, p, seed)?;
                let rec = embed_multi(grid, img, pairing, &wm.bits, max_passes)?;
                aw_bits += rec.achieved_capacity as f64;
                aw_passes = aw_passes.max(rec.passes_completed);
            }
            let cap = optimal_passes(grid, &stats, p, Estimator::Cap, max_passes)?;
            let ta = optimal_passes_tree(&tree, &stats, p)?;
            let row = |method: &str, passes: usize, bits: f64| SweepRow {
                p,
                method: method.into(),
                passes,
                capacity_bits: bits,
                capacity_bpp: bits / px,
            };
            Ok(vec![
                row(SWEEP_METHODS[0], aw_passes, aw_bits / seeds.len() as f64),
                row(SWEEP_METHODS[1], cap.passes, cap.report.capacity()),
                row(SWEEP_METHODS[2], ta.passes, ta.report.capacity()),
                row(SWEEP_METHODS[3], bound.eta_max_passes, bound.eta_max),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(per_p.into_iter().flatten().collect())
}
