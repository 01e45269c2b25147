//! Upper bound on multi-pass capacity over every possible bitstream.
//!
//! The bound replaces each expectation of the tree estimator by the extreme
//! value over all paths of the pair's tree: the most embeddable bits a pair
//! can contribute, and the smallest and largest bit it can show at each
//! stage. Entropy terms are then bounded from below through the ones ratio
//! intervals those extremes imply.

use serde::{Deserialize, Serialize};

use crate::capacity::entropy_unchecked;
use crate::cooc::CoocMatrix;
use crate::error::{Error, Result};
use crate::imaging::PAIR_DOMAIN;
use crate::numeric::CompensatedSum;
use crate::schemes::{Scheme, SchemeGrid, StreamKind};

fn extremal_step(grid: &SchemeGrid, prev: &[f64], pick: fn(f64, f64) -> f64) -> Vec<f64> {
    (0..PAIR_DOMAIN)
        .map(|i| {
            let a = prev[grid.next(i, false)];
            if grid.embeddable(i) {
                pick(a, prev[grid.next(i, true)])
            } else {
                a
            }
        })
        .collect()
}

/// Path extremes of one stream kind.
#[derive(Debug, Clone)]
pub struct ExtremalTables {
    pub scheme: Scheme,
    pub kind: StreamKind,
    pub passes: usize,
    /// `M_P^size(ξ)`: largest number of bits over the first `P` passes.
    pub max_total: Vec<f64>,
    /// `M(ξ, B_k)` for `k < P`.
    pub max_stage: Vec<Vec<f64>>,
    /// `L(ξ, B_k)` for `k < P`.
    pub min_stage: Vec<Vec<f64>>,
}

pub fn build_extremal_tables(grid: &SchemeGrid, kind: StreamKind, passes: usize) -> Result<ExtremalTables> {
    if passes == 0 {
        return Err(Error::InvalidArgument("pass count must be at least 1".into()));
    }
    let base = grid.indicator(kind);
    let mut max_stage = vec![base.clone()];
    let mut min_stage = vec![base.clone()];
    for k in 1..passes {
        max_stage.push(extremal_step(grid, &max_stage[k - 1], f64::max));
        min_stage.push(extremal_step(grid, &min_stage[k - 1], f64::min));
    }
    Ok(ExtremalTables {
        scheme: grid.scheme(),
        kind,
        passes,
        max_total: max_path_sum(grid, &base, passes),
        max_stage,
        min_stage,
    })
}

/// `max_s Σ_{k<P} w(s[k])` for a per-node weight `w`.
fn max_path_sum(grid: &SchemeGrid, weight: &[f64], passes: usize) -> Vec<f64> {
    let mut t = weight.to_vec();
    for _ in 1..passes {
        t = extremal_step(grid, &t, f64::max);
        for (v, w) in t.iter_mut().zip(weight) {
            *v += w;
        }
    }
    t
}

/// Per-pair best net gain: embedded bits minus raw flag bits along the
/// same path. Taking the two maxima separately would not bound the
/// difference.
fn net_weight(grid: &SchemeGrid) -> Vec<f64> {
    let emb = grid.indicator(StreamKind::Embed);
    if grid.scheme().flag_stream_compressed() {
        return emb;
    }
    let flag = grid.indicator(StreamKind::Flag);
    emb.iter().zip(&flag).map(|(e, f)| e - f).collect()
}

/// One `P` of the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub passes: usize,
    pub value: f64,
    /// `Σ_j max_s (size(I) - size(F))`.
    pub gain: f64,
    /// Lower bounds on the compressed location map, per stage.
    pub loc_terms: Vec<f64>,
    /// Lower bounds on the compressed flag stream, per stage.
    pub flag_terms: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub scheme: String,
    pub theta_h: u16,
    pub entries: Vec<BoundEntry>,
    pub eta_max: f64,
    pub eta_max_passes: usize,
    /// The search reached its pass limit while still increasing.
    pub hit_limit: bool,
}

/// Everything the bound needs up to a pass limit. Stage terms do not depend
/// on `P`, so one build serves every `P` up to the limit.
#[derive(Debug, Clone)]
pub struct BoundTables {
    scheme: Scheme,
    passes: usize,
    /// `net[m-1]` is the best net gain over `m` passes.
    net: Vec<Vec<f64>>,
    loc: Option<ExtremalTables>,
    flag_size: ExtremalTables,
    flag_ones: ExtremalTables,
    flag_zeros: ExtremalTables,
}

impl BoundTables {
    pub fn build(grid: &SchemeGrid, passes: usize) -> Result<Self> {
        if passes == 0 {
            return Err(Error::InvalidArgument("pass count must be at least 1".into()));
        }
        let w = net_weight(grid);
        let mut net = vec![w.clone()];
        for m in 1..passes {
            let mut t = extremal_step(grid, &net[m - 1], f64::max);
            for (v, x) in t.iter_mut().zip(&w) {
                *v += x;
            }
            net.push(t);
        }
        let scheme = grid.scheme();
        Ok(Self {
            scheme,
            passes,
            net,
            loc: if scheme.has_location_map() {
                Some(build_extremal_tables(grid, StreamKind::LocOnes, passes)?)
            } else {
                None
            },
            flag_size: build_extremal_tables(grid, StreamKind::Flag, passes)?,
            flag_ones: build_extremal_tables(grid, StreamKind::FlagOnes, passes)?,
            flag_zeros: build_extremal_tables(grid, StreamKind::FlagZeros, passes)?,
        })
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    pub fn net_gain(&self, passes: usize) -> &[f64] {
        &self.net[passes - 1]
    }

    pub fn entry(&self, c0: &CoocMatrix, passes: usize) -> Result<BoundEntry> {
        if passes == 0 || passes > self.passes {
            return Err(Error::InvalidArgument(format!(
                "bound tables cover 1..={} passes, not {passes}",
                self.passes
            )));
        }
        let n = c0.total();
        let sum = |t: &[f64]| weighted(c0, t);
        let gain = sum(&self.net[passes - 1]);
        let mut loc_terms = Vec::new();
        let mut flag_terms = Vec::new();
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        for k in 0..passes {
            if let Some(loc) = &self.loc {
                // The ones fraction of the map lies in [lo, hi]; the entropy is
                // concave, so its minimum over the interval is at an end.
                let hi = ratio(sum(&loc.max_stage[k]), n);
                let lo = ratio(sum(&loc.min_stage[k]), n);
                loc_terms.push(n * entropy_unchecked(hi).min(entropy_unchecked(lo)));
            }
            let m_ones = sum(&self.flag_ones.max_stage[k]);
            let l_ones = sum(&self.flag_ones.min_stage[k]);
            let m_zeros = sum(&self.flag_zeros.max_stage[k]);
            let l_zeros = sum(&self.flag_zeros.min_stage[k]);
            let a = entropy_unchecked(ratio(m_ones, m_ones + l_zeros));
            let b = entropy_unchecked(ratio(l_ones, l_ones + m_zeros));
            alpha.push(a);
            beta.push(b);
            if self.scheme.flag_stream_compressed() {
                flag_terms.push(sum(&self.flag_size.min_stage[k]) * a.min(b));
            }
        }
        let value = gain - loc_terms.iter().sum::<f64>() - flag_terms.iter().sum::<f64>();
        Ok(BoundEntry {
            passes,
            value,
            gain,
            loc_terms,
            flag_terms,
            alpha,
            beta,
        })
    }
}

/// `a / b`, with an empty stream giving 0.
fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        (a / b).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn weighted(c0: &CoocMatrix, t: &[f64]) -> f64 {
    c0.raw_entries()
        .iter()
        .map(|&(i, c)| c * t[i as usize])
        .collect::<CompensatedSum>()
        .value()
}

/// The bound for exactly `passes` passes.
pub fn bound_capacity(grid: &SchemeGrid, c0: &CoocMatrix, passes: usize) -> Result<BoundEntry> {
    BoundTables::build(grid, passes)?.entry(c0, passes)
}

/// Evaluates `P = 1, 2, ...` until the bound stops increasing or the limit
/// is reached.
pub fn max_capacity_search(grid: &SchemeGrid, c0: &CoocMatrix, pass_limit: usize) -> Result<BoundReport> {
    let tables = BoundTables::build(grid, pass_limit)?;
    search_with(&tables, c0, pass_limit)
}

pub fn search_with(tables: &BoundTables, c0: &CoocMatrix, pass_limit: usize) -> Result<BoundReport> {
    let mut entries: Vec<BoundEntry> = Vec::new();
    let mut hit_limit = true;
    for passes in 1..=pass_limit {
        let e = tables.entry(c0, passes)?;
        let stop = entries.last().is_some_and(|prev| e.value <= prev.value);
        entries.push(e);
        if stop {
            hit_limit = false;
            break;
        }
    }
    let (best, _) = entries
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, e)| if e.value > acc.1 { (i, e.value) } else { acc });
    Ok(BoundReport {
        scheme: tables.scheme.kind().to_string(),
        theta_h: tables.scheme.theta_h(),
        eta_max: entries[best].value,
        eta_max_passes: entries[best].passes,
        entries,
        hit_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::PixelPair;

    fn single(x: u8, y: u8) -> CoocMatrix {
        CoocMatrix::from_entries([(PixelPair::new(x, y), 1.0)]).unwrap()
    }

    #[test]
    fn coltuc_extremes_from_the_10_12_tree() {
        let g = Scheme::coltuc().grid();
        let t = build_extremal_tables(&g, StreamKind::Embed, 4).unwrap();
        assert_eq!(t.max_total[PixelPair::new(10, 12).index()], 3.0);
        assert_eq!(t.max_total[PixelPair::new(5, 18).index()], 0.0);
        let t1 = build_extremal_tables(&g, StreamKind::Embed, 1).unwrap();
        assert_eq!(t1.max_total, g.indicator(StreamKind::Embed));
    }

    #[test]
    fn coltuc_single_pair_search() {
        let g = Scheme::coltuc().grid();
        let r = max_capacity_search(&g, &single(10, 12), 8).unwrap();
        let values: Vec<f64> = r.entries.iter().map(|e| e.value).collect();
        assert_eq!(values, vec![1.0, 2.0, 3.0, 2.0]);
        assert_eq!((r.eta_max, r.eta_max_passes, r.hit_limit), (3.0, 3, false));
        // Raw flags only: no entropy terms.
        assert!(r.entries.iter().all(|e| e.loc_terms.is_empty() && e.flag_terms.is_empty()));
    }

    #[test]
    fn inert_pair_bounds_to_zero() {
        let g = Scheme::tian().grid();
        let r = max_capacity_search(&g, &single(0, 255), 5).unwrap();
        assert_eq!((r.eta_max, r.eta_max_passes), (0.0, 1));
        assert_eq!(r.entries.len(), 2);
    }
}
