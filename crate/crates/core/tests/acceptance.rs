//! Acceptance gate. Every criterion runs at its fixed tolerance and reports
//! one PASS/FAIL line on stderr; the test fails if any criterion does.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wmcap::bounds::{build_extremal_tables, BoundTables};
use wmcap::capacity::{binary_entropy, compressed_size, estimate, Estimator};
use wmcap::cooc::{run_fixed_p, ImageStats, StageTallies};
use wmcap::imaging::partition_pairs;
use wmcap::numeric::close_rel;
use wmcap::oracle::{arith_decode, arith_encode, embed_multi, extract_and_restore, gen_watermark, timing_bench, variance_experiment};
use wmcap::schemes::StreamKind;
use wmcap::tree::{self, build_stage_tables, build_total_table, TreeEstimator};
use wmcap::{GrayImage, Pairing, PixelPair, Scheme};

use common::{image, mean, member, paths, rel_err, walk, IMAGES};

type Outcome = Result<String, String>;

fn schemes() -> [Scheme; 2] {
    [Scheme::coltuc(), Scheme::tian()]
}

fn fields(t: &StageTallies) -> [f64; 4] {
    [t.size_i, t.size_f, t.ones_f, t.ones_l]
}

fn sum_fields(ts: &[StageTallies]) -> [f64; 4] {
    let mut acc = [0.0; 4];
    for t in ts {
        for (a, v) in acc.iter_mut().zip(fields(t)) {
            *a += v;
        }
    }
    acc
}

fn horner(c: &[i16], p: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * p + v as f64)
}

fn criterion_1() -> Outcome {
    const TOL: f64 = 1e-6;
    let start = Instant::now();
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for name in IMAGES {
        let img = image(name);
        if img.width() != 512 || img.height() != 512 {
            return Err(format!("{name} is not 512x512"));
        }
        let stats = ImageStats::from_image(&img, Pairing::Horizontal).map_err(|e| e.to_string())?;
        for scheme in schemes() {
            let grid = scheme.grid();
            for passes in [1, 2, 3, 4, 6] {
                let est = TreeEstimator::new(&grid, passes).map_err(|e| e.to_string())?;
                for i in 0..=10 {
                    let p = i as f64 / 10.0;
                    let ta = est.stage_tallies(&stats.cooc, p).map_err(|e| e.to_string())?;
                    let co = run_fixed_p(&grid, &stats.cooc, p, passes).map_err(|e| e.to_string())?;
                    let mut pairs: Vec<([f64; 4], [f64; 4])> = ta.iter().zip(&co).map(|(a, b)| (fields(a), fields(b))).collect();
                    pairs.push((sum_fields(&ta), sum_fields(&co)));
                    for (a, b) in pairs {
                        for (x, y) in a.into_iter().zip(b) {
                            checked += 1;
                            worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
                            if !close_rel(x, y, TOL) {
                                return Err(format!("{name} {scheme} P={passes} p={p}: tree {x} vs cooc {y}"));
                            }
                        }
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        return Err(format!("took {elapsed:.1?}, limit 2 min"));
    }
    Ok(format!("{checked} values, worst relative gap {worst:.1e}, {elapsed:.1?}"))
}

fn criterion_2() -> Outcome {
    const TOL: f64 = 1e-9;
    const DEPTH: usize = 4;
    const PS: [f64; 5] = [0.0, 0.3, 0.5, 0.85, 1.0];
    let start = Instant::now();
    let mut checked = 0usize;
    for scheme in schemes() {
        let grid = scheme.grid();
        let raw_flags = !scheme.flag_stream_compressed();
        let est = TreeEstimator::new(&grid, DEPTH).map_err(|e| e.to_string())?;
        let bound = BoundTables::build(&grid, DEPTH).map_err(|e| e.to_string())?;
        let mut stage = Vec::new();
        let mut total = Vec::new();
        let mut extremal = Vec::new();
        for kind in StreamKind::ALL {
            for &p in &PS {
                stage.push((kind, p, build_stage_tables(&grid, kind, DEPTH, p).map_err(|e| e.to_string())?));
                for m in 1..=DEPTH {
                    total.push((kind, p, m, build_total_table(&grid, kind, m, p).map_err(|e| e.to_string())?));
                }
            }
            for m in 1..=DEPTH {
                extremal.push((kind, m, build_extremal_tables(&grid, kind, m).map_err(|e| e.to_string())?));
            }
        }
        let check = |what: &str, xi: PixelPair, got: f64, want: f64| -> Result<(), String> {
            if (got - want).abs() <= TOL {
                Ok(())
            } else {
                Err(format!("{scheme} {what} at {xi}: table {got}, enumeration {want}"))
            }
        };

        for xi in PixelPair::all() {
            let idx = xi.index();
            let ps = paths(&scheme, xi, DEPTH);
            // Membership of every node of every path, per kind.
            let marks: Vec<Vec<[f64; DEPTH]>> = StreamKind::ALL
                .iter()
                .map(|&kind| ps.iter().map(|path| std::array::from_fn(|k| member(&scheme, kind, path.nodes[k]))).collect())
                .collect();
            let kind_pos = |kind: StreamKind| StreamKind::ALL.iter().position(|&k| k == kind).unwrap();

            for (kind, p, tables) in &stage {
                let m = &marks[kind_pos(*kind)];
                for (k, t) in tables.iter().enumerate() {
                    let want: f64 = ps.iter().zip(m).map(|(path, b)| path.weight(*p) * b[k]).sum();
                    check(&format!("E({kind}, stage {k}, p={p})"), xi, t.values[idx], want)?;
                    if StreamKind::ESTIMATED.contains(kind) {
                        let poly = est.coefficients(*kind, k, idx).map_or(0.0, |c| horner(c, *p));
                        check(&format!("polynomial({kind}, stage {k}, p={p})"), xi, poly, want)?;
                    }
                    checked += 1;
                }
            }
            for (kind, p, m, table) in &total {
                let b = &marks[kind_pos(*kind)];
                let want: f64 = ps.iter().zip(b).map(|(path, b)| path.weight(*p) * b[..*m].iter().sum::<f64>()).sum();
                check(&format!("E_total({kind}, P={m}, p={p})"), xi, table.values[idx], want)?;
                checked += 1;
            }
            for (kind, m, t) in &extremal {
                let b = &marks[kind_pos(*kind)];
                for k in 0..*m {
                    let hi = b.iter().map(|v| v[k]).fold(f64::MIN, f64::max);
                    let lo = b.iter().map(|v| v[k]).fold(f64::MAX, f64::min);
                    check(&format!("M({kind}, stage {k})"), xi, t.max_stage[k][idx], hi)?;
                    check(&format!("L({kind}, stage {k})"), xi, t.min_stage[k][idx], lo)?;
                }
                let best = b.iter().map(|v| v[..*m].iter().sum::<f64>()).fold(f64::MIN, f64::max);
                check(&format!("M_total({kind}, P={m})"), xi, t.max_total[idx], best)?;
                checked += 2 * m + 1;
            }
            // Best net gain along one path: embedded bits less raw flags.
            let emb = &marks[kind_pos(StreamKind::Embed)];
            let flag = &marks[kind_pos(StreamKind::Flag)];
            for m in 1..=DEPTH {
                let best = emb
                    .iter()
                    .zip(flag)
                    .map(|(e, f)| (0..m).map(|k| e[k] - if raw_flags { f[k] } else { 0.0 }).sum::<f64>())
                    .fold(f64::MIN, f64::max);
                check(&format!("net gain P={m}"), xi, bound.net_gain(m)[idx], best)?;
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        return Err(format!("took {elapsed:.1?}, limit 5 min"));
    }
    Ok(format!("all 65536 pairs, {checked} table entries, {elapsed:.1?}"))
}

fn criterion_3() -> Outcome {
    const TRIALS: usize = 100;
    let covers: Vec<GrayImage> = IMAGES.iter().map(|n| image(n)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bits_total = 0usize;
    for scheme in schemes() {
        let grid = scheme.grid();
        for trial in 0..TRIALS {
            let src = &covers[rng.gen_range(0..covers.len())];
            let w = rng.gen_range(4..=96);
            let h = rng.gen_range(4..=96);
            let crop = src
                .crop(rng.gen_range(0..=512 - h), rng.gen_range(0..=512 - w), w, h)
                .map_err(|e| e.to_string())?;
            let p = match trial % 10 {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen::<f64>(),
            };
            let seed = rng.gen::<u64>();
            let passes = rng.gen_range(1..=4);
            let pairing = if rng.gen() { Pairing::Horizontal } else { Pairing::Vertical };
            let fail = |why: &str| format!("{scheme} trial {trial} ({w}x{h}, p={p:.3}, seed {seed}, P={passes}, {pairing:?}): {why}");

            let wm = gen_watermark(crop.pixel_count() / 2 * passes, p, seed).map_err(|e| fail(&e.to_string()))?;
            let rec = embed_multi(&grid, &crop, pairing, &wm.bits, passes).map_err(|e| fail(&e.to_string()))?;
            let marked = rec.watermarked.as_ref().ok_or_else(|| fail("no image"))?;
            let (restored, bits) =
                extract_and_restore(scheme, marked, pairing, rec.passes_completed).map_err(|e| fail(&e.to_string()))?;
            if restored != crop {
                return Err(fail("cover not restored"));
            }
            if bits[..] != wm.bits[..rec.achieved_capacity] {
                return Err(fail("watermark not recovered"));
            }
            bits_total += rec.achieved_capacity;
        }
    }
    Ok(format!("{} trials, 0 failures, {bits_total} bits recovered", 2 * TRIALS))
}

/// Oracle runs and estimates over the accuracy grid, shared by the accuracy
/// and dominance criteria.
struct Cell {
    image: &'static str,
    scheme: Scheme,
    p: f64,
    /// Cumulative watermark bits after passes 1..=3, per seed.
    oracle: Vec<[f64; 3]>,
    completed: Vec<usize>,
    cap: Vec<f64>,
    ta: Vec<f64>,
    /// Bound for exactly `P` passes, `P = 1..=3`.
    bound: Vec<f64>,
}

const ACCURACY_PASSES: usize = 3;
const ACCURACY_SEEDS: u64 = 20;

fn accuracy_grid() -> Result<Vec<Cell>, String> {
    let mut cells = Vec::new();
    for name in ["camera", "astronaut"] {
        let img = image(name);
        let stats = ImageStats::from_image(&img, Pairing::Horizontal).map_err(|e| e.to_string())?;
        for scheme in schemes() {
            let grid = scheme.grid();
            let bounds = BoundTables::build(&grid, ACCURACY_PASSES).map_err(|e| e.to_string())?;
            let bound = (1..=ACCURACY_PASSES)
                .map(|m| bounds.entry(&stats.cooc, m).map(|e| e.value))
                .collect::<wmcap::Result<Vec<_>>>()
                .map_err(|e| e.to_string())?;
            for i in 2..=8 {
                let p = i as f64 / 10.0;
                let cap = estimate(&grid, &stats, p, ACCURACY_PASSES, Estimator::Cap).map_err(|e| e.to_string())?.cumulative();
                let ta = estimate(&grid, &stats, p, ACCURACY_PASSES, Estimator::Tree).map_err(|e| e.to_string())?.cumulative();
                let mut oracle = Vec::new();
                let mut completed = Vec::new();
                for seed in 0..ACCURACY_SEEDS {
                    let wm = gen_watermark(img.pixel_count() / 2 * ACCURACY_PASSES, p, seed).map_err(|e| e.to_string())?;
                    let rec = embed_multi(&grid, &img, Pairing::Horizontal, &wm.bits, ACCURACY_PASSES).map_err(|e| e.to_string())?;
                    let cum = rec.cumulative_capacity();
                    let last = cum.last().copied().unwrap_or(0) as f64;
                    oracle.push(std::array::from_fn(|k| cum.get(k).map_or(last, |&c| c as f64)));
                    completed.push(rec.passes_completed);
                }
                cells.push(Cell {
                    image: name,
                    scheme,
                    p,
                    oracle,
                    completed,
                    cap,
                    ta,
                    bound: bound.clone(),
                });
            }
        }
    }
    Ok(cells)
}

fn oracle_mean(cell: &Cell, k: usize) -> f64 {
    mean(&cell.oracle.iter().map(|o| o[k]).collect::<Vec<_>>())
}

fn criterion_4(cells: &[Cell]) -> Outcome {
    const CAP_TOL: f64 = 0.02;
    const TA_TOL: f64 = 0.05;
    let (mut worst_cap, mut worst_ta) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for c in cells.iter().filter(|c| c.scheme == Scheme::coltuc()) {
        for k in 0..ACCURACY_PASSES {
            let truth = oracle_mean(c, k);
            let (ec, et) = (rel_err(c.cap[k], truth), rel_err(c.ta[k], truth));
            worst_cap = worst_cap.max(ec.abs());
            worst_ta = worst_ta.max(et.abs());
            if ec.abs() > CAP_TOL || et.abs() > TA_TOL {
                failures.push(format!("{} p={} P={}: CAP {:+.2}%, TA {:+.2}%", c.image, c.p, k + 1, 100.0 * ec, 100.0 * et));
            }
        }
    }
    let summary = format!("worst |CAP| {:.2}% (limit 2%), worst |TA| {:.2}% (limit 5%)", 100.0 * worst_cap, 100.0 * worst_ta);
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn criterion_5(cells: &[Cell]) -> Outcome {
    const CAP_TOL: f64 = 0.10;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut extremes = Vec::new();
    for c in cells.iter().filter(|c| c.scheme == Scheme::tian()) {
        for k in 0..ACCURACY_PASSES {
            let e = rel_err(c.cap[k], oracle_mean(c, k));
            if (0.3..=0.7 + 1e-9).contains(&c.p) {
                worst = worst.max(e.abs());
                if e.abs() > CAP_TOL {
                    failures.push(format!("{} p={} P={}: CAP {:+.2}%", c.image, c.p, k + 1, 100.0 * e));
                }
            } else if e.abs() > CAP_TOL {
                extremes.push(format!("{} p={} P={} {:+.1}%", c.image, c.p, k + 1, 100.0 * e));
            }
        }
    }
    let outside = if extremes.is_empty() {
        "no misses at p=0.2/0.8".to_string()
    } else {
        format!("outside the gate: {}", extremes.join(", "))
    };
    let summary = format!("worst |CAP| {:.2}% for p in [0.3, 0.7] (limit 10%); {outside}", 100.0 * worst);
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join("; ")))
    }
}

fn criterion_6() -> Outcome {
    const LIMIT: f64 = 0.02;
    let img = image("camera");
    let seeds: Vec<u64> = (0..20).collect();
    let mut parts = Vec::new();
    let mut ok = true;
    for scheme in schemes() {
        let r = variance_experiment(&scheme.grid(), &img, Pairing::Horizontal, 0.6, 3, &seeds).map_err(|e| e.to_string())?;
        ok &= r.std_bpp.iter().all(|&s| s <= LIMIT);
        let s: Vec<String> = r.std_bpp.iter().map(|s| format!("{s:.4}")).collect();
        parts.push(format!("{scheme} std [{}] bpp", s.join(", ")));
    }
    let summary = format!("{} (limit {LIMIT})", parts.join("; "));
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn criterion_7() -> Outcome {
    const TA_FLOOR: f64 = 20.0;
    const CAP_FLOOR: f64 = 5.0;
    let img = image("camera");
    let mut parts = Vec::new();
    let mut ok = true;
    for scheme in schemes() {
        let r = timing_bench(&scheme.grid(), &img, Pairing::Horizontal, 0.5, 10, 21).map_err(|e| e.to_string())?;
        ok &= r.aw_over_ta >= TA_FLOOR && r.aw_over_cap >= CAP_FLOOR;
        parts.push(format!(
            "{scheme}: AW {:.2} ms, CAP {:.3} ms, TA {:.3} ms, AW/TA {:.1}, AW/CAP {:.1}",
            r.t_aw * 1e3,
            r.t_cap * 1e3,
            r.t_ta * 1e3,
            r.aw_over_ta,
            r.aw_over_cap
        ));
    }
    let summary = format!("{} (floors {TA_FLOOR} and {CAP_FLOOR})", parts.join("; "));
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn criterion_8(cells: &[Cell]) -> Outcome {
    let mut checked = 0usize;
    let mut tightest = f64::MAX;
    for c in cells {
        for k in 0..ACCURACY_PASSES {
            let b = c.bound[k];
            checked += 1;
            tightest = tightest.min(b - c.ta[k]);
            if c.ta[k] > b {
                return Err(format!("{} {} p={} P={}: TA {} above bound {b}", c.image, c.scheme, c.p, k + 1, c.ta[k]));
            }
            for (o, &done) in c.oracle.iter().zip(&c.completed) {
                // A run that stopped early only used `done` passes.
                let m = done.clamp(1, k + 1);
                checked += 1;
                tightest = tightest.min(c.bound[m - 1] - o[k]);
                if o[k] > c.bound[m - 1] {
                    return Err(format!(
                        "{} {} p={} P={}: oracle {} above bound {}",
                        c.image,
                        c.scheme,
                        c.p,
                        k + 1,
                        o[k],
                        c.bound[m - 1]
                    ));
                }
            }
        }
    }
    Ok(format!("{checked} comparisons, 0 violations, smallest margin {tightest:.0} bits"))
}

fn criterion_9() -> Outcome {
    const N: usize = 100_000;
    const TOL: f64 = 0.02;
    let mut worst = 0.0f64;
    for i in 1..=10 {
        let q = i as f64 * 0.05;
        let bits = gen_watermark(N, q, 90 + i).map_err(|e| e.to_string())?.bits;
        let ones = bits.iter().filter(|&&b| b).count();
        let target = compressed_size(N as f64, ones as f64).map_err(|e| e.to_string())? + 64.0;
        let code = arith_encode(&bits);
        if arith_decode(&code, N).map_err(|e| e.to_string())? != bits {
            return Err(format!("q={q:.2}: decode mismatch"));
        }
        let gap = (code.len() as f64 - target) / target;
        worst = worst.max(gap.abs());
        if gap.abs() > TOL {
            return Err(format!("q={q:.2}: {} bits against {target:.1}", code.len()));
        }
    }
    Ok(format!("worst gap to n*H0+64 is {:.3}% (limit 2%)", 100.0 * worst))
}

fn simulate(scheme: &Scheme, img: &GrayImage, passes: usize, bit: bool) -> Vec<StageTallies> {
    let seq = partition_pairs(img, Pairing::Horizontal);
    let size_l = if scheme.has_location_map() { seq.len() as f64 } else { 0.0 };
    let mut out: Vec<StageTallies> = (0..passes)
        .map(|k| StageTallies {
            k,
            size_l,
            ..Default::default()
        })
        .collect();
    for &xi in &seq.pairs {
        for (t, node) in out.iter_mut().zip(walk(scheme, xi, passes, bit)) {
            t.size_i += member(scheme, StreamKind::Embed, node);
            t.size_f += member(scheme, StreamKind::Flag, node);
            t.ones_f += member(scheme, StreamKind::FlagOnes, node);
            t.ones_l += member(scheme, StreamKind::LocOnes, node);
        }
    }
    out
}

fn criterion_10() -> Outcome {
    const PASSES: usize = 6;
    let mut checked = 0usize;
    for name in IMAGES {
        let img = image(name);
        let stats = ImageStats::from_image(&img, Pairing::Horizontal).map_err(|e| e.to_string())?;
        for scheme in schemes() {
            let grid = scheme.grid();
            let est = TreeEstimator::new(&grid, PASSES).map_err(|e| e.to_string())?;
            for (p, bit) in [(0.0, false), (1.0, true)] {
                let truth = simulate(&scheme, &img, PASSES, bit);
                let outputs = [
                    ("cooc", run_fixed_p(&grid, &stats.cooc, p, PASSES)),
                    ("tree tables", tree::stage_tallies(&grid, &stats.cooc, p, PASSES)),
                    ("tree polynomials", est.stage_tallies(&stats.cooc, p)),
                ];
                for (label, got) in outputs {
                    let got = got.map_err(|e| e.to_string())?;
                    for (g, t) in got.iter().zip(&truth) {
                        checked += 1;
                        if fields(g) != fields(t) || g.size_l != t.size_l {
                            return Err(format!("{name} {scheme} p={p} {label} stage {}: {g:?} vs simulated {t:?}", t.k));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{checked} stages equal the per-pair simulation bit for bit"))
}

fn h0(z: f64) -> f64 {
    binary_entropy(z).expect("probability")
}

fn family(lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.gen_range(1..=24);
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

fn criterion_11() -> Outcome {
    const FAMILIES: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..FAMILIES {
        let min_h = |v: &[f64]| v.iter().map(|&z| h0(z)).fold(f64::INFINITY, f64::min);
        let max_of = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_of = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);

        let upper = family(0.5, 1.0, &mut rng);
        if min_h(&upper) != h0(max_of(&upper)) {
            return Err(format!("family {i} on [0.5, 1]: min H0 differs from H0 of max, {upper:?}"));
        }
        let lower = family(0.0, 0.5, &mut rng);
        if min_h(&lower) != h0(min_of(&lower)) {
            return Err(format!("family {i} on [0, 0.5]: min H0 differs from H0 of min, {lower:?}"));
        }
        let any = family(0.0, 1.0, &mut rng);
        if min_h(&any) < h0(max_of(&any)).min(h0(min_of(&any))) {
            return Err(format!("family {i} on [0, 1]: min H0 below both endpoint entropies, {any:?}"));
        }
    }
    Ok(format!("{FAMILIES} families for each of the three identities"))
}

fn report(id: u32, title: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d.as_str()),
        Err(d) => ("FAIL", d.as_str()),
    };
    let line = format!("[{tag}] criterion {id:>2} {title}: {detail} [{:.1?}]\n", start.elapsed());
    // Written past the test harness capture so the gate is always visible.
    std::io::stderr().write_all(line.as_bytes()).unwrap();
    outcome.is_ok()
}

#[test]
fn acceptance() {
    let cells = accuracy_grid();
    let on_grid = |f: fn(&[Cell]) -> Outcome| match &cells {
        Ok(c) => f(c),
        Err(e) => Err(format!("oracle runs failed: {e}")),
    };

    let results = [
        report(1, "tree and co-occurrence estimators agree", criterion_1),
        report(2, "tables match path enumeration", criterion_2),
        report(3, "reversibility", criterion_3),
        report(4, "coltuc estimate accuracy", || on_grid(criterion_4)),
        report(5, "tian estimate accuracy", || on_grid(criterion_5)),
        report(6, "capacity spread over watermarks", criterion_6),
        report(7, "estimator speedup", criterion_7),
        report(8, "bound dominance", || on_grid(criterion_8)),
        report(9, "arithmetic coder fidelity", criterion_9),
        report(10, "exact at p = 0 and p = 1", criterion_10),
        report(11, "entropy extremum identities", criterion_11),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
