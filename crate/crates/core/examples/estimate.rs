//! Estimate multi-pass capacity from the co-occurrence matrix, with a fixed
//! bit probability and with the adaptive CAP probability.
//!
//! cargo run --release --example estimate -- [image.pgm] [p] [passes]

use std::env;

use wmcap::capacity::{estimate, Estimator};
use wmcap::cooc::ImageStats;
use wmcap::imaging::load_pgm;
use wmcap::{Pairing, Scheme};

fn main() -> wmcap::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/assets/camera.pgm").into());
    let p: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let passes: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);

    let img = load_pgm(&path)?;
    let stats = ImageStats::from_image(&img, Pairing::Horizontal)?;
    println!("{path}: {}x{}, {} pairs", img.width(), img.height(), stats.pair_count());

    for scheme in [Scheme::coltuc(), Scheme::tian()] {
        let grid = scheme.grid();
        for method in [Estimator::Cooc, Estimator::Cap] {
            let r = estimate(&grid, &stats, p, passes, method)?;
            println!("\n{} / {:?}", scheme.kind(), method);
            println!("{:>4} {:>10} {:>10} {:>10} {:>10} {:>11} {:>7}", "k", "|I|", "|F|", "|Fc|", "|Lc|", "capacity", "p_k");
            for s in &r.stages {
                println!(
                    "{:>4} {:>10.1} {:>10.1} {:>10.1} {:>10.1} {:>11.1} {:>7.4}",
                    s.k, s.size_i, s.size_f, s.size_fc, s.size_lc, s.capacity, s.p
                );
            }
            println!("total {:.1} bits, {:.4} bpp", r.capacity(), r.totals.capacity_bpp);
        }
    }
    Ok(())
}
