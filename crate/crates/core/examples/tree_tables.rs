//! Build the offline polynomial tables once, then answer several bit
//! probabilities for one image with a weighted sum each.
//!
//! cargo run --release --example tree_tables -- [image.pgm]

use std::env;
use std::time::Instant;

use wmcap::cooc::{run_fixed_p, ImageStats};
use wmcap::imaging::load_pgm;
use wmcap::schemes::StreamKind;
use wmcap::tree::TreeEstimator;
use wmcap::{Pairing, PixelPair, Scheme};

fn main() -> wmcap::Result<()> {
    let path = env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/assets/camera.pgm").into());
    let img = load_pgm(&path)?;
    let stats = ImageStats::from_image(&img, Pairing::Horizontal)?;
    let grid = Scheme::tian().grid();
    let passes = 4;

    let t = Instant::now();
    let est = TreeEstimator::new(&grid, passes)?;
    println!("tables for {passes} passes built in {:.2?}", t.elapsed());

    // Expected flag count at the last pass for the first pair whose
    // polynomial in p reaches full degree.
    let k = passes - 1;
    let shown = PixelPair::all()
        .map(|xi| (xi, est.coefficients(StreamKind::Flag, k, xi.index())))
        .find(|(_, c)| c.is_some_and(|c| c.len() == k + 1 && c[k] != 0));
    if let Some((xi, Some(c))) = shown {
        println!("E[|F| at pass {k} | start {xi}] coefficients, lowest degree first: {c:?}");
    }

    for p in [0.1, 0.5, 0.9] {
        let t = Instant::now();
        let tree = est.stage_tallies(&stats.cooc, p)?;
        let dt = t.elapsed();
        let cooc = run_fixed_p(&grid, &stats.cooc, p, passes)?;
        println!("\np = {p} (tree sum in {dt:.2?})");
        for (a, b) in tree.iter().zip(&cooc) {
            println!("  k={} |I| tree {:>10.2} cooc {:>10.2}   |F| tree {:>9.2} cooc {:>9.2}", a.k, a.size_i, b.size_i, a.size_f, b.size_f);
        }
    }
    Ok(())
}
