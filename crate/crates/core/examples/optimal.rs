//! Find the pass count that maximizes estimated capacity, for every
//! estimator, next to the upper bound over all bitstreams.
//!
//! cargo run --release --example optimal -- [image.pgm] [p]

use std::env;

use wmcap::bounds::max_capacity_search;
use wmcap::capacity::{optimal_passes, Estimator};
use wmcap::cooc::ImageStats;
use wmcap::imaging::load_pgm;
use wmcap::{Pairing, Scheme};

fn main() -> wmcap::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/assets/camera.pgm").into());
    let p: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let stats = ImageStats::from_image(&load_pgm(&path)?, Pairing::Horizontal)?;

    for scheme in [Scheme::coltuc(), Scheme::tian()] {
        let grid = scheme.grid();
        println!("{}", scheme.kind());
        for method in [Estimator::Cooc, Estimator::Cap, Estimator::Tree] {
            let o = optimal_passes(&grid, &stats, p, method, 12)?;
            let traj: Vec<String> = o.trajectory.iter().map(|c| format!("{c:.0}")).collect();
            println!("  {:<5} P*={:<2} capacity {:>9.0}  stages [{}]", format!("{method:?}"), o.passes, o.report.capacity(), traj.join(", "));
        }
        let b = max_capacity_search(&grid, &stats.cooc, 12)?;
        println!("  bound P*={:<2} capacity {:>9.0}", b.eta_max_passes, b.eta_max);
    }
    Ok(())
}
