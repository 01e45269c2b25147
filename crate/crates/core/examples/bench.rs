//! Time actual watermarking against both estimators when each answers the
//! optimal capacity question. Single-threaded.
//!
//! cargo run --release --example bench -- [image.pgm] [p]

use std::env;

use wmcap::imaging::load_pgm;
use wmcap::oracle::timing_bench;
use wmcap::{Pairing, Scheme};

fn main() -> wmcap::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/assets/camera.pgm").into());
    let p: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let img = load_pgm(&path)?;

    for scheme in [Scheme::coltuc(), Scheme::tian()] {
        let r = timing_bench(&scheme.grid(), &img, Pairing::Horizontal, p, 10, 11)?;
        println!(
            "{:<7} AW {:>8.2} ms  CAP {:>6.3} ms  TA {:>6.3} ms (tables {:.0} ms offline)  AW/TA {:>5.1}  AW/CAP {:>5.1}",
            scheme.kind().to_string(),
            r.t_aw * 1e3,
            r.t_cap * 1e3,
            r.t_ta * 1e3,
            r.t_ta_offline * 1e3,
            r.aw_over_ta,
            r.aw_over_cap
        );
    }
    Ok(())
}
