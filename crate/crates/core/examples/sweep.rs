//! Optimal capacity against the watermark bit probability for actual
//! watermarking, both estimators and the bound, as CSV.
//!
//! cargo run --release --example sweep -- [image.pgm] [scheme]

use std::env;

use wmcap::imaging::load_pgm;
use wmcap::oracle::sweep;
use wmcap::report::sweep_csv;
use wmcap::{Pairing, Scheme, SchemeKind};

fn main() -> wmcap::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/assets/camera.pgm").into());
    let kind: SchemeKind = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(SchemeKind::Coltuc);
    let scheme = Scheme::new(kind, 255)?;

    let ps: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let rows = sweep(&scheme.grid(), &load_pgm(&path)?, Pairing::Horizontal, &ps, 10, &[1, 2, 3])?;
    print!("{}", sweep_csv(&rows));
    Ok(())
}
