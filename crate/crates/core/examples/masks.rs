//! Write the 256x256 region masks of both schemes and print region sizes.
//! Pixel `(x, y)` of a mask is white when pair `(x, y)` belongs to the region.
//!
//! cargo run --release --example masks -- [out_dir]

use std::env;
use std::path::PathBuf;

use wmcap::imaging::save_pgm;
use wmcap::schemes::StreamKind;
use wmcap::Scheme;

fn main() -> wmcap::Result<()> {
    let dir = PathBuf::from(env::args().nth(1).unwrap_or_else(|| "masks".into()));
    std::fs::create_dir_all(&dir)?;
    for scheme in [Scheme::coltuc(), Scheme::tian()] {
        let grid = scheme.grid();
        for kind in StreamKind::ALL {
            let path = dir.join(format!("{}-{}.pgm", scheme.kind(), kind));
            save_pgm(&grid.region_mask(kind), &path)?;
            println!("{:<7} {:<8} {:>6} pairs -> {}", scheme.kind().to_string(), kind.to_string(), grid.region_size(kind), path.display());
        }
    }
    Ok(())
}
