//! Watermark an image over several passes, then extract and restore it.
//!
//! cargo run --release --example round_trip -- [image.pgm] [passes]

use std::env;

use wmcap::imaging::load_pgm;
use wmcap::oracle::{embed_multi, extract_and_restore, gen_watermark};
use wmcap::{Pairing, Scheme};

fn main() -> wmcap::Result<()> {
    let args: Vec<String> = env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/assets/camera.pgm").into());
    let passes: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let img = load_pgm(&path)?;

    for scheme in [Scheme::coltuc(), Scheme::tian()] {
        let wm = gen_watermark(img.pixel_count() / 2 * passes, 0.5, 7)?;
        let rec = embed_multi(&scheme.grid(), &img, Pairing::Horizontal, &wm.bits, passes)?;
        let marked = rec.watermarked.as_ref().expect("watermarked image");
        let (restored, bits) = extract_and_restore(scheme, marked, Pairing::Horizontal, rec.passes_completed)?;

        println!("{}: {} of {} passes, {} watermark bits", scheme.kind(), rec.passes_completed, passes, rec.achieved_capacity);
        for s in &rec.passes {
            println!("  pass {:?}", s);
        }
        if let Some(stop) = rec.stopped_at {
            println!("  stopped: {stop:?}");
        }
        let ok = restored == img && bits == wm.bits[..rec.achieved_capacity];
        println!("  cover restored and watermark recovered: {ok}");
        assert!(ok);
    }
    Ok(())
}
