//! Compare the entropy model used for compressed flag and location-map
//! streams against a real adaptive arithmetic coder.
//!
//! cargo run --release --example compression

use wmcap::capacity::compressed_size;
use wmcap::oracle::{arith_decode, arith_encode, gen_watermark};

fn main() -> wmcap::Result<()> {
    println!("{:>8} {:>6} {:>12} {:>10} {:>8}", "n", "q", "n*H0", "coded", "ratio");
    for n in [1_000, 20_000, 200_000] {
        for q in [0.01, 0.1, 0.3, 0.5] {
            let bits = gen_watermark(n, q, 11)?.bits;
            let ones = bits.iter().filter(|&&b| b).count();
            let model = compressed_size(n as f64, ones as f64)?;
            let code = arith_encode(&bits);
            assert_eq!(arith_decode(&code, n)?, bits);
            println!("{n:>8} {q:>6} {model:>12.1} {:>10} {:>8.4}", code.len(), code.len() as f64 / model.max(1.0));
        }
    }
    Ok(())
}
