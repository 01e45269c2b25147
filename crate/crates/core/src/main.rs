use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use wmcap::bounds::max_capacity_search;
use wmcap::capacity::{estimate, optimal_passes, Estimator};
use wmcap::cooc::ImageStats;
use wmcap::imaging::{load_pgm, save_pgm};
use wmcap::oracle::{embed_multi, extract_and_restore, gen_watermark, save_bits, sweep, timing_bench, verify_estimate};
use wmcap::report::{sweep_csv, Envelope};
use wmcap::schemes::{StreamKind, DEFAULT_THETA_H};
use wmcap::tree::MAX_POLY_PASSES;
use wmcap::{Error, GrayImage, Pairing, Scheme, SchemeKind};

#[derive(Parser)]
#[command(name = "wmcap", version, about = "Multi-pass capacity estimation for pixel-pair reversible watermarking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate capacity for a fixed number of passes.
    Estimate(EstimateArgs),
    /// Compare an estimate with actual watermarking over several seeds.
    Verify(VerifyArgs),
    /// Optimal capacity against p for every method, as CSV.
    Sweep(SweepArgs),
    /// Upper bound over all bitstreams.
    Bound(BoundArgs),
    /// Time watermarking against both estimators.
    Bench(BenchArgs),
    /// Watermark an image, optionally checking the round trip.
    Embed(EmbedArgs),
    /// Find the number of passes that maximizes estimated capacity.
    Optimal(OptimalArgs),
    /// Write the 256x256 region masks of a scheme as PGM files.
    Masks(MasksArgs),
}

#[derive(Args, Serialize)]
struct Common {
    /// Cover image (binary or ASCII PGM, 8-bit).
    #[arg(long)]
    image: PathBuf,
    #[arg(long, default_value = "coltuc", value_parser = parse_scheme)]
    scheme: SchemeKind,
    #[arg(long, default_value_t = DEFAULT_THETA_H)]
    theta_h: u16,
    #[arg(long, default_value = "horizontal", value_parser = parse_pairing)]
    pairing: Pairing,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_probability)]
    p: f64,
    #[arg(long, value_parser = parse_passes)]
    passes: usize,
    #[arg(long, default_value = "cap", value_parser = parse_method)]
    method: Estimator,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_probability)]
    p: f64,
    #[arg(long, value_parser = parse_passes)]
    passes: usize,
    #[arg(long, default_value = "cap", value_parser = parse_method)]
    method: Estimator,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    /// First watermark seed; trial `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.1, value_parser = parse_probability)]
    p_from: f64,
    #[arg(long, default_value_t = 0.9, value_parser = parse_probability)]
    p_to: f64,
    #[arg(long, default_value_t = 0.1)]
    p_step: f64,
    #[arg(long, default_value_t = 10, value_parser = parse_poly_passes)]
    max_passes: usize,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct BoundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 8, value_parser = parse_passes)]
    max_passes: usize,
}

#[derive(Args, Serialize)]
struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0.5, value_parser = parse_probability)]
    p: f64,
    #[arg(long, default_value_t = 10, value_parser = parse_poly_passes)]
    max_passes: usize,
    #[arg(long, default_value_t = 11, value_parser = clap::value_parser!(u64).range(5..))]
    runs: u64,
}

#[derive(Args, Serialize)]
struct EmbedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_probability)]
    p: f64,
    #[arg(long, value_parser = parse_passes)]
    passes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the watermarked image here.
    #[arg(long)]
    image_out: Option<PathBuf>,
    /// Write the embedded watermark bits here.
    #[arg(long)]
    bits_out: Option<PathBuf>,
    /// Extract again and fail unless image and watermark come back exactly.
    #[arg(long)]
    verify: bool,
}

#[derive(Args, Serialize)]
struct OptimalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_probability)]
    p: f64,
    #[arg(long, default_value_t = 10, value_parser = parse_passes)]
    max_passes: usize,
    #[arg(long, default_value = "cap", value_parser = parse_method)]
    method: Estimator,
}

#[derive(Args, Serialize)]
struct MasksArgs {
    #[arg(long, default_value = "coltuc", value_parser = parse_scheme)]
    scheme: SchemeKind,
    #[arg(long, default_value_t = DEFAULT_THETA_H)]
    theta_h: u16,
    /// Directory for `<scheme>-<kind>.pgm`.
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is not a probability in [0, 1]"))
    }
}

fn parse_passes(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("'{s}' is not a pass count of at least 1")),
    }
}

fn parse_poly_passes(s: &str) -> Result<usize, String> {
    let n = parse_passes(s)?;
    if n <= MAX_POLY_PASSES {
        Ok(n)
    } else {
        Err(format!("at most {MAX_POLY_PASSES} passes are tabulated"))
    }
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pairing(s: &str) -> Result<Pairing, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Estimator, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load(common: &Common) -> wmcap::Result<(Scheme, GrayImage)> {
    let scheme = Scheme::new(common.scheme, common.theta_h)?;
    Ok((scheme, load_pgm(&common.image)?))
}

fn emit(text: &str, out: Option<&Path>) -> wmcap::Result<()> {
    print!("{text}");
    if let Some(path) = out {
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn seeds(first: u64, trials: u64) -> Vec<u64> {
    (first..first + trials).collect()
}

fn run(command: Command) -> wmcap::Result<()> {
    match command {
        Command::Estimate(a) => {
            let (scheme, img) = load(&a.common)?;
            let stats = ImageStats::from_image(&img, a.common.pairing)?;
            let report = estimate(&scheme.grid(), &stats, a.p, a.passes, a.method)?;
            emit(&Envelope::new("estimate", &a, report).to_json()?, a.common.out.as_deref())
        }
        Command::Verify(a) => {
            let (scheme, img) = load(&a.common)?;
            let s = seeds(a.seed, a.trials);
            let report = verify_estimate(&scheme.grid(), &img, a.common.pairing, a.p, a.passes, a.method, &s)?;
            emit(&Envelope::new("verify", &a, report).to_json()?, a.common.out.as_deref())
        }
        Command::Sweep(a) => {
            if a.p_step.is_nan() || a.p_step <= 0.0 || a.p_from > a.p_to {
                return Err(Error::InvalidArgument("the p range must be increasing with a positive step".into()));
            }
            let (scheme, img) = load(&a.common)?;
            // Integer steps keep the grid free of accumulated rounding.
            let steps = ((a.p_to - a.p_from) / a.p_step + 1e-9).floor() as usize;
            let ps: Vec<f64> = (0..=steps)
                .map(|i| ((a.p_from + i as f64 * a.p_step) * 1e9).round() / 1e9)
                .collect();
            let rows = sweep(&scheme.grid(), &img, a.common.pairing, &ps, a.max_passes, &seeds(a.seed, a.trials))?;
            emit(&sweep_csv(&rows), a.common.out.as_deref())
        }
        Command::Bound(a) => {
            let (scheme, img) = load(&a.common)?;
            let stats = ImageStats::from_image(&img, a.common.pairing)?;
            let report = max_capacity_search(&scheme.grid(), &stats.cooc, a.max_passes)?;
            emit(&Envelope::new("bound", &a, report).to_json()?, a.common.out.as_deref())
        }
        Command::Bench(a) => {
            let (scheme, img) = load(&a.common)?;
            let report = timing_bench(&scheme.grid(), &img, a.common.pairing, a.p, a.max_passes, a.runs as usize)?;
            emit(&Envelope::new("bench", &a, report).to_json()?, a.common.out.as_deref())
        }
        Command::Embed(a) => {
            let (scheme, img) = load(&a.common)?;
            let grid = scheme.grid();
            let wm = gen_watermark(img.pixel_count() / 2 * a.passes, a.p, a.seed)?;
            let record = embed_multi(&grid, &img, a.common.pairing, &wm.bits, a.passes)?;
            let marked = record.watermarked.as_ref().expect("embedder returns the image");
            if let Some(path) = &a.image_out {
                save_pgm(marked, path)?;
            }
            if let Some(path) = &a.bits_out {
                save_bits(&wm.bits[..record.achieved_capacity], path)?;
            }
            if a.verify {
                let (restored, bits) = extract_and_restore(scheme, marked, a.common.pairing, record.passes_completed)?;
                if restored != img || bits[..] != wm.bits[..record.achieved_capacity] {
                    return Err(Error::InvalidArgument("round trip did not restore the cover and watermark".into()));
                }
            }
            emit(&Envelope::new("embed", &a, &record).to_json()?, a.common.out.as_deref())
        }
        Command::Optimal(a) => {
            let (scheme, img) = load(&a.common)?;
            let stats = ImageStats::from_image(&img, a.common.pairing)?;
            let report = optimal_passes(&scheme.grid(), &stats, a.p, a.method, a.max_passes)?;
            emit(&Envelope::new("optimal", &a, report).to_json()?, a.common.out.as_deref())
        }
        Command::Masks(a) => {
            let grid = Scheme::new(a.scheme, a.theta_h)?.grid();
            std::fs::create_dir_all(&a.out_dir)?;
            let mut written = Vec::new();
            for kind in StreamKind::ALL {
                let path = a.out_dir.join(format!("{}-{}.pgm", a.scheme, kind));
                save_pgm(&grid.region_mask(kind), &path)?;
                written.push(path);
            }
            emit(&Envelope::new("masks", &a, written).to_json()?, None)
        }
    }
}
