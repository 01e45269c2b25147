//! Ground truth: a complete reversible embedder and extractor for both
//! schemes, with a real arithmetic coder for the compressed streams.

mod arith;
mod embed;
mod experiments;
mod watermark;

pub use arith::{arith_decode, arith_encode};
pub use embed::{
    aux_streams, embed_multi, embed_pass, extract_and_restore, extract_pass, AuxStreamsOwned, EmbedRecord,
    EmbeddedPass, PassStats, StoppedPass, LAYOUT_VERSION,
};
pub use experiments::{
    oracle_capacities, sweep, timing_bench, variance_experiment, verify_estimate, Comparison, TimingReport,
    VarianceReport, VerifyReport, SWEEP_METHODS,
};
pub use watermark::{decode_bits, encode_bits, gen_watermark, load_bits, save_bits, Watermark};
