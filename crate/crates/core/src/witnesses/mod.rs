//! Exact decoders and brute-force oracles over the hard instances.

mod conv;
mod hamming;
mod mult;
mod report;
mod sums;

pub use conv::{conv_output_at, decode_conv_kn, decode_conv_toeplitz};
pub use hamming::{
    count_distinct_hamarrays, decode_hamming_blocks, hamming_output_at, recoverable_blocks,
    recovered_hamarrays, DistinctCount,
};
pub use mult::{mult_ambiguity, mult_ambiguity_prefix, mult_f_fraction, MultFraction};
pub use report::{write_reports_csv, DecodeMethod, DecodeReport};
pub use sums::{enumerate_sums, enumerate_sums_by_multiplicity};
