//! Constructors for the hard instances: the power-of-two operands, Toeplitz
//! matrices, cyclic codes, vector multisets and the Hamming pipeline built
//! on them.

mod codes;
mod hamming;
mod kn;
mod toeplitz;
mod vectors;

pub use codes::{check_cyclic_code, rotate, search_cyclic_code, CodeCheck, CyclicCode};
pub use hamming::{
    blocked_indices, build_hamming_f, build_r, build_ur_family, copy_starts,
    default_rounds_per_phase, hamarray, minimal_n, populate_random, populate_uprime, round_offset,
    sample_hamming_stream, symbol_position, FamilyMember, HammingConfig, HammingInstance,
    HammingManifest, HammingStream, Populated, Provenance, RoundRecord,
};
pub use kn::{kqn_binary_lsb_first, make_kn, make_kqn, make_kqn_digits};
pub use toeplitz::{build_toeplitz, toeplitz_nonsingular_fraction, ToeplitzMatrix};
pub use vectors::{search_vector_multiset, VectorMultiset, VectorSearch};
