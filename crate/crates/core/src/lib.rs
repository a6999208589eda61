//! Streaming lower-bound laboratory: online processors for convolution,
//! multiplication and Hamming distance running on a traced cell store, the
//! information-transfer analytics over their probe traces, and the hard
//! instances and decoders that exercise them.

pub mod engines;
pub mod error;
pub mod experiments;
pub mod gf;
pub mod instances;
pub mod modular;
pub mod params;
pub mod probelab;
pub mod rng;
pub mod symbols;
pub mod window;
pub mod witnesses;

pub use error::{Error, Result};
pub use params::Params;
pub use symbols::{Role, Symbol, SymbolString};
