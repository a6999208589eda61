use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("symbol {symbol} out of range for alphabet of size {q}")]
    SymbolOutOfRange { symbol: u64, q: u64 },

    #[error("reserved sentinel {symbol} appears in a {role} string at position {position}")]
    SentinelMisuse {
        symbol: u64,
        role: &'static str,
        position: usize,
    },

    #[error("window [{t0}, {t2}] does not fit a stream of length {n}")]
    WindowOutOfRange { t0: usize, t2: usize, n: usize },

    #[error("arrival index {index} lies inside the hidden window [{start}, {end}]")]
    HiddenAccess {
        index: usize,
        start: usize,
        end: usize,
    },

    #[error("value {value} does not fit a {w}-bit cell")]
    WidthOverflow { value: u64, w: u32 },

    #[error("stream exhausted: processor sized for {n} arrivals")]
    StreamExhausted { n: usize },

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error("processor/instance mismatch: {0}")]
    Mismatch(String),

    #[error("nondeterministic processor: replay diverged at epoch {epoch}")]
    Nondeterministic { epoch: usize },

    #[error(
        "decode mismatch at node {node_id}, output {index}: decoded {decoded}, true {expected}"
    )]
    DecodeMismatch {
        node_id: usize,
        index: usize,
        decoded: u64,
        expected: u64,
    },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("singular system over Z/{q}Z (kernel dimension {kernel_dim})")]
    Singular { q: u64, kernel_dim: usize },

    #[error("position {position} is blocked by symbol {occupant}")]
    Blocked { position: usize, occupant: u64 },

    #[error("{0} is not divisible by {1}")]
    Divisibility(usize, usize),

    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error(
        "recovered Hamming array is absent from the family table (node {node_id}, block {block})"
    )]
    UnknownHamArray { node_id: usize, block: usize },

    #[error("io: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
