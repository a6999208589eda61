//! Traced cell store, information-transfer analytics and the encode/decode
//! round trip built on them.

mod encoding;
mod store;
mod transfer;

pub use encoding::{
    check_deterministic, decode_av, encode_av, encode_from_recording, verify_roundtrip,
    written_read_cells, DecoderMemory, IvEncoding, ReadSource,
};
pub use store::{CellSnapshot, CellStore, Memory, ProbeEvent, ProbeOp, ProbeTrace};
pub use transfer::{
    compute_info_transfer, sum_information_transfer, InfoTransferTree, NodeTransfer,
    TransferAccumulator, TransferVariant,
};
