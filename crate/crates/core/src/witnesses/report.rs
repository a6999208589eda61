use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::symbols::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecodeMethod {
    ConvKn,
    ConvToeplitz,
    HammingBlocks,
}

impl DecodeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            DecodeMethod::ConvKn => "conv_kn",
            DecodeMethod::ConvToeplitz => "conv_toeplitz",
            DecodeMethod::HammingBlocks => "hamming_blocks",
        }
    }
}

/// What a decoder recovered about one node's hidden arrivals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeReport {
    pub node_id: usize,
    pub method: DecodeMethod,
    /// Arrival index to recovered symbol.
    pub recovered: BTreeMap<usize, Symbol>,
    /// Hidden inputs consistent with the outputs.
    pub ambiguity: BigUint,
    /// Block index to family index, for block decoders.
    pub blocks: BTreeMap<usize, usize>,
    /// Set by [`DecodeReport::verify`].
    pub ok: Option<bool>,
}

impl DecodeReport {
    pub fn new(node_id: usize, method: DecodeMethod) -> Self {
        Self {
            node_id,
            method,
            recovered: BTreeMap::new(),
            ambiguity: BigUint::one(),
            blocks: BTreeMap::new(),
            ok: None,
        }
    }

    pub fn recovered_count(&self) -> usize {
        self.recovered.len()
    }

    /// Compares every recovered symbol with the true stream.
    pub fn verify(&mut self, truth: &[Symbol]) -> bool {
        let ok = self.ambiguity >= BigUint::one()
            && self
                .recovered
                .iter()
                .all(|(&t, &s)| truth.get(t) == Some(&s));
        self.ok = Some(ok);
        ok
    }
}

#[derive(Serialize)]
struct ReportRow<'a> {
    node_id: usize,
    method: &'a str,
    recovered_count: usize,
    ambiguity: String,
    ok: &'a str,
}

/// CSV with columns `node_id, method, recovered_count, ambiguity, ok`.
pub fn write_reports_csv<W: Write>(out: W, reports: &[DecodeReport]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in reports {
        wtr.serialize(ReportRow {
            node_id: r.node_id,
            method: r.method.as_str(),
            recovered_count: r.recovered_count(),
            ambiguity: r.ambiguity.to_string(),
            ok: match r.ok {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            },
        })?;
    }
    wtr.flush()?;
    Ok(())
}
