//! Encoding the outputs of a node by its information transfer, and the
//! decoder that recovers them without seeing the node's left-half arrivals.
//!
//! The encoding lists each cell written in `[t0, t1]` and read in
//! `[t1+1, t2]`, with its content at the end of epoch `t1`. The decoder
//! simulates the processor on the visible arrivals before `t0`, skips
//! `[t0, t1]`, and resumes at `t1 + 1`, answering each read from the cells
//! it has touched since resuming, then the encoding, then the memory as it
//! stood before `t0`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use super::store::{CellStore, Memory, ProbeOp, ProbeTrace};
use crate::engines::{record_run, run_on_store, OnlineProcessor, Recording};
use crate::error::{Error, Result};
use crate::symbols::Symbol;
use crate::window::{slice_av, ArrivalWindow, MaskedStream, OutputArray};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IvEncoding {
    pub node_id: usize,
    pub w: u32,
    /// `(address, content at the end of t1)`, sorted by address.
    pub entries: Vec<(u64, u64)>,
}

impl IvEncoding {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// A `w`-bit count followed by `w` bits of address and `w` bits of
    /// content per entry.
    pub fn bit_size(&self) -> usize {
        self.w as usize * (1 + 2 * self.entries.len())
    }

    pub fn to_bits(&self) -> Result<BitVec<u64, Lsb0>> {
        let w = self.w as usize;
        let count = self.entries.len() as u64;
        if w < 64 && count >> w != 0 {
            return Err(Error::WidthOverflow {
                value: count,
                w: self.w,
            });
        }
        let mut bits = BitVec::<u64, Lsb0>::with_capacity(self.bit_size());
        let mut push = |x: u64| bits.extend((0..w).map(|k| (x >> k) & 1 == 1));
        push(count);
        for &(addr, value) in &self.entries {
            push(addr);
            push(value);
        }
        Ok(bits)
    }

    pub fn from_bits(node_id: usize, w: u32, bits: &BitSlice<u64, Lsb0>) -> Result<Self> {
        let wu = w as usize;
        let field = |i: usize| -> Result<u64> {
            let chunk = bits
                .get(i * wu..(i + 1) * wu)
                .ok_or_else(|| Error::Format(format!("encoding truncated at field {i}")))?;
            Ok(chunk
                .iter()
                .rev()
                .fold(0u64, |acc, b| (acc << 1) | *b as u64))
        };
        let count = field(0)? as usize;
        if bits.len() != wu * (1 + 2 * count) {
            return Err(Error::Format(format!(
                "encoding of {count} entries must have {} bits, found {}",
                wu * (1 + 2 * count),
                bits.len()
            )));
        }
        let entries = (0..count)
            .map(|k| Ok((field(1 + 2 * k)?, field(2 + 2 * k)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            node_id,
            w,
            entries,
        })
    }
}

/// Cells written in `[t0, t1]` and read in `[t1+1, t2]`.
pub fn written_read_cells(trace: &ProbeTrace, v: &ArrivalWindow) -> BTreeSet<u64> {
    let mut written = BTreeSet::new();
    let mut read = BTreeSet::new();
    for e in trace.events() {
        if (v.t0..=v.t1).contains(&e.epoch) && e.op == ProbeOp::Write {
            written.insert(e.addr);
        } else if (v.t1 + 1..=v.t2).contains(&e.epoch) && e.op == ProbeOp::Read {
            read.insert(e.addr);
        }
    }
    written.intersection(&read).copied().collect()
}

/// Encoding of node `v` from an already recorded run.
pub fn encode_from_recording(rec: &Recording, v: &ArrivalWindow) -> Result<IvEncoding> {
    let cells = written_read_cells(&rec.trace, v);
    let state: BTreeMap<u64, u64> = rec.trace.state_through(v.t1);
    Ok(IvEncoding {
        node_id: v.node_id,
        w: rec.store.w(),
        entries: cells
            .into_iter()
            .map(|a| (a, state.get(&a).copied().unwrap_or(0)))
            .collect(),
    })
}

/// Runs `u` twice, rejects a processor whose traces differ, and encodes
/// node `v`.
pub fn encode_av(
    proc: &dyn OnlineProcessor,
    u: &[Symbol],
    v: &ArrivalWindow,
) -> Result<IvEncoding> {
    let first = record_run(proc, u)?;
    check_deterministic(proc, &first)?;
    encode_from_recording(&first, v)
}

/// Replays the recorded inputs and compares the two traces event by event.
pub fn check_deterministic(proc: &dyn OnlineProcessor, rec: &Recording) -> Result<()> {
    let again = record_run(proc, &rec.inputs)?;
    let (a, b) = (rec.trace.events(), again.trace.events());
    if let Some(i) = (0..a.len().min(b.len())).find(|&i| a[i] != b[i]) {
        return Err(Error::Nondeterministic { epoch: a[i].epoch });
    }
    if a.len() != b.len() {
        let epoch = a.last().or(b.last()).map_or(0, |e| e.epoch);
        return Err(Error::Nondeterministic { epoch });
    }
    Ok(())
}

/// Where a decoder read was served from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadSource {
    Local,
    Encoding,
    Snapshot,
}

/// The memory the decoder runs the right half on.
pub struct DecoderMemory<'a> {
    w: u32,
    local: HashMap<u64, u64>,
    encoded: HashMap<u64, u64>,
    before: &'a CellStore,
    log: Vec<(u64, u64, ReadSource)>,
}

impl<'a> DecoderMemory<'a> {
    pub fn new(enc: &IvEncoding, before: &'a CellStore) -> Self {
        Self {
            w: enc.w,
            local: HashMap::new(),
            encoded: enc.entries.iter().copied().collect(),
            before,
            log: Vec::new(),
        }
    }

    /// Every read served so far, as `(addr, value, source)`.
    pub fn reads(&self) -> &[(u64, u64, ReadSource)] {
        &self.log
    }
}

impl Memory for DecoderMemory<'_> {
    fn read(&mut self, addr: u64) -> Result<u64> {
        let (value, source) = if let Some(&x) = self.local.get(&addr) {
            (x, ReadSource::Local)
        } else if let Some(&x) = self.encoded.get(&addr) {
            (x, ReadSource::Encoding)
        } else {
            (self.before.peek(addr), ReadSource::Snapshot)
        };
        self.local.insert(addr, value);
        self.log.push((addr, value, source));
        Ok(value)
    }

    fn write(&mut self, addr: u64, value: u64) -> Result<()> {
        if self.w < 64 && (value >> self.w != 0 || addr >> self.w != 0) {
            return Err(Error::WidthOverflow {
                value: value.max(addr),
                w: self.w,
            });
        }
        self.local.insert(addr, value);
        Ok(())
    }
}

/// Recovers `A_v` from the visible arrivals and the encoding alone.
pub fn decode_av(
    proc: &dyn OnlineProcessor,
    visible: &MaskedStream,
    enc: &IvEncoding,
    v: &ArrivalWindow,
) -> Result<OutputArray> {
    Ok(decode_with_log(proc, visible, enc, v)?.0)
}

fn decode_with_log(
    proc: &dyn OnlineProcessor,
    visible: &MaskedStream,
    enc: &IvEncoding,
    v: &ArrivalWindow,
) -> Result<(OutputArray, Vec<(u64, u64, ReadSource)>)> {
    if enc.node_id != v.node_id {
        return Err(Error::Mismatch(format!(
            "encoding is for node {} but decoding node {}",
            enc.node_id, v.node_id
        )));
    }
    let prefix = (0..v.t0)
        .map(|t| visible.get(t))
        .collect::<Result<Vec<_>>>()?;
    let mut before = CellStore::new(proc.params().w());
    run_on_store(proc, &mut before, &prefix, 0)?;
    let mut mem = DecoderMemory::new(enc, &before);
    let outputs = (v.t1 + 1..=v.t2)
        .map(|t| proc.update(&mut mem, visible.get(t)?))
        .collect::<Result<Vec<_>>>()?;
    let log = mem.log;
    Ok((OutputArray(outputs), log))
}

/// Encodes and decodes node `v` of a recorded run and compares against the
/// true outputs. A read the decoder answered differently from the real run
/// is reported together with the source it came from.
pub fn verify_roundtrip(
    proc: &dyn OnlineProcessor,
    rec: &Recording,
    v: &ArrivalWindow,
) -> Result<IvEncoding> {
    let enc = encode_from_recording(rec, v)?;
    let u = crate::symbols::SymbolString::new(
        proc.params().q(),
        crate::symbols::Role::Stream,
        rec.inputs.clone(),
    )?;
    let visible = MaskedStream::new(&u, v)?;
    let (decoded, log) = decode_with_log(proc, &visible, &enc, v)?;
    let truth: Vec<(u64, u64)> = rec
        .trace
        .events()
        .iter()
        .filter(|e| (v.t1 + 1..=v.t2).contains(&e.epoch) && e.op == ProbeOp::Read)
        .map(|e| (e.addr, e.value))
        .collect();
    for (k, (&(addr, value, source), &(true_addr, true_value))) in
        log.iter().zip(&truth).enumerate()
    {
        if addr != true_addr || value != true_value {
            return Err(Error::Mismatch(format!(
                "node {}: read {k} of cell {addr} served {value} from {source:?}, true run read {true_value} from cell {true_addr}",
                v.node_id
            )));
        }
    }
    let expected = slice_av(&rec.outputs, v)?;
    for (index, (&d, &e)) in decoded
        .as_slice()
        .iter()
        .zip(expected.as_slice())
        .enumerate()
    {
        if d != e {
            return Err(Error::DecodeMismatch {
                node_id: v.node_id,
                index: v.t1 + 1 + index,
                decoded: d,
                expected: e,
            });
        }
    }
    Ok(enc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{build_processor, Algorithm, Problem};
    use crate::params::Params;
    use crate::rng::substream;
    use crate::symbols::{Role, SymbolString};
    use crate::window::internal_nodes;
    use rand::Rng;

    fn make_kn(n: usize) -> Vec<u64> {
        (0..n)
            .map(|i| {
                let k = n - 1 - i;
                (k > 0 && k & (k - 1) == 0) as u64
            })
            .collect()
    }

    fn roundtrip_all(
        problem: Problem,
        algo: Algorithm,
        n: usize,
        q: u64,
        trials: u64,
        f: Option<Vec<u64>>,
    ) {
        let params = Params::new(n, q, 32, 0).unwrap();
        let mut rng = substream(n as u64, "encoding");
        for _ in 0..trials {
            let fdata = f
                .clone()
                .unwrap_or_else(|| (0..n).map(|_| rng.gen_range(0..q)).collect());
            let fixed = SymbolString::new(q, Role::Fixed, fdata).unwrap();
            let p = build_processor(problem, algo, &fixed, params).unwrap();
            let stream_q = if problem == Problem::Hamming {
                q - 1
            } else {
                q
            };
            let u: Vec<u64> = (0..n).map(|_| rng.gen_range(0..stream_q)).collect();
            let rec = record_run(p.as_ref(), &u).unwrap();
            for v in internal_nodes(n).unwrap() {
                let enc = verify_roundtrip(p.as_ref(), &rec, &v).unwrap();
                let bits = enc.to_bits().unwrap();
                assert_eq!(bits.len(), enc.bit_size());
                assert_eq!(IvEncoding::from_bits(v.node_id, 32, &bits).unwrap(), enc);
            }
        }
    }

    #[test]
    fn conv_kn_roundtrip() {
        for n in [8, 16, 32] {
            roundtrip_all(
                Problem::Convolution,
                Algorithm::Naive,
                n,
                7,
                10,
                Some(make_kn(n)),
            );
        }
    }

    #[test]
    fn all_processors_roundtrip() {
        for problem in [
            Problem::Convolution,
            Problem::Multiplication,
            Problem::Hamming,
        ] {
            for algo in [Algorithm::Naive, Algorithm::Fast] {
                roundtrip_all(problem, algo, 16, 5, 5, None);
            }
        }
    }

    #[test]
    fn zero_f_decodes() {
        roundtrip_all(
            Problem::Convolution,
            Algorithm::Naive,
            8,
            5,
            3,
            Some(vec![0; 8]),
        );
    }

    #[test]
    fn bit_size_formula() {
        let enc = IvEncoding {
            node_id: 1,
            w: 8,
            entries: vec![(1, 2), (3, 255)],
        };
        assert_eq!(enc.bit_size(), 8 + 2 * 8 * 2);
        let empty = IvEncoding {
            node_id: 1,
            w: 8,
            entries: vec![],
        };
        assert_eq!(empty.to_bits().unwrap().len(), 8);
        let bits = enc.to_bits().unwrap();
        assert!(IvEncoding::from_bits(1, 8, &bits[..20]).is_err());
    }

    #[test]
    fn encode_matches_tree_set() {
        let n = 16;
        let params = Params::new(n, 5, 32, 0).unwrap();
        let fixed = SymbolString::new(5, Role::Fixed, make_kn(n)).unwrap();
        let p = build_processor(Problem::Convolution, Algorithm::Fast, &fixed, params).unwrap();
        let u: Vec<u64> = (0..n as u64).map(|x| x % 5).collect();
        let rec = record_run(p.as_ref(), &u).unwrap();
        let tree = crate::probelab::compute_info_transfer(&rec.trace, n).unwrap();
        for v in internal_nodes(n).unwrap() {
            let enc = encode_av(p.as_ref(), &u, &v).unwrap();
            assert_eq!(
                enc.len() as u64,
                tree.iv(v.node_id, crate::probelab::TransferVariant::WrittenRead)
            );
        }
    }

    struct Flaky(Box<dyn OnlineProcessor>, std::sync::atomic::AtomicU64);

    impl OnlineProcessor for Flaky {
        fn problem(&self) -> Problem {
            self.0.problem()
        }
        fn algorithm(&self) -> Algorithm {
            self.0.algorithm()
        }
        fn params(&self) -> &Params {
            self.0.params()
        }
        fn fixed(&self) -> &SymbolString {
            self.0.fixed()
        }
        fn layout(&self) -> &crate::engines::Layout {
            self.0.layout()
        }
        fn update(&self, mem: &mut dyn Memory, x: Symbol) -> Result<u64> {
            let k = self.1.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            mem.write(1000, k)?;
            self.0.update(mem, x)
        }
    }

    #[test]
    fn nondeterminism_is_detected() {
        let params = Params::new(4, 5, 32, 0).unwrap();
        let fixed = SymbolString::new(5, Role::Fixed, vec![1; 4]).unwrap();
        let inner =
            build_processor(Problem::Convolution, Algorithm::Naive, &fixed, params).unwrap();
        let p = Flaky(inner, Default::default());
        let v = ArrivalWindow::from_node(4, 1).unwrap();
        assert!(matches!(
            encode_av(&p, &[1, 2, 3, 4], &v),
            Err(Error::Nondeterministic { .. })
        ));
    }
}
