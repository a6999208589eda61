//! The w-bit cell store every processor keeps its state in, and the probe
//! trace it can record.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::transfer::TransferAccumulator;
use crate::error::{Error, Result};

/// Word-addressed memory seen by a processor during one `update`.
pub trait Memory {
    fn read(&mut self, addr: u64) -> Result<u64>;
    fn write(&mut self, addr: u64, value: u64) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeOp {
    Read,
    Write,
}

/// One probe: for reads `value` is what was returned, for writes the value
/// stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProbeEvent {
    pub epoch: usize,
    pub op: ProbeOp,
    pub addr: u64,
    pub value: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProbeTrace {
    events: Vec<ProbeEvent>,
}

impl ProbeTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_events(events: Vec<ProbeEvent>) -> Self {
        Self { events }
    }

    pub fn push(&mut self, event: ProbeEvent) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[ProbeEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Epochs must be non-decreasing and below `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut last = 0usize;
        for (i, e) in self.events.iter().enumerate() {
            if e.epoch < last {
                return Err(Error::MalformedTrace(format!(
                    "event {i} has epoch {} after epoch {last}",
                    e.epoch
                )));
            }
            if e.epoch >= n {
                return Err(Error::MalformedTrace(format!(
                    "event {i} has epoch {} outside [0, {n})",
                    e.epoch
                )));
            }
            last = e.epoch;
        }
        Ok(())
    }

    /// Replays the trace, checking that every read returned the most recent
    /// write (0 if never written).
    pub fn verify_replay(&self) -> Result<()> {
        let mut cells: HashMap<u64, u64> = HashMap::new();
        for (i, e) in self.events.iter().enumerate() {
            match e.op {
                ProbeOp::Write => {
                    cells.insert(e.addr, e.value);
                }
                ProbeOp::Read => {
                    let expected = cells.get(&e.addr).copied().unwrap_or(0);
                    if expected != e.value {
                        return Err(Error::MalformedTrace(format!(
                            "event {i}: read of {} returned {} but last write was {expected}",
                            e.addr, e.value
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Memory contents after every event with `epoch <= through`.
    pub fn state_through(&self, through: usize) -> BTreeMap<u64, u64> {
        let mut cells = BTreeMap::new();
        for e in self.events.iter().take_while(|e| e.epoch <= through) {
            if e.op == ProbeOp::Write {
                cells.insert(e.addr, e.value);
            }
        }
        cells.retain(|_, v| *v != 0);
        cells
    }

    /// CSV with columns `epoch, op, addr, value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        for e in &self.events {
            wtr.serialize(e)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let events = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<ProbeEvent>, _>>()?;
        Ok(Self { events })
    }
}

/// Serializable image of a cell store (non-zero cells only).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellSnapshot {
    pub w: u32,
    pub cells: BTreeMap<u64, u64>,
}

const DENSE_LIMIT: u64 = 1 << 24;

/// Zero-initialized memory of `w`-bit cells with optional tracing.
#[derive(Debug, Clone)]
pub struct CellStore {
    w: u32,
    dense: Vec<u64>,
    sparse: HashMap<u64, u64>,
    epoch: usize,
    reads: u64,
    writes: u64,
    trace: Option<ProbeTrace>,
    transfer: Option<TransferAccumulator>,
}

impl CellStore {
    pub fn new(w: u32) -> Self {
        assert!((1..=64).contains(&w), "cell width must lie in 1..=64");
        Self {
            w,
            dense: Vec::new(),
            sparse: HashMap::new(),
            epoch: 0,
            reads: 0,
            writes: 0,
            trace: None,
            transfer: None,
        }
    }

    /// Records every probe in a [`ProbeTrace`].
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(ProbeTrace::new());
        self
    }

    /// Maintains information-transfer counts online for a tree over `n`
    /// arrivals, without keeping the raw events.
    pub fn with_transfer(mut self, n: usize) -> Self {
        self.transfer = Some(TransferAccumulator::new(n));
        self
    }

    pub fn from_snapshot(snapshot: &CellSnapshot) -> Result<Self> {
        let mut store = Self::new(snapshot.w);
        for (&addr, &value) in &snapshot.cells {
            store.check(addr, value)?;
            store.poke(addr, value);
        }
        Ok(store)
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn set_epoch(&mut self, epoch: usize) {
        debug_assert!(epoch >= self.epoch || self.probe_count() == 0);
        self.epoch = epoch;
    }

    pub fn probe_count(&self) -> u64 {
        self.reads + self.writes
    }

    pub fn read_count(&self) -> u64 {
        self.reads
    }

    pub fn write_count(&self) -> u64 {
        self.writes
    }

    pub fn trace(&self) -> Option<&ProbeTrace> {
        self.trace.as_ref()
    }

    pub fn take_trace(&mut self) -> Option<ProbeTrace> {
        self.trace.take()
    }

    pub fn transfer(&self) -> Option<&TransferAccumulator> {
        self.transfer.as_ref()
    }

    pub fn take_transfer(&mut self) -> Option<TransferAccumulator> {
        self.transfer.take()
    }

    /// Untraced read.
    pub fn peek(&self, addr: u64) -> u64 {
        if addr < DENSE_LIMIT {
            self.dense.get(addr as usize).copied().unwrap_or(0)
        } else {
            self.sparse.get(&addr).copied().unwrap_or(0)
        }
    }

    fn poke(&mut self, addr: u64, value: u64) {
        if addr < DENSE_LIMIT {
            let i = addr as usize;
            if i >= self.dense.len() {
                if value == 0 {
                    return;
                }
                self.dense.resize(i + 1, 0);
            }
            self.dense[i] = value;
        } else if value == 0 {
            self.sparse.remove(&addr);
        } else {
            self.sparse.insert(addr, value);
        }
    }

    fn check(&self, addr: u64, value: u64) -> Result<()> {
        if self.w < 64 {
            let limit = 1u64 << self.w;
            if addr >= limit {
                return Err(Error::WidthOverflow {
                    value: addr,
                    w: self.w,
                });
            }
            if value >= limit {
                return Err(Error::WidthOverflow { value, w: self.w });
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> CellSnapshot {
        let mut cells: BTreeMap<u64, u64> = self
            .dense
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(a, &v)| (a as u64, v))
            .collect();
        cells.extend(self.sparse.iter().map(|(&a, &v)| (a, v)));
        CellSnapshot { w: self.w, cells }
    }

    fn record(&mut self, op: ProbeOp, addr: u64, value: u64) {
        if let Some(trace) = self.trace.as_mut() {
            trace.push(ProbeEvent {
                epoch: self.epoch,
                op,
                addr,
                value,
            });
        }
        if let Some(acc) = self.transfer.as_mut() {
            acc.observe(self.epoch, op, addr);
        }
    }
}

impl Memory for CellStore {
    fn read(&mut self, addr: u64) -> Result<u64> {
        self.check(addr, 0)?;
        let value = self.peek(addr);
        self.reads += 1;
        self.record(ProbeOp::Read, addr, value);
        Ok(value)
    }

    fn write(&mut self, addr: u64, value: u64) -> Result<()> {
        self.check(addr, value)?;
        self.poke(addr, value);
        self.writes += 1;
        self.record(ProbeOp::Write, addr, value);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unwritten_reads_zero() {
        let mut s = CellStore::new(16).with_trace();
        assert_eq!(s.read(1234).unwrap(), 0);
    }

    #[test]
    fn write_then_read() {
        let mut s = CellStore::new(16).with_trace();
        s.write(5, 9).unwrap();
        assert_eq!(s.read(5).unwrap(), 9);
        assert_eq!(s.trace().unwrap().len(), 2);
        assert_eq!(s.probe_count(), 2);
    }

    #[test]
    fn width_is_enforced() {
        let mut s = CellStore::new(4);
        assert!(matches!(
            s.write(3, 16),
            Err(Error::WidthOverflow { value: 16, w: 4 })
        ));
        assert!(s.write(16, 1).is_err());
        assert!(s.read(16).is_err());
        assert!(s.write(15, 15).is_ok());
    }

    #[test]
    fn interleaved_writes_replay_last_writer_wins() {
        let mut s = CellStore::new(32).with_trace();
        for (epoch, (addr, value)) in [(1, 10), (2, 20), (1, 11), (3, 30), (1, 12)]
            .into_iter()
            .enumerate()
        {
            s.set_epoch(epoch);
            s.write(addr, value).unwrap();
            s.read(1).unwrap();
        }
        let trace = s.take_trace().unwrap();
        trace.verify_replay().unwrap();
        let state = trace.state_through(4);
        assert_eq!(state[&1], 12);
        assert_eq!(state[&2], 20);
        assert_eq!(trace.state_through(2)[&1], 11);
    }

    #[test]
    fn tampered_trace_fails_replay() {
        let trace = ProbeTrace::from_events(vec![
            ProbeEvent {
                epoch: 0,
                op: ProbeOp::Write,
                addr: 1,
                value: 4,
            },
            ProbeEvent {
                epoch: 0,
                op: ProbeOp::Read,
                addr: 1,
                value: 5,
            },
        ]);
        assert!(trace.verify_replay().is_err());
        let backwards = ProbeTrace::from_events(vec![
            ProbeEvent {
                epoch: 1,
                op: ProbeOp::Read,
                addr: 1,
                value: 0,
            },
            ProbeEvent {
                epoch: 0,
                op: ProbeOp::Read,
                addr: 1,
                value: 0,
            },
        ]);
        assert!(backwards.validate(4).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut s = CellStore::new(32).with_trace();
        s.write(3, 7).unwrap();
        s.set_epoch(1);
        s.read(3).unwrap();
        let trace = s.take_trace().unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "epoch,op,addr,value\n0,write,3,7\n1,read,3,7\n");
        assert_eq!(ProbeTrace::read_csv(&buf[..]).unwrap(), trace);
    }

    #[test]
    fn snapshot_restores_contents() {
        let mut s = CellStore::new(64);
        s.write(2, 5).unwrap();
        s.write(1 << 40, 6).unwrap();
        s.write(3, 0).unwrap();
        let snap = s.snapshot();
        assert_eq!(snap.cells.len(), 2);
        let restored = CellStore::from_snapshot(&snap).unwrap();
        assert_eq!(restored.peek(2), 5);
        assert_eq!(restored.peek(1 << 40), 6);
    }
}
