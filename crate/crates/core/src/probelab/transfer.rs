//! Information transfer over the balanced tree of arrivals.
//!
//! For node `v` with halves `[t0, t1]` and `[t1+1, t2]`:
//!
//! * probed/probed: cells probed in both halves;
//! * written/read: cells written in the left half and read in the right.
//!
//! Both are maintained online. A cell joins the probed/probed set of `v`
//! exactly when two consecutive distinct probe epochs of that cell have
//! `v` as their lowest common ancestor, so each cell contributes one unit
//! per consecutive pair and the sum over all nodes never exceeds the
//! number of probes.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::store::{ProbeOp, ProbeTrace};
use crate::error::{Error, Result};
use crate::modular::{floor_log2, is_power_of_two};
use crate::window::ArrivalWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferVariant {
    ProbedProbed,
    WrittenRead,
}

#[derive(Debug, Clone, Default)]
struct CellHistory {
    last_probe: Option<usize>,
    last_read: Option<usize>,
    writes: Vec<usize>,
}

impl CellHistory {
    fn written_within(&self, lo: usize, hi: usize) -> bool {
        let i = self.writes.partition_point(|&e| e < lo);
        self.writes.get(i).is_some_and(|&e| e <= hi)
    }
}

/// Streaming information-transfer counter fed one probe at a time.
#[derive(Debug, Clone)]
pub struct TransferAccumulator {
    n: usize,
    log_n: u32,
    cells: HashMap<u64, CellHistory>,
    pp: Vec<u64>,
    wr: Vec<u64>,
    sets: Option<(Vec<BTreeSet<u64>>, Vec<BTreeSet<u64>>)>,
    probes: u64,
    last_epoch: usize,
    fault: Option<Error>,
}

impl TransferAccumulator {
    pub fn new(n: usize) -> Self {
        assert!(
            n >= 2 && is_power_of_two(n as u64),
            "tree size must be a power of two >= 2"
        );
        Self {
            n,
            log_n: floor_log2(n as u64),
            cells: HashMap::new(),
            pp: vec![0; n],
            wr: vec![0; n],
            sets: None,
            probes: 0,
            last_epoch: 0,
            fault: None,
        }
    }

    /// Also keep the address sets, not just their sizes.
    pub fn with_sets(mut self) -> Self {
        self.sets = Some((vec![BTreeSet::new(); self.n], vec![BTreeSet::new(); self.n]));
        self
    }

    pub fn probes(&self) -> u64 {
        self.probes
    }

    pub fn observe(&mut self, epoch: usize, op: ProbeOp, addr: u64) {
        if self.fault.is_some() {
            return;
        }
        if epoch >= self.n || epoch < self.last_epoch {
            self.fault = Some(Error::MalformedTrace(format!(
                "epoch {epoch} after {} in a tree over {} arrivals",
                self.last_epoch, self.n
            )));
            return;
        }
        self.last_epoch = epoch;
        self.probes += 1;
        let n = self.n;
        let log_n = self.log_n;
        let cell = self.cells.entry(addr).or_default();

        if let Some(prev) = cell.last_probe {
            if prev < epoch {
                let id = ArrivalWindow::lca(n, prev, epoch);
                self.pp[id] += 1;
                if let Some((pp, _)) = self.sets.as_mut() {
                    pp[id].insert(addr);
                }
            }
        }
        cell.last_probe = Some(epoch);

        match op {
            ProbeOp::Write => {
                if cell.writes.last() != Some(&epoch) {
                    cell.writes.push(epoch);
                }
            }
            ProbeOp::Read => {
                if cell.last_read == Some(epoch) {
                    return;
                }
                let prev_read = cell.last_read;
                for k in 0..log_n {
                    if (epoch >> k) & 1 == 0 {
                        continue;
                    }
                    let t0 = (epoch >> (k + 1)) << (k + 1);
                    let t1 = t0 + (1 << k) - 1;
                    // only the first read inside the right half counts
                    if prev_read.is_some_and(|p| p > t1) {
                        continue;
                    }
                    if cell.written_within(t0, t1) {
                        let id = (1usize << (log_n - k - 1)) + (epoch >> (k + 1));
                        self.wr[id] += 1;
                        if let Some((_, wr)) = self.sets.as_mut() {
                            wr[id].insert(addr);
                        }
                    }
                }
                cell.last_read = Some(epoch);
            }
        }
    }

    pub fn finish(self) -> Result<InfoTransferTree> {
        if let Some(e) = self.fault {
            return Err(e);
        }
        let (mut pp_sets, mut wr_sets) = match self.sets {
            Some((a, b)) => (Some(a), Some(b)),
            None => (None, None),
        };
        let nodes = (1..self.n)
            .map(|id| {
                let window = ArrivalWindow::from_node(self.n, id)?;
                Ok(NodeTransfer {
                    window,
                    iv_pp: self.pp[id],
                    iv_wr: self.wr[id],
                    set_pp: pp_sets.as_mut().map(|s| std::mem::take(&mut s[id])),
                    set_wr: wr_sets.as_mut().map(|s| std::mem::take(&mut s[id])),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(InfoTransferTree {
            n: self.n,
            nodes,
            probes: self.probes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTransfer {
    pub window: ArrivalWindow,
    pub iv_pp: u64,
    pub iv_wr: u64,
    pub set_pp: Option<BTreeSet<u64>>,
    pub set_wr: Option<BTreeSet<u64>>,
}

/// Information transfer of every internal node of the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoTransferTree {
    n: usize,
    nodes: Vec<NodeTransfer>,
    probes: u64,
}

#[derive(Serialize)]
struct TreeRow {
    node_id: usize,
    t0: usize,
    t1: usize,
    t2: usize,
    ell: usize,
    #[serde(rename = "Iv_pp")]
    iv_pp: u64,
    #[serde(rename = "Iv_wr")]
    iv_wr: u64,
}

impl InfoTransferTree {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of probe events the tree was computed from.
    pub fn probes(&self) -> u64 {
        self.probes
    }

    pub fn nodes(&self) -> &[NodeTransfer] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> Option<&NodeTransfer> {
        id.checked_sub(1).and_then(|i| self.nodes.get(i))
    }

    pub fn iv(&self, id: usize, variant: TransferVariant) -> u64 {
        self.node(id).map_or(0, |nt| match variant {
            TransferVariant::ProbedProbed => nt.iv_pp,
            TransferVariant::WrittenRead => nt.iv_wr,
        })
    }

    pub fn set(&self, id: usize, variant: TransferVariant) -> Option<&BTreeSet<u64>> {
        self.node(id).and_then(|nt| match variant {
            TransferVariant::ProbedProbed => nt.set_pp.as_ref(),
            TransferVariant::WrittenRead => nt.set_wr.as_ref(),
        })
    }

    /// Sum of `I_v` over nodes with `ell_v >= ell_min`.
    pub fn sum(&self, variant: TransferVariant, ell_min: usize) -> u64 {
        self.nodes
            .iter()
            .filter(|nt| nt.window.ell >= ell_min)
            .map(|nt| self.iv(nt.window.node_id, variant))
            .sum()
    }

    /// CSV with columns `node_id, t0, t1, t2, ell, Iv_pp, Iv_wr`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        for nt in &self.nodes {
            let v = nt.window;
            wtr.serialize(TreeRow {
                node_id: v.node_id,
                t0: v.t0,
                t1: v.t1,
                t2: v.t2,
                ell: v.ell,
                iv_pp: nt.iv_pp,
                iv_wr: nt.iv_wr,
            })?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Information transfer of a recorded trace, with address sets.
pub fn compute_info_transfer(trace: &ProbeTrace, n: usize) -> Result<InfoTransferTree> {
    if n < 2 || !is_power_of_two(n as u64) {
        return Err(Error::InvalidParam(format!(
            "tree size {n} is not a power of two >= 2"
        )));
    }
    trace.validate(n)?;
    let mut acc = TransferAccumulator::new(n).with_sets();
    for e in trace.events() {
        acc.observe(e.epoch, e.op, e.addr);
    }
    acc.finish()
}

/// Sum of `I_v` over nodes with `ell_v >= ell_min`.
pub fn sum_information_transfer(
    tree: &InfoTransferTree,
    variant: TransferVariant,
    ell_min: usize,
) -> Result<u64> {
    if !is_power_of_two(ell_min as u64) {
        return Err(Error::InvalidParam(format!(
            "ell_min = {ell_min} is not a power of two"
        )));
    }
    Ok(tree.sum(variant, ell_min))
}
