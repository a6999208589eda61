//! Online processors for convolution, multiplication and Hamming distance.
//!
//! A processor is an immutable description of an algorithm (its fixed
//! operand, parameters and memory layout). All state that survives between
//! arrivals lives in the [`Memory`] handed to [`OnlineProcessor::update`],
//! including the arrival counter, so a processor can be resumed from any
//! serialized cell store.

pub mod conv;
pub mod hamming;
pub mod kernels;
pub mod mult;
pub mod reference;
mod relaxed;

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::probelab::{CellStore, Memory, ProbeTrace};
use crate::symbols::{Symbol, SymbolString};
use crate::window::OutputArray;

pub use conv::{ConvFast, ConvNaive};
pub use hamming::{HammingFast, HammingNaive};
pub use mult::{MultFast, MultNaive};
pub use relaxed::BlockPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Convolution,
    Multiplication,
    Hamming,
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conv" | "convolution" => Ok(Problem::Convolution),
            "mult" | "multiplication" => Ok(Problem::Multiplication),
            "hamming" | "ham" => Ok(Problem::Hamming),
            other => Err(Error::InvalidParam(format!("unknown problem `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Naive,
    Fast,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Algorithm::Naive),
            "fast" => Ok(Algorithm::Fast),
            other => Err(Error::InvalidParam(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// A named address range in the cell store.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub base: u64,
    pub len: u64,
}

/// Which addresses hold which part of a processor's state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    regions: Vec<Region>,
    next: u64,
}

impl Layout {
    /// Bump-allocates `len` consecutive cells.
    pub fn alloc(&mut self, name: &str, len: u64) -> u64 {
        let base = self.next;
        self.regions.push(Region {
            name: name.to_string(),
            base,
            len,
        });
        self.next += len;
        base
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn cells(&self) -> u64 {
        self.next
    }

    /// Every address must itself fit in a cell.
    pub fn check_fits(&self, w: u32) -> Result<()> {
        if w < 64 && self.next > (1u64 << w) {
            return Err(Error::InvalidParam(format!(
                "layout needs {} cells but {w}-bit addresses reach only {}",
                self.next,
                1u64 << w
            )));
        }
        Ok(())
    }
}

pub trait OnlineProcessor: Send + Sync {
    fn problem(&self) -> Problem;
    fn algorithm(&self) -> Algorithm;
    fn params(&self) -> &Params;
    fn fixed(&self) -> &SymbolString;
    fn layout(&self) -> &Layout;

    /// Consumes one arrival and returns the output for it.
    fn update(&self, mem: &mut dyn Memory, x: Symbol) -> Result<u64>;

    /// Offline kernel chosen per block size, for run reports.
    fn kernel_choices(&self) -> Vec<(usize, kernels::ConvKernel)> {
        Vec::new()
    }

    /// Element multiplications spent in offline kernels so far.
    fn kernel_mults(&self) -> u64 {
        0
    }
}

pub(crate) fn check_fixed(fixed: &SymbolString, params: &Params) -> Result<()> {
    if fixed.len() != params.n() {
        return Err(Error::Mismatch(format!(
            "fixed operand has {} symbols but n = {}",
            fixed.len(),
            params.n()
        )));
    }
    if fixed.q() != params.q() {
        return Err(Error::Mismatch(format!(
            "fixed operand is over [{}] but q = {}",
            fixed.q(),
            params.q()
        )));
    }
    Ok(())
}

pub(crate) fn check_symbol(x: Symbol, q: u64) -> Result<()> {
    if x >= q {
        return Err(Error::SymbolOutOfRange { symbol: x, q });
    }
    Ok(())
}

/// Reads the arrival counter and rejects arrivals past `n`.
pub(crate) fn next_arrival(mem: &mut dyn Memory, counter: u64, n: usize) -> Result<usize> {
    let t = mem.read(counter)? as usize;
    if t >= n {
        return Err(Error::StreamExhausted { n });
    }
    Ok(t)
}

pub fn build_processor(
    problem: Problem,
    algorithm: Algorithm,
    fixed: &SymbolString,
    params: Params,
) -> Result<Box<dyn OnlineProcessor>> {
    Ok(match (problem, algorithm) {
        (Problem::Convolution, Algorithm::Naive) => Box::new(ConvNaive::new(fixed, params)?),
        (Problem::Convolution, Algorithm::Fast) => Box::new(ConvFast::new(fixed, params, 1)?),
        (Problem::Multiplication, Algorithm::Naive) => Box::new(MultNaive::new(fixed, params)?),
        (Problem::Multiplication, Algorithm::Fast) => Box::new(MultFast::new(fixed, params, 1)?),
        (Problem::Hamming, Algorithm::Naive) => Box::new(HammingNaive::new(fixed, params)?),
        (Problem::Hamming, Algorithm::Fast) => Box::new(HammingFast::new(fixed, params, 1)?),
    })
}

/// Feeds `inputs` as arrivals `first, first + 1, ...`, setting the store's
/// epoch before each update.
pub fn run_on_store(
    proc: &dyn OnlineProcessor,
    store: &mut CellStore,
    inputs: &[Symbol],
    first: usize,
) -> Result<Vec<u64>> {
    inputs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            store.set_epoch(first + i);
            proc.update(store, x)
        })
        .collect()
}

/// Runs a whole stream on a fresh untraced store.
pub fn run_stream(proc: &dyn OnlineProcessor, inputs: &[Symbol]) -> Result<OutputArray> {
    let mut store = CellStore::new(proc.params().w());
    Ok(OutputArray(run_on_store(proc, &mut store, inputs, 0)?))
}

/// Outputs, full probe trace and final store of one run.
#[derive(Debug, Clone)]
pub struct Recording {
    pub inputs: Vec<Symbol>,
    pub outputs: OutputArray,
    pub trace: ProbeTrace,
    pub store: CellStore,
}

pub fn record_run(proc: &dyn OnlineProcessor, inputs: &[Symbol]) -> Result<Recording> {
    let mut store = CellStore::new(proc.params().w()).with_trace();
    let outputs = run_on_store(proc, &mut store, inputs, 0)?;
    let trace = store.take_trace().expect("trace enabled");
    Ok(Recording {
        inputs: inputs.to_vec(),
        outputs: OutputArray(outputs),
        trace,
        store,
    })
}

#[derive(Serialize)]
struct TranscriptRow {
    t: usize,
    x: u64,
    #[serde(rename = "A_t")]
    a_t: u64,
}

/// CSV with columns `t, x, A_t`.
pub fn write_transcript<W: Write>(out: W, inputs: &[Symbol], outputs: &OutputArray) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    for (t, (&x, &a_t)) in inputs.iter().zip(outputs.as_slice()).enumerate() {
        wtr.serialize(TranscriptRow { t, x, a_t })?;
    }
    wtr.flush()?;
    Ok(())
}
