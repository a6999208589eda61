//! Online Hamming distance between `F` and the last `n` arrivals. The
//! window is pre-filled with symbol 0 and the stream may never carry STAR.

use super::conv::{check_width, read_block};
use super::kernels::{match_conv, ConvKernel, KernelStats};
use super::mult::integer_kernel_choices;
use super::relaxed::BlockPlan;
use super::{check_fixed, check_symbol, next_arrival, Algorithm, Layout, OnlineProcessor, Problem};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::probelab::Memory;
use crate::symbols::{star, Symbol, SymbolString};

fn check_stream_symbol(x: Symbol, q: u64, t: usize) -> Result<()> {
    check_symbol(x, q)?;
    if x == star(q) {
        return Err(Error::SentinelMisuse {
            symbol: x,
            role: "stream",
            position: t,
        });
    }
    Ok(())
}

/// Compares the whole window position by position.
#[derive(Debug)]
pub struct HammingNaive {
    fixed: SymbolString,
    params: Params,
    layout: Layout,
    counter: u64,
    input: u64,
}

impl HammingNaive {
    pub fn new(fixed: &SymbolString, params: Params) -> Result<Self> {
        check_fixed(fixed, &params)?;
        let mut layout = Layout::default();
        let counter = layout.alloc("counter", 1);
        let input = layout.alloc("input", params.n() as u64);
        check_width(&layout, &params, params.q() as u128)?;
        Ok(Self {
            fixed: fixed.clone(),
            params,
            layout,
            counter,
            input,
        })
    }
}

impl OnlineProcessor for HammingNaive {
    fn problem(&self) -> Problem {
        Problem::Hamming
    }

    fn algorithm(&self) -> Algorithm {
        Algorithm::Naive
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn fixed(&self) -> &SymbolString {
        &self.fixed
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn update(&self, mem: &mut dyn Memory, x: Symbol) -> Result<u64> {
        let q = self.params.q();
        let n = self.params.n();
        let t = next_arrival(mem, self.counter, n)?;
        check_stream_symbol(x, q, t)?;
        mem.write(self.input + t as u64, x)?;
        let f = self.fixed.as_slice();
        let first = (n - 1).saturating_sub(t);
        // slots before the first arrival hold symbol 0
        let mut dist = f[..first].iter().filter(|&&c| c != 0).count() as u64;
        for i in first..n - 1 {
            let u = mem.read(self.input + (t + i + 1 - n) as u64)?;
            dist += (f[i] != u) as u64;
        }
        dist += (f[n - 1] != x) as u64;
        mem.write(self.counter, t as u64 + 1)?;
        Ok(dist)
    }
}

/// Blocked relaxed Hamming distance: completed blocks add match counts,
/// computed as sums of per-symbol indicator convolutions, to pending cells.
#[derive(Debug)]
pub struct HammingFast {
    fixed: SymbolString,
    params: Params,
    layout: Layout,
    counter: u64,
    input: u64,
    pending: u64,
    g: Vec<u64>,
    /// `prefill[t]`: lags `d > t` whose coefficient matches the symbol-0 fill.
    prefill: Vec<u64>,
    plan: BlockPlan,
    segments: Vec<Vec<u64>>,
    stats: KernelStats,
}

impl HammingFast {
    pub fn new(fixed: &SymbolString, params: Params, min_block: usize) -> Result<Self> {
        check_fixed(fixed, &params)?;
        let n = params.n();
        let plan = BlockPlan::new(n, min_block)?;
        let mut layout = Layout::default();
        let counter = layout.alloc("counter", 1);
        let input = layout.alloc("input", n as u64);
        let pending = layout.alloc("pending", n as u64);
        check_width(&layout, &params, params.q() as u128)?;
        let g: Vec<u64> = fixed.as_slice().iter().rev().copied().collect();
        let mut prefill = vec![0u64; n];
        for t in (0..n.saturating_sub(1)).rev() {
            prefill[t] = prefill[t + 1] + (g[t + 1] == 0) as u64;
        }
        let segments = plan.sizes().iter().map(|&s| g[s..2 * s].to_vec()).collect();
        Ok(Self {
            fixed: fixed.clone(),
            params,
            layout,
            counter,
            input,
            pending,
            g,
            prefill,
            plan,
            segments,
            stats: KernelStats::default(),
        })
    }
}

impl OnlineProcessor for HammingFast {
    fn problem(&self) -> Problem {
        Problem::Hamming
    }

    fn algorithm(&self) -> Algorithm {
        Algorithm::Fast
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn fixed(&self) -> &SymbolString {
        &self.fixed
    }

    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn kernel_choices(&self) -> Vec<(usize, ConvKernel)> {
        integer_kernel_choices(&self.plan)
    }

    fn kernel_mults(&self) -> u64 {
        self.stats.mults()
    }

    fn update(&self, mem: &mut dyn Memory, x: Symbol) -> Result<u64> {
        let q = self.params.q();
        let n = self.params.n();
        let t = next_arrival(mem, self.counter, n)?;
        check_stream_symbol(x, q, t)?;
        mem.write(self.input + t as u64, x)?;

        let mut matches =
            mem.read(self.pending + t as u64)? + self.prefill[t] + (self.g[0] == x) as u64;
        for d in 1..self.plan.min_block().min(t + 1) {
            let u = mem.read(self.input + (t - d) as u64)?;
            matches += (self.g[d] == u) as u64;
        }
        let out = n as u64 - matches;

        for (idx, (b, s)) in self.plan.completed(t).enumerate() {
            let block = read_block(mem, self.input, b, s, t, x)?;
            let counts = match_conv(&block, &self.segments[idx], Some(&self.stats));
            for (m, c) in counts.into_iter().enumerate() {
                let target = b + s + m;
                if target >= n {
                    break;
                }
                if c == 0 {
                    continue;
                }
                let addr = self.pending + target as u64;
                let p = mem.read(addr)?;
                mem.write(addr, p + c)?;
            }
        }
        mem.write(self.counter, t as u64 + 1)?;
        Ok(out)
    }
}
