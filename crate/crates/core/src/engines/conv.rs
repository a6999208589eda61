//! Online convolution: `A[t] = sum_i F[i] U[t-(n-1)+i] mod q`.

use super::kernels::{offline_conv_with, select_kernel, ConvKernel, KernelStats};
use super::relaxed::BlockPlan;
use super::{check_fixed, check_symbol, next_arrival, Algorithm, Layout, OnlineProcessor, Problem};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::probelab::Memory;
use crate::symbols::{Symbol, SymbolString};

/// Rejects layouts whose addresses or counter values do not fit a cell.
pub(crate) fn check_width(layout: &Layout, params: &Params, max_value: u128) -> Result<()> {
    layout.check_fits(params.w())?;
    let limit = 1u128 << params.w();
    let needed = max_value.max(params.n() as u128);
    if needed >= limit {
        return Err(Error::InvalidParam(format!(
            "cells of {} bits cannot hold values up to {needed}",
            params.w()
        )));
    }
    Ok(())
}

/// Reads `U[b..b+s)` back from the input region; `U[t] = x` is known.
pub(crate) fn read_block(
    mem: &mut dyn Memory,
    input: u64,
    b: usize,
    s: usize,
    t: usize,
    x: Symbol,
) -> Result<Vec<u64>> {
    (b..b + s)
        .map(|j| {
            if j == t {
                Ok(x)
            } else {
                mem.read(input + j as u64)
            }
        })
        .collect()
}

/// Keeps every arrival and recomputes the inner product from scratch.
#[derive(Debug)]
pub struct ConvNaive {
    fixed: SymbolString,
    params: Params,
    layout: Layout,
    counter: u64,
    input: u64,
}

impl ConvNaive {
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

impl OnlineProcessor for ConvNaive {
    fn problem(&self) -> Problem {
        Problem::Convolution
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
        check_symbol(x, q)?;
        let n = self.params.n();
        let t = next_arrival(mem, self.counter, n)?;
        mem.write(self.input + t as u64, x)?;
        let f = self.fixed.as_slice();
        let mut acc: u128 = f[n - 1] as u128 * x as u128;
        // window slot i holds U[t-(n-1)+i]; earlier slots are zero
        for i in (n - 1).saturating_sub(t)..n - 1 {
            let pos = t + i + 1 - n;
            let u = mem.read(self.input + pos as u64)?;
            acc += f[i] as u128 * u as u128;
        }
        mem.write(self.counter, t as u64 + 1)?;
        Ok((acc % q as u128) as u64)
    }
}

/// Blocked relaxed convolution: each completed aligned block is multiplied
/// offline against the matching coefficient segment and the results wait in
/// pending cells until their output is due.
#[derive(Debug)]
pub struct ConvFast {
    fixed: SymbolString,
    params: Params,
    layout: Layout,
    counter: u64,
    input: u64,
    pending: u64,
    /// `g[d] = F[n-1-d]`: coefficient of lag `d`.
    g: Vec<u64>,
    plan: BlockPlan,
    /// `G[s..2s)` and its kernel for each block size.
    segments: Vec<(Vec<u64>, ConvKernel)>,
    stats: KernelStats,
}

impl ConvFast {
    pub fn new(fixed: &SymbolString, params: Params, min_block: usize) -> Result<Self> {
        check_fixed(fixed, &params)?;
        let n = params.n();
        let q = params.q();
        let plan = BlockPlan::new(n, min_block)?;
        let mut layout = Layout::default();
        let counter = layout.alloc("counter", 1);
        let input = layout.alloc("input", n as u64);
        let pending = layout.alloc("pending", n as u64);
        check_width(&layout, &params, q as u128)?;
        let g: Vec<u64> = fixed.as_slice().iter().rev().copied().collect();
        let segments = plan
            .sizes()
            .iter()
            .map(|&s| (g[s..2 * s].to_vec(), select_kernel(q, s, s)))
            .collect();
        Ok(Self {
            fixed: fixed.clone(),
            params,
            layout,
            counter,
            input,
            pending,
            g,
            plan,
            segments,
            stats: KernelStats::default(),
        })
    }

    pub fn stats(&self) -> &KernelStats {
        &self.stats
    }
}

impl OnlineProcessor for ConvFast {
    fn problem(&self) -> Problem {
        Problem::Convolution
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
        self.plan
            .sizes()
            .iter()
            .zip(&self.segments)
            .map(|(&s, (_, k))| (s, *k))
            .collect()
    }

    fn kernel_mults(&self) -> u64 {
        self.stats.mults()
    }

    fn update(&self, mem: &mut dyn Memory, x: Symbol) -> Result<u64> {
        let q = self.params.q();
        check_symbol(x, q)?;
        let n = self.params.n();
        let t = next_arrival(mem, self.counter, n)?;
        mem.write(self.input + t as u64, x)?;

        let mut acc = mem.read(self.pending + t as u64)? as u128 + self.g[0] as u128 * x as u128;
        for d in 1..self.plan.min_block().min(t + 1) {
            let u = mem.read(self.input + (t - d) as u64)?;
            acc += self.g[d] as u128 * u as u128;
        }
        let out = (acc % q as u128) as u64;

        for (idx, (b, s)) in self.plan.completed(t).enumerate() {
            let (segment, kernel) = &self.segments[idx];
            if segment.iter().all(|&c| c == 0) {
                continue;
            }
            let block = read_block(mem, self.input, b, s, t, x)?;
            if block.iter().all(|&c| c == 0) {
                continue;
            }
            let prod = offline_conv_with(&block, segment, q, *kernel, Some(&self.stats))?;
            for (m, &c) in prod.iter().enumerate() {
                let target = b + s + m;
                if target >= n {
                    break;
                }
                if c == 0 {
                    continue;
                }
                let addr = self.pending + target as u64;
                let p = mem.read(addr)?;
                mem.write(addr, (p + c) % q)?;
            }
        }
        mem.write(self.counter, t as u64 + 1)?;
        Ok(out)
    }
}
