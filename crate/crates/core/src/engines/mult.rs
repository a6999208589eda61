//! Online multiplication: digit `t` of `F * U` in base `q`, emitted once
//! `U[0..=t]` has arrived.
//!
//! The running carry is kept in cells as base-`q` limbs. With column sums
//! bounded by `(t+1)(q-1)^2`, the carry after digit `t` stays below
//! `(t+1)(q-1)`, so `carry_limbs` limbs always suffice.

use super::conv::{check_width, read_block};
use super::kernels::{integer_conv, ConvKernel, KernelStats};
use super::relaxed::BlockPlan;
use super::{check_fixed, check_symbol, next_arrival, Algorithm, Layout, OnlineProcessor, Problem};
use crate::error::Result;
use crate::params::Params;
use crate::probelab::Memory;
use crate::symbols::{Symbol, SymbolString};

/// Limbs needed for any carry of an `n`-digit product in base `q`.
pub fn carry_limbs(n: usize, q: u64) -> usize {
    let bound = n as u128 * q as u128;
    let mut limbs = 1;
    let mut cap = q as u128;
    while cap < bound {
        cap = cap.saturating_mul(q as u128);
        limbs += 1;
    }
    limbs
}

fn read_carry(mem: &mut dyn Memory, base: u64, limbs: usize, q: u64) -> Result<u128> {
    let mut carry = 0u128;
    for k in (0..limbs).rev() {
        carry = carry * q as u128 + mem.read(base + k as u64)? as u128;
    }
    Ok(carry)
}

fn write_carry(
    mem: &mut dyn Memory,
    base: u64,
    limbs: usize,
    q: u64,
    mut carry: u128,
) -> Result<()> {
    for k in 0..limbs {
        mem.write(base + k as u64, (carry % q as u128) as u64)?;
        carry /= q as u128;
    }
    debug_assert_eq!(carry, 0);
    Ok(())
}

/// Settles column `t` given its sum, returning the digit.
fn settle(
    mem: &mut dyn Memory,
    carry_base: u64,
    limbs: usize,
    q: u64,
    column: u128,
) -> Result<u64> {
    let total = column + read_carry(mem, carry_base, limbs, q)?;
    write_carry(mem, carry_base, limbs, q, total / q as u128)?;
    Ok((total % q as u128) as u64)
}

/// Schoolbook column sums recomputed from every stored digit.
#[derive(Debug)]
pub struct MultNaive {
    fixed: SymbolString,
    params: Params,
    layout: Layout,
    counter: u64,
    input: u64,
    carry: u64,
    limbs: usize,
}

impl MultNaive {
    pub fn new(fixed: &SymbolString, params: Params) -> Result<Self> {
        check_fixed(fixed, &params)?;
        let n = params.n();
        let limbs = carry_limbs(n, params.q());
        let mut layout = Layout::default();
        let counter = layout.alloc("counter", 1);
        let input = layout.alloc("input", n as u64);
        let carry = layout.alloc("carry", limbs as u64);
        check_width(&layout, &params, params.q() as u128)?;
        Ok(Self {
            fixed: fixed.clone(),
            params,
            layout,
            counter,
            input,
            carry,
            limbs,
        })
    }
}

impl OnlineProcessor for MultNaive {
    fn problem(&self) -> Problem {
        Problem::Multiplication
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
        let t = next_arrival(mem, self.counter, self.params.n())?;
        mem.write(self.input + t as u64, x)?;
        let f = self.fixed.as_slice();
        let mut column = f[0] as u128 * x as u128;
        for j in 0..t {
            let u = mem.read(self.input + j as u64)?;
            column += f[t - j] as u128 * u as u128;
        }
        let digit = settle(mem, self.carry, self.limbs, q, column)?;
        mem.write(self.counter, t as u64 + 1)?;
        Ok(digit)
    }
}

/// Blocked relaxed multiplication: completed blocks contribute exact
/// integer column sums to pending cells ahead of time.
#[derive(Debug)]
pub struct MultFast {
    fixed: SymbolString,
    params: Params,
    layout: Layout,
    counter: u64,
    input: u64,
    pending: u64,
    carry: u64,
    limbs: usize,
    plan: BlockPlan,
    segments: Vec<Vec<u64>>,
    stats: KernelStats,
}

impl MultFast {
    pub fn new(fixed: &SymbolString, params: Params, min_block: usize) -> Result<Self> {
        check_fixed(fixed, &params)?;
        let n = params.n();
        let q = params.q();
        let plan = BlockPlan::new(n, min_block)?;
        let limbs = carry_limbs(n, q);
        let mut layout = Layout::default();
        let counter = layout.alloc("counter", 1);
        let input = layout.alloc("input", n as u64);
        let pending = layout.alloc("pending", n as u64);
        let carry = layout.alloc("carry", limbs as u64);
        let max_column = n as u128 * (q as u128 - 1) * (q as u128 - 1);
        check_width(&layout, &params, max_column.max(q as u128))?;
        let f = fixed.as_slice();
        let segments = plan.sizes().iter().map(|&s| f[s..2 * s].to_vec()).collect();
        Ok(Self {
            fixed: fixed.clone(),
            params,
            layout,
            counter,
            input,
            pending,
            carry,
            limbs,
            plan,
            segments,
            stats: KernelStats::default(),
        })
    }
}

impl OnlineProcessor for MultFast {
    fn problem(&self) -> Problem {
        Problem::Multiplication
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
        check_symbol(x, q)?;
        let n = self.params.n();
        let t = next_arrival(mem, self.counter, n)?;
        mem.write(self.input + t as u64, x)?;
        let f = self.fixed.as_slice();

        let mut column = mem.read(self.pending + t as u64)? as u128 + f[0] as u128 * x as u128;
        for d in 1..self.plan.min_block().min(t + 1) {
            let u = mem.read(self.input + (t - d) as u64)?;
            column += f[d] as u128 * u as u128;
        }
        let digit = settle(mem, self.carry, self.limbs, q, column)?;

        for (idx, (b, s)) in self.plan.completed(t).enumerate() {
            let segment = &self.segments[idx];
            if segment.iter().all(|&c| c == 0) {
                continue;
            }
            let block = read_block(mem, self.input, b, s, t, x)?;
            if block.iter().all(|&c| c == 0) {
                continue;
            }
            for (m, c) in integer_conv(&block, segment, Some(&self.stats))
                .into_iter()
                .enumerate()
            {
                let target = b + s + m;
                if target >= n {
                    break;
                }
                if c == 0 {
                    continue;
                }
                let addr = self.pending + target as u64;
                let p = mem.read(addr)?;
                mem.write(addr, p + c as u64)?;
            }
        }
        mem.write(self.counter, t as u64 + 1)?;
        Ok(digit)
    }
}

/// Route taken by [`integer_conv`] for each block size.
pub(crate) fn integer_kernel_choices(plan: &BlockPlan) -> Vec<(usize, ConvKernel)> {
    plan.sizes()
        .iter()
        .map(|&s| {
            (
                s,
                if s > 16 {
                    ConvKernel::NttCrt
                } else {
                    ConvKernel::Naive
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::reference::{from_digits, mult_outputs, to_digits};
    use crate::engines::run_stream;
    use crate::probelab::CellStore;
    use crate::rng::substream;
    use crate::symbols::Role;
    use proptest::prelude::*;
    use rand::Rng;

    fn fixed(q: u64, data: Vec<u64>) -> SymbolString {
        SymbolString::new(q, Role::Fixed, data).unwrap()
    }

    #[test]
    fn hand_example() {
        // 12 * 43 = 516
        let params = Params::new(2, 10, 32, 0).unwrap();
        let f = fixed(10, vec![2, 1]);
        assert_eq!(
            run_stream(&MultNaive::new(&f, params).unwrap(), &[3, 4])
                .unwrap()
                .0,
            vec![6, 1]
        );
        assert_eq!(
            run_stream(&MultFast::new(&f, params, 1).unwrap(), &[3, 4])
                .unwrap()
                .0,
            vec![6, 1]
        );
    }

    #[test]
    fn zero_and_one() {
        let params = Params::new(4, 10, 32, 0).unwrap();
        let u = vec![9, 8, 7, 6];
        let p = MultFast::new(&fixed(10, vec![0; 4]), params, 1).unwrap();
        assert_eq!(run_stream(&p, &u).unwrap().0, vec![0; 4]);
        let p = MultNaive::new(&fixed(10, vec![1, 0, 0, 0]), params).unwrap();
        assert_eq!(run_stream(&p, &u).unwrap().0, u);
    }

    #[test]
    fn carry_limbs_bound() {
        assert_eq!(carry_limbs(1, 10), 1);
        assert_eq!(carry_limbs(16, 2), 5);
        // worst case: all digits q-1
        for (n, q) in [(16usize, 2u64), (64, 3), (128, 16), (32, 255)] {
            let f = vec![q - 1; n];
            let params = Params::new(n, q, 64, 0).unwrap();
            let p = MultNaive::new(&fixed(q, f.clone()), params).unwrap();
            assert_eq!(run_stream(&p, &f).unwrap().0, mult_outputs(&f, &f, q));
        }
    }

    #[test]
    fn rejects_narrow_cells_for_fast() {
        // pending column sums reach 64 * 15^2 > 2^12
        let params = Params::new(64, 16, 12, 0).unwrap();
        assert!(MultFast::new(&fixed(16, vec![0; 64]), params, 1).is_err());
        assert!(MultNaive::new(&fixed(16, vec![0; 64]), params).is_ok());
    }

    #[test]
    fn prefix_property_against_bigint() {
        let mut rng = substream(11, "mult-prefix");
        for q in [2u64, 10, 16, 257] {
            let n = 256;
            let params = Params::new(n, q, 64, 0).unwrap();
            let f: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let u: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let product = from_digits(&f, q) * from_digits(&u, q);
            let mut want = to_digits(&product, q);
            want.resize(2 * n, 0);
            let got = run_stream(&MultFast::new(&fixed(q, f), params, 1).unwrap(), &u).unwrap();
            assert_eq!(got.0, want[..n]);
        }
    }

    #[test]
    fn resume_from_snapshot() {
        let q = 7;
        let n = 32;
        let params = Params::new(n, q, 32, 0).unwrap();
        let mut rng = substream(5, "mult-resume");
        let f: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        let u: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
        let p = MultFast::new(&fixed(q, f.clone()), params, 1).unwrap();
        let full = run_stream(&p, &u).unwrap().0;
        for cut in [3, 16, 30] {
            let mut store = CellStore::new(32);
            for &x in &u[..cut] {
                p.update(&mut store, x).unwrap();
            }
            let mut resumed = CellStore::from_snapshot(&store.snapshot()).unwrap();
            let fresh = MultFast::new(&fixed(q, f.clone()), params, 1).unwrap();
            let rest: Vec<u64> = u[cut..]
                .iter()
                .map(|&x| fresh.update(&mut resumed, x).unwrap())
                .collect();
            assert_eq!(rest, full[cut..]);
        }
    }

    proptest! {
        #[test]
        fn fast_matches_naive_and_oracle(
            log in 1u32..7,
            q in 2u64..40,
            mb_log in 0u32..3,
            seed in any::<u64>(),
        ) {
            let n = 1usize << log;
            let mb = 1usize << mb_log.min(log);
            let params = Params::new(n, q, 32, seed).unwrap();
            let mut rng = substream(seed, "mult-prop");
            let f: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let u: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let naive = run_stream(&MultNaive::new(&fixed(q, f.clone()), params).unwrap(), &u).unwrap();
            let fast = run_stream(&MultFast::new(&fixed(q, f.clone()), params, mb).unwrap(), &u).unwrap();
            prop_assert_eq!(&naive.0, &mult_outputs(&f, &u, q));
            prop_assert_eq!(naive, fast);
        }
    }
}
