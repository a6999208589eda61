//! Block schedule shared by the fast processors.
//!
//! Lag `d` of the output at time `t` pairs `U[t-d]` with coefficient `G[d]`.
//! Lags below `min_block` are handled on arrival. Every larger lag falls in
//! exactly one dyadic range `[s, 2s)`, and the arrival it needs belongs to
//! the aligned block `U[b..b+s)` that completes at `b + s - 1 < t`. When a
//! block completes, its product with `G[s..2s)` is scatter-added into the
//! pending cells of the future outputs it contributes to.

use crate::error::{Error, Result};
use crate::modular::is_power_of_two;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    n: usize,
    min_block: usize,
    sizes: Vec<usize>,
}

impl BlockPlan {
    pub fn new(n: usize, min_block: usize) -> Result<Self> {
        if min_block == 0 || !is_power_of_two(min_block as u64) || min_block > n {
            return Err(Error::InvalidParam(format!(
                "minimum block {min_block} must be a power of two in 1..={n}"
            )));
        }
        let mut sizes = Vec::new();
        let mut s = min_block;
        while s < n {
            sizes.push(s);
            s *= 2;
        }
        Ok(Self {
            n,
            min_block,
            sizes,
        })
    }

    pub fn min_block(&self) -> usize {
        self.min_block
    }

    /// Block sizes, smallest first.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Blocks `(start, size)` completed by arrival `t`, smallest first.
    /// Blocks whose contributions all land past `n - 1` are omitted.
    pub fn completed(&self, t: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.sizes
            .iter()
            .copied()
            .take_while(move |&s| (t + 1).is_multiple_of(s))
            .filter(move |_| t + 1 < n)
            .map(move |s| (t + 1 - s, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_lag_is_covered_once() {
        for (n, mb) in [(16usize, 1usize), (16, 4), (32, 2), (64, 8)] {
            let plan = BlockPlan::new(n, mb).unwrap();
            let mut hits = vec![vec![0u32; n]; n];
            for tau in 0..n {
                for (b, s) in plan.completed(tau) {
                    for k in 0..s {
                        let j = b + k;
                        for d in s..2 * s {
                            let t = j + d;
                            if t < n {
                                assert!(t > tau, "contribution must arrive before it is due");
                                hits[t][d] += 1;
                            }
                        }
                    }
                }
            }
            for t in 0..n {
                for d in 0..n {
                    let want = u32::from(d >= mb && d <= t);
                    assert_eq!(hits[t][d], want, "n={n} mb={mb} t={t} d={d}");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_block() {
        assert!(BlockPlan::new(16, 3).is_err());
        assert!(BlockPlan::new(16, 0).is_err());
        assert!(BlockPlan::new(16, 32).is_err());
    }
}
