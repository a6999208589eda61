//! Block recovery for the Hamming construction and HamArray counting.
//!
//! At time `t` the copy of `R` at distance `i` from the end of `F` is
//! aligned with `U[t - i .. t - i + r)`. A family block starting at `b0`
//! yields `HamArray[k]` at `t = b0 + k + i` whenever that time is an output
//! of the node and no other copy looks into the hidden window.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::report::{DecodeMethod, DecodeReport};
use crate::error::{Error, Result};
use crate::instances::{copy_starts, hamarray, HammingInstance};
use crate::rng::substream;
use crate::symbols::{diamond, Symbol};
use crate::window::{ArrivalWindow, MaskedStream, OutputArray};

/// Output `t` of the Hamming distance against `u`, with the window
/// pre-filled with symbol 0.
pub fn hamming_output_at(f: &[Symbol], u: &[Symbol], t: usize) -> u64 {
    let n = f.len();
    (0..n)
        .filter(|&i| {
            let s = (t + i + 1).checked_sub(n).map_or(0, |pos| u[pos]);
            f[i] != s
        })
        .count() as u64
}

/// Family blocks inside the hidden window that some copy of `R` reads in
/// isolation during the node's outputs: pairs `(block index, copy distance)`.
pub fn recoverable_blocks(n: usize, r: usize, v: &ArrivalWindow) -> Vec<(usize, usize)> {
    let width = 2 * r;
    let distances: Vec<usize> = copy_starts(n, r).iter().map(|&s| n - 1 - s).collect();
    let isolated = |t: usize, i: usize| {
        distances
            .iter()
            .filter(|&&j| j != i)
            .all(|&j| match t.checked_sub(j) {
                // windows starting before the stream read only the pre-fill
                None => t + r <= j || t + r - 1 - j < v.t0,
                Some(lo) => lo + r - 1 < v.t0 || lo > v.t1,
            })
    };
    let mut out = Vec::new();
    for block in 0..n / width {
        let b0 = block * width;
        if b0 < v.t0 || b0 + width - 1 > v.t1 {
            continue;
        }
        let copy = distances.iter().copied().find(|&i| {
            (0..=r).all(|k| {
                let t = b0 + k + i;
                t > v.t1 && t <= v.t2 && isolated(t, i)
            })
        });
        if let Some(i) = copy {
            out.push((block, i));
        }
    }
    out
}

/// `A[t] - B[t] + r` for the recoverable blocks, where `B` is the run with
/// the hidden window filled by `placeholder`.
pub fn recovered_hamarrays(
    a: &OutputArray,
    v: &ArrivalWindow,
    f: &[Symbol],
    r: usize,
    visible: &MaskedStream,
    placeholder: Symbol,
) -> Result<Vec<(usize, Vec<u64>)>> {
    let n = f.len();
    if a.len() != n || visible.len() != n {
        return Err(Error::Mismatch(format!(
            "{} outputs and {} arrivals for an operand of length {n}",
            a.len(),
            visible.len()
        )));
    }
    let filled = visible.filled(placeholder);
    recoverable_blocks(n, r, v)
        .into_iter()
        .map(|(block, i)| {
            let b0 = block * 2 * r;
            let h = (0..=r)
                .map(|k| {
                    let t = b0 + k + i;
                    (a.as_slice()[t] + r as u64)
                        .checked_sub(hamming_output_at(f, &filled, t))
                        .ok_or_else(|| {
                            Error::Mismatch(format!("negative window value at time {t}"))
                        })
                })
                .collect::<Result<Vec<u64>>>()?;
            Ok((block, h))
        })
        .collect()
}

/// Identifies every recoverable family block of the node through the
/// HamArray lookup table.
pub fn decode_hamming_blocks(
    a: &OutputArray,
    v: &ArrivalWindow,
    inst: &HammingInstance,
    visible: &MaskedStream,
) -> Result<DecodeReport> {
    let table = inst.lookup_table();
    let width = 2 * inst.r;
    let mut report = DecodeReport::new(v.node_id, DecodeMethod::HammingBlocks);
    for (block, h) in
        recovered_hamarrays(a, v, inst.f.as_slice(), inst.r, visible, diamond(inst.q))?
    {
        let &idx = table.get(&h).ok_or(Error::UnknownHamArray {
            node_id: v.node_id,
            block,
        })?;
        report.blocks.insert(block, idx);
        for (k, &s) in inst.family[idx].data.as_slice().iter().enumerate() {
            report.recovered.insert(block * width + k, s);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctCount {
    pub count: u64,
    /// Exact when true, a lower bound from sampling otherwise.
    pub exhaustive: bool,
}

/// Distinct `HamArray(R, U')` over `U'` in `alphabet^{2r}`: exhaustive when
/// the space fits `budget`, otherwise over `budget` uniform samples.
pub fn count_distinct_hamarrays(
    r_string: &[Symbol],
    alphabet: &[Symbol],
    budget: u64,
    seed: u64,
) -> DistinctCount {
    let len = 2 * r_string.len();
    let a = alphabet.len() as u64;
    let space = u32::try_from(len).ok().and_then(|e| a.checked_pow(e));
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut uprime = vec![0 as Symbol; len];
    let mut add = |u: &[Symbol]| {
        seen.insert(hamarray(r_string, u).expect("length is 2r"));
    };
    match space {
        Some(total) if total <= budget && a > 0 => {
            let mut idx = vec![0usize; len];
            for _ in 0..total {
                for (slot, &k) in uprime.iter_mut().zip(&idx) {
                    *slot = alphabet[k];
                }
                add(&uprime);
                for d in idx.iter_mut() {
                    *d += 1;
                    if *d < alphabet.len() {
                        break;
                    }
                    *d = 0;
                }
            }
            DistinctCount {
                count: seen.len() as u64,
                exhaustive: true,
            }
        }
        _ => {
            let mut rng = substream(seed, "hamarray-sample");
            if a > 0 {
                for _ in 0..budget {
                    for slot in uprime.iter_mut() {
                        *slot = alphabet[rng.gen_range(0..alphabet.len())];
                    }
                    add(&uprime);
                }
            }
            DistinctCount {
                count: seen.len() as u64,
                exhaustive: false,
            }
        }
    }
}
