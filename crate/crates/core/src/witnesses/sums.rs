//! Exact enumeration of `Sum(V')`: the distinct element-wise sums of the
//! `mu`-element sub-multisets of the available vectors.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::instances::VectorMultiset;

const LIMIT: u128 = 50_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn available(v: &VectorMultiset, mask: &[bool]) -> Result<Vec<usize>> {
    if mask.len() != v.len() {
        return Err(Error::Mismatch(format!(
            "mask of length {} for a multiset of {}",
            mask.len(),
            v.len()
        )));
    }
    Ok((0..v.len()).filter(|&i| mask[i]).collect())
}

/// Walks every index combination of size `mu`.
pub fn enumerate_sums(v: &VectorMultiset, mask: &[bool]) -> Result<BTreeSet<Vec<u8>>> {
    let idx = available(v, mask)?;
    let mu = v.mu;
    if binomial(idx.len(), mu) > LIMIT {
        return Err(Error::TooLarge(format!(
            "C({}, {mu}) sub-multisets",
            idx.len()
        )));
    }
    let mut sums = BTreeSet::new();
    if idx.len() < mu {
        return Ok(sums);
    }
    let mut pick: Vec<usize> = (0..mu).collect();
    loop {
        let mut sum = vec![0u8; mu];
        for &p in &pick {
            for (s, &b) in sum.iter_mut().zip(&v.vectors[idx[p]]) {
                *s += b;
            }
        }
        sums.insert(sum);
        // advance to the next combination in lexicographic order
        let Some(k) = (0..mu).rev().find(|&k| pick[k] < idx.len() - mu + k) else {
            break;
        };
        pick[k] += 1;
        for j in k + 1..mu {
            pick[j] = pick[j - 1] + 1;
        }
    }
    Ok(sums)
}

/// Groups equal vectors and enumerates how many copies of each are taken,
/// from the last distinct vector backwards.
pub fn enumerate_sums_by_multiplicity(
    v: &VectorMultiset,
    mask: &[bool],
) -> Result<BTreeSet<Vec<u8>>> {
    let idx = available(v, mask)?;
    let mut counts: BTreeMap<&[u8], usize> = BTreeMap::new();
    for &i in &idx {
        *counts.entry(v.vectors[i].as_slice()).or_default() += 1;
    }
    let distinct: Vec<(&[u8], usize)> = counts.into_iter().rev().collect();
    let mut sums = BTreeSet::new();
    let mut acc = vec![0u32; v.mu];
    take(&distinct, 0, v.mu, &mut acc, &mut sums);
    Ok(sums)
}

fn take(
    distinct: &[(&[u8], usize)],
    k: usize,
    left: usize,
    acc: &mut Vec<u32>,
    out: &mut BTreeSet<Vec<u8>>,
) {
    if left == 0 {
        out.insert(acc.iter().map(|&x| x as u8).collect());
        return;
    }
    if k == distinct.len() {
        return;
    }
    let (vec, mult) = distinct[k];
    for c in (0..=mult.min(left)).rev() {
        for (a, &b) in acc.iter_mut().zip(vec) {
            *a += c as u32 * b as u32;
        }
        take(distinct, k + 1, left - c, acc, out);
        for (a, &b) in acc.iter_mut().zip(vec) {
            *a -= c as u32 * b as u32;
        }
    }
}
