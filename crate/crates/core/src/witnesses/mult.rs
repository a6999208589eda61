//! Brute-force ambiguity of multiplication outputs.
//!
//! `A_t` is digit `t` of `F * U` read as base-`q` integers, so the digits
//! `t1+1 ..= t2` depend only on `F[..=t2]` and `U[..=t2]`.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::Symbol;
use crate::window::{ArrivalWindow, MaskedStream};

const CANDIDATE_LIMIT: u64 = 1 << 22;

fn candidate_count(q: u64, len: usize) -> Result<u64> {
    (len as u32 <= 64)
        .then(|| q.checked_pow(len as u32))
        .flatten()
        .filter(|&c| c <= CANDIDATE_LIMIT)
        .ok_or_else(|| Error::TooLarge(format!("{q}^{len} hidden inputs")))
}

/// Digits `t1+1 ..= t1+keep` for every hidden input, grouped by value;
/// returns the largest group.
fn max_group(
    f: &[Symbol],
    visible: &[Symbol],
    v: &ArrivalWindow,
    q: u64,
    keep: usize,
) -> Result<u64> {
    if f.len() <= v.t2 || visible.len() <= v.t2 {
        return Err(Error::WindowOutOfRange {
            t0: v.t0,
            t2: v.t2,
            n: f.len().min(visible.len()),
        });
    }
    let len = v.t1 - v.t0 + 1;
    let total = candidate_count(q, len)?;
    let top = v.t2 + 1;
    let mut base = vec![0u128; top];
    for (t, col) in base.iter_mut().enumerate() {
        *col = (0..=t).map(|j| f[t - j] as u128 * visible[j] as u128).sum();
    }
    let mut groups: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut x = vec![0u64; len];
    let mut cols = vec![0u128; top];
    for _ in 0..total {
        cols.copy_from_slice(&base);
        for (k, &xk) in x.iter().enumerate() {
            if xk == 0 {
                continue;
            }
            let j = v.t0 + k;
            for t in j..top {
                cols[t] += f[t - j] as u128 * xk as u128;
            }
        }
        let mut carry = 0u128;
        let mut key = Vec::with_capacity(keep);
        for (t, &c) in cols.iter().enumerate() {
            let s = c + carry;
            if t > v.t1 && key.len() < keep {
                key.push((s % q as u128) as u64);
            }
            carry = s / q as u128;
        }
        *groups.entry(key).or_default() += 1;
        for d in x.iter_mut() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
    Ok(groups.into_values().max().unwrap_or(1))
}

/// Largest set of hidden inputs `U_v` sharing one value of `A_v`.
pub fn mult_ambiguity(
    f: &[Symbol],
    v: &ArrivalWindow,
    visible: &MaskedStream,
    q: u64,
) -> Result<u64> {
    max_group(f, &visible.filled(0), v, q, v.half())
}

/// As [`mult_ambiguity`] but only the first `keep` outputs of `A_v` are
/// observed.
pub fn mult_ambiguity_prefix(
    f: &[Symbol],
    v: &ArrivalWindow,
    visible: &MaskedStream,
    q: u64,
    keep: usize,
) -> Result<u64> {
    max_group(f, &visible.filled(0), v, q, keep.min(v.half()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultFraction {
    pub ell_v: usize,
    pub q: u64,
    /// Prefixes whose ambiguity is at most four.
    pub good: u64,
    pub total: u64,
}

impl MultFraction {
    pub fn fraction(&self) -> Ratio<u64> {
        Ratio::new(self.good, self.total)
    }
}

/// Fraction of operand prefixes `F[0 .. ell_v)` for which the leftmost node
/// of size `ell_v` has ambiguity at most four, maximized over every fixing
/// of the node's right half.
pub fn mult_f_fraction(q: u64, ell_v: usize) -> Result<MultFraction> {
    if q < 2 || ell_v < 2 || !ell_v.is_power_of_two() {
        return Err(Error::InvalidParam(format!("q = {q}, ell_v = {ell_v}")));
    }
    if ell_v > 8 {
        return Err(Error::TooLarge(format!(
            "ell_v = {ell_v} exceeds the exhaustive range"
        )));
    }
    let half = ell_v / 2;
    let prefixes = candidate_count(q, ell_v)?;
    let fixings = candidate_count(q, half)?;
    let v = ArrivalWindow::from_node(ell_v, 1)?;
    let digits = |mut k: u64, len: usize| -> Vec<u64> {
        (0..len)
            .map(|_| {
                let d = k % q;
                k /= q;
                d
            })
            .collect()
    };
    let mut good = 0;
    for fk in 0..prefixes {
        let f = digits(fk, ell_v);
        let mut worst = 0;
        for uk in 0..fixings {
            let mut u = vec![0u64; half];
            u.extend(digits(uk, half));
            worst = worst.max(max_group(&f, &u, &v, q, half)?);
            if worst > 4 {
                break;
            }
        }
        good += (worst <= 4) as u64;
    }
    Ok(MultFraction {
        ell_v,
        q,
        good,
        total: prefixes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::symbols::{Role, SymbolString};
    use crate::window::internal_nodes;
    use proptest::prelude::*;
    use rand::Rng;

    fn masked(u: Vec<u64>, q: u64, v: &ArrivalWindow) -> MaskedStream {
        MaskedStream::new(&SymbolString::new(q, Role::Stream, u).unwrap(), v).unwrap()
    }

    #[test]
    fn zero_operand_collides_everything() {
        let n = 8;
        for v in internal_nodes(n).unwrap() {
            let vis = masked(vec![1; n], 3, &v);
            assert_eq!(
                mult_ambiguity(&[0; 8], &v, &vis, 3).unwrap(),
                3u64.pow(v.half() as u32)
            );
        }
    }

    #[test]
    fn unit_operand_binary_is_injective() {
        let n = 8;
        let mut f = vec![0; n];
        f[0] = 1;
        for v in internal_nodes(n).unwrap() {
            let vis = masked(vec![1, 0, 1, 1, 0, 0, 1, 0], 2, &v);
            // digit t of U is U[t]; shifted copies need F[half] = 1
            let mut shifted = vec![0; n];
            shifted[v.half()] = 1;
            assert_eq!(mult_ambiguity(&shifted, &v, &vis, 2).unwrap(), 1);
            assert_eq!(
                mult_ambiguity(&f, &v, &vis, 2).unwrap(),
                2u64.pow(v.half() as u32)
            );
        }
    }

    #[test]
    fn fraction_small_cases() {
        // at most four candidates exist, so every prefix qualifies
        for ell_v in [2, 4] {
            let r = mult_f_fraction(2, ell_v).unwrap();
            assert_eq!(r.fraction(), Ratio::new(1, 1));
        }
        assert!(matches!(mult_f_fraction(2, 16), Err(Error::TooLarge(_))));
    }

    #[test]
    fn zero_prefix_counted_out_at_eight() {
        let v = ArrivalWindow::from_node(8, 1).unwrap();
        assert_eq!(max_group(&[0; 8], &[0; 8], &v, 2, 4).unwrap(), 16);
        let r = mult_f_fraction(2, 8).unwrap();
        assert!(r.good < r.total);
    }

    proptest! {
        #[test]
        fn prefix_restriction_is_monotone(seed in any::<u64>(), q in 2u64..4) {
            let n = 8;
            let mut rng = substream(seed, "mult-amb");
            let f: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let u: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            for v in internal_nodes(n).unwrap() {
                let vis = masked(u.clone(), q, &v);
                let full = mult_ambiguity(&f, &v, &vis, q).unwrap();
                prop_assert!(full >= 1);
                for keep in 0..v.half() {
                    prop_assert!(mult_ambiguity_prefix(&f, &v, &vis, q, keep).unwrap() >= full);
                }
            }
        }
    }
}
