//! The power-of-two operands `K_n` and `K_{q,n}`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::modular::{floor_log2, is_power_of_two};
use crate::symbols::{Role, SymbolString};

/// `K_n[i] = 1` exactly when `n - 1 - i` is a power of two.
pub fn make_kn(n: usize) -> Result<SymbolString> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("K_n needs n >= 2, got {n}")));
    }
    let data = (0..n)
        .map(|i| is_power_of_two((n - 1 - i) as u64) as u64)
        .collect();
    SymbolString::new(2, Role::Fixed, data)
}

/// Bit length `n log2 q` of `K_{q,n}`.
fn kqn_bits(q: u64, n: usize) -> Result<usize> {
    if q < 2 || !is_power_of_two(q) {
        return Err(Error::InvalidParam(format!(
            "K_(q,n) needs q a power of two, got {q}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParam("K_(q,n) needs n >= 1".into()));
    }
    n.checked_mul(floor_log2(q) as usize)
        .ok_or_else(|| Error::TooLarge(format!("K_(q,n) with q = {q}, n = {n}")))
}

/// The number whose binary expansion has ones exactly at the power-of-two
/// bit positions below `n log2 q`.
pub fn make_kqn(q: u64, n: usize) -> Result<BigUint> {
    let bits = kqn_bits(q, n)?;
    let mut x = BigUint::default();
    let mut i = 1usize;
    while i < bits {
        x.set_bit(i as u64, true);
        i *= 2;
    }
    Ok(x)
}

/// `K_{q,n}` as `n` little-endian base-`q` digits.
pub fn make_kqn_digits(q: u64, n: usize) -> Result<SymbolString> {
    let x = make_kqn(q, n)?;
    let width = floor_log2(q) as usize;
    let data = (0..n)
        .map(|d| {
            (0..width).fold(0u64, |acc, b| {
                acc | (x.bit((d * width + b) as u64) as u64) << b
            })
        })
        .collect();
    SymbolString::new(q, Role::Fixed, data)
}

/// Binary expansion of `K_{q,n}`, least significant bit first.
pub fn kqn_binary_lsb_first(q: u64, n: usize) -> Result<Vec<u64>> {
    let bits = kqn_bits(q, n)?;
    let x = make_kqn(q, n)?;
    Ok((0..bits).map(|i| x.bit(i as u64) as u64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kn_examples() {
        assert_eq!(make_kn(8).unwrap().as_slice(), &[0, 0, 0, 1, 0, 1, 1, 0]);
        assert_eq!(make_kn(2).unwrap().as_slice(), &[1, 0]);
        assert!(make_kn(1).is_err());
        for n in 3..200usize {
            let ones = make_kn(n).unwrap().as_slice().iter().sum::<u64>();
            assert_eq!(ones, floor_log2((n - 1) as u64) as u64 + 1);
        }
    }

    #[test]
    fn kqn_examples() {
        assert_eq!(make_kqn(16, 8).unwrap(), BigUint::from(65814u32));
        assert_eq!(make_kqn(16, 8).unwrap().to_str_radix(16), "10116");
        assert_eq!(make_kqn(2, 3).unwrap(), BigUint::from(6u32));
        assert_eq!(
            make_kqn_digits(16, 8).unwrap().as_slice(),
            &[6, 1, 1, 0, 1, 0, 0, 0]
        );
        assert!(make_kqn(10, 4).is_err());
    }

    #[test]
    fn reversal_identity() {
        for q in [2u64, 4, 8, 16] {
            for n in 1..=64usize {
                let bits = kqn_binary_lsb_first(q, n).unwrap();
                if bits.len() < 2 {
                    continue;
                }
                let reversed: Vec<u64> = bits.iter().rev().copied().collect();
                assert_eq!(
                    reversed,
                    make_kn(bits.len()).unwrap().into_vec(),
                    "q={q} n={n}"
                );
            }
        }
    }
}
