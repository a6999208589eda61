//! Direct, storage-free definitions of the three output arrays. These are
//! the oracles the processors are checked against.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::symbols::Symbol;

/// Window `S_t[i] = U[t-(n-1)+i]`, with `fill` before the first arrival.
fn window_at(u: &[Symbol], n: usize, t: usize, i: usize, fill: Symbol) -> Symbol {
    let pos = t as isize - (n as isize - 1) + i as isize;
    if pos < 0 {
        fill
    } else {
        u[pos as usize]
    }
}

/// `A[t] = sum_i F[i] S_t[i] mod q`.
pub fn conv_outputs(f: &[Symbol], u: &[Symbol], q: u64) -> Vec<u64> {
    let n = f.len();
    (0..u.len())
        .map(|t| {
            let acc: u128 = (0..n)
                .map(|i| f[i] as u128 * window_at(u, n, t, i, 0) as u128)
                .sum();
            (acc % q as u128) as u64
        })
        .collect()
}

/// Digit `t` of `F * U` for every `t < |U|`, via big-integer arithmetic.
pub fn mult_outputs(f: &[Symbol], u: &[Symbol], q: u64) -> Vec<u64> {
    let product = from_digits(f, q) * from_digits(u, q);
    let mut digits = to_digits(&product, q);
    digits.resize(digits.len().max(u.len()), 0);
    digits.truncate(u.len());
    digits
}

/// `A[t] = #{i : F[i] != S_t[i]}` with the window pre-filled with symbol 0.
pub fn hamming_outputs(f: &[Symbol], u: &[Symbol]) -> Vec<u64> {
    let n = f.len();
    (0..u.len())
        .map(|t| (0..n).filter(|&i| f[i] != window_at(u, n, t, i, 0)).count() as u64)
        .collect()
}

/// Little-endian base-`q` digits to an integer.
pub fn from_digits(digits: &[Symbol], q: u64) -> BigUint {
    digits
        .iter()
        .rev()
        .fold(BigUint::zero(), |acc, &d| acc * q + d)
}

/// Little-endian base-`q` digits of `x` (empty for zero).
pub fn to_digits(x: &BigUint, q: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut cur = x.clone();
    let base = BigUint::from(q);
    while !cur.is_zero() {
        let digit = &cur % &base;
        out.push(digit.iter_u64_digits().next().unwrap_or(0));
        cur /= &base;
    }
    out
}
