//! Offline kernels: the exact convolutions the blocked online processors
//! call once a block of arrivals is complete.
//!
//! Three convolution routes are available and cross-checked in tests:
//! schoolbook, a number-theoretic transform directly over `Z/qZ` (when `q`
//! is a prime with enough roots of unity) and a three-prime transform with
//! CRT reconstruction that yields the exact integer convolution.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{is_prime, mod_add, mod_inv, mod_mul, mod_pow, mod_sub, primitive_root};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvKernel {
    Naive,
    /// Transform over `Z/qZ` itself.
    NttModQ,
    /// Exact integer convolution through three NTT primes, reduced afterwards.
    NttCrt,
}

/// Counts element multiplications performed by kernels.
#[derive(Debug, Default)]
pub struct KernelStats {
    mults: AtomicU64,
    calls: AtomicU64,
}

impl KernelStats {
    pub fn add(&self, mults: u64) {
        self.mults.fetch_add(mults, Ordering::Relaxed);
        self.calls.fetch_add(1, Ordering::Relaxed);
    }

    pub fn mults(&self) -> u64 {
        self.mults.load(Ordering::Relaxed)
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

const P1: u64 = 998_244_353;
const P2: u64 = 167_772_161;
const P3: u64 = 469_762_049;

fn transform_size(la: usize, lb: usize) -> usize {
    (la + lb - 1).next_power_of_two()
}

fn ntt_mults(size: usize) -> u64 {
    let log = size.trailing_zeros() as u64;
    // three transforms plus the pointwise product
    3 * (size as u64 / 2) * log + size as u64
}

/// Whether `Z/qZ` supports a transform of the size this product needs.
pub fn ntt_friendly(q: u64, la: usize, lb: usize) -> bool {
    is_prime(q) && (q - 1).is_multiple_of(transform_size(la, lb) as u64)
}

fn crt_fits(la: usize, lb: usize, max_a: u64, max_b: u64) -> bool {
    let bound = (la.min(lb) as u128)
        .checked_mul(max_a as u128)
        .and_then(|x| x.checked_mul(max_b as u128));
    matches!(bound, Some(b) if b < P1 as u128 * P2 as u128 * P3 as u128)
}

/// Kernel used for a mod-`q` product of the given lengths.
pub fn select_kernel(q: u64, la: usize, lb: usize) -> ConvKernel {
    if la.min(lb) <= 16 {
        ConvKernel::Naive
    } else if ntt_friendly(q, la, lb) {
        ConvKernel::NttModQ
    } else if crt_fits(la, lb, q - 1, q - 1) {
        ConvKernel::NttCrt
    } else {
        ConvKernel::Naive
    }
}

fn ntt(a: &mut [u64], invert: bool, p: u64, g: u64) {
    let n = a.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w_len = mod_pow(g, (p - 1) / len as u64, p);
        if invert {
            w_len = mod_inv(w_len, p);
        }
        for chunk in a.chunks_mut(len) {
            let mut w = 1u64;
            let (lo, hi) = chunk.split_at_mut(len / 2);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let u = *x;
                let v = mod_mul(*y, w, p);
                *x = mod_add(u, v, p);
                *y = mod_sub(u, v, p);
                w = mod_mul(w, w_len, p);
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = mod_inv(n as u64 % p, p);
        for x in a.iter_mut() {
            *x = mod_mul(*x, inv_n, p);
        }
    }
}

fn ntt_conv_prime(a: &[u64], b: &[u64], p: u64, g: u64) -> Vec<u64> {
    let size = transform_size(a.len(), b.len());
    let mut fa: Vec<u64> = a.iter().map(|&x| x % p).collect();
    let mut fb: Vec<u64> = b.iter().map(|&x| x % p).collect();
    fa.resize(size, 0);
    fb.resize(size, 0);
    ntt(&mut fa, false, p, g);
    ntt(&mut fb, false, p, g);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = mod_mul(*x, *y, p);
    }
    ntt(&mut fa, true, p, g);
    fa.truncate(a.len() + b.len() - 1);
    fa
}

fn check_inputs(a: &[u64], b: &[u64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParam(
            "convolution operands must be non-empty".into(),
        ));
    }
    Ok(())
}

/// Schoolbook linear convolution mod `q`.
pub fn naive_conv(a: &[u64], b: &[u64], q: u64) -> Result<Vec<u64>> {
    if q < 2 {
        return Err(Error::InvalidParam(format!("modulus {q} < 2")));
    }
    check_inputs(a, b)?;
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = mod_add(out[i + j], mod_mul(x % q, y % q, q), q);
        }
    }
    Ok(out)
}

/// Linear convolution mod a prime `q` through a transform over `Z/qZ`.
pub fn ntt_conv(a: &[u64], b: &[u64], q: u64) -> Result<Vec<u64>> {
    check_inputs(a, b)?;
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    let size = transform_size(a.len(), b.len());
    if !(q - 1).is_multiple_of(size as u64) {
        return Err(Error::InvalidParam(format!(
            "Z/{q}Z has no root of unity of order {size}"
        )));
    }
    Ok(ntt_conv_prime(a, b, q, primitive_root(q)))
}

/// Exact integer linear convolution by schoolbook.
pub fn integer_conv_naive(a: &[u64], b: &[u64]) -> Vec<u128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x as u128 * y as u128;
        }
    }
    out
}

/// Exact integer linear convolution through three NTT primes.
pub fn crt_conv(a: &[u64], b: &[u64]) -> Result<Vec<u128>> {
    check_inputs(a, b)?;
    let max_a = a.iter().copied().max().unwrap_or(0);
    let max_b = b.iter().copied().max().unwrap_or(0);
    if !crt_fits(a.len(), b.len(), max_a, max_b) {
        return Err(Error::TooLarge(
            "coefficients exceed the three-prime range".into(),
        ));
    }
    let r1 = ntt_conv_prime(a, b, P1, 3);
    let r2 = ntt_conv_prime(a, b, P2, 3);
    let r3 = ntt_conv_prime(a, b, P3, 3);
    let inv_p1_mod_p2 = mod_inv(P1 % P2, P2);
    let p12 = P1 as u128 * P2 as u128;
    let inv_p12_mod_p3 = mod_inv((p12 % P3 as u128) as u64, P3);
    Ok(r1
        .iter()
        .zip(&r2)
        .zip(&r3)
        .map(|((&x1, &x2), &x3)| {
            let t = mod_mul(mod_sub(x2, x1 % P2, P2), inv_p1_mod_p2, P2);
            let x12 = x1 as u128 + P1 as u128 * t as u128;
            let x12_mod_p3 = (x12 % P3 as u128) as u64;
            let t3 = mod_mul(mod_sub(x3, x12_mod_p3, P3), inv_p12_mod_p3, P3);
            x12 + p12 * t3 as u128
        })
        .collect())
}

/// Exact integer convolution, choosing the transform when it is cheaper.
pub fn integer_conv(a: &[u64], b: &[u64], stats: Option<&KernelStats>) -> Vec<u128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let max_a = a.iter().copied().max().unwrap_or(0);
    let max_b = b.iter().copied().max().unwrap_or(0);
    if a.len().min(b.len()) > 16 && crt_fits(a.len(), b.len(), max_a, max_b) {
        if let Some(s) = stats {
            s.add(3 * ntt_mults(transform_size(a.len(), b.len())));
        }
        crt_conv(a, b).expect("bounds checked")
    } else {
        if let Some(s) = stats {
            s.add((a.len() * b.len()) as u64);
        }
        integer_conv_naive(a, b)
    }
}

/// Full linear convolution mod `q` with the kernel picked by
/// [`select_kernel`].
pub fn offline_conv(a: &[u64], b: &[u64], q: u64) -> Result<Vec<u64>> {
    offline_conv_with(a, b, q, select_kernel(q, a.len(), b.len()), None)
}

pub fn offline_conv_with(
    a: &[u64],
    b: &[u64],
    q: u64,
    kernel: ConvKernel,
    stats: Option<&KernelStats>,
) -> Result<Vec<u64>> {
    if q < 2 {
        return Err(Error::InvalidParam(format!("modulus {q} < 2")));
    }
    check_inputs(a, b)?;
    let out = match kernel {
        ConvKernel::Naive => {
            if let Some(s) = stats {
                s.add((a.len() * b.len()) as u64);
            }
            naive_conv(a, b, q)?
        }
        ConvKernel::NttModQ => {
            if let Some(s) = stats {
                s.add(ntt_mults(transform_size(a.len(), b.len())));
            }
            ntt_conv(a, b, q)?
        }
        ConvKernel::NttCrt => {
            if let Some(s) = stats {
                s.add(3 * ntt_mults(transform_size(a.len(), b.len())));
            }
            crt_conv(a, b)?
                .into_iter()
                .map(|x| (x % q as u128) as u64)
                .collect()
        }
    };
    Ok(out)
}

/// `out[m] = #{(i, j) : i + j = m, a[i] == b[j]}`, computed as a sum of
/// indicator convolutions over the symbols present in both operands.
pub fn match_conv(a: &[u64], b: &[u64], stats: Option<&KernelStats>) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    let mut symbols: Vec<u64> = a.to_vec();
    symbols.sort_unstable();
    symbols.dedup();
    for sigma in symbols {
        if !b.contains(&sigma) {
            continue;
        }
        let ia: Vec<u64> = a.iter().map(|&x| (x == sigma) as u64).collect();
        let ib: Vec<u64> = b.iter().map(|&x| (x == sigma) as u64).collect();
        for (o, c) in out.iter_mut().zip(integer_conv(&ia, &ib, stats)) {
            *o += c as u64;
        }
    }
    out
}

/// Direct pairwise version of [`match_conv`].
pub fn match_conv_naive(a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += (x == y) as u64;
        }
    }
    out
}

/// Full base-`q` product of two little-endian digit strings.
pub fn schoolbook_mult(a: &[u64], b: &[u64], q: u64) -> Result<Vec<u64>> {
    if q < 2 {
        return Err(Error::InvalidParam(format!("base {q} < 2")));
    }
    check_inputs(a, b)?;
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        let mut carry: u128 = 0;
        for (j, &y) in b.iter().enumerate() {
            let cur = out[i + j] as u128 + x as u128 * y as u128 + carry;
            out[i + j] = (cur % q as u128) as u64;
            carry = cur / q as u128;
        }
        let mut k = i + b.len();
        while carry > 0 {
            let cur = out[k] as u128 + carry;
            out[k] = (cur % q as u128) as u64;
            carry = cur / q as u128;
            k += 1;
        }
    }
    Ok(out)
}
