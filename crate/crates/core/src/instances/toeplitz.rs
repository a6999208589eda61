//! The Toeplitz matrices that map a node's left-half arrivals to its
//! right-half convolution outputs.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{self, Matrix};
use crate::modular::is_prime;

/// `entry(i, j) = diag[ell - 1 - i + j]`, constant along each diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToeplitzMatrix {
    pub ell: usize,
    pub q: u64,
    /// The `2 ell - 1` defining values, bottom-left corner first.
    pub diag: Vec<u64>,
}

impl ToeplitzMatrix {
    pub fn new(ell: usize, q: u64, diag: Vec<u64>) -> Result<Self> {
        if ell == 0 || diag.len() != 2 * ell - 1 {
            return Err(Error::InvalidParam(format!(
                "a {ell}x{ell} Toeplitz matrix needs {} diagonal values, got {}",
                (2 * ell).saturating_sub(1),
                diag.len()
            )));
        }
        Ok(Self { ell, q, diag })
    }

    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.diag[self.ell - 1 - i + j]
    }

    pub fn first_row(&self) -> Vec<u64> {
        (0..self.ell).map(|j| self.entry(0, j)).collect()
    }

    pub fn first_column(&self) -> Vec<u64> {
        (0..self.ell).map(|i| self.entry(i, 0)).collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        (0..self.ell)
            .map(|i| (0..self.ell).map(|j| self.entry(i, j) % self.q).collect())
            .collect()
    }

    pub fn is_unit_row(&self, i: usize) -> bool {
        (0..self.ell).all(|j| self.entry(i, j) == (i == j) as u64)
    }
}

/// `M_{F,ell}(i, j) = F[n-1-(ell+i)+j]`.
pub fn build_toeplitz(f: &[u64], q: u64, ell: usize) -> Result<ToeplitzMatrix> {
    let n = f.len();
    if ell == 0 || 2 * ell > n {
        return Err(Error::InvalidParam(format!(
            "Toeplitz dimension {ell} needs 1 <= 2 ell <= n = {n}"
        )));
    }
    ToeplitzMatrix::new(ell, q, f[n - 2 * ell..n - 1].to_vec())
}

const ENUMERATION_LIMIT: u64 = 1 << 22;

/// Exact fraction of nonsingular `ell x ell` Toeplitz matrices over
/// `Z/qZ`, by enumerating every diagonal vector.
pub fn toeplitz_nonsingular_fraction(q: u64, ell: usize) -> Result<Ratio<u64>> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if ell == 0 {
        return Err(Error::InvalidParam(
            "Toeplitz dimension must be >= 1".into(),
        ));
    }
    let len = 2 * ell - 1;
    let total = (q as u128)
        .checked_pow(len as u32)
        .filter(|&t| t <= ENUMERATION_LIMIT as u128)
        .ok_or_else(|| Error::TooLarge(format!("{q}^{len} Toeplitz matrices")))?
        as u64;
    let mut nonsingular = 0u64;
    let mut diag = vec![0u64; len];
    for _ in 0..total {
        let m = ToeplitzMatrix::new(ell, q, diag.clone())?;
        if gf::rank(&m.to_matrix(), q)? == ell {
            nonsingular += 1;
        }
        for d in diag.iter_mut() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
    Ok(Ratio::new(nonsingular, total))
}
