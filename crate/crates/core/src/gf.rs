//! Dense linear algebra over `Z/pZ` for prime `p`.

use crate::error::{Error, Result};
use crate::modular::{is_prime, mod_inv, mod_mul, mod_sub};

/// Row-major square or rectangular matrix with entries in `[0, p)`.
pub type Matrix = Vec<Vec<u64>>;

/// Reduced row echelon form of `m`, with the pivot column of each nonzero
/// row.
pub fn rref(m: &Matrix, p: u64) -> Result<(Matrix, Vec<usize>)> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let mut a: Matrix = m
        .iter()
        .map(|row| row.iter().map(|&x| x % p).collect())
        .collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, pr);
        let inv = mod_inv(a[r][c], p);
        for x in a[r].iter_mut() {
            *x = mod_mul(*x, inv, p);
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let factor = a[i][c];
                for j in 0..cols {
                    let sub = mod_mul(factor, a[r][j], p);
                    a[i][j] = mod_sub(a[i][j], sub, p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Ok((a, pivots))
}

pub fn rank(m: &Matrix, p: u64) -> Result<usize> {
    Ok(rref(m, p)?.1.len())
}

/// A basis of `{x : m x = 0}`.
pub fn kernel(m: &Matrix, p: u64) -> Result<Vec<Vec<u64>>> {
    let cols = m.first().map_or(0, Vec::len);
    let (a, pivots) = rref(m, p)?;
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    Ok(free
        .iter()
        .map(|&f| {
            let mut x = vec![0u64; cols];
            x[f] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = mod_sub(0, a[row][f], p);
            }
            x
        })
        .collect())
}

/// A particular solution and a basis of the kernel.
pub type Solution = (Vec<u64>, Vec<Vec<u64>>);

/// Solution set of `m x = b`: one particular solution and a kernel basis,
/// or `None` when the system is inconsistent.
pub fn solve(m: &Matrix, b: &[u64], p: u64) -> Result<Option<Solution>> {
    let cols = m.first().map_or(0, Vec::len);
    if m.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "{} equations but {} right-hand sides",
            m.len(),
            b.len()
        )));
    }
    let augmented: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, &y)| {
            let mut r = row.clone();
            r.push(y % p);
            r
        })
        .collect();
    let (a, pivots) = rref(&augmented, p)?;
    if pivots.last() == Some(&cols) {
        return Ok(None);
    }
    let mut x = vec![0u64; cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = a[row][cols];
    }
    Ok(Some((x, kernel(m, p)?)))
}

/// Determinant by the permutation expansion; independent of elimination and
/// only meant for small matrices.
pub fn det_leibniz(m: &Matrix, p: u64) -> Result<u64> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::Mismatch("determinant of a non-square matrix".into()));
    }
    if n > 8 {
        return Err(Error::TooLarge(format!(
            "permutation expansion of a {n}x{n} matrix"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total: i128 = 0;
    permute(&mut perm, 0, &mut |perm| {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| perm[i] > perm[j])
            .count();
        let term = (0..n).fold(1i128, |acc, i| {
            acc * (m[i][perm[i]] % p) as i128 % p as i128
        });
        total += if inversions % 2 == 0 { term } else { -term };
    });
    Ok(total.rem_euclid(p as i128) as u64)
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

pub fn mat_vec(m: &Matrix, x: &[u64], p: u64) -> Vec<u64> {
    m.iter()
        .map(|row| {
            (row.iter()
                .zip(x)
                .map(|(&a, &b)| a as u128 * b as u128)
                .sum::<u128>()
                % p as u128) as u64
        })
        .collect()
}
