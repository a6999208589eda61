//! Binary constant-weight cyclic codes of length `mu (mu - 1)` and weight
//! `mu`, searched as unions of cyclic-shift orbits.
//!
//! A word of minimal period `d` has an orbit of exactly `d` words. The
//! searcher enumerates canonical periodic patterns for every admissible
//! period, and greedily admits whole orbits while the minimum distance and
//! the size cap `(mu - 1)^gamma` hold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::is_prime;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclicCode {
    pub mu: usize,
    pub gamma: usize,
    pub length: usize,
    /// Codewords as bitmasks, bit `k` = position `k`.
    pub words: Vec<u128>,
}

impl CyclicCode {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_distance_required(&self) -> u32 {
        2 * (self.mu - self.gamma) as u32
    }

    pub fn size_cap(&self) -> u128 {
        size_cap(self.mu, self.gamma)
    }
}

fn size_cap(mu: usize, gamma: usize) -> u128 {
    (mu as u128 - 1).saturating_pow(gamma as u32)
}

fn mask(length: usize) -> u128 {
    if length == 128 {
        u128::MAX
    } else {
        (1u128 << length) - 1
    }
}

/// Rotation by one position towards higher indices.
pub fn rotate(word: u128, length: usize) -> u128 {
    ((word << 1) | (word >> (length - 1))) & mask(length)
}

fn distance(a: u128, b: u128) -> u32 {
    (a ^ b).count_ones()
}

/// Every `d`-bit pattern of the given weight, in increasing numeric order.
fn patterns(d: usize, weight: usize) -> impl Iterator<Item = u128> {
    let mut next = if weight == 0 {
        None
    } else {
        Some((1u128 << weight) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        // next integer with the same popcount
        let c = cur & cur.wrapping_neg();
        let r = cur + c;
        let succ = (((r ^ cur) >> 2) / c) | r;
        next = (succ >> d == 0 && r != 0).then_some(succ);
        Some(cur)
    })
}

fn is_canonical_with_period(pattern: u128, d: usize) -> bool {
    let mut w = pattern;
    for _ in 1..d {
        w = rotate(w, d);
        // equal: a shorter period; smaller: not the least rotation
        if w <= pattern {
            return false;
        }
    }
    true
}

fn repeat(pattern: u128, d: usize, length: usize) -> u128 {
    (0..length / d).fold(0u128, |acc, k| acc | pattern << (k * d))
}

fn orbit(word: u128, length: usize, size: usize) -> Vec<u128> {
    std::iter::successors(Some(word), |&w| Some(rotate(w, length)))
        .take(size)
        .collect()
}

fn check_params(mu: usize, gamma: usize) -> Result<usize> {
    if mu < 4 || !is_prime(mu as u64 - 1) {
        return Err(Error::InvalidParam(format!(
            "mu = {mu} needs mu >= 4 and mu - 1 prime"
        )));
    }
    if gamma.is_multiple_of(2) || gamma >= mu {
        return Err(Error::InvalidParam(format!(
            "gamma = {gamma} must be odd and below mu = {mu}"
        )));
    }
    let length = mu * (mu - 1);
    if length > 128 {
        return Err(Error::TooLarge(format!(
            "codeword length {length} exceeds 128 bits"
        )));
    }
    Ok(length)
}

/// Greedy orbit search. `budget` bounds the number of candidate patterns
/// examined.
pub fn search_cyclic_code(mu: usize, gamma: usize, budget: u64) -> Result<CyclicCode> {
    let length = check_params(mu, gamma)?;
    let cap = size_cap(mu, gamma);
    let min_dist = 2 * (mu - gamma) as u32;
    let mut words: Vec<u128> = Vec::new();
    let mut examined = 0u64;
    let mut exhausted = false;
    'periods: for d in (1..=length).filter(|d| length % d == 0) {
        if d as u128 > cap || !(mu * d).is_multiple_of(length) {
            continue;
        }
        let weight = mu * d / length;
        for pattern in patterns(d, weight) {
            if examined == budget {
                exhausted = true;
                break 'periods;
            }
            examined += 1;
            if !is_canonical_with_period(pattern, d) {
                continue;
            }
            if (words.len() + d) as u128 > cap {
                continue;
            }
            let candidate = orbit(repeat(pattern, d, length), length, d);
            let ok = candidate.iter().enumerate().all(|(i, &a)| {
                candidate[i + 1..]
                    .iter()
                    .all(|&b| distance(a, b) >= min_dist)
                    && words.iter().all(|&b| distance(a, b) >= min_dist)
            });
            if ok {
                words.extend(candidate);
            }
        }
    }
    if words.is_empty() {
        return Err(if exhausted {
            Error::SearchFailed(format!(
                "budget of {budget} patterns exhausted for mu = {mu}, gamma = {gamma}"
            ))
        } else {
            Error::SearchFailed(format!(
                "no orbit reaches distance {min_dist} for mu = {mu}, gamma = {gamma}"
            ))
        });
    }
    words.sort_unstable();
    Ok(CyclicCode {
        mu,
        gamma,
        length,
        words,
    })
}

/// What the property checker measured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeCheck {
    pub size: usize,
    pub min_distance: Option<u32>,
}

/// Validates weight, cyclic closure, minimum distance and size, without
/// relying on how the code was produced.
pub fn check_cyclic_code(code: &CyclicCode) -> Result<CodeCheck> {
    let length = code.mu * (code.mu - 1);
    if code.length != length {
        return Err(Error::Mismatch(format!(
            "length {} differs from mu (mu - 1) = {length}",
            code.length
        )));
    }
    let set: std::collections::HashSet<u128> = code.words.iter().copied().collect();
    if set.len() != code.words.len() {
        return Err(Error::Mismatch("duplicate codewords".into()));
    }
    for &w in &code.words {
        if w & !mask(length) != 0 {
            return Err(Error::Mismatch(format!(
                "word {w:#x} has bits beyond length {length}"
            )));
        }
        if w.count_ones() as usize != code.mu {
            return Err(Error::Mismatch(format!(
                "word {w:#x} has weight {}",
                w.count_ones()
            )));
        }
        if !set.contains(&rotate(w, length)) {
            return Err(Error::Mismatch(format!("rotation of {w:#x} is missing")));
        }
    }
    let mut min_distance = None;
    for (i, &a) in code.words.iter().enumerate() {
        for &b in &code.words[i + 1..] {
            let d = distance(a, b);
            min_distance = Some(min_distance.map_or(d, |m: u32| m.min(d)));
        }
    }
    if let Some(d) = min_distance {
        if d < code.min_distance_required() {
            return Err(Error::Mismatch(format!(
                "minimum distance {d} below {}",
                code.min_distance_required()
            )));
        }
    }
    if code.words.len() as u128 > code.size_cap() {
        return Err(Error::Mismatch(format!(
            "{} words exceed the cap {}",
            code.words.len(),
            code.size_cap()
        )));
    }
    Ok(CodeCheck {
        size: code.words.len(),
        min_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu4_gamma1() {
        let code = search_cyclic_code(4, 1, 1_000_000).unwrap();
        assert_eq!(code.len(), 3);
        let check = check_cyclic_code(&code).unwrap();
        assert!(check.min_distance.unwrap() >= 6);
    }

    #[test]
    fn mu6_gamma1() {
        let code = search_cyclic_code(6, 1, 1_000_000).unwrap();
        assert_eq!(code.len(), 5);
        check_cyclic_code(&code).unwrap();
    }

    #[test]
    fn larger_gamma_stays_valid() {
        let code = search_cyclic_code(4, 3, 1_000_000).unwrap();
        let check = check_cyclic_code(&code).unwrap();
        assert!(check.size >= 3);
        let code = search_cyclic_code(6, 3, 2_000_000).unwrap();
        check_cyclic_code(&code).unwrap();
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(search_cyclic_code(5, 1, 10).is_err()); // 4 is not prime
        assert!(search_cyclic_code(4, 2, 10).is_err());
        assert!(matches!(
            search_cyclic_code(4, 1, 0),
            Err(Error::SearchFailed(_))
        ));
    }

    #[test]
    fn checker_catches_violations() {
        let good = search_cyclic_code(4, 1, 1000).unwrap();
        let mut open = good.clone();
        open.words.pop();
        assert!(check_cyclic_code(&open).is_err());
        let mut heavy = good.clone();
        heavy.words[0] |= 1 << 11;
        assert!(check_cyclic_code(&heavy).is_err());
        let mut close = good;
        close.words = vec![0b1111, 0b1_1110];
        assert!(check_cyclic_code(&close).is_err());
    }

    #[test]
    fn pattern_enumeration() {
        let all: Vec<u128> = patterns(4, 2).collect();
        assert_eq!(all, vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert!(is_canonical_with_period(0b0011, 4));
        assert!(!is_canonical_with_period(0b0101, 4));
        assert!(!is_canonical_with_period(0b0110, 4));
    }
}
