use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{ceil_log2, floor_log2, is_power_of_two};

/// Problem parameters shared by every processor and instance.
///
/// `n` arrivals, alphabet (or digit base) `q`, cell width `w` bits and
/// `delta = floor(log2 q)` bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    n: usize,
    q: u64,
    w: u32,
    delta: u32,
    seed: u64,
}

impl Params {
    pub fn new(n: usize, q: u64, w: u32, seed: u64) -> Result<Self> {
        if n < 2 || !is_power_of_two(n as u64) {
            return Err(Error::InvalidParam(format!(
                "n = {n} must be a power of two >= 2"
            )));
        }
        if q < 2 {
            return Err(Error::InvalidParam(format!("q = {q} must be at least 2")));
        }
        if w == 0 || w > 64 {
            return Err(Error::InvalidParam(format!("w = {w} must lie in 1..=64")));
        }
        let need = ceil_log2(n as u64).max(ceil_log2(q));
        if w < need {
            return Err(Error::InvalidParam(format!(
                "w = {w} cannot hold an address of {n} arrivals or a symbol below {q} (need {need} bits)"
            )));
        }
        Ok(Self {
            n,
            q,
            w,
            delta: floor_log2(q),
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn w(&self) -> u32 {
        self.w
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn log2_n(&self) -> u32 {
        floor_log2(self.n as u64)
    }

    /// Largest value a cell can hold.
    pub fn cell_max(&self) -> u64 {
        if self.w == 64 {
            u64::MAX
        } else {
            (1u64 << self.w) - 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_n() {
        assert!(Params::new(48, 5, 32, 0).is_err());
        assert!(Params::new(1, 5, 32, 0).is_err());
        assert!(Params::new(64, 5, 32, 0).is_ok());
    }

    #[test]
    fn validates_width() {
        // 1024 arrivals need 10 address bits
        assert!(Params::new(1024, 2, 9, 0).is_err());
        assert!(Params::new(1024, 2, 10, 0).is_ok());
        // q = 300 needs 9 bits
        assert!(Params::new(4, 300, 8, 0).is_err());
    }

    #[test]
    fn delta_is_floor() {
        assert_eq!(Params::new(8, 5, 32, 0).unwrap().delta(), 2);
        assert_eq!(Params::new(8, 16, 32, 0).unwrap().delta(), 4);
        assert_eq!(Params::new(8, 2, 32, 0).unwrap().delta(), 1);
    }
}
