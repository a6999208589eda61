//! Arrival windows of the information-transfer tree and the slicing
//! vocabulary built on them.
//!
//! Internal nodes use heap numbering: the root is node 1 and the children
//! of node `id` are `2 id` and `2 id + 1`. For `n` leaves the internal
//! nodes are `1..n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modular::{floor_log2, is_power_of_two};
use crate::symbols::{Symbol, SymbolString};

/// The three arrivals `t0 <= t1 < t2` of an internal node and its leaf count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArrivalWindow {
    pub node_id: usize,
    pub t0: usize,
    pub t1: usize,
    pub t2: usize,
    pub ell: usize,
}

impl ArrivalWindow {
    /// Window of internal node `node_id` in a tree over `n` leaves.
    pub fn from_node(n: usize, node_id: usize) -> Result<Self> {
        if n < 2 || !is_power_of_two(n as u64) {
            return Err(Error::InvalidParam(format!(
                "tree size {n} is not a power of two >= 2"
            )));
        }
        if node_id == 0 || node_id >= n {
            return Err(Error::InvalidParam(format!(
                "node {node_id} is not an internal node of a tree over {n} leaves"
            )));
        }
        let depth = floor_log2(node_id as u64);
        let ell = n >> depth;
        let t0 = (node_id - (1 << depth)) * ell;
        Ok(Self {
            node_id,
            t0,
            t1: t0 + ell / 2 - 1,
            t2: t0 + ell - 1,
            ell,
        })
    }

    /// Lowest common ancestor of leaves `a != b`: the node with one leaf in
    /// each half.
    pub fn lca(n: usize, a: usize, b: usize) -> usize {
        debug_assert!(a != b && a < n && b < n);
        let k = floor_log2((a ^ b) as u64) + 1;
        let depth = floor_log2(n as u64) - k;
        (1usize << depth) + (a >> k)
    }

    pub fn half(&self) -> usize {
        self.ell / 2
    }

    pub fn depth(&self) -> u32 {
        floor_log2(self.node_id as u64)
    }
}

/// Every internal node, root first, level by level.
pub fn internal_nodes(n: usize) -> Result<Vec<ArrivalWindow>> {
    (1..n).map(|id| ArrivalWindow::from_node(n, id)).collect()
}

/// The `n` outputs of a processed stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutputArray(pub Vec<u64>);

impl OutputArray {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }
}

fn check_fits(len: usize, v: &ArrivalWindow) -> Result<()> {
    if v.t2 >= len || v.t0 > v.t1 || v.t1 >= v.t2 {
        return Err(Error::WindowOutOfRange {
            t0: v.t0,
            t2: v.t2,
            n: len,
        });
    }
    Ok(())
}

/// `U_v = U[t0..=t1]`.
pub fn slice_uv(u: &SymbolString, v: &ArrivalWindow) -> Result<SymbolString> {
    check_fits(u.len(), v)?;
    Ok(u.sub(v.t0, v.t1 + 1))
}

/// `A_v = A[t1+1..=t2]`.
pub fn slice_av(a: &OutputArray, v: &ArrivalWindow) -> Result<OutputArray> {
    check_fits(a.len(), v)?;
    Ok(OutputArray(a.0[v.t1 + 1..=v.t2].to_vec()))
}

/// `U[0..t0] ++ U[t2+1..n]`: everything outside the node's whole interval.
pub fn complement_uv(u: &SymbolString, v: &ArrivalWindow) -> Result<SymbolString> {
    check_fits(u.len(), v)?;
    let mut data = u.as_slice()[..v.t0].to_vec();
    data.extend_from_slice(&u.as_slice()[v.t2 + 1..]);
    SymbolString::new(u.q(), u.role(), data)
}

/// A stream with `U_v` hidden.
///
/// This is what every decoder gets to see: all arrivals except those in
/// `[t0, t1]`, including the right half `[t1+1, t2]` that the processor must
/// be fed while it emits `A_v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedStream {
    q: u64,
    data: Vec<Symbol>,
    start: usize,
    end: usize,
}

impl MaskedStream {
    pub fn new(u: &SymbolString, v: &ArrivalWindow) -> Result<Self> {
        check_fits(u.len(), v)?;
        let mut data = u.as_slice().to_vec();
        // The hidden symbols are dropped, not just flagged.
        for s in &mut data[v.t0..=v.t1] {
            *s = 0;
        }
        Ok(Self {
            q: u.q(),
            data,
            start: v.t0,
            end: v.t1,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn hidden(&self) -> (usize, usize) {
        (self.start, self.end)
    }

    pub fn get(&self, t: usize) -> Result<Symbol> {
        if (self.start..=self.end).contains(&t) {
            return Err(Error::HiddenAccess {
                index: t,
                start: self.start,
                end: self.end,
            });
        }
        self.data.get(t).copied().ok_or(Error::WindowOutOfRange {
            t0: t,
            t2: t,
            n: self.data.len(),
        })
    }

    /// The full stream with the hidden window overwritten by `placeholder`.
    pub fn filled(&self, placeholder: Symbol) -> Vec<Symbol> {
        let mut out = self.data.clone();
        for s in &mut out[self.start..=self.end] {
            *s = placeholder;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::Role;

    fn stream(n: usize) -> SymbolString {
        SymbolString::new(100, Role::Stream, (0..n as u64).collect()).unwrap()
    }

    #[test]
    fn root_window() {
        let v = ArrivalWindow::from_node(4, 1).unwrap();
        assert_eq!((v.t0, v.t1, v.t2, v.ell), (0, 1, 3, 4));
        let u = stream(4);
        assert_eq!(slice_uv(&u, &v).unwrap().as_slice(), &[0, 1]);
        let a = OutputArray(vec![10, 11, 12, 13]);
        assert_eq!(slice_av(&a, &v).unwrap().0, vec![12, 13]);
        assert!(complement_uv(&u, &v).unwrap().is_empty());
    }

    #[test]
    fn depth_one_nodes() {
        let u = stream(8);
        let left = ArrivalWindow::from_node(8, 2).unwrap();
        assert_eq!(slice_uv(&u, &left).unwrap().as_slice(), &[0, 1]);
        let leaf_pair = ArrivalWindow::from_node(8, 4).unwrap();
        assert_eq!(slice_uv(&u, &leaf_pair).unwrap().as_slice(), &[0]);
        let right = ArrivalWindow::from_node(8, 3).unwrap();
        let a = OutputArray((0..8).collect());
        assert_eq!(slice_av(&a, &right).unwrap().0, vec![6, 7]);
    }

    #[test]
    fn complement_of_inner_node() {
        let u = stream(8);
        let v = ArrivalWindow {
            node_id: 0,
            t0: 2,
            t1: 3,
            t2: 5,
            ell: 4,
        };
        assert_eq!(complement_uv(&u, &v).unwrap().as_slice(), &[0, 1, 6, 7]);
    }

    #[test]
    fn length_identities_and_tiling() {
        for n in [2usize, 4, 8, 16, 32] {
            let u = stream(n);
            let a = OutputArray((0..n as u64).collect());
            for v in internal_nodes(n).unwrap() {
                assert_eq!(slice_uv(&u, &v).unwrap().len(), v.ell / 2);
                assert_eq!(slice_av(&a, &v).unwrap().len(), v.ell / 2);
                assert_eq!(complement_uv(&u, &v).unwrap().len() + v.ell, n);
                // [0,t0-1], [t0,t1], [t1+1,t2], [t2+1,n-1] tile [0,n-1]
                let sizes = [v.t0, v.t1 + 1 - v.t0, v.t2 - v.t1, n - 1 - v.t2];
                assert_eq!(sizes.iter().sum::<usize>(), n);
            }
        }
    }

    #[test]
    fn levels_are_disjoint_and_sum_of_ell() {
        for n in [4usize, 8, 16, 32, 64] {
            let nodes = internal_nodes(n).unwrap();
            for a in &nodes {
                for b in &nodes {
                    if a.node_id != b.node_id && a.ell == b.ell {
                        assert!(a.t2 < b.t0 || b.t2 < a.t0);
                    }
                }
            }
            let mut ell_min = 2;
            while ell_min <= n {
                let total: usize = nodes
                    .iter()
                    .filter(|v| v.ell >= ell_min)
                    .map(|v| v.ell)
                    .sum();
                let levels = floor_log2((n / ell_min) as u64) as usize + 1;
                assert_eq!(total, n * levels);
                ell_min *= 2;
            }
        }
    }

    #[test]
    fn lca_matches_window_membership() {
        let n = 32;
        for a in 0..n {
            for b in a + 1..n {
                let v = ArrivalWindow::from_node(n, ArrivalWindow::lca(n, a, b)).unwrap();
                assert!(v.t0 <= a && a <= v.t1 && v.t1 < b && b <= v.t2);
            }
        }
    }

    #[test]
    fn masked_stream_hides_uv() {
        let u = stream(8);
        let v = ArrivalWindow::from_node(8, 1).unwrap();
        let m = MaskedStream::new(&u, &v).unwrap();
        assert!(m.get(0).is_err());
        assert!(m.get(3).is_err());
        assert_eq!(m.get(4).unwrap(), 4);
        assert_eq!(m.filled(99), vec![99, 99, 99, 99, 4, 5, 6, 7]);
    }
}
