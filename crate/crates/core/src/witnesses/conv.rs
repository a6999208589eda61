//! Recovering a node's hidden arrivals from convolution outputs.
//!
//! For `t = t1 + 1 + i` the output splits into `sum_j M(i, j) U_v[j]` plus
//! the contribution of every other arrival. The latter is computed by
//! running the window with `U_v` zero-filled, which is exact because the
//! contributions add up mod `q`.

use num_bigint::BigUint;

use super::report::{DecodeMethod, DecodeReport};
use crate::error::{Error, Result};
use crate::gf;
use crate::instances::{build_toeplitz, make_kn};
use crate::modular::{is_prime, mod_sub};
use crate::symbols::{Symbol, SymbolString};
use crate::window::{ArrivalWindow, MaskedStream, OutputArray};

/// Output `t` of the convolution of `f` against stream `u`.
pub fn conv_output_at(f: &[Symbol], u: &[Symbol], q: u64, t: usize) -> u64 {
    let n = f.len();
    let acc: u128 = (0..n)
        .filter_map(|i| {
            (t + i + 1)
                .checked_sub(n)
                .map(|pos| f[i] as u128 * u[pos] as u128)
        })
        .sum();
    (acc % q as u128) as u64
}

/// `A_v[i]` minus the contribution of the visible arrivals, for every `i`.
fn hidden_contribution(
    a: &OutputArray,
    v: &ArrivalWindow,
    f: &[Symbol],
    visible: &MaskedStream,
    q: u64,
) -> Result<Vec<u64>> {
    if a.len() != f.len() || visible.len() != f.len() {
        return Err(Error::Mismatch(format!(
            "{} outputs and {} arrivals for an operand of length {}",
            a.len(),
            visible.len(),
            f.len()
        )));
    }
    let zeroed = visible.filled(0);
    Ok((0..v.half())
        .map(|i| {
            let t = v.t1 + 1 + i;
            mod_sub(a.as_slice()[t] % q, conv_output_at(f, &zeroed, q, t), q)
        })
        .collect())
}

/// With `F = K_n` the rows `ell/2 .. ell` of the node's Toeplitz matrix are
/// unit vectors, so those hidden arrivals appear directly in the outputs.
/// The report's ambiguity counts candidates for the recovered coordinates.
pub fn decode_conv_kn(
    a: &OutputArray,
    v: &ArrivalWindow,
    f: &SymbolString,
    visible: &MaskedStream,
    q: u64,
) -> Result<DecodeReport> {
    let n = f.len();
    if f.as_slice() != make_kn(n)?.as_slice() {
        return Err(Error::InvalidParam("the fixed operand is not K_n".into()));
    }
    let ell = v.half();
    let m = build_toeplitz(f.as_slice(), q, ell)?;
    let diff = hidden_contribution(a, v, f.as_slice(), visible, q)?;
    let mut report = DecodeReport::new(v.node_id, DecodeMethod::ConvKn);
    for i in ell / 2..ell {
        if !m.is_unit_row(i) {
            return Err(Error::Mismatch(format!(
                "row {i} of the node {} matrix is not a unit vector",
                v.node_id
            )));
        }
        report.recovered.insert(v.t0 + i, diff[i]);
    }
    Ok(report)
}

/// Solves the node's Toeplitz system mod prime `q`. A singular matrix
/// yields ambiguity `q^dim(kernel)` and only the coordinates every
/// solution agrees on.
pub fn decode_conv_toeplitz(
    a: &OutputArray,
    v: &ArrivalWindow,
    f: &SymbolString,
    visible: &MaskedStream,
    q: u64,
) -> Result<DecodeReport> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    let ell = v.half();
    let m = build_toeplitz(f.as_slice(), q, ell)?.to_matrix();
    let rhs = hidden_contribution(a, v, f.as_slice(), visible, q)?;
    let (x, kernel) = gf::solve(&m, &rhs, q)?.ok_or_else(|| {
        Error::Mismatch(format!(
            "outputs of node {} are inconsistent with its matrix",
            v.node_id
        ))
    })?;
    let mut report = DecodeReport::new(v.node_id, DecodeMethod::ConvToeplitz);
    report.ambiguity = BigUint::from(q).pow(kernel.len() as u32);
    for (j, &value) in x.iter().enumerate() {
        if kernel.iter().all(|k| k[j] == 0) {
            report.recovered.insert(v.t0 + j, value);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::reference::conv_outputs;
    use crate::rng::substream;
    use crate::symbols::Role;
    use crate::window::internal_nodes;
    use proptest::prelude::*;
    use rand::Rng;

    fn setup(f: &[u64], u: &[u64], q: u64) -> (SymbolString, SymbolString, OutputArray) {
        (
            SymbolString::new(q.max(2), Role::Fixed, f.to_vec()).unwrap(),
            SymbolString::new(q, Role::Stream, u.to_vec()).unwrap(),
            OutputArray(conv_outputs(f, u, q)),
        )
    }

    #[test]
    fn kn_recovers_upper_half_everywhere() {
        let n = 16;
        let q = 5;
        let mut rng = substream(1, "kn-decode");
        let f = make_kn(n).unwrap().into_vec();
        for _ in 0..20 {
            let u: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let (fs, us, a) = setup(&f, &u, q);
            for v in internal_nodes(n).unwrap() {
                let visible = MaskedStream::new(&us, &v).unwrap();
                let mut rep = decode_conv_kn(&a, &v, &fs, &visible, q).unwrap();
                assert_eq!(rep.recovered_count(), v.half() - v.half() / 2);
                assert!(rep.verify(&u));
            }
        }
    }

    #[test]
    fn kn_rejects_other_operand() {
        let (fs, us, a) = setup(&[1; 8], &[0; 8], 3);
        let v = ArrivalWindow::from_node(8, 1).unwrap();
        let visible = MaskedStream::new(&us, &v).unwrap();
        assert!(decode_conv_kn(&a, &v, &fs, &visible, 3).is_err());
    }

    #[test]
    fn toeplitz_one_by_one() {
        let n = 8;
        let mut f = vec![0; n];
        f[n - 2] = 1;
        let u = vec![2, 1, 0, 2, 1, 1, 2, 0];
        let (fs, us, a) = setup(&f, &u, 3);
        let v = ArrivalWindow::from_node(n, 4).unwrap(); // ell_v = 2
        let visible = MaskedStream::new(&us, &v).unwrap();
        let mut rep = decode_conv_toeplitz(&a, &v, &fs, &visible, 3).unwrap();
        assert_eq!(rep.recovered.get(&0), Some(&2));
        assert!(rep.verify(&u));
    }

    #[test]
    fn zero_operand_is_fully_ambiguous() {
        let n = 8;
        let (fs, us, a) = setup(&[0; 8], &[1; 8], 3);
        let v = ArrivalWindow::from_node(n, 1).unwrap();
        let visible = MaskedStream::new(&us, &v).unwrap();
        let rep = decode_conv_toeplitz(&a, &v, &fs, &visible, 3).unwrap();
        assert_eq!(rep.ambiguity, BigUint::from(81u32));
        assert!(rep.recovered.is_empty());
    }

    proptest! {
        #[test]
        fn toeplitz_inverts_forward_conv(seed in any::<u64>(), q in prop::sample::select(vec![2u64, 3, 5, 7])) {
            let n = 16;
            let mut rng = substream(seed, "toeplitz-prop");
            let f: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let u: Vec<u64> = (0..n).map(|_| rng.gen_range(0..q)).collect();
            let (fs, us, a) = setup(&f, &u, q);
            for v in internal_nodes(n).unwrap() {
                let visible = MaskedStream::new(&us, &v).unwrap();
                let mut rep = decode_conv_toeplitz(&a, &v, &fs, &visible, q).unwrap();
                prop_assert!(rep.verify(&u));
                let m = build_toeplitz(&f, q, v.half()).unwrap().to_matrix();
                if gf::rank(&m, q).unwrap() == v.half() {
                    prop_assert_eq!(rep.recovered_count(), v.half());
                    prop_assert_eq!(rep.ambiguity.clone(), BigUint::from(1u32));
                }
            }
        }
    }
}
