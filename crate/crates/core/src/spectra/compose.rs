//! Ensemble operations on enumerators.

use alloc::vec::Vec;

use super::{Iowe, WeightEnumerator};
use crate::error::{contract, Result};
use crate::special::{LnFactorials, LogSum};

/// Serial concatenation through a uniform interleaver:
/// `A_{w,h} = Σ_m outer_{w,m} · inner_{m,h} / C(n_mid, m)`.
pub fn uniform_concat(outer: &dyn WeightEnumerator, inner: &dyn WeightEnumerator) -> Result<Iowe> {
    let n_mid = outer.output_len();
    if inner.input_len() != n_mid {
        return Err(contract!(
            "outer code emits {n_mid} bits but inner code expects {}",
            inner.input_len()
        ));
    }
    let (k, n) = (outer.input_len(), inner.output_len());
    let fact = LnFactorials::new(n_mid);
    let mut inner_rows: Vec<Option<Vec<f64>>> = alloc::vec![None; n_mid + 1];
    let mut out = Iowe::empty(k, n);
    let mut acc = alloc::vec![LogSum::new(); n + 1];
    for w in 0..=k {
        let orow = outer.row(w);
        acc.iter_mut().for_each(|a| *a = LogSum::new());
        for (m, &o) in orow.iter().enumerate() {
            if o == f64::NEG_INFINITY {
                continue;
            }
            let irow = inner_rows[m].get_or_insert_with(|| inner.row(m));
            let shift = o - fact.choose(n_mid, m);
            for (slot, &v) in acc.iter_mut().zip(irow.iter()) {
                if v != f64::NEG_INFINITY {
                    slot.add(v + shift);
                }
            }
        }
        for (h, a) in acc.iter().enumerate() {
            out.set(w, h, a.value());
        }
    }
    Ok(out)
}

/// Average over uniformly random sets of `kept` transmitted positions:
/// `A'_{w,h'} = Σ_h A_{w,h} C(h,h') C(n-h, kept-h') / C(n, kept)`.
pub fn puncture_random(iowe: &Iowe, kept: usize) -> Result<Iowe> {
    let n = iowe.output_len();
    if kept > n {
        return Err(contract!("cannot keep {kept} of {n} positions"));
    }
    let fact = LnFactorials::new(n);
    let norm = fact.choose(n, kept);
    let k = iowe.input_len();
    let mut out = Iowe::empty(k, kept);
    for w in 0..=k {
        for hp in 0..=kept {
            let mut acc = LogSum::new();
            for h in hp..=n {
                let a = iowe.get(w, h);
                if a == f64::NEG_INFINITY || kept - hp > n - h {
                    continue;
                }
                acc.add(a + fact.choose(h, hp) + fact.choose(n - h, kept - hp) - norm);
            }
            out.set(w, hp, acc.value());
        }
    }
    Ok(out)
}

/// Prepends the information bits to the codeword: `h → h + w`.
pub fn systematic_join(iowe: &Iowe) -> Iowe {
    let (k, n) = (iowe.input_len(), iowe.output_len());
    let mut out = Iowe::empty(k, n + k);
    for w in 0..=k {
        for h in 0..=n {
            out.set(w, h + w, iowe.get(w, h));
        }
    }
    out
}

/// Parallel concatenation of two copies of a parity-only branch enumerator
/// through a uniform interleaver, with the systematic bits transmitted once:
/// `A_{w,h} = Σ_{h1+h2 = h-w} B_{w,h1} B_{w,h2} / C(K, w)`.
pub fn turbo_two_branch(branch: &Iowe, k: usize) -> Result<Iowe> {
    if branch.input_len() != k {
        return Err(contract!("branch enumerator has input length {}, expected {k}", branch.input_len()));
    }
    let nb = branch.output_len();
    let fact = LnFactorials::new(k);
    let mut out = Iowe::empty(k, k + 2 * nb);
    let mut acc = alloc::vec![LogSum::new(); 2 * nb + 1];
    for w in 0..=k {
        let row = branch.row_slice(w);
        let support: Vec<(usize, f64)> =
            row.iter().copied().enumerate().filter(|(_, v)| *v != f64::NEG_INFINITY).collect();
        acc.iter_mut().for_each(|a| *a = LogSum::new());
        let norm = fact.choose(k, w);
        for &(h1, a1) in &support {
            for &(h2, a2) in &support {
                acc[h1 + h2].add(a1 + a2 - norm);
            }
        }
        for (p, a) in acc.iter().enumerate() {
            out.set(w, w + p, a.value());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{acc_iowe, identity_iowe, rep_iowe, Identity};

    #[test]
    fn identity_outer_returns_inner() {
        let inner = acc_iowe(6);
        let got = uniform_concat(&Identity::new(6), &inner).unwrap();
        let (d, same) = got.max_log_diff(&inner);
        assert!(same && d < 1e-12);
    }

    #[test]
    fn rep_acc_two_bits() {
        let t = uniform_concat(&rep_iowe(1, 2).unwrap(), &acc_iowe(2)).unwrap();
        assert!(t.get(1, 1).abs() < 1e-12);
        assert_eq!(t.get(1, 2), f64::NEG_INFINITY);
    }

    #[test]
    fn length_mismatch_is_contract_error() {
        let e = uniform_concat(&rep_iowe(2, 3).unwrap(), &acc_iowe(5)).unwrap_err();
        assert_eq!(e.code(), "E_CONTRACT");
    }

    #[test]
    fn puncture_extremes() {
        let t = acc_iowe(5);
        let (d, same) = puncture_random(&t, 5).unwrap().max_log_diff(&t);
        assert!(same && d < 1e-12);
        let z = puncture_random(&t, 0).unwrap();
        for w in 0..=5 {
            assert!((z.get(w, 0) - t.row_log_total(w)).abs() < 1e-12);
        }
        assert!(puncture_random(&t, 6).is_err());
    }

    #[test]
    fn puncture_preserves_row_totals() {
        let t = acc_iowe(9);
        let p = puncture_random(&t, 4).unwrap();
        for w in 0..=9 {
            assert!((p.row_log_total(w) - t.row_log_total(w)).abs() < 1e-12);
        }
    }

    #[test]
    fn systematic_shift() {
        let mut t = Iowe::empty(1, 2);
        t.set(0, 0, 0.0);
        t.set(1, 2, 0.0);
        let s = systematic_join(&t);
        assert_eq!(s.output_len(), 3);
        assert_eq!(s.get(1, 3), 0.0);
        assert_eq!(s.get(0, 0), 0.0);
    }

    #[test]
    fn turbo_trivial_branch() {
        let mut b = Iowe::empty(3, 2);
        b.set(0, 0, 0.0);
        let t = turbo_two_branch(&b, 3).unwrap();
        assert_eq!(t.get(0, 0), 0.0);
        assert_eq!(t.log_total(), 0.0);
        assert!(turbo_two_branch(&b, 4).is_err());
        let t = turbo_two_branch(&identity_iowe(4), 4).unwrap();
        assert!((t.log_total() - 4.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }
}
