//! Exhaustive-enumeration checks of the spectra operators, shared by the
//! core tests and the acceptance harness. Each check panics on mismatch.

use parbound_core::error::Result;
use parbound_core::oracle::{exhaustive_interleaver_average, exhaustive_iowe, exhaustive_turbo_average};
use parbound_core::spectra::ensembles::{turbo_branch, Ensemble};
use parbound_core::spectra::{
    acc_iowe, fsm_iowe, partial_precode, rep_iowe, turbo_two_branch, uniform_concat, Fsm, PunctureMask, Termination,
    DEFAULT_CELL_BUDGET,
};
use parbound_core::Iowe;

fn accumulate(u: &[u8]) -> Vec<u8> {
    let mut s = 0u8;
    u.iter()
        .map(|&b| {
            s ^= b;
            s
        })
        .collect()
}

fn repeat(u: &[u8], q: usize) -> Vec<u8> {
    u.iter().flat_map(|&b| std::iter::repeat_n(b, q)).collect()
}

/// Accumulate the first `m` bits, pass the rest.
fn precode(u: &[u8], m: usize) -> Vec<u8> {
    let mut v = accumulate(&u[..m]);
    v.extend_from_slice(&u[m..]);
    v
}

fn punctured_accumulate(u: &[u8], period: usize) -> Vec<u8> {
    accumulate(u).into_iter().enumerate().filter(|(i, _)| i % period == period - 1).map(|(_, b)| b).collect()
}

/// Shift-register RSC with feedback 1+D+D²+D³+D⁴ and feedforward 1+D⁴,
/// terminated; returns (systematic, parity) pairs.
fn rsc_16(u: &[u8]) -> Vec<(u8, u8)> {
    let mut reg = [0u8; 4];
    let mut out = Vec::new();
    let push = |x: u8, reg: &mut [u8; 4], out: &mut Vec<(u8, u8)>| {
        let a = x ^ reg[0] ^ reg[1] ^ reg[2] ^ reg[3];
        let p = a ^ reg[3];
        out.push((x, p));
        *reg = [a, reg[0], reg[1], reg[2]];
    };
    for &b in u {
        push(b, &mut reg, &mut out);
    }
    for _ in 0..4 {
        let x = reg[0] ^ reg[1] ^ reg[2] ^ reg[3];
        push(x, &mut reg, &mut out);
    }
    out
}

/// Parity bits of the information phase, then both bits of each tail step.
fn rsc_branch(u: &[u8]) -> Vec<u8> {
    let pairs = rsc_16(u);
    let mut v: Vec<u8> = pairs[..u.len()].iter().map(|p| p.1).collect();
    for p in &pairs[u.len()..] {
        v.push(p.0);
        v.push(p.1);
    }
    v
}

fn assert_exact(got: &Iowe, want: &Iowe) {
    let (g, w) = (got.to_counts(), want.to_counts());
    assert_eq!(g, w);
    let (d, same) = got.max_log_diff(want);
    assert!(same && d < 1e-12, "log diff {d}, same support {same}");
}

fn assert_close(got: &Iowe, want: &Iowe, rel: f64) {
    let (d, same) = got.max_log_diff(want);
    assert!(same, "supports differ");
    assert!(d < rel, "log diff {d}");
}

fn ok(v: Vec<u8>) -> Result<Vec<u8>> {
    Ok(v)
}

pub fn accumulator_matches_enumeration() {
    for n in 1..=12 {
        let e = exhaustive_iowe(n, n, |u| ok(accumulate(u))).unwrap();
        assert_exact(&acc_iowe(n), &e);
    }
}

pub fn repetition_matches_enumeration() {
    for (n, q) in [(1, 2), (4, 3), (6, 2), (12, 2), (5, 4)] {
        let e = exhaustive_iowe(n, n * q, |u| ok(repeat(u, q))).unwrap();
        assert_exact(&rep_iowe(n, q).unwrap(), &e);
    }
}

pub fn partial_precoder_matches_enumeration() {
    for (n, m) in [(8, 0), (8, 3), (8, 8), (12, 5), (1, 1)] {
        let e = exhaustive_iowe(n, n, |u| ok(precode(u, m))).unwrap();
        assert_exact(&partial_precode(n, m).unwrap(), &e);
    }
}

pub fn trellis_accumulator_with_and_without_puncturing() {
    let acc = Fsm::accumulator();
    for n in [1, 7, 12] {
        let t = fsm_iowe(&acc, n, &PunctureMask::keep_all(), Termination::Open, DEFAULT_CELL_BUDGET).unwrap();
        assert_exact(&t, &exhaustive_iowe(n, n, |u| ok(accumulate(u))).unwrap());
    }
    for (n, p) in [(12, 3), (12, 4), (10, 2)] {
        let t = fsm_iowe(&acc, n, &PunctureMask::every(p).unwrap(), Termination::Open, DEFAULT_CELL_BUDGET).unwrap();
        let e = exhaustive_iowe(n, n / p, |u| ok(punctured_accumulate(u, p))).unwrap();
        assert_exact(&t, &e);
        let closed = parbound_core::spectra::ensembles::punctured_acc_iowe(n / p, p).unwrap();
        assert_exact(&closed, &e);
    }
}

pub fn trellis_rsc_terminated() {
    let rsc = Fsm::rsc(0b11111, 0b10001).unwrap();
    for k in [1, 5, 10] {
        let t = fsm_iowe(&rsc, k, &PunctureMask::keep_all(), Termination::Zero, DEFAULT_CELL_BUDGET).unwrap();
        let e = exhaustive_iowe(k, 2 * (k + 4), |u| ok(rsc_16(u).into_iter().flat_map(|(a, b)| [a, b]).collect())).unwrap();
        assert_exact(&t, &e);
        assert_exact(&turbo_branch(&rsc, k, DEFAULT_CELL_BUDGET).unwrap(), &exhaustive_iowe(k, k + 8, |u| ok(rsc_branch(u))).unwrap());
    }
}

pub fn trellis_rsc_periodic_puncturing() {
    let rsc = Fsm::rsc(0b11111, 0b10001).unwrap();
    // keep u0 p0, drop u1, keep p1
    let mask = PunctureMask::new(vec![true, true, false, true]).unwrap();
    let k = 10;
    let t = fsm_iowe(&rsc, k, &mask, Termination::Zero, DEFAULT_CELL_BUDGET).unwrap();
    let e = exhaustive_iowe(k, k / 2 * 3 + 8, |u| {
        let pairs = rsc_16(u);
        let mut v = Vec::new();
        for (t, &(a, b)) in pairs.iter().enumerate() {
            if t >= k || t % 2 == 0 {
                v.push(a);
            }
            v.push(b);
        }
        ok(v)
    })
    .unwrap();
    assert_exact(&t, &e);
}

pub fn uniform_concat_matches_interleaver_average() {
    // rep(2,3) into acc(6)
    let got = uniform_concat(&rep_iowe(2, 3).unwrap(), &acc_iowe(6)).unwrap();
    let want = exhaustive_interleaver_average(2, 6, 6, |u| ok(repeat(u, 3)), |v| ok(accumulate(v))).unwrap();
    assert_close(&got, &want, 1e-9);

    // precoder(5,3) into acc(5)
    let got = uniform_concat(&partial_precode(5, 3).unwrap(), &acc_iowe(5)).unwrap();
    let want = exhaustive_interleaver_average(5, 5, 5, |u| ok(precode(u, 3)), |v| ok(accumulate(v))).unwrap();
    assert_close(&got, &want, 1e-9);

    // rep(3,2) into acc(6) punctured by 3
    let inner = parbound_core::spectra::ensembles::punctured_acc_iowe(2, 3).unwrap();
    let got = uniform_concat(&rep_iowe(3, 2).unwrap(), &inner).unwrap();
    let want = exhaustive_interleaver_average(3, 6, 2, |u| ok(repeat(u, 2)), |v| ok(punctured_accumulate(v, 3))).unwrap();
    assert_close(&got, &want, 1e-9);
}

pub fn turbo_matches_interleaver_average() {
    let rsc = Fsm::rsc(0b11111, 0b10001).unwrap();
    for k in [3, 5, 6] {
        let branch = turbo_branch(&rsc, k, DEFAULT_CELL_BUDGET).unwrap();
        let got = turbo_two_branch(&branch, k).unwrap();
        let want = exhaustive_turbo_average(k, k + 8, |u| ok(rsc_branch(u))).unwrap();
        assert_close(&got, &want, 1e-9);
    }
}

pub fn ensembles_match_interleaver_average() {
    let nsra = Ensemble::Nsra { n: 2, q: 3 }.iowe(DEFAULT_CELL_BUDGET).unwrap();
    let want = exhaustive_interleaver_average(2, 6, 6, |u| ok(repeat(u, 3)), |v| ok(accumulate(v))).unwrap();
    assert_close(&nsra, &want, 1e-9);

    let sys = |u: &[u8], parity: Vec<u8>| {
        let mut c = u.to_vec();
        c.extend(parity);
        c
    };
    let spra = Ensemble::Spra { n: 1, p: 3, q: 6 }.iowe(DEFAULT_CELL_BUDGET).unwrap();
    let want = exhaustive_iowe(1, 3, |u| {
        // a single repeated bit is invariant under every interleaver
        ok(sys(u, punctured_accumulate(&repeat(u, 6), 3)))
    })
    .unwrap();
    assert_close(&spra, &want, 1e-9);

    // three bits, one bypassing the precoder, repeated twice, punctured by 3
    let spara = Ensemble::Spara { n: 3, m: 1, p: 3, q: 2 }.iowe(DEFAULT_CELL_BUDGET).unwrap();
    let parity =
        exhaustive_interleaver_average(3, 6, 2, |u| ok(repeat(&precode(u, 2), 2)), |v| ok(punctured_accumulate(v, 3)))
            .unwrap();
    let joined = parbound_core::spectra::systematic_join(&parity);
    assert_close(&spara, &joined, 1e-9);
}

#[allow(dead_code)]
pub const ALL: &[(&str, fn())] = &[
    ("accumulator_matches_enumeration", accumulator_matches_enumeration),
    ("repetition_matches_enumeration", repetition_matches_enumeration),
    ("partial_precoder_matches_enumeration", partial_precoder_matches_enumeration),
    ("trellis_accumulator_with_and_without_puncturing", trellis_accumulator_with_and_without_puncturing),
    ("trellis_rsc_terminated", trellis_rsc_terminated),
    ("trellis_rsc_periodic_puncturing", trellis_rsc_periodic_puncturing),
    ("uniform_concat_matches_interleaver_average", uniform_concat_matches_interleaver_average),
    ("turbo_matches_interleaver_average", turbo_matches_interleaver_average),
    ("ensembles_match_interleaver_average", ensembles_match_interleaver_average),
];
