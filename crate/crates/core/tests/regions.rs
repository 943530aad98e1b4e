use parbound_core::regions::{
    bisect_boundary, check_point_with, cutoff_reference, BoundKind, ChannelPoint, ReferenceVerdict, RegionConfig,
};
use parbound_core::spectra::asymptotic::AsymptoticEnsemble;
use parbound_core::{MbiosChannel, ParallelChannelSet};

fn bsc_point(ps: &[f64], alphas: &[f64], rate: f64) -> ChannelPoint {
    let chans = ps.iter().map(|&p| MbiosChannel::bsc(p).unwrap()).collect();
    ChannelPoint::new(ParallelChannelSet::new(chans, alphas.to_vec()).unwrap(), rate).unwrap()
}

fn coarse() -> RegionConfig {
    RegionConfig { delta_points: 80, ..RegionConfig::default() }
}

fn h2(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

#[test]
fn nsra_verdict_switches_once_along_a_ray() {
    let nsra = AsymptoticEnsemble::nsra(3).unwrap();
    let cfg = coarse();
    let verdicts: Vec<bool> = (0..10)
        .map(|i| {
            // both BSCs degrade together
            let p = 0.01 + 0.02 * i as f64;
            let pt = bsc_point(&[p, 0.5 * p], &[0.5, 0.5], 1.0 / 3.0);
            check_point_with(&pt, |d| nsra.exponent(d), BoundKind::Ds2, true, &cfg).unwrap().attainable
        })
        .collect();
    assert!(verdicts[0] && !verdicts[9], "{verdicts:?}");
    let flips = verdicts.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1, "{verdicts:?}");
}

#[test]
fn random_coding_boundary_lies_between_capacity_and_cutoff() {
    let rc = AsymptoticEnsemble::random_coding(0.5).unwrap();
    let cfg = coarse();
    // bisect over x = -p so that larger x is the better channel
    let x = bisect_boundary("bsc", -0.2, -0.01, 1e-3, |x| {
        let pt = bsc_point(&[-x], &[1.0], 0.5);
        Ok(check_point_with(&pt, |d| rc.exponent(d), BoundKind::Ds2, true, &cfg)?.attainable)
    })
    .unwrap()
    .unwrap();
    let p = -x;
    // capacity: h2(p) = 1/2; cutoff: 1 - log2(1 + 2 sqrt(p(1-p))) = 1/2
    let p_cap = {
        let (mut a, mut b) = (0.0, 0.5);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if h2(m) < 0.5 { a = m } else { b = m }
        }
        a
    };
    let p_cut = (1.0 - (1.0 - (2f64.sqrt() - 1.0).powi(2)).sqrt()) / 2.0;
    assert!(p_cut - 1e-3 <= p && p <= p_cap + 1e-3, "cutoff {p_cut}, boundary {p}, capacity {p_cap}");
}

#[test]
fn single_channel_cutoff_threshold() {
    let gamma = 2f64.powf(2.0 / 3.0) - 1.0;
    let at = |e: f64| {
        cutoff_reference(&ChannelPoint::new(ParallelChannelSet::single(MbiosChannel::bec(e).unwrap()), 1.0 / 3.0).unwrap())
    };
    assert_eq!(at(gamma - 1e-6), ReferenceVerdict::Attainable);
    assert_eq!(at(gamma + 1e-6), ReferenceVerdict::Inconclusive);
}

#[test]
fn channel_permutation_leaves_the_report_unchanged() {
    let spra = AsymptoticEnsemble::spra(3, 6).unwrap();
    let cfg = coarse();
    let a = bsc_point(&[0.02, 0.08, 0.05], &[0.2, 0.5, 0.3], 1.0 / 3.0);
    let b = bsc_point(&[0.05, 0.02, 0.08], &[0.3, 0.2, 0.5], 1.0 / 3.0);
    let ra = check_point_with(&a, |d| spra.exponent(d), BoundKind::Ds2, true, &cfg).unwrap();
    let rb = check_point_with(&b, |d| spra.exponent(d), BoundKind::Ds2, true, &cfg).unwrap();
    assert_eq!(ra.attainable, rb.attainable);
    assert!((ra.margin_cond1 - rb.margin_cond1).abs() < 1e-8, "{} vs {}", ra.margin_cond1, rb.margin_cond1);
    assert!((ra.margin_cond2 - rb.margin_cond2).abs() < 1e-12);
}

#[test]
fn refining_the_grid_keeps_clear_verdicts() {
    let nsra = AsymptoticEnsemble::nsra(3).unwrap();
    let fine = RegionConfig { delta_points: 160, ..coarse() };
    for p in [0.02, 0.06, 0.1, 0.14, 0.2] {
        let pt = bsc_point(&[p, 0.03], &[0.5, 0.5], 1.0 / 3.0);
        let a = check_point_with(&pt, |d| nsra.exponent(d), BoundKind::G61, true, &coarse()).unwrap();
        let b = check_point_with(&pt, |d| nsra.exponent(d), BoundKind::G61, true, &fine).unwrap();
        if a.margin_cond1.abs() > 1e-3 && a.margin_cond2.abs() > 1e-3 {
            assert_eq!(a.attainable, b.attainable, "p {p}: {a:?} vs {b:?}");
        }
        // a finer grid can only find a smaller minimum, up to the refinement step
        assert!(b.margin_cond1 <= a.margin_cond1 + 1e-4);
    }
}

#[test]
fn undeclared_ensembles_are_never_attainable() {
    let nsra = AsymptoticEnsemble::nsra(3).unwrap();
    let pt = bsc_point(&[0.0], &[1.0], 1.0 / 3.0);
    let r = check_point_with(&pt, |d| nsra.exponent(d), BoundKind::Ds2, false, &coarse()).unwrap();
    assert!(r.margin_cond1 > 0.0 && !r.attainable);
}
