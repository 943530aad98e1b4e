use parbound_core::ds2::{total_bound_per_subcode, Ds2Config};
use parbound_core::g61::{g61_total_per_subcode, G61Config};
use parbound_core::oracle::{ml_montecarlo, Assignment, ExplicitCode};
use parbound_core::spectra::ensembles::Ensemble;
use parbound_core::spectra::{exponent_of, to_distance, DEFAULT_CELL_BUDGET};
use parbound_core::{MbiosChannel, ParallelChannelSet, QuadratureSpec, SpectralExponent, Weighting};

fn finite_exponent(e: Ensemble) -> SpectralExponent {
    exponent_of(&to_distance(&e.iowe(DEFAULT_CELL_BUDGET).unwrap(), Weighting::Block))
}

#[test]
fn finite_nsra_spectra_approach_the_asymptotic_exponent() {
    let grid: Vec<f64> = (1..=12).map(|i| 0.05 * i as f64).collect();
    let asym = Ensemble::Nsra { n: 1, q: 3 }.asymptotic().unwrap();
    let coarse = finite_exponent(Ensemble::Nsra { n: 128, q: 3 });
    let fine = finite_exponent(Ensemble::Nsra { n: 256, q: 3 });
    let (extra, residual) = SpectralExponent::richardson(&coarse, &fine, &grid, 0.05).unwrap();
    assert!(residual < 0.05);
    let mut worst_fine: f64 = 0.0;
    let mut worst_extra: f64 = 0.0;
    for &d in &grid {
        let a = asym.exponent(d);
        worst_fine = worst_fine.max((fine.at(d).unwrap() - a).abs());
        worst_extra = worst_extra.max((extra.at(d).unwrap() - a).abs());
    }
    assert!(worst_extra < worst_fine, "extrapolation {worst_extra} vs finite {worst_fine}");
    assert!(worst_extra < 5e-3, "{worst_extra}");
}

#[test]
fn finite_spra_spectra_approach_the_asymptotic_exponent() {
    let asym = Ensemble::Spra { n: 3, p: 3, q: 6 }.asymptotic().unwrap();
    let fine = finite_exponent(Ensemble::Spra { n: 240, p: 3, q: 6 });
    for d in [0.1, 0.2, 0.3, 0.5] {
        let gap = (fine.at(d).unwrap() - asym.exponent(d)).abs();
        assert!(gap < 0.02, "δ {d}: {gap}");
    }
}

#[test]
fn bounds_hold_against_simulation() {
    let rep3 = ExplicitCode::new(vec![vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
    let set = ParallelChannelSet::new(
        vec![MbiosChannel::bsc(0.1).unwrap(), MbiosChannel::biawgn(0.5).unwrap()],
        vec![0.5, 0.5],
    )
    .unwrap();
    let d = set.discretize(&QuadratureSpec::default()).unwrap();
    let s = rep3.spectrum().unwrap();
    let ds2 = total_bound_per_subcode(&d, &s, &Ds2Config::default()).unwrap().log_bound.exp();
    let g61 = g61_total_per_subcode(&d, &s, &G61Config::default()).log_bound.exp();
    let mc = ml_montecarlo(&rep3, &set, Assignment::Random, 20_000, 7).unwrap();
    let floor = mc.estimate - 3.0 * mc.std_error();
    assert!(mc.errors > 100);
    assert!(ds2 >= floor && g61 >= floor, "ds2 {ds2} g61 {g61} mc {mc:?}");
    let again = ml_montecarlo(&rep3, &set, Assignment::Random, 20_000, 7).unwrap();
    assert_eq!(mc, again);
}
