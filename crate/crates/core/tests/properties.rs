use parbound_core::ds2::{self, tilting_fixed_point, Ds2Config, Ds2Context, Ds2Params};
use parbound_core::oracle::MlTrialResult;
use parbound_core::spectra::asymptotic::AsymptoticEnsemble;
use parbound_core::spectra::{acc_iowe, partial_precode, rep_iowe, uniform_concat};
use parbound_core::special::LnFactorials;
use parbound_core::{MbiosChannel, ParallelChannelSet, QuadratureSpec};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn concatenated_rows_sum_to_binomials(n in 1usize..7, q in 2usize..4, m in 0usize..7) {
        let m = m.min(n);
        let outer = uniform_concat(&partial_precode(n, m).unwrap(), &rep_iowe(n, q).unwrap()).unwrap();
        let t = uniform_concat(&outer, &acc_iowe(n * q)).unwrap();
        let f = LnFactorials::new(n);
        for w in 0..=n {
            prop_assert!((t.row_log_total(w) - f.choose(n, w)).abs() < 1e-9);
        }
    }

    #[test]
    fn fixed_point_converges(lambda in 0.05f64..2.0, rho in 0.05f64..0.95, delta in 0.01f64..0.9, p in 0.01f64..0.3, esno in 0.2f64..3.0) {
        let d = ParallelChannelSet::new(
            vec![MbiosChannel::bsc(p).unwrap(), MbiosChannel::biawgn(esno).unwrap()],
            vec![0.5, 0.5],
        ).unwrap().discretize(&QuadratureSpec::default()).unwrap();
        let sol = tilting_fixed_point(&d, Ds2Params::new(lambda, rho).unwrap(), delta, None).unwrap();
        prop_assert!(sol.residual_k < 1e-10 && sol.residual_beta < 1e-10);
        prop_assert!(sol.k > 0.0 && sol.betas.iter().all(|&b| b > 0.0));
    }

    #[test]
    fn optimized_exponent_beats_union(p in 0.005f64..0.2, r in 0.0f64..0.6, delta in 0.02f64..1.0) {
        let d = ParallelChannelSet::single(MbiosChannel::bsc(p).unwrap()).discretize(&QuadratureSpec::default()).unwrap();
        let ctx = Ds2Context::new(&d);
        let pt = ds2::optimize_point(&ctx, r, delta, &Ds2Config::default(), None);
        let union = r + delta * d.mixed_bhattacharyya().ln();
        prop_assert!(pt.per_symbol <= union + 1e-12);
    }

    #[test]
    fn awgn_bhattacharyya_matches_closed_form(esno in 0.05f64..5.0) {
        let t = MbiosChannel::biawgn(esno).unwrap().density_table(&QuadratureSpec::default()).unwrap();
        let g = t.bhattacharyya();
        prop_assert!((g - (-esno).exp()).abs() <= 1e-8 * (-esno).exp());
    }

    #[test]
    fn capacity_exceeds_cutoff_rate(p in 0.0f64..0.5, eps in 0.0f64..1.0) {
        for ch in [MbiosChannel::bsc(p).unwrap(), MbiosChannel::bec(eps).unwrap()] {
            let (c, r0) = (ch.capacity_bits(), ch.cutoff_rate_bits());
            prop_assert!(c >= r0 - 1e-12 && (0.0..=1.0 + 1e-12).contains(&c));
        }
    }

    #[test]
    fn wilson_interval_is_ordered(trials in 1u64..10_000_000, frac in 0.0f64..1.0) {
        let errors = (trials as f64 * frac) as u64;
        let r = MlTrialResult::from_counts(trials, errors);
        prop_assert!(r.ci_lo <= r.estimate && r.estimate <= r.ci_hi);
        prop_assert!(r.ci_lo >= 0.0 && r.ci_hi <= 1.0);
    }

    #[test]
    fn asymptotic_exponents_stay_below_ln2(delta in 0.001f64..1.0) {
        for e in [AsymptoticEnsemble::nsra(3).unwrap(), AsymptoticEnsemble::spra(3, 6).unwrap()] {
            let v = e.exponent(delta);
            prop_assert!(v <= std::f64::consts::LN_2 + 1e-9);
        }
    }
}
