use parbound_core::ds2::{
    self, eval_ab, psi_tables, subcode_bound, tilting_fixed_point, total_bound_per_subcode, union_bhattacharyya, Ds2Config,
    Ds2Context, Ds2Params, Tilting,
};
use parbound_core::g61::{self, g61_total_per_subcode, G61Config, G61Context};
use parbound_core::oracle::ExplicitCode;
use parbound_core::special::log_sum_exp;
use parbound_core::{DistanceSpectrum, MbiosChannel, ParallelChannelSet, ParallelDensities, QuadratureSpec};

fn dens(chs: &[MbiosChannel], alphas: &[f64]) -> ParallelDensities {
    ParallelChannelSet::new(chs.to_vec(), alphas.to_vec()).unwrap().discretize(&QuadratureSpec::default()).unwrap()
}

fn hamming74() -> DistanceSpectrum {
    ExplicitCode::from_generator(&[
        vec![1, 0, 0, 0, 1, 1, 0],
        vec![0, 1, 0, 0, 1, 0, 1],
        vec![0, 0, 1, 0, 0, 1, 1],
        vec![0, 0, 0, 1, 1, 1, 1],
    ])
    .unwrap()
    .spectrum()
    .unwrap()
}

fn sets() -> Vec<ParallelDensities> {
    let bsc = |p| MbiosChannel::bsc(p).unwrap();
    let awgn = |e| MbiosChannel::biawgn(e).unwrap();
    vec![
        dens(&[bsc(0.05)], &[1.0]),
        dens(&[bsc(0.02), bsc(0.1)], &[0.5, 0.5]),
        dens(&[bsc(0.03), awgn(1.0)], &[0.3, 0.7]),
        dens(&[awgn(0.5), awgn(2.0)], &[0.5, 0.5]),
    ]
}

#[test]
fn fixed_point_normalizes_measures() {
    for d in sets() {
        for (lambda, rho, delta) in [(0.3, 0.5, 0.2), (1.0, 0.8, 0.5), (0.1, 0.2, 0.05)] {
            let p = Ds2Params::new(lambda, rho).unwrap();
            let sol = tilting_fixed_point(&d, p, delta, None).unwrap();
            assert!(sol.residual_k < 1e-10 && sol.residual_beta < 1e-10);
            for (psi, t) in psi_tables(&d, p, &sol).iter().zip(d.tables()) {
                let mass: f64 = psi.iter().zip(t.entries()).map(|(v, e)| v * e.weight).sum();
                assert!((mass - 1.0).abs() < 1e-9, "ψ mass {mass}");
            }
        }
    }
}

/// Per-symbol objective `δ ln ΣαA + (1-δ) ln ΣαB` for a tilting.
fn objective(d: &ParallelDensities, p: Ds2Params, delta: f64, t: Tilting<'_>) -> f64 {
    let ev = eval_ab(d, p, t).unwrap();
    delta * ev.ln_mix_a + (1.0 - delta) * ev.ln_mix_b
}

#[test]
fn fixed_point_tilting_is_locally_optimal() {
    for d in sets() {
        let (p, delta) = (Ds2Params::new(0.4, 0.6).unwrap(), 0.25);
        let sol = tilting_fixed_point(&d, p, delta, None).unwrap();
        let best = objective(&d, p, delta, Tilting::Solution(&sol));
        let base = psi_tables(&d, p, &sol);
        assert!((objective(&d, p, delta, Tilting::Explicit(&base)) - best).abs() < 1e-9);
        for (step, sign) in [(0.05, 1.0), (0.05, -1.0), (0.2, 1.0)] {
            // smooth multiplicative perturbation, renormalized to unit mass
            let tables: Vec<Vec<f64>> = base
                .iter()
                .zip(d.tables())
                .map(|(psi, t)| {
                    let mut v: Vec<f64> = psi
                        .iter()
                        .zip(t.entries())
                        .map(|(x, e)| x * (1.0 + sign * step * (e.ln_p1 - e.ln_p0).tanh()))
                        .collect();
                    // keep the perturbation symmetric under the output involution
                    let m = t.mirror();
                    let sym: Vec<f64> = (0..v.len()).map(|i| 0.5 * (v[i] + v[m[i]])).collect();
                    v = sym;
                    let mass: f64 = v.iter().zip(t.entries()).map(|(x, e)| x * e.weight).sum();
                    v.iter().map(|x| x / mass).collect()
                })
                .collect();
            let val = objective(&d, p, delta, Tilting::Explicit(&tables));
            assert!(val >= best - 1e-10, "perturbed {val} < fixed point {best}");
        }
    }
}

#[test]
fn union_reduction_identity() {
    let s = hamming74();
    for d in sets() {
        let terms: Vec<f64> = (1..=7)
            .map(|h| subcode_bound(&d, Ds2Params::bhattacharyya(), Tilting::Density, s.get(h), h, 7).unwrap())
            .collect();
        let u = union_bhattacharyya(&d, &s);
        assert!((log_sum_exp(&terms) - u).abs() <= 1e-10 * u.abs());
    }
}

#[test]
fn optimized_bounds_never_exceed_union() {
    let s = hamming74();
    for d in sets() {
        let u = union_bhattacharyya(&d, &s);
        let a = total_bound_per_subcode(&d, &s, &Ds2Config::default()).unwrap();
        let b = g61_total_per_subcode(&d, &s, &G61Config::default());
        assert!(a.log_bound <= u + 1e-12 && a.log_bound <= 0.0);
        assert!(b.log_bound <= u + 1e-12 && b.log_bound <= 0.0);
        assert!(a.all_converged());
    }
}

#[test]
fn single_channel_ds2_dominates_g61() {
    let cases = [MbiosChannel::bsc(0.05).unwrap(), MbiosChannel::bsc(0.2).unwrap(), MbiosChannel::biawgn(0.8).unwrap()];
    for ch in cases {
        let d = dens(&[ch], &[1.0]);
        let (dc, gc) = (Ds2Context::new(&d), G61Context::new(&d));
        for (r, delta) in [(0.1, 0.2), (0.3, 0.4), (0.02, 0.05), (0.5, 0.7)] {
            let a = ds2::optimize_point(&dc, r, delta, &Ds2Config::default(), None).per_symbol;
            let b = g61::optimize_point(&gc, r, delta, None, &G61Config::default(), None).per_symbol;
            assert!(b >= a - 1e-6, "r {r} δ {delta}: g61 {b} < ds2 {a}");
        }
    }
}

#[test]
fn bounds_improve_with_the_channel() {
    let s = hamming74();
    let cfg = Ds2Config::default();
    let mut last = f64::INFINITY;
    for p in [0.2, 0.1, 0.05, 0.02, 0.01] {
        let d = dens(&[MbiosChannel::bsc(p).unwrap(), MbiosChannel::biawgn(1.0).unwrap()], &[0.5, 0.5]);
        let v = total_bound_per_subcode(&d, &s, &cfg).unwrap().log_bound;
        assert!(v <= last + 1e-9, "p {p}: {v} > {last}");
        last = v;
    }
}

#[test]
fn channel_order_is_irrelevant() {
    let s = hamming74();
    let d = dens(&[MbiosChannel::bsc(0.04).unwrap(), MbiosChannel::biawgn(1.5).unwrap()], &[0.4, 0.6]);
    let a = total_bound_per_subcode(&d, &s, &Ds2Config::default()).unwrap().log_bound;
    let b = total_bound_per_subcode(&d.permuted(&[1, 0]), &s, &Ds2Config::default()).unwrap().log_bound;
    assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
}
