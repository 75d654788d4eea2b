use std::f64::consts::TAU;

use fracns::grid::{forward_transform, inverse_unchecked, make_preset, Field, GridSpec};
use fracns::mild::{
    estimate_cb, picard_iterate, semigroup_trajectory, time_march_oracle, working_norm, Forcing, SolverConfig,
    TimeProfile, WorkingNorm,
};
use fracns::theorems::{
    banach_picard_small, smallness_thm2, verify_prop_thm1, verify_prop_thm2, Thm2Exponents,
};
use fracns::varlp::{Domain, ExponentRule, VariableExponent};
use fracns::Error;

fn grid(d: usize, n: usize, l: f64) -> GridSpec {
    GridSpec::new(d, n, l).unwrap()
}

#[test]
fn classical_symbol_matches_alpha_one() {
    let g = grid(2, 16, TAU);
    let cfg = SolverConfig::new(1.0, 0.4, 9, g).unwrap();
    let mut classical = cfg.clone();
    classical.classical_symbol = true;
    let u0 = make_preset("random_divfree", g, 0.2, 5).unwrap();
    let (a, _) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
    let (b, _) = picard_iterate(&classical, &u0, &Forcing::Zero).unwrap();
    assert!(a.unwrap().max_diff(&b.unwrap()).unwrap() <= 1e-12);
}

#[test]
fn iterates_stay_divergence_free() {
    let g = grid(3, 16, TAU);
    let cfg = SolverConfig::new(0.7, 0.5, 6, g).unwrap();
    let u0 = make_preset("random_divfree", g, 0.3, 2).unwrap();
    let f = make_preset("abc_beltrami_3d", g, 0.1, 0).unwrap();
    let (t, rep) = picard_iterate(&cfg, &u0, &Forcing::Field { field: f, profile: TimeProfile::Cosine { omega: 2.0 } }).unwrap();
    assert!(rep.converged);
    assert!(t.unwrap().max_divergence() <= 1e-12);
    assert!(rep.max_divergence <= 1e-12);
}

#[test]
fn taylor_green_oracle_is_first_order() {
    let g = grid(2, 32, TAU);
    let u0 = make_preset("taylor_green_2d", g, 0.5, 0).unwrap();
    for nodes in [6, 11] {
        let cfg = SolverConfig::new(0.9, 1.0, nodes, g).unwrap();
        let m = time_march_oracle(&cfg, &u0, &Forcing::Zero, 1).unwrap();
        let want = u0.scaled((-(2f64.powf(0.9))).exp());
        let got = inverse_unchecked(m.last());
        let err = got.data().iter().zip(want.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= cfg.dt() * want.max_abs(), "{err}");
    }
}

#[test]
fn smallness_and_two_delta_are_consistent() {
    let g = grid(2, 16, TAU);
    let cfg = SolverConfig::new(0.8, 0.5, 9, g).unwrap();
    let cb = estimate_cb(&cfg, 6, 9).unwrap();
    for (seed, frac) in [(1u64, 0.1), (2, 0.3), (3, 0.6), (4, 0.9)] {
        let u = make_preset("random_divfree", g, 1.0, seed).unwrap();
        let m = forward_transform(&u).unwrap().max_abs();
        let u0 = u.scaled(frac * cb.threshold / m);
        let (_, rep) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
        if banach_picard_small(rep.delta, cb.c_b) {
            assert!(rep.within_two_delta, "seed {seed}: {} vs {}", rep.final_norm, rep.delta);
        }
    }
}

#[test]
fn beltrami_smallness_end_to_end() {
    let g = grid(3, 16, TAU);
    let cfg = SolverConfig::new(0.8, 1.0, 9, g).unwrap();
    let cb = estimate_cb(&cfg, 4, 1).unwrap();
    let u0 = make_preset("abc_beltrami_3d", g, 0.01, 0).unwrap();
    let delta = working_norm(&cfg, &semigroup_trajectory(&cfg, &forward_transform(&u0).unwrap())).unwrap();
    let v = smallness_thm2(1.0, delta, 0.0, cb.c_b);
    assert!(v.holds);
    let (_, rep) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
    assert!(rep.converged && rep.within_two_delta);
    assert!(rep.ratios.iter().all(|&r| r < 1.0));
}

#[test]
fn cb_is_stable_under_more_trials_and_shrinks_with_the_box() {
    let cfg = SolverConfig::new(0.8, 0.1, 5, grid(2, 16, TAU)).unwrap();
    let a = estimate_cb(&cfg, 4, 3).unwrap();
    let b = estimate_cb(&cfg, 8, 3).unwrap();
    assert!(b.c_b <= 2.0 * a.c_b && a.c_b <= 2.0 * b.c_b);
    let big = SolverConfig::new(0.8, 0.1, 5, grid(2, 16, 2.0 * TAU)).unwrap();
    let c = estimate_cb(&big, 4, 3).unwrap();
    assert!(c.c_b < a.c_b, "{} vs {}", c.c_b, a.c_b);
}

#[test]
fn working_norms_are_selectable() {
    let g = grid(3, 8, TAU);
    let mut cfg = SolverConfig::new(1.0, 1.0, 5, g).unwrap();
    let u0 = make_preset("abc_beltrami_3d", g, 0.05, 0).unwrap();
    cfg.working_norm = WorkingNorm::Et { p: ExponentRule::Constant { p0: 5.0 }, q: 6.0 };
    let (_, a) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
    cfg.working_norm = WorkingNorm::EScript { p: ExponentRule::Constant { p0: 3.0 } };
    let (_, b) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
    assert!(a.delta > 0.0 && b.delta > 0.0 && a.delta != b.delta);
    assert!(a.within_two_delta && b.within_two_delta);
}

#[test]
fn picard_reports_divergence_without_trajectory() {
    let g = grid(2, 16, TAU);
    let mut cfg = SolverConfig::new(0.6, 2.0, 9, g).unwrap();
    cfg.viscosity = 0.01;
    let u0 = make_preset("random_divfree", g, 50.0, 3).unwrap();
    let (t, rep) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
    assert!(t.is_none());
    assert!(rep.diverged && !rep.converged);
}

#[test]
fn thm1_sweep_drift_on_decaying_mode() {
    let g = grid(3, 8, TAU);
    let base = SolverConfig::new(1.0, 1.0, 41, g).unwrap();
    let u0 = make_preset("abc_beltrami_3d", g, 1.0, 0).unwrap();
    let r = verify_prop_thm1(&base, &ExponentRule::Constant { p0: 5.0 }, 6.0, &u0, &Forcing::Zero, &[0.5, 1.0, 2.0]).unwrap();
    assert!(r.initial.drift <= 0.25, "{}", r.initial.drift);
    assert!(r.force.ratios.iter().all(|&x| x == 0.0));
    assert!(r.bilinear.finite);
}

#[test]
fn thm2_force_ratio_is_uniform_and_initial_ratio_is_bounded() {
    let l = std::f64::consts::PI;
    let g = grid(3, 16, l);
    let base = SolverConfig::new(0.8, 1.0, 17, g).unwrap();
    let p = VariableExponent::new(ExponentRule::Sinusoidal { p0: 4.0, a: 1.0, period: l }, Domain::Grid(g)).unwrap();
    let exps = Thm2Exponents::new(0.8, p.clone()).unwrap();
    let bump = make_preset("bump", g, 1.0, 0).unwrap();
    let data: Vec<f64> = (0..9).flat_map(|_| bump.data().to_vec()).collect();
    let tensor = Field::new(g, 9, data).unwrap();
    let u0 = Field::new(g, 3, (0..3).flat_map(|_| bump.data().to_vec()).collect()).unwrap();
    let r = verify_prop_thm2(&base, &exps, &u0, &tensor, TimeProfile::Constant, &[1.0, 4.0, 16.0], 8.0).unwrap();
    assert!(r.force.drift <= 0.25, "{}", r.force.drift);
    let mf = fracns::operators::maximal_bound_check(&Field::new(g, 1, u0.magnitude()).unwrap(), &p).unwrap();
    assert!(r.initial.constant <= mf.max(1.0), "{} vs {mf}", r.initial.constant);

    let zero = Field::zeros(g, 9);
    let z = verify_prop_thm2(&base, &exps, &u0, &zero, TimeProfile::Constant, &[1.0], 8.0).unwrap();
    assert_eq!(z.force.ratios, vec![0.0]);

    let low = VariableExponent::constant(1.5, Domain::Grid(g)).unwrap();
    let e = Thm2Exponents::new(0.8, low).unwrap();
    assert!(matches!(
        verify_prop_thm2(&base, &e, &u0, &tensor, TimeProfile::Constant, &[1.0], 8.0),
        Err(Error::ExponentRelation(_))
    ));
}
