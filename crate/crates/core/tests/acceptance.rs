//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p fracns-core --test acceptance`.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use fracns::grid::{
    build_preset, dealias, forward_transform, inverse_unchecked, make_preset, Field, GridSpec, Preset, SpectralField,
};
use fracns::kernels::{c_alpha, heat_kernel_radial, smoothing_estimate, time_integral_constant, verify_decay, DecayKernel};
use fracns::mild::{
    estimate_cb, picard_iterate, time_march_oracle, Forcing, SolverConfig, TimeProfile, Trajectory,
};
use fracns::operators::{
    leray_project, maximal_function, random_bump_field, random_scalar, riesz_potential_direct, riesz_potential_fft,
    riesz_transform, RadiusLadder,
};
use fracns::random::SeedStream;
use fracns::theorems::{banach_picard_small, check_thm1_exponents, verify_prop_thm1, verify_prop_thm2, Thm2Exponents};
use fracns::varlp::{luxemburg_norm, modular, Domain, ExponentRule, VariableExponent};
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn luxemburg_consistency() -> Outcome {
    let g = GridSpec::new(1, 1 << 20, 1.0).unwrap();
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    for p0 in [1.5, 2.0, 3.0, 7.0] {
        let p = VariableExponent::constant(p0, Domain::Grid(g)).unwrap();
        for seed in 0..10 {
            let mut rng = SeedStream::new(seed);
            let f: Vec<f64> = (0..g.len()).map(|_| rng.uniform(-3.0, 3.0)).collect();
            let start = Instant::now();
            let n = luxemburg_norm(&f, &p).unwrap();
            slowest = slowest.max(start.elapsed().as_secs_f64());
            let want = modular(&f, &p).unwrap().powf(1.0 / p0);
            worst = worst.max(((n - want) / want).abs());
        }
    }
    outcome(
        worst <= 1e-10 && slowest < 1.0,
        format!("max rel err {worst:.2e}, slowest norm {slowest:.3}s at 2^20 samples"),
    )
}

fn piecewise_oracle() -> Outcome {
    let cells = 1000;
    let dom = Domain::interval(1.0, cells).unwrap();
    let values = (0..cells).map(|i| if i < cells / 2 { 2.0 } else { 3.0 }).collect();
    let p = VariableExponent::from_values(dom, values).unwrap();
    let n = luxemburg_norm(&vec![2.0; cells], &p).unwrap();
    outcome((n - 2.0).abs() <= 1e-10 * 2.0, format!("norm {n:.15}"))
}

fn kernel_oracles() -> Outcome {
    let mut gauss = 0.0f64;
    let mut count = 0;
    for &t in &[0.01f64, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0] {
        for i in 0..=15 {
            let r = 6.0 * t.sqrt() * i as f64 / 15.0;
            let want = (4.0 * PI * t).powf(-1.5) * (-r * r / (4.0 * t)).exp();
            let got = heat_kernel_radial(1.0, t, r).unwrap();
            gauss = gauss.max(((got - want) / want).abs());
            count += 1;
        }
    }
    let mut poisson = 0.0f64;
    for &t in &[0.05, 0.5, 1.0, 4.0] {
        for i in 0..=12 {
            let r = 6.0 * t * i as f64 / 12.0;
            let want = t / (PI * PI * (t * t + r * r).powi(2));
            let got = heat_kernel_radial(0.5, t, r).unwrap();
            poisson = poisson.max(((got - want) / want).abs());
        }
    }
    outcome(
        gauss <= 1e-9 && poisson <= 1e-8 && count >= 100,
        format!("gaussian max rel {gauss:.2e} on {count} points, poisson max rel {poisson:.2e}"),
    )
}

fn decay_scaling() -> Outcome {
    let times = [0.01, 0.1, 1.0, 10.0];
    let radii = [0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0];
    let mut grad = 0.0f64;
    let mut oseen = 0.0f64;
    for alpha in [0.6, 0.8, 1.0] {
        grad = grad.max(verify_decay(DecayKernel::GradHeat, alpha, &times, &radii).unwrap().drift);
        oseen = oseen.max(verify_decay(DecayKernel::Oseen, alpha, &times, &radii).unwrap().drift);
    }
    outcome(
        grad <= 0.01 && oseen <= 0.02,
        format!("grad drift {grad:.2e}, oseen drift {oseen:.2e}"),
    )
}

fn smoothing_rates() -> Outcome {
    let g = GridSpec::new(3, 128, 140.0).unwrap();
    let centre = g.flat([64, 64, 64]);
    let mut data = vec![0.0; g.len()];
    data[centre] = 1.0 / g.cell_volume();
    let phi = Field::new(g, 1, data).unwrap();
    let times: Vec<f64> = (0..9).map(|i| 10f64.powf(i as f64 / 4.0)).collect();
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for alpha in [0.6, 0.8, 1.0] {
        let r = smoothing_estimate(alpha, 0.0, 1.0, f64::INFINITY, &phi, &times).unwrap();
        worst = worst.max(r.relative_error);
        detail.push(format!("a={alpha}: {:.4} vs {:.4}", r.slope, r.predicted));
    }
    outcome(worst <= 0.05, format!("{} (max rel {worst:.2e})", detail.join(", ")))
}

fn time_integral() -> Outcome {
    let c1 = c_alpha(1.0).unwrap();
    let mut drift = 0.0f64;
    for alpha in [0.6, 0.8, 1.0] {
        let c = c_alpha(alpha).unwrap();
        for i in 0..=20 {
            let r = 0.1 * 100f64.powf(i as f64 / 20.0);
            let v = time_integral_constant(alpha, r).unwrap() * r.powf(4.0 - 2.0 * alpha);
            drift = drift.max(((v - c) / c).abs());
        }
    }
    outcome(
        (c1 - 1.0 / 3.0).abs() <= 1e-8 && drift <= 1e-8,
        format!("c_1 = {c1:.12}, max rel r-dependence {drift:.2e}"),
    )
}

fn rel_linf(a: &Field, b: &Field) -> f64 {
    let diff = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    diff / b.max_abs()
}

fn decay_run(d: usize, n: usize, preset: &str, alpha: f64, rate: f64) -> (f64, f64, usize) {
    let g = GridSpec::new(d, n, TAU).unwrap();
    let cfg = SolverConfig::new(alpha, 1.0, 11, g).unwrap();
    let u0 = make_preset(preset, g, 0.1, 0).unwrap();
    let start = Instant::now();
    let (traj, rep) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let traj = traj.expect("converged");
    let got = inverse_unchecked(traj.last());
    (rel_linf(&got, &u0.scaled((-rate).exp())), secs, rep.iterations)
}

fn taylor_green() -> Outcome {
    let mut worst = 0.0f64;
    let mut secs = 0.0f64;
    for alpha in [0.75, 1.0] {
        let (e, s, _) = decay_run(2, 64, "taylor_green_2d", alpha, 2f64.powf(alpha));
        worst = worst.max(e);
        secs = secs.max(s);
    }
    outcome(worst <= 1e-6 && secs < 30.0, format!("max rel err {worst:.2e}, slowest run {secs:.2}s"))
}

fn beltrami() -> Outcome {
    let mut worst = 0.0f64;
    let mut secs = 0.0f64;
    for alpha in [0.6, 0.8, 1.0] {
        let (e, s, _) = decay_run(3, 32, "abc_beltrami_3d", alpha, 1.0);
        worst = worst.max(e);
        secs = secs.max(s);
    }
    outcome(worst <= 1e-5 && secs < 300.0, format!("max rel err {worst:.2e}, slowest run {secs:.2}s"))
}

fn traj_linf_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(x, y)| {
            let mut d = x.clone();
            d.axpy(-1.0, y).unwrap();
            inverse_unchecked(&d).max_abs()
        })
        .fold(0.0, f64::max)
}

fn oracle_agreement() -> Outcome {
    let g = GridSpec::new(3, 32, TAU).unwrap();
    let u0 = make_preset("random_divfree", g, 0.05, 7).unwrap();
    let mut errs = Vec::new();
    let mut ok = true;
    for nodes in [11, 21] {
        let cfg = SolverConfig::new(0.8, 0.5, nodes, g).unwrap();
        let (traj, _) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
        let oracle = time_march_oracle(&cfg, &u0, &Forcing::Zero, 1).unwrap();
        let e = traj_linf_diff(&traj.expect("converged"), &oracle);
        let dt = cfg.dt();
        ok &= e <= 5.0 * dt * dt + 1e-8;
        errs.push(e);
    }
    let ratio = errs[1] / errs[0];
    ok &= (0.35..=0.65).contains(&ratio);
    outcome(
        ok,
        format!("errors {:.2e} (dt 0.05), {:.2e} (dt 0.025), refinement ratio {ratio:.3}", errs[0], errs[1]),
    )
}

fn contraction() -> Outcome {
    let g = GridSpec::new(3, 16, TAU).unwrap();
    let cfg = SolverConfig::new(0.8, 0.5, 11, g).unwrap();
    let cb = estimate_cb(&cfg, 8, 2024).unwrap();
    let unit = |seed: u64| {
        let u = make_preset("random_divfree", g, 1.0, seed).unwrap();
        let m = forward_transform(&u).unwrap().max_abs();
        u.scaled(1.0 / m)
    };
    let mut small_ok = 0;
    let mut worst_norm = 0.0f64;
    for seed in 0..10 {
        let delta = 0.5 * cb.threshold;
        let u0 = unit(seed).scaled(delta);
        let (_, rep) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
        let small = banach_picard_small(rep.delta, cb.c_b);
        let contracts = rep.converged && rep.ratios.iter().all(|&r| r < 1.0);
        if small && contracts && rep.within_two_delta {
            small_ok += 1;
        }
        worst_norm = worst_norm.max(rep.final_norm / rep.delta);
    }
    let mut large_fail = 0;
    for seed in 0..10 {
        let u0 = unit(seed).scaled(10.0 * cb.threshold);
        let (_, rep) = picard_iterate(&cfg, &u0, &Forcing::Zero).unwrap();
        if !rep.converged || rep.ratios.iter().any(|&r| r >= 1.0) {
            large_fail += 1;
        }
    }
    outcome(
        small_ok == 10 && large_fail >= 1,
        format!(
            "C_B {:.4e}, small data {small_ok}/10 contract (max final/delta {worst_norm:.4}), 10x data {large_fail}/10 fail",
            cb.c_b
        ),
    )
}

fn admissibility() -> Outcome {
    let p = |p0: f64| VariableExponent::constant(p0, Domain::Time { t_end: 1.0, nodes: 9 }).unwrap();
    let a = check_thm1_exponents(1.0, 6.0, &p(5.0)).admissible;
    let b = check_thm1_exponents(1.0, 6.0, &p(3.0)).admissible;
    let c = check_thm1_exponents(0.6, 10.0, &p(5.0)).admissible;
    outcome(a && !b && !c, format!("(1,6,5) {a}, (1,6,3) {b}, (0.6,10,5) {c}"))
}

fn t_scaling() -> Outcome {
    let g = GridSpec::new(3, 16, TAU).unwrap();
    let base = SolverConfig::new(1.0, 1.0, 9, g).unwrap();
    let u0 = make_preset("abc_beltrami_3d", g, 1.0, 0).unwrap();
    let forcing = Forcing::Field {
        field: u0.clone(),
        profile: TimeProfile::Constant,
    };
    let times: Vec<f64> = (0..5).map(|i| 1e-3 * 10f64.powf(i as f64 / 2.0)).collect();
    let r1 = verify_prop_thm1(&base, &ExponentRule::Constant { p0: 5.0 }, 6.0, &u0, &forcing, &times).unwrap();
    let pred = r1.predicted_slope.unwrap();
    let s_init = r1.initial.slope.unwrap();
    let s_force = r1.force.slope.unwrap();
    let ok1 = ((s_init - pred) / pred).abs() <= 0.25 && ((s_force - pred) / pred).abs() <= 0.25;

    let l = PI;
    let g2 = GridSpec::new(3, 16, l).unwrap();
    let base2 = SolverConfig::new(0.8, 1.0, 17, g2).unwrap();
    let p = VariableExponent::new(ExponentRule::Sinusoidal { p0: 4.0, a: 1.0, period: l }, Domain::Grid(g2)).unwrap();
    let exps = Thm2Exponents::new(0.8, p).unwrap();
    let v0 = make_preset("abc_beltrami_3d", g2, 1.0, 0).unwrap();
    let bump = build_preset(&Preset::Bump { radius: Some(l / 4.0) }, g2, 1.0, 0).unwrap();
    let data = (0..9).flat_map(|c| bump.data().iter().map(move |v| v * (1.0 + c as f64) / 9.0)).collect();
    let tensor = Field::new(g2, 9, data).unwrap();
    let r2 = verify_prop_thm2(&base2, &exps, &v0, &tensor, TimeProfile::Constant, &[1.0, 4.0, 16.0], 16.0).unwrap();
    let slopes = [r2.initial.slope, r2.force.slope, r2.bilinear.slope].map(|s| s.unwrap_or(f64::NAN));
    let ok2 = slopes.iter().all(|s| s.abs() <= 0.05);
    outcome(
        ok1 && ok2,
        format!(
            "local: init slope {s_init:.4}, force slope {s_force:.4}, predicted {pred:.4}; global slopes {:.4} {:.4} {:.4}",
            slopes[0], slopes[1], slopes[2]
        ),
    )
}

fn random_vector(g: GridSpec, seed: u64) -> SpectralField {
    let mut rng = SeedStream::new(seed);
    let data = (0..g.dim() * g.len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
    forward_transform(&Field::new(g, g.dim(), data).unwrap()).unwrap()
}

fn inner(a: &SpectralField, b: &SpectralField) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x * y.conj()).re).sum()
}

fn operator_invariants() -> Outcome {
    let g = GridSpec::new(3, 16, TAU).unwrap();
    let mut leray = 0.0f64;
    let mut riesz = 0.0f64;
    let mut maximal = 0.0f64;
    let mut potential = 0.0f64;
    for seed in 0..10 {
        let u = random_vector(g, seed);
        let p = leray_project(&u).unwrap();
        let pp = leray_project(&p).unwrap();
        let mut rest = u.clone();
        rest.axpy(-1.0, &p).unwrap();
        let scale = u.max_abs();
        leray = leray
            .max(pp.max_diff(&p).unwrap() / scale)
            .max(inner(&p, &rest).abs() / inner(&u, &u));

        let f = dealias(&forward_transform(&random_scalar(g, seed)).unwrap());
        let mut sum = SpectralField::zeros(g, 1);
        for axis in 0..3 {
            let r = riesz_transform(&riesz_transform(&f, axis).unwrap(), axis).unwrap();
            sum.axpy(1.0, &r).unwrap();
        }
        let mut want = f.scaled(-1.0);
        want.set_mode(0, [0, 0, 0], Complex64::new(0.0, 0.0));
        riesz = riesz.max(sum.max_diff(&want).unwrap() / f.max_abs());

        let a = random_scalar(g, 100 + seed);
        let b = random_bump_field(g, 200 + seed);
        let ladder = RadiusLadder::standard(&g);
        let ab = Field::new(g, 1, a.data().iter().zip(b.data()).map(|(x, y)| x - y).collect()).unwrap();
        let (ma, mb, mab) = (maximal_function(&a, &ladder), maximal_function(&b, &ladder), maximal_function(&ab, &ladder));
        let mc = maximal_function(&a.scaled(-2.5), &ladder);
        for i in 0..g.len() {
            let excess = mab.data()[i] - ma.data()[i] - mb.data()[i];
            maximal = maximal.max(excess.max(0.0)).max((mc.data()[i] - 2.5 * ma.data()[i]).abs());
        }

        let s = random_bump_field(GridSpec::new(3, 16, 8.0).unwrap(), seed);
        let direct = riesz_potential_direct(&s, 1.0).unwrap();
        let fast = riesz_potential_fft(&s, 1.0).unwrap();
        potential = potential.max(rel_linf(&fast, &direct));
    }
    let ok = leray <= 1e-12 && riesz <= 1e-12 && maximal <= 1e-12 && potential <= 0.01;
    outcome(
        ok,
        format!("leray {leray:.1e}, riesz {riesz:.1e}, maximal {maximal:.1e}, potential {potential:.1e} over 10 seeds"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("luxemburg consistency", luxemburg_consistency),
        ("piecewise exponent oracle", piecewise_oracle),
        ("gaussian and poisson kernel oracles", kernel_oracles),
        ("decay estimate scaling", decay_scaling),
        ("smoothing rates", smoothing_rates),
        ("time integral identity", time_integral),
        ("taylor-green decay", taylor_green),
        ("beltrami decay", beltrami),
        ("oracle agreement", oracle_agreement),
        ("contraction and 2 delta bound", contraction),
        ("exponent admissibility table", admissibility),
        ("T-scaling regression", t_scaling),
        ("operator invariants", operator_invariants),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        println!(
            "{} {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
