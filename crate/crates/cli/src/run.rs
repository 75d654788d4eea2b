//! Subcommand dispatch.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use fracns::grid::{build_preset, Field, GridSpec, Preset};
use fracns::kernels::{verify_decay, DecayKernel, DecayReport, KernelProfile};
use fracns::mild::{
    estimate_cb, picard_iterate, time_march_oracle, CbEstimate, Forcing, PicardReport, SolverConfig, TimeProfile,
    WorkingNorm,
};
use fracns::operators::{
    ensemble_stability, maximal_bound_check, mixed_riesz_check, random_bump_field, riesz_potential_bound_check,
    MixedRieszExponents,
};
use fracns::random::SeedStream;
use fracns::theorems::{
    banach_picard_small, check_thm1_exponents, e_script_norm, et_norm, smallness_thm1, smallness_thm2, t_factor,
    verify_prop_thm1, verify_prop_thm2, BoundReport, SmallnessVerdict, Thm1Constants, Thm1Exponents, Thm2Exponents,
};
use fracns::varlp::{lp_norm, luxemburg_norm, mixed_norm, modular, Domain, ExponentRule, VariableExponent};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ForcingBlock, Format, OperatorKind};
use crate::manifest::{read_trajectory, sha256_file, versions, write_manifest, Artifacts, Failure, RunManifest};
use crate::CliError;

pub const DEFAULT_OUT_DIR: &str = "fracns-out";

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Norm { field: Option<PathBuf> },
    Kernel { verify: bool },
    OperatorsCheck,
    Solve,
    Picard,
    Theorem1 { trajectory: Option<PathBuf> },
    Theorem2 { trajectory: Option<PathBuf> },
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Norm { .. } => "norm",
            Command::Kernel { .. } => "kernel",
            Command::OperatorsCheck => "operators-check",
            Command::Solve => "solve",
            Command::Picard => "picard",
            Command::Theorem1 { .. } => "theorem1",
            Command::Theorem2 { .. } => "theorem2",
            Command::Report => "report",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Invocation {
    pub config: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub quiet: bool,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    hash: &'a str,
    out: &'a mut Artifacts,
    format: Format,
    lines: Vec<String>,
}

/// Run one subcommand; returns the process exit code. A manifest is written in every case.
pub fn execute(cmd: &Command, inv: &Invocation) -> i32 {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut out_dir = inv.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let mut manifest = RunManifest {
        subcommand: cmd.name().to_string(),
        config_hash: None,
        seed: None,
        versions: versions(),
        started_unix,
        wall_clock_secs: 0.0,
        status: "ok".into(),
        failure: None,
        files: Vec::new(),
        invalid: Vec::new(),
    };

    let mut artifacts = None;
    let result = (|| -> Result<Vec<String>, CliError> {
        let cfg = match (&inv.config, cmd) {
            (Some(path), _) => {
                let (mut cfg, _) = ExperimentConfig::load(path)?;
                if let Some(seed) = inv.seed {
                    cfg.override_seed(seed);
                }
                if let Some(f) = inv.format {
                    cfg.run.format = f;
                }
                if inv.out_dir.is_none() {
                    if let Some(d) = &cfg.run.out_dir {
                        out_dir = d.clone();
                    }
                }
                Some(cfg)
            }
            (None, Command::Report) => None,
            (None, _) => return Err(CliError::Config(vec!["--config is required".into()])),
        };
        let out = artifacts.insert(Artifacts::new(&out_dir)?);
        let Some(cfg) = cfg else {
            return report(out);
        };
        let hash = cfg.hash();
        manifest.config_hash = Some(hash.clone());
        manifest.seed = Some(cfg.run.seed);
        let mut ctx = Ctx {
            format: cfg.run.format,
            cfg: &cfg,
            hash: &hash,
            out,
            lines: Vec::new(),
        };
        match cmd {
            Command::Norm { field } => norm(&mut ctx, field.as_deref())?,
            Command::Kernel { verify } => kernel(&mut ctx, *verify)?,
            Command::OperatorsCheck => operators_check(&mut ctx)?,
            Command::Solve => solve(&mut ctx)?,
            Command::Picard => picard(&mut ctx)?,
            Command::Theorem1 { trajectory } => theorem1(&mut ctx, trajectory.as_deref())?,
            Command::Theorem2 { trajectory } => theorem2(&mut ctx, trajectory.as_deref())?,
            Command::Report => {
                let lines = report(ctx.out)?;
                ctx.lines.extend(lines);
            }
        }
        Ok(ctx.lines)
    })();

    if let Some(a) = &artifacts {
        manifest.files = a.entries();
        manifest.invalid = a.invalid_dirs();
    }
    let code = match result {
        Ok(lines) => {
            if !inv.quiet {
                for l in lines {
                    println!("{l}");
                }
            }
            0
        }
        Err(e) => {
            eprintln!("fracns {}: {e}", cmd.name());
            manifest.status = "failed".into();
            manifest.failure = Some(Failure {
                exit_code: e.exit_code(),
                message: e.to_string(),
            });
            e.exit_code()
        }
    };
    manifest.wall_clock_secs = started.elapsed().as_secs_f64();
    match write_manifest(&out_dir, &manifest) {
        Ok(_) => code,
        Err(e) => {
            eprintln!("fracns: cannot write manifest: {e}");
            if code == 0 {
                4
            } else {
                code
            }
        }
    }
}

fn initial_field(cfg: &ExperimentConfig, grid: GridSpec) -> Result<Field, CliError> {
    let i = &cfg.data.initial;
    if let Some(path) = &i.file {
        let f = fracns::io::load(path)?;
        if *f.grid() != grid || f.components() != grid.dim() {
            return Err(CliError::Config(vec![format!(
                "data.initial.file {} does not hold a {}-component field on the configured grid",
                path.display(),
                grid.dim()
            )]));
        }
        return Ok(f);
    }
    let name = i.preset.as_deref().unwrap_or("random_divfree");
    let preset = match name.parse::<Preset>()? {
        Preset::Bump { .. } => Preset::Bump { radius: i.radius },
        p => p,
    };
    let f = build_preset(&preset, grid, i.amplitude, i.seed)?;
    if f.components() == grid.dim() {
        Ok(f)
    } else {
        // Scalar presets fill every velocity component.
        let data = (0..grid.dim()).flat_map(|_| f.data().to_vec()).collect();
        Ok(Field::new(grid, grid.dim(), data)?)
    }
}

/// `bump(x)·A` with `A` a seeded random `d×d` matrix.
fn forcing_tensor(grid: GridSpec, radius: Option<f64>, amplitude: f64, seed: u64) -> Result<Field, CliError> {
    let d = grid.dim();
    let bump = build_preset(&Preset::Bump { radius }, grid, 1.0, 0)?;
    let mut rng = SeedStream::new(seed);
    let a: Vec<f64> = (0..d * d).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let data = a.iter().flat_map(|&c| bump.data().iter().map(move |b| amplitude * c * b)).collect();
    Ok(Field::new(grid, d * d, data)?)
}

fn forcing(cfg: &ExperimentConfig, grid: GridSpec) -> Result<Forcing, CliError> {
    Ok(match &cfg.data.forcing {
        ForcingBlock::Zero => Forcing::Zero,
        ForcingBlock::Field {
            preset,
            amplitude,
            seed,
            profile,
        } => Forcing::Field {
            field: build_preset(&preset.parse()?, grid, *amplitude, *seed)?,
            profile: *profile,
        },
        ForcingBlock::Tensor {
            radius,
            amplitude,
            seed,
            profile,
        } => Forcing::Tensor {
            tensor: forcing_tensor(grid, *radius, *amplitude, *seed)?,
            profile: *profile,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub file: String,
    pub components: usize,
    pub exponent: ExponentRule,
    pub p_minus: f64,
    pub p_plus: f64,
    pub modular: f64,
    pub luxemburg: f64,
    /// Classical `L^p` norm when the exponent is constant.
    pub classical: Option<f64>,
}

fn norm(ctx: &mut Ctx, field: Option<&Path>) -> Result<(), CliError> {
    let path = field
        .map(Path::to_path_buf)
        .or_else(|| ctx.cfg.run.field.clone())
        .ok_or_else(|| CliError::Config(vec!["norm needs --field or run.field".into()]))?;
    let f = fracns::io::load(&path)?;
    let grid = *f.grid();
    let p = VariableExponent::new(ctx.cfg.exponents.space.clone(), Domain::Grid(grid))?;
    let mag = f.magnitude();
    let lux = luxemburg_norm(&mag, &p)?;
    let classical = if p.is_constant() {
        Some(lp_norm(&mag, p.weights(), p.p_minus())?)
    } else {
        None
    };
    let rep = NormReport {
        file: path.display().to_string(),
        components: f.components(),
        exponent: p.rule().clone(),
        p_minus: p.p_minus(),
        p_plus: p.p_plus(),
        modular: modular(&mag, &p)?,
        luxemburg: lux,
        classical,
    };
    ctx.out.write_json("norm.json", &rep)?;
    ctx.lines.push(format!("{lux}"));
    Ok(())
}

fn kernel(ctx: &mut Ctx, verify: bool) -> Result<(), CliError> {
    let k = &ctx.cfg.run.kernel;
    let alpha = k.alpha.unwrap_or(ctx.cfg.solver.alpha);
    let mut rows = Vec::new();
    for &t in &k.times {
        let prof = KernelProfile::new(alpha, t, 3)?;
        let tau = t.powf(0.5 / alpha);
        for &s in &k.scaled_radii {
            let r = s * tau;
            let grad = prof.grad(r);
            rows.push(vec![alpha, t, r, prof.value(r), grad, grad.abs() * (tau + r).powi(4)]);
        }
    }
    let name = ctx
        .out
        .write_table("kernel_profile", ctx.format, &["alpha", "t", "r", "g", "grad_g", "decay_ratio"], &rows)?;
    ctx.lines.push(format!("wrote {name} ({} rows)", rows.len()));
    if verify {
        let mut reports: Vec<DecayReport> = vec![verify_decay(DecayKernel::GradHeat, alpha, &k.times, &k.scaled_radii)?];
        if k.oseen {
            reports.push(verify_decay(DecayKernel::Oseen, alpha, &k.times, &k.scaled_radii)?);
        }
        for r in &reports {
            ctx.lines.push(format!("{:?}: sup {:.6e}, drift {:.3e}", r.kernel, r.sup, r.drift));
            if !r.finite {
                ctx.out.write_json("decay_report.json", &reports)?;
                return Err(CliError::Numerical(format!("{:?} decay constant is not finite", r.kernel)));
            }
        }
        ctx.out.write_json("decay_report.json", &reports)?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorReport {
    pub operator: OperatorKind,
    pub exponent_preset: ExponentRule,
    pub ensemble_size: usize,
    pub seed: u64,
    pub beta: Option<f64>,
    pub ratio_sup: f64,
    pub half_sup: f64,
    pub drift: f64,
    pub ratios: Vec<f64>,
}

fn operators_check(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let grid = cfg.grid_spec()?;
    let d = grid.dim() as f64;
    let p = VariableExponent::new(cfg.exponents.space.clone(), Domain::Grid(grid))?;
    let o = &cfg.run.operators;
    let mixed = match o.operator {
        OperatorKind::MixedRiesz => Some(MixedRieszExponents::bilinear(cfg.solver.alpha, &p)?),
        _ => None,
    };
    let beta = match o.operator {
        OperatorKind::Maximal => None,
        OperatorKind::RieszPotential => Some(o.beta.unwrap_or(0.5 * d / p.p_plus())),
        OperatorKind::MixedRiesz => Some(o.beta.unwrap_or(mixed.as_ref().map_or(0.0, |m| m.beta))),
    };
    let mut rng = SeedStream::new(cfg.run.seed);
    let mut ratios = Vec::with_capacity(o.ensemble);
    for _ in 0..o.ensemble {
        let f = random_bump_field(grid, rng.next_u64());
        let r = match (o.operator, &mixed) {
            (OperatorKind::Maximal, _) => maximal_bound_check(&f, &p)?,
            (OperatorKind::RieszPotential, _) => riesz_potential_bound_check(&f, beta.unwrap_or_default(), &p)?,
            (OperatorKind::MixedRiesz, Some(m)) => {
                let pp = cfg.exponents.pp.unwrap_or(m.pp);
                mixed_riesz_check(&f, beta.unwrap_or_default(), &m.p, pp, &m.rho)?
            }
            (OperatorKind::MixedRiesz, None) => unreachable!(),
        };
        ratios.push(r);
    }
    let st = ensemble_stability(&ratios);
    let rep = OperatorReport {
        operator: o.operator,
        exponent_preset: cfg.exponents.space.clone(),
        ensemble_size: o.ensemble,
        seed: cfg.run.seed,
        beta,
        ratio_sup: st.ratio_sup,
        half_sup: st.half_sup,
        drift: st.drift,
        ratios,
    };
    ctx.out.write_json("operators_report.json", &rep)?;
    if !st.finite {
        return Err(CliError::Numerical("operator ratio is not finite".into()));
    }
    ctx.lines.push(format!("{:?}: ratio_sup {:.6e}, drift {:.4}", o.operator, st.ratio_sup, st.drift));
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: String,
    pub substeps: usize,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub spectral_max: Vec<f64>,
    pub max_divergence: f64,
    pub config_hash: String,
}

fn solve(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg.solver_config()?;
    let u0 = initial_field(ctx.cfg, cfg.grid)?;
    let f = forcing(ctx.cfg, cfg.grid)?;
    let mut traj = time_march_oracle(&cfg, &u0, &f, ctx.cfg.run.substeps)?;
    traj.config_hash = Some(ctx.hash.to_string());
    ctx.out.write_trajectory("solve_trajectory", &traj)?;
    let rep = SolveReport {
        method: "exponential_euler".into(),
        substeps: ctx.cfg.run.substeps,
        times: traj.times.clone(),
        energy: traj.snapshots.iter().map(|s| s.energy()).collect(),
        spectral_max: traj.snapshots.iter().map(|s| s.max_abs()).collect(),
        max_divergence: traj.max_divergence(),
        config_hash: ctx.hash.to_string(),
    };
    ctx.out.write_json("solve_report.json", &rep)?;
    ctx.lines.push(format!("solved {} nodes to T = {}", traj.len(), cfg.t_end));
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardDocument {
    pub report: PicardReport,
    pub c_b: Option<CbEstimate>,
    /// `4·C_B·δ < 1`.
    pub small_data: Option<bool>,
    pub config_hash: String,
}

fn picard(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg.solver_config()?;
    let u0 = initial_field(ctx.cfg, cfg.grid)?;
    let f = forcing(ctx.cfg, cfg.grid)?;
    let (traj, mut rep) = picard_iterate(&cfg, &u0, &f)?;
    let est = if ctx.cfg.run.trials > 0 && cfg.grid.dim() >= 2 {
        Some(estimate_cb(&cfg, ctx.cfg.run.trials, ctx.cfg.run.seed)?)
    } else {
        None
    };
    rep.c_b = est.as_ref().map(|e| e.c_b);
    let doc = PicardDocument {
        small_data: est.as_ref().map(|e| banach_picard_small(rep.delta, e.c_b)),
        c_b: est,
        report: rep.clone(),
        config_hash: ctx.hash.to_string(),
    };
    ctx.out.write_json("picard_report.json", &doc)?;
    let rows: Vec<Vec<f64>> = rep
        .increments
        .iter()
        .enumerate()
        .map(|(k, &inc)| vec![(k + 1) as f64, inc, if k == 0 { f64::NAN } else { rep.ratios[k - 1] }])
        .collect();
    ctx.out.write_table("picard_increments", ctx.format, &["iteration", "increment", "ratio"], &rows)?;
    match traj {
        Some(mut t) if rep.converged => {
            t.config_hash = Some(ctx.hash.to_string());
            ctx.out.write_trajectory("picard_trajectory", &t)?;
            ctx.lines.push(format!(
                "converged in {} iterations; delta {:.6e}, final norm {:.6e}",
                rep.iterations, rep.delta, rep.final_norm
            ));
            Ok(())
        }
        _ if rep.diverged => Err(CliError::Numerical(format!("Picard iteration diverged after {} iterations", rep.iterations))),
        _ => Err(CliError::Numerical(format!("Picard iteration did not converge in {} iterations", rep.iterations))),
    }
}

fn default_sweep(cfg: &ExperimentConfig, factors: [f64; 3]) -> Vec<f64> {
    cfg.run.times.clone().unwrap_or_else(|| factors.iter().map(|f| f * cfg.solver.t_end).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionCheck {
    pub trajectory: String,
    pub norm: f64,
    /// `2·C·(data)` at the trajectory horizon.
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Verdict {
    pub exponents: Thm1Exponents,
    pub sweep: Option<BoundReport>,
    pub constants: Option<Thm1Constants>,
    pub u0_norm: f64,
    pub force_norm: f64,
    pub smallness: Option<SmallnessVerdict>,
    pub solution: Option<SolutionCheck>,
    pub config_hash: String,
}

fn theorem1(ctx: &mut Ctx, trajectory: Option<&Path>) -> Result<(), CliError> {
    let c = ctx.cfg;
    let base = c.solver_config()?;
    let rule = &c.exponents.time;
    let q = c.exponents.q;
    let px = VariableExponent::new(rule.clone(), Domain::Time { t_end: base.t_end, nodes: base.nodes })?;
    let ex = check_thm1_exponents(base.alpha, q, &px);
    let u0 = initial_field(c, base.grid)?;
    let f = forcing(c, base.grid)?;
    let w = vec![base.grid.cell_volume(); base.grid.len()];
    let u0_norm = lp_norm(&u0.magnitude(), &w, q)?;
    let series: Vec<f64> = f
        .physical_nodes(&base)?
        .iter()
        .map(|g| lp_norm(&g.magnitude(), &w, q))
        .collect::<Result<_, _>>()?;
    let force_norm = lp_norm(&series, &Domain::Time { t_end: base.t_end, nodes: base.nodes }.weights(), 1.0)?;
    let mut verdict = Theorem1Verdict {
        exponents: ex.clone(),
        sweep: None,
        constants: None,
        u0_norm,
        force_norm,
        smallness: None,
        solution: None,
        config_hash: ctx.hash.to_string(),
    };
    if !ex.admissible {
        ctx.out.write_json("theorem1_verdict.json", &verdict)?;
        return Err(CliError::Config(ex.reasons.clone()));
    }
    let times = default_sweep(c, [0.25, 0.5, 1.0]);
    let rep = verify_prop_thm1(&base, rule, q, &u0, &f, &times)?;
    let k = Thm1Constants {
        c1: rep.initial.constant,
        c2: rep.force.constant,
        c_b: rep.bilinear.constant,
    };
    let small = smallness_thm1(k, u0_norm, force_norm, ex.p_minus, ex.p_plus, Some(base.t_end));
    if let Some(dir) = trajectory {
        let traj = read_trajectory(dir)?;
        let t_end = *traj.times.last().unwrap_or(&0.0);
        let pt = VariableExponent::new(rule.clone(), Domain::Time { t_end, nodes: traj.len() })?;
        let norm = et_norm(&traj, &pt, q)?;
        let bound = 2.0 * t_factor(t_end, ex.p_minus, ex.p_plus) * (k.c1 * u0_norm + k.c2 * force_norm);
        verdict.solution = Some(SolutionCheck {
            trajectory: dir.display().to_string(),
            norm,
            bound,
            within_bound: norm <= bound * (1.0 + 1e-9),
        });
    }
    let rows: Vec<Vec<f64>> = (0..times.len())
        .map(|i| {
            vec![
                times[i],
                rep.initial.factors[i],
                rep.initial.ratios[i],
                rep.force.ratios[i],
                rep.force_lp_time[i],
                rep.bilinear.ratios[i],
            ]
        })
        .collect();
    ctx.out.write_table(
        "theorem1_sweep",
        ctx.format,
        &["T", "t_factor", "initial", "force", "force_lp_time", "bilinear"],
        &rows,
    )?;
    ctx.lines.push(format!(
        "admissible; c1 {:.4e}, c2 {:.4e}, c_b {:.4e}; smallness {} (T_max {:.4e})",
        k.c1,
        k.c2,
        k.c_b,
        if small.holds { "holds" } else { "fails" },
        small.t_max.unwrap_or(f64::NAN)
    ));
    verdict.sweep = Some(rep);
    verdict.constants = Some(k);
    verdict.smallness = Some(small);
    ctx.out.write_json("theorem1_verdict.json", &verdict)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Verdict {
    pub alpha: f64,
    pub q: f64,
    pub tensor_q: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    pub sweep: BoundReport,
    pub c_b: CbEstimate,
    pub u0_norm: f64,
    pub force_norm: f64,
    pub smallness: SmallnessVerdict,
    pub solution: Option<SolutionCheck>,
    pub config_hash: String,
}

fn theorem2(ctx: &mut Ctx, trajectory: Option<&Path>) -> Result<(), CliError> {
    let c = ctx.cfg;
    let base = c.solver_config()?;
    let grid = base.grid;
    let p = VariableExponent::new(c.exponents.space.clone(), Domain::Grid(grid))?;
    let exps = Thm2Exponents::new(base.alpha, p)?;
    let tp = exps
        .tensor_p
        .clone()
        .ok_or_else(|| CliError::Config(vec!["theorem2 needs p- > 2 so that p/2 is an exponent".into()]))?;
    let (tensor, profile) = match &c.data.forcing {
        ForcingBlock::Zero => (Field::zeros(grid, grid.dim() * grid.dim()), TimeProfile::Constant),
        ForcingBlock::Tensor {
            radius,
            amplitude,
            seed,
            profile,
        } => (forcing_tensor(grid, *radius, *amplitude, *seed)?, *profile),
        ForcingBlock::Field { .. } => {
            return Err(CliError::Config(vec!["theorem2 takes a tensor forcing (or none)".into()]));
        }
    };
    let u0 = initial_field(c, grid)?;
    let times = default_sweep(c, [1.0, 2.0, 4.0]);
    let rep = verify_prop_thm2(&base, &exps, &u0, &tensor, profile, &times, c.run.nodes_per_unit)?;
    let u0_norm = mixed_norm(&u0.magnitude(), &exps.p, exps.q)?;
    let amp = base.times().iter().map(|&t| profile.at(t).abs()).fold(0.0, f64::max);
    let sup: Vec<f64> = tensor.magnitude().iter().map(|m| m * amp).collect();
    let force_norm = mixed_norm(&sup, &tp, exps.tensor_q)?;
    let mut cb_cfg: SolverConfig = base.clone();
    cb_cfg.working_norm = WorkingNorm::EScript { p: c.exponents.space.clone() };
    let est = estimate_cb(&cb_cfg, c.run.trials.max(1), c.run.seed)?;
    let constant = rep.initial.constant.max(rep.force.constant);
    let small = smallness_thm2(constant, u0_norm, force_norm, est.c_b);
    let solution = match trajectory {
        None => None,
        Some(dir) => {
            let traj = read_trajectory(dir)?;
            let norm = e_script_norm(&traj, &exps.p, exps.alpha)?;
            Some(SolutionCheck {
                trajectory: dir.display().to_string(),
                norm,
                bound: 2.0 * small.lhs,
                within_bound: norm <= 2.0 * small.lhs * (1.0 + 1e-9),
            })
        }
    };
    let rows: Vec<Vec<f64>> = (0..times.len())
        .map(|i| vec![times[i], rep.initial.ratios[i], rep.force.ratios[i], rep.bilinear.ratios[i]])
        .collect();
    ctx.out.write_table("theorem2_sweep", ctx.format, &["T", "initial", "force", "bilinear"], &rows)?;
    ctx.lines.push(format!(
        "initial drift {:.4}, force drift {:.4}; C_B {:.4e}; smallness {}",
        rep.initial.drift,
        rep.force.drift,
        est.c_b,
        if small.holds { "holds" } else { "fails" }
    ));
    let verdict = Theorem2Verdict {
        alpha: exps.alpha,
        q: exps.q,
        tensor_q: exps.tensor_q,
        p_minus: exps.p.p_minus(),
        p_plus: exps.p.p_plus(),
        sweep: rep,
        c_b: est,
        u0_norm,
        force_norm,
        smallness: small,
        solution,
        config_hash: ctx.hash.to_string(),
    };
    ctx.out.write_json("theorem2_verdict.json", &verdict)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub subcommand: String,
    pub status: String,
    pub failure: Option<Failure>,
    pub config_hash: Option<String>,
    pub files: usize,
    /// Listed files whose checksum no longer matches, or that are gone.
    pub mismatched: Vec<String>,
    pub invalid: Vec<String>,
}

/// Summarize every manifest found in the output directory and re-verify checksums.
fn report(out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let own = RunManifest::file_name("report");
    let mut names: Vec<String> = std::fs::read_dir(out.root())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".manifest.json") && *n != own)
        .collect();
    names.sort();
    let mut runs = Vec::with_capacity(names.len());
    for name in &names {
        let text = std::fs::read_to_string(out.root().join(name))?;
        let m: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        let mismatched = m
            .files
            .iter()
            .filter(|f| sha256_file(&out.root().join(&f.path)).map(|(h, _)| h != f.sha256).unwrap_or(true))
            .map(|f| f.path.clone())
            .collect();
        runs.push(RunSummary {
            subcommand: m.subcommand,
            status: m.status,
            failure: m.failure,
            config_hash: m.config_hash,
            files: m.files.len(),
            mismatched,
            invalid: m.invalid,
        });
    }
    out.write_json("report.json", &runs)?;
    let mut lines = Vec::with_capacity(runs.len());
    for r in &runs {
        let mut l = format!("{}: {} ({} files)", r.subcommand, r.status, r.files);
        if !r.mismatched.is_empty() {
            l.push_str(&format!(", checksum mismatch: {}", r.mismatched.join(" ")));
        }
        if !r.invalid.is_empty() {
            l.push_str(&format!(", invalid: {}", r.invalid.join(" ")));
        }
        lines.push(l);
    }
    if runs.iter().any(|r| !r.mismatched.is_empty() || !r.invalid.is_empty()) {
        for l in &lines {
            eprintln!("{l}");
        }
        return Err(CliError::Io("output directory failed verification".into()));
    }
    Ok(lines)
}
