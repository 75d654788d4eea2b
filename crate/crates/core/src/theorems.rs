//! Hypothesis checks and norm monitors for the local (`E_T`) and global
//! (`𝓔`) existence results.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{forward_transform, Field, SpectralField};
use crate::kernels::loglog_slope;
use crate::mild::{
    bilinear_b, duhamel_force, semigroup_trajectory, Forcing, SolverConfig, TimeProfile, Trajectory,
};
use crate::varlp::{lp_norm, luxemburg_norm, mixed_norm, Domain, ExponentRule, VariableExponent};

/// Derived exponents of the local theorem. All arithmetic uses the 3D
/// indices regardless of grid dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm1Exponents {
    pub alpha: f64,
    pub q: f64,
    pub p: Vec<f64>,
    pub p_minus: f64,
    pub p_plus: f64,
    /// Conjugate `p'`.
    pub p_conj: Vec<f64>,
    /// `1/p̃ = 1 − 2/p`; infinite where `p ≤ 2`.
    pub p_tilde: Vec<f64>,
    /// `1/r = 1/p̃ + β`.
    pub r: Vec<f64>,
    pub beta: f64,
    /// `α − 1/2 − α/p(t) − 3/(2q)` per sample.
    pub margins: Vec<f64>,
    pub admissible: bool,
    pub reasons: Vec<String>,
}

/// Admissibility record for `α`, constant `q` and `p(·)` on `[0,T]`.
pub fn check_thm1_exponents(alpha: f64, q: f64, p: &VariableExponent) -> Thm1Exponents {
    let mut reasons = Vec::new();
    if !(alpha > 0.5 && alpha <= 1.0) {
        reasons.push(format!("alpha = {alpha} out of (0.5, 1]"));
    }
    if !(p.p_minus() > 2.0) {
        reasons.push(format!("p- = {} must exceed 2", p.p_minus()));
    }
    let q_min = 3.0 / (2.0 * alpha - 1.0);
    if !(q > q_min) || alpha <= 0.5 {
        reasons.push(format!("q = {q} must exceed 3/(2 alpha - 1) = {q_min}"));
    }
    let beta = 1.0 - 1.0 / (2.0 * alpha) - 3.0 / (2.0 * alpha * q);
    let margins: Vec<f64> = p
        .values()
        .iter()
        .map(|&pt| alpha - 0.5 - alpha / pt - 3.0 / (2.0 * q))
        .collect();
    if let Some((i, m)) = margins.iter().enumerate().find(|(_, m)| !(**m > 0.0)) {
        reasons.push(format!(
            "alpha/p + 3/(2q) < alpha - 1/2 fails at sample {i} (margin {m:.6})"
        ));
    }
    let p_conj = p.values().iter().map(|&pt| pt / (pt - 1.0)).collect();
    let inv_tilde: Vec<f64> = p.values().iter().map(|&pt| 1.0 - 2.0 / pt).collect();
    let p_tilde = inv_tilde
        .iter()
        .map(|&s| if s > 0.0 { 1.0 / s } else { f64::INFINITY })
        .collect();
    let r = inv_tilde.iter().map(|&s| 1.0 / (s + beta)).collect();
    Thm1Exponents {
        alpha,
        q,
        p: p.values().to_vec(),
        p_minus: p.p_minus(),
        p_plus: p.p_plus(),
        p_conj,
        p_tilde,
        r,
        beta,
        margins,
        admissible: reasons.is_empty(),
        reasons,
    }
}

/// Exponents of the global theorem.
#[derive(Clone, Debug, PartialEq)]
pub struct Thm2Exponents {
    pub alpha: f64,
    pub p: VariableExponent,
    /// `3/(2α−1)`.
    pub q: f64,
    /// `p(·)/2`, when it exceeds 1 everywhere.
    pub tensor_p: Option<VariableExponent>,
    /// `3/(2(2α−1))`.
    pub tensor_q: f64,
}

impl Thm2Exponents {
    pub fn new(alpha: f64, p: VariableExponent) -> Result<Self> {
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(Error::ExponentRelation(format!("alpha = {alpha} out of (0.5, 1]")));
        }
        if !(p.p_minus() > 1.0) {
            return Err(Error::ExponentRelation("p- must exceed 1".into()));
        }
        let tensor_p = if p.p_minus() > 2.0 { Some(p.scaled(0.5)?) } else { None };
        Ok(Self {
            alpha,
            q: 3.0 / (2.0 * alpha - 1.0),
            tensor_q: 3.0 / (2.0 * (2.0 * alpha - 1.0)),
            tensor_p,
            p,
        })
    }
}

fn magnitudes(s: &SpectralField) -> Vec<f64> {
    crate::grid::inverse_unchecked(s).magnitude()
}

/// `t ↦ ‖u(t,·)‖_{L^q}` at the nodes.
pub fn spatial_lq_series(traj: &Trajectory, q: f64) -> Result<Vec<f64>> {
    if !(q > 1.0) {
        return Err(invalid("spatial exponent q must exceed 1"));
    }
    traj.snapshots
        .iter()
        .map(|s| {
            let g = s.grid();
            let w = vec![g.cell_volume(); g.len()];
            lp_norm(&magnitudes(s), &w, q)
        })
        .collect()
}

/// Luxemburg norm in time of `t ↦ ‖u(t,·)‖_{L^q}`.
pub fn et_norm(traj: &Trajectory, p: &VariableExponent, q: f64) -> Result<f64> {
    if p.len() != traj.len() {
        return Err(Error::DomainMismatch(format!(
            "time exponent has {} samples, trajectory has {} nodes",
            p.len(),
            traj.len()
        )));
    }
    luxemburg_norm(&spatial_lq_series(traj, q)?, p)
}

fn time_domain(traj: &Trajectory) -> Result<Domain> {
    let t_end = *traj.times.last().ok_or_else(|| invalid("empty trajectory"))?;
    Ok(Domain::Time {
        t_end,
        nodes: traj.len(),
    })
}

pub fn et_norm_rule(traj: &Trajectory, p: &ExponentRule, q: f64) -> Result<f64> {
    et_norm(traj, &VariableExponent::new(p.clone(), time_domain(traj)?)?, q)
}

/// Pointwise sup over nodes of `|u(t,x)|`.
pub fn time_sup(traj: &Trajectory) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for s in &traj.snapshots {
        let m = magnitudes(s);
        if out.is_empty() {
            out = m;
        } else {
            for (o, v) in out.iter_mut().zip(m) {
                *o = o.max(v);
            }
        }
    }
    out
}

/// `max{‖·‖_{L^{p(·)}_x L^∞_t}, ‖·‖_{L^{3/(2α−1)}_x L^∞_t}}`.
pub fn e_script_norm(traj: &Trajectory, p: &VariableExponent, alpha: f64) -> Result<f64> {
    if !(alpha > 0.5 && alpha <= 1.0) {
        return Err(invalid(format!("alpha = {alpha} out of (0.5, 1]")));
    }
    let sup = time_sup(traj);
    if p.len() != sup.len() {
        return Err(Error::DomainMismatch("spatial exponent does not match the trajectory grid".into()));
    }
    mixed_norm(&sup, p, 3.0 / (2.0 * alpha - 1.0))
}

pub fn e_script_norm_rule(traj: &Trajectory, p: &ExponentRule, alpha: f64) -> Result<f64> {
    let g = *traj.snapshots.first().ok_or_else(|| invalid("empty trajectory"))?.grid();
    e_script_norm(traj, &VariableExponent::new(p.clone(), Domain::Grid(g))?, alpha)
}

/// `max{T^{1/p⁻}, T^{1/p⁺}}`.
pub fn t_factor(t: f64, p_minus: f64, p_plus: f64) -> f64 {
    t.powf(1.0 / p_minus).max(t.powf(1.0 / p_plus))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSeries {
    pub ratios: Vec<f64>,
    pub factors: Vec<f64>,
    /// `max ratio/factor`: the measured constant.
    pub constant: f64,
    /// `(max − min)/max` of `ratio/factor`.
    pub drift: f64,
    /// Log-log slope of the ratios against `T`; `None` when a ratio vanishes.
    pub slope: Option<f64>,
    pub finite: bool,
}

impl RatioSeries {
    fn new(times: &[f64], ratios: Vec<f64>, factors: Vec<f64>) -> Self {
        let scaled: Vec<f64> = ratios.iter().zip(&factors).map(|(r, f)| r / f).collect();
        let hi = scaled.iter().copied().fold(0.0, f64::max);
        let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        let finite = ratios.iter().all(|r| r.is_finite());
        let slope = (ratios.iter().all(|r| *r > 0.0) && times.len() > 1).then(|| loglog_slope(times, &ratios));
        Self {
            constant: hi,
            drift: if hi > 0.0 { (hi - lo) / hi } else { 0.0 },
            slope,
            finite,
            ratios,
            factors,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem: u8,
    pub alpha: f64,
    pub times: Vec<f64>,
    pub initial: RatioSeries,
    pub force: RatioSeries,
    pub bilinear: RatioSeries,
    /// Local theorem: the force also measured in `L^{p(·)}_t L^q_x`.
    pub force_lp_time: Vec<f64>,
    /// Slope predicted for the initial and force ratios (local theorem).
    pub predicted_slope: Option<f64>,
    pub notes: Vec<String>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn sweep_config(base: &SolverConfig, t: f64) -> Result<SolverConfig> {
    let mut c = base.clone();
    c.t_end = t;
    c.validate()?;
    Ok(c)
}

const DIMENSION_NOTE: &str =
    "local-theorem exponents use the 3D relations; the E_T spatial norm is taken on the grid dimension";

/// Empirical constants of the local theorem over a `T` sweep.
///
/// `p` is a time exponent rule evaluated on each `[0,T]`; `u0` and the forcing
/// stay fixed across the sweep, which uses `base.nodes` nodes for every `T`.
pub fn verify_prop_thm1(
    base: &SolverConfig,
    p: &ExponentRule,
    q: f64,
    u0: &Field,
    forcing: &Forcing,
    times: &[f64],
) -> Result<BoundReport> {
    if times.is_empty() {
        return Err(invalid("T sweep is empty"));
    }
    let u0h = forward_transform(u0)?;
    let w = vec![u0.grid().cell_volume(); u0.grid().len()];
    let u0_norm = lp_norm(&u0.magnitude(), &w, q)?;
    let (mut init, mut force, mut bil, mut f_lp) = (vec![], vec![], vec![], vec![]);
    let (mut fac, mut fac_b) = (vec![], vec![]);
    let (mut pm, mut pp) = (f64::INFINITY, 0.0f64);
    for &t in times {
        let cfg = sweep_config(base, t)?;
        let px = VariableExponent::new(p.clone(), Domain::Time { t_end: t, nodes: cfg.nodes })?;
        let ex = check_thm1_exponents(cfg.alpha, q, &px);
        if !ex.admissible {
            return Err(Error::ExponentRelation(ex.reasons.join("; ")));
        }
        pm = pm.min(ex.p_minus);
        pp = pp.max(ex.p_plus);
        let tf = t_factor(t, ex.p_minus, ex.p_plus);
        fac.push(tf);
        fac_b.push((1.0 + t) * tf);

        let s = semigroup_trajectory(&cfg, &u0h);
        let s_norm = et_norm(&s, &px, q)?;
        init.push(ratio(s_norm, u0_norm));

        let d = duhamel_force(&cfg, forcing)?;
        let f_nodes = forcing.physical_nodes(&cfg)?;
        let f_series: Vec<f64> = f_nodes
            .iter()
            .map(|f| lp_norm(&f.magnitude(), &w, q))
            .collect::<Result<_>>()?;
        let tw = Domain::Time { t_end: t, nodes: cfg.nodes }.weights();
        let f_l1 = lp_norm(&f_series, &tw, 1.0)?;
        f_lp.push(luxemburg_norm(&f_series, &px)?);
        force.push(ratio(et_norm(&d, &px, q)?, f_l1));

        let b = bilinear_b(&cfg, &s, &s)?;
        bil.push(ratio(et_norm(&b, &px, q)?, s_norm * s_norm));
    }
    let mut notes = vec![DIMENSION_NOTE.to_string()];
    notes.push("force ratio uses the L1 in time norm; the L^{p(.)} in time norm is reported alongside".into());
    Ok(BoundReport {
        theorem: 1,
        alpha: base.alpha,
        times: times.to_vec(),
        initial: RatioSeries::new(times, init, fac.clone()),
        force: RatioSeries::new(times, force, fac),
        bilinear: RatioSeries::new(times, bil, fac_b),
        force_lp_time: f_lp,
        predicted_slope: Some(if times.iter().all(|&t| t <= 1.0) { 1.0 / pp } else { 1.0 / pm }),
        notes,
    })
}

/// Pointwise `sup_t |θ(t)|·|𝓕₀(x)|` (Frobenius norm of the tensor).
fn tensor_time_sup(cfg: &SolverConfig, tensor: &Field, profile: TimeProfile) -> Vec<f64> {
    let amp = cfg.times().iter().map(|&t| profile.at(t).abs()).fold(0.0, f64::max);
    tensor.magnitude().into_iter().map(|m| m * amp).collect()
}

/// Empirical constants of the global theorem over a `T` sweep.
///
/// Node count scales with `T` as `nodes_per_unit·T + 1`.
pub fn verify_prop_thm2(
    base: &SolverConfig,
    exps: &Thm2Exponents,
    u0: &Field,
    tensor: &Field,
    profile: TimeProfile,
    times: &[f64],
    nodes_per_unit: f64,
) -> Result<BoundReport> {
    if times.is_empty() {
        return Err(invalid("T sweep is empty"));
    }
    let tp = exps
        .tensor_p
        .as_ref()
        .ok_or_else(|| Error::ExponentRelation("tensor exponent p/2 must exceed 1 (need p- > 2)".into()))?;
    if exps.p.len() != u0.grid().len() {
        return Err(Error::DomainMismatch("spatial exponent does not match the grid".into()));
    }
    let u0h = forward_transform(u0)?;
    let u0_norm = mixed_norm(&u0.magnitude(), &exps.p, exps.q)?;
    let forcing = Forcing::Tensor {
        tensor: tensor.clone(),
        profile,
    };
    let (mut init, mut force, mut bil) = (vec![], vec![], vec![]);
    for &t in times {
        let mut cfg = sweep_config(base, t)?;
        cfg.nodes = ((nodes_per_unit * t).ceil() as usize + 1).max(2);
        cfg.validate()?;
        let s = semigroup_trajectory(&cfg, &u0h);
        let s_norm = e_script_norm(&s, &exps.p, exps.alpha)?;
        init.push(ratio(s_norm, u0_norm));

        let d = duhamel_force(&cfg, &forcing)?;
        let f_norm = mixed_norm(&tensor_time_sup(&cfg, tensor, profile), tp, exps.tensor_q)?;
        force.push(ratio(e_script_norm(&d, &exps.p, exps.alpha)?, f_norm));

        let b = bilinear_b(&cfg, &s, &s)?;
        bil.push(ratio(e_script_norm(&b, &exps.p, exps.alpha)?, s_norm * s_norm));
    }
    let ones = vec![1.0; times.len()];
    Ok(BoundReport {
        theorem: 2,
        alpha: exps.alpha,
        times: times.to_vec(),
        initial: RatioSeries::new(times, init, ones.clone()),
        force: RatioSeries::new(times, force, ones.clone()),
        bilinear: RatioSeries::new(times, bil, ones),
        force_lp_time: Vec::new(),
        predicted_slope: Some(0.0),
        notes: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallnessVerdict {
    pub theorem: u8,
    pub holds: bool,
    /// Left side `C·(data)` at the reported horizon.
    pub lhs: f64,
    /// `1/(4C_B)` at the reported horizon.
    pub threshold: f64,
    /// Local theorem: largest `T` for which the inequality holds.
    pub t_max: Option<f64>,
}

/// Strict Banach–Picard condition `4·C_B·δ < 1`.
pub fn banach_picard_small(delta: f64, c_b: f64) -> bool {
    delta == 0.0 || 4.0 * c_b * delta < 1.0
}

fn threshold(c_b: f64) -> f64 {
    if c_b > 0.0 {
        1.0 / (4.0 * c_b)
    } else {
        f64::INFINITY
    }
}

/// Global theorem: `C·(‖u₀‖ + ‖𝓕‖) < 1/(4C_B)`.
pub fn smallness_thm2(c: f64, u0_norm: f64, force_norm: f64, c_b: f64) -> SmallnessVerdict {
    let lhs = c * (u0_norm + force_norm);
    SmallnessVerdict {
        theorem: 2,
        holds: lhs == 0.0 || lhs < threshold(c_b),
        lhs,
        threshold: threshold(c_b),
        t_max: None,
    }
}

/// Measured constants of the local theorem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thm1Constants {
    pub c1: f64,
    pub c2: f64,
    /// Bilinear constant per unit `(1+T)·max{T^{1/p±}}`.
    pub c_b: f64,
}

/// Local theorem: with `m(T) = max{T^{1/p⁻},T^{1/p⁺}}` the condition is
/// `4·c_b(1+T)m(T) · m(T)(c1‖u₀‖ + c2‖f‖) < 1`. Reports the largest such `T`
/// and the verdict at `t` (or at `t_max` when `t` is `None`).
pub fn smallness_thm1(
    k: Thm1Constants,
    u0_norm: f64,
    force_norm: f64,
    p_minus: f64,
    p_plus: f64,
    t: Option<f64>,
) -> SmallnessVerdict {
    let data = k.c1 * u0_norm + k.c2 * force_norm;
    let lhs_at = |t: f64| t_factor(t, p_minus, p_plus) * data;
    let cb_at = |t: f64| k.c_b * (1.0 + t) * t_factor(t, p_minus, p_plus);
    let ok = |t: f64| banach_picard_small(lhs_at(t), cb_at(t));
    let t_max = if data == 0.0 || k.c_b == 0.0 {
        f64::INFINITY
    } else {
        let mut hi = 1.0;
        while ok(hi) && hi < 1e12 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let at = t.unwrap_or(t_max);
    let finite_at = if at.is_finite() { at } else { 1.0 };
    SmallnessVerdict {
        theorem: 1,
        holds: if t.is_some() { ok(finite_at) } else { t_max > 0.0 },
        lhs: lhs_at(finite_at),
        threshold: threshold(cb_at(finite_at)),
        t_max: Some(t_max),
    }
}
