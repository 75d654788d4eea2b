//! Variable-exponent Lebesgue spaces on discrete measure spaces.
//!
//! A [`VariableExponent`] carries its sample values together with the
//! quadrature weights of its domain (cell volumes on a spatial grid,
//! trapezoid weights on a time grid). Every norm here is a norm of the
//! resulting weighted discrete measure space.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::grid::GridSpec;
use crate::random::SeedStream;

/// Rule generating an exponent from a point of `ℝ^d` (or a time).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExponentRule {
    Constant { p0: f64 },
    /// `p0 + a·sin(2πx₁/period)`.
    Sinusoidal { p0: f64, a: f64, period: f64 },
    /// `1/p = 1/p_inf + b/log(e+|x|)`.
    LogTail { p_inf: f64, b: f64 },
    /// Explicit per-sample values.
    Table { values: Vec<f64> },
}

impl ExponentRule {
    /// Value at a point; `None` for tables.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        match *self {
            ExponentRule::Constant { p0 } => Some(p0),
            ExponentRule::Sinusoidal { p0, a, period } => {
                Some(p0 + a * (std::f64::consts::TAU * x[0] / period).sin())
            }
            ExponentRule::LogTail { p_inf, b } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                Some(1.0 / (1.0 / p_inf + b / (std::f64::consts::E + r).ln()))
            }
            ExponentRule::Table { .. } => None,
        }
    }

    /// Limit exponent at infinity, when defined.
    pub fn p_inf(&self) -> Option<f64> {
        match *self {
            ExponentRule::Constant { p0 } => Some(p0),
            ExponentRule::LogTail { p_inf, .. } => Some(p_inf),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |p: f64| p.is_finite() && p > 1.0;
        match self {
            ExponentRule::Constant { p0 } if !ok(*p0) => Err(invalid("constant exponent must exceed 1")),
            ExponentRule::Sinusoidal { p0, a, period } => {
                if !ok(*p0) || !(a.abs() < p0 - 1.0) || !(period.is_finite() && *period > 0.0) {
                    Err(invalid("sinusoidal exponent needs p0 > 1, |a| < p0 - 1, period > 0"))
                } else {
                    Ok(())
                }
            }
            ExponentRule::LogTail { p_inf, b } => {
                if !ok(*p_inf) || !b.is_finite() {
                    Err(invalid("log_tail exponent needs p_inf > 1 and finite b"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Where an exponent lives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Periodic grid; sample points are centred coordinates `x − L/2`.
    Grid(GridSpec),
    /// Nodes `t_i = i·T/(n−1)` on `[0,T]` with trapezoid weights.
    Time { t_end: f64, nodes: usize },
    /// Arbitrary points with given weights.
    Samples { points: Vec<Vec<f64>>, weights: Vec<f64> },
}

impl Domain {
    pub fn len(&self) -> usize {
        match self {
            Domain::Grid(g) => g.len(),
            Domain::Time { nodes, .. } => *nodes,
            Domain::Samples { weights, .. } => weights.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Grid(g) => g.dim(),
            Domain::Time { .. } => 1,
            Domain::Samples { points, .. } => points.first().map_or(1, |p| p.len()),
        }
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        match self {
            Domain::Grid(g) => {
                let x = g.position(i);
                let c = g.length() / 2.0;
                (0..g.dim()).map(|a| x[a] - c).collect()
            }
            Domain::Time { t_end, nodes } => vec![t_end * i as f64 / (*nodes - 1) as f64],
            Domain::Samples { points, .. } => points[i].clone(),
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        match self {
            Domain::Grid(g) => g.cell_volume(),
            Domain::Time { t_end, nodes } => {
                let h = t_end / (*nodes - 1) as f64;
                if i == 0 || i + 1 == *nodes {
                    h / 2.0
                } else {
                    h
                }
            }
            Domain::Samples { weights, .. } => weights[i],
        }
    }

    /// Total measure.
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Grid(g) => g.volume(),
            Domain::Time { t_end, .. } => *t_end,
            Domain::Samples { weights, .. } => weights.iter().sum(),
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.weight(i)).collect()
    }

    /// Midpoint-rule interval `[0, length)` split into `cells` cells.
    pub fn interval(length: f64, cells: usize) -> Result<Domain> {
        if !(length > 0.0 && length.is_finite()) || cells == 0 {
            return Err(invalid("interval needs positive length and cells"));
        }
        let h = length / cells as f64;
        Ok(Domain::Samples {
            points: (0..cells).map(|i| vec![(i as f64 + 0.5) * h]).collect(),
            weights: vec![h; cells],
        })
    }

    fn validate(&self) -> Result<()> {
        match self {
            Domain::Time { t_end, nodes } => {
                if !(t_end.is_finite() && *t_end > 0.0) || *nodes < 2 {
                    return Err(invalid("time domain needs T > 0 and at least two nodes"));
                }
            }
            Domain::Samples { points, weights } => {
                if points.len() != weights.len() || weights.is_empty() {
                    return Err(invalid("sample domain needs matching nonempty points and weights"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(invalid("sample weights must be positive"));
                }
            }
            Domain::Grid(_) => {}
        }
        Ok(())
    }
}

/// Exponent function sampled on a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct VariableExponent {
    rule: ExponentRule,
    domain: Domain,
    values: Vec<f64>,
    weights: Vec<f64>,
    p_minus: f64,
    p_plus: f64,
    p_inf: Option<f64>,
}

impl VariableExponent {
    pub fn new(rule: ExponentRule, domain: Domain) -> Result<Self> {
        rule.validate()?;
        domain.validate()?;
        let values = match &rule {
            ExponentRule::Table { values } => {
                if values.len() != domain.len() {
                    return Err(Error::DomainMismatch(format!(
                        "table has {} values, domain has {} samples",
                        values.len(),
                        domain.len()
                    )));
                }
                values.clone()
            }
            r => exec::map_range(domain.len(), |i| r.eval(&domain.point(i)).unwrap_or(f64::NAN)),
        };
        Self::assemble(rule, domain, values)
    }

    pub fn constant(p0: f64, domain: Domain) -> Result<Self> {
        Self::new(ExponentRule::Constant { p0 }, domain)
    }

    fn assemble(rule: ExponentRule, domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|p| !(p.is_finite() && *p > 1.0)) {
            return Err(invalid("exponent samples must be finite and exceed 1"));
        }
        let p_minus = values.iter().copied().fold(f64::INFINITY, f64::min);
        let p_plus = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p_inf = rule.p_inf();
        let weights = domain.weights();
        Ok(Self {
            rule,
            domain,
            values,
            weights,
            p_minus,
            p_plus,
            p_inf,
        })
    }

    /// Same domain, explicit values.
    pub fn from_values(domain: Domain, values: Vec<f64>) -> Result<Self> {
        Self::new(ExponentRule::Table { values }, domain)
    }

    pub fn rule(&self) -> &ExponentRule {
        &self.rule
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn p_inf(&self) -> Option<f64> {
        self.p_inf
    }

    pub fn is_constant(&self) -> bool {
        self.p_minus == self.p_plus
    }

    /// Pointwise map of the values, keeping the domain.
    pub fn map<F: Fn(f64) -> f64 + Sync + Send>(&self, f: F) -> Result<Self> {
        let values = self.values.iter().map(|&p| f(p)).collect();
        Self::from_values(self.domain.clone(), values)
    }

    /// `c·p(·)`, e.g. `p(·)/2` with `c = 1/2`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.map(|p| c * p)
    }

    /// Sobolev-type exponent `q` with `1/q = 1/p − β/d`.
    pub fn sobolev(&self, beta: f64, d: f64) -> Result<Self> {
        let bad = self.values.iter().any(|&p| 1.0 / p - beta / d <= 0.0);
        if bad {
            return Err(Error::ExponentRelation(format!(
                "1/p - beta/d must stay positive (beta = {beta}, d = {d}, p+ = {})",
                self.p_plus
            )));
        }
        self.map(|p| 1.0 / (1.0 / p - beta / d))
    }
}

/// Pointwise conjugate `p/(p−1)`.
pub fn conjugate_exponent(p: &VariableExponent) -> Result<VariableExponent> {
    if p.p_minus <= 1.0 {
        return Err(invalid("conjugate needs p- > 1"));
    }
    let mut out = p.map(|v| v / (v - 1.0))?;
    if let Some(pi) = p.p_inf {
        out.p_inf = Some(pi / (pi - 1.0));
    }
    Ok(out)
}

fn check_len(f: &[f64], p: &VariableExponent) -> Result<()> {
    if f.len() != p.len() {
        return Err(Error::DomainMismatch(format!(
            "function has {} samples, exponent has {}",
            f.len(),
            p.len()
        )));
    }
    Ok(())
}

/// `ϱ(f) = Σ w_i |f_i|^{p_i}`.
pub fn modular(f: &[f64], p: &VariableExponent) -> Result<f64> {
    check_len(f, p)?;
    Ok(modular_scaled(f, p, 1.0))
}

fn modular_scaled(f: &[f64], p: &VariableExponent, lambda: f64) -> f64 {
    exec::sum(f.len(), |i| p.weights[i] * (f[i].abs() / lambda).powf(p.values[i]))
}

/// Luxemburg solver state for `φ(s) = ln ϱ(f/e^s)`.
struct LogModular<'a> {
    logf: Vec<f64>,
    logw: &'a [f64],
    p: &'a [f64],
}

impl LogModular<'_> {
    /// Returns `(φ(s), φ'(s))` using a shifted log-sum-exp.
    fn eval(&self, s: f64) -> (f64, f64) {
        let n = self.p.len();
        let term = |i: usize| self.logw[i] + self.p[i] * (self.logf[i] - s);
        let shift = exec::max(n, term);
        let z = exec::sum(n, |i| (term(i) - shift).exp());
        let dz = exec::sum(n, |i| self.p[i] * (term(i) - shift).exp());
        (shift + z.ln(), -dz / z)
    }
}

/// Luxemburg norm `inf{λ > 0 : ϱ(f/λ) ≤ 1}`.
///
/// Safeguarded Newton in `s = ln λ` on the convex decreasing function
/// `ln ϱ(f/e^s)`, kept inside a bracket that is bisected whenever a step
/// leaves it. The returned `λ` satisfies `ϱ(f/λ) ≤ 1`.
pub fn luxemburg_norm(f: &[f64], p: &VariableExponent) -> Result<f64> {
    check_len(f, p)?;
    if let Some(index) = f.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let idx: Vec<usize> = (0..f.len()).filter(|&i| f[i] != 0.0).collect();
    if idx.is_empty() {
        return Ok(0.0);
    }
    let logw: Vec<f64> = idx.iter().map(|&i| p.weights[i].ln()).collect();
    let pv: Vec<f64> = idx.iter().map(|&i| p.values[i]).collect();
    let lm = LogModular {
        logf: idx.iter().map(|&i| f[i].abs().ln()).collect(),
        logw: &logw,
        p: &pv,
    };

    let (phi1, _) = lm.eval(0.0);
    let pm = pv.iter().copied().fold(f64::INFINITY, f64::min);
    let pp = pv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = (phi1 / pm, phi1 / pp);
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    // Widen slightly so the bracket strictly contains the root.
    let pad = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    lo -= pad;
    hi += pad;
    while lm.eval(lo).0 < 0.0 {
        lo -= 1.0 + lo.abs();
    }
    while lm.eval(hi).0 > 0.0 {
        hi += 1.0 + hi.abs();
    }

    let mut s = lo;
    for _ in 0..200 {
        let (phi, dphi) = lm.eval(s);
        if phi > 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
        if phi == 0.0 || hi - lo <= 1e-13 * (1.0 + s.abs()) {
            break;
        }
        let mut next = s - phi / dphi;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) {
            s = next;
            break;
        }
        s = next;
    }
    // Land on the feasible side: ϱ(f/λ) ≤ 1.
    let mut lam = s.exp();
    let mut step = 4.0 * f64::EPSILON;
    while modular_scaled(f, p, lam) > 1.0 {
        lam *= 1.0 + step;
        step *= 2.0;
    }
    Ok(lam)
}

/// Reference Luxemburg norm by plain bisection (slow; used as an oracle).
pub fn luxemburg_norm_bisection(f: &[f64], p: &VariableExponent) -> Result<f64> {
    check_len(f, p)?;
    let rho = modular(f, p)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    let a = rho.powf(1.0 / p.p_plus);
    let b = rho.powf(1.0 / p.p_minus);
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    while modular_scaled(f, p, lo) < 1.0 {
        lo *= 0.5;
    }
    while modular_scaled(f, p, hi) > 1.0 {
        hi *= 2.0;
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if modular_scaled(f, p, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Constant-exponent norm with the weights of `domain`; `p = ∞` gives the max.
pub fn lp_norm(f: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    if f.len() != weights.len() {
        return Err(Error::DomainMismatch("function and weights differ in length".into()));
    }
    if p.is_infinite() {
        return Ok(exec::max(f.len(), |i| f[i].abs()).max(0.0));
    }
    if !(p >= 1.0) {
        return Err(invalid("constant exponent must be >= 1"));
    }
    let peak = exec::max(f.len(), |i| f[i].abs()).max(0.0);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let s = exec::sum(f.len(), |i| weights[i] * (f[i].abs() / peak).powf(p));
    Ok(peak * s.powf(1.0 / p))
}

/// `max{‖f‖_{L^{p(·)}}, ‖f‖_{L^𝔭}}`.
pub fn mixed_norm(f: &[f64], p: &VariableExponent, pp: f64) -> Result<f64> {
    if !(pp > 1.0 && pp.is_finite()) {
        return Err(invalid("mixed-norm constant exponent must lie in (1, inf)"));
    }
    let a = luxemburg_norm(f, p)?;
    let b = lp_norm(f, p.weights(), pp)?;
    Ok(a.max(b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHolderReport {
    pub c1: f64,
    /// `None` when the exponent has no limit at infinity.
    pub c2: Option<f64>,
    pub samples: usize,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
    pub worst_far: Option<Vec<f64>>,
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Monte-Carlo estimate of the two log-Hölder constants.
pub fn check_log_holder(p: &VariableExponent, pair_samples: usize, seed: u64) -> Result<LogHolderReport> {
    if pair_samples == 0 {
        return Err(invalid("pair_samples must be >= 1"));
    }
    let mut rng = SeedStream::new(seed);
    let dom = p.domain();
    let d = dom.dim();
    let e = std::f64::consts::E;
    let analytic = !matches!(p.rule, ExponentRule::Table { .. });
    let diam = match dom {
        Domain::Grid(g) => g.length(),
        _ => {
            let pts: Vec<Vec<f64>> = (0..dom.len()).map(|i| dom.point(i)).collect();
            pts.iter().map(|x| dist(x, &pts[0])).fold(0.0, f64::max).max(1.0)
        }
    };
    let mut c1 = 0.0;
    let mut worst_pair = None;
    for _ in 0..pair_samples {
        let (x, y, px, py) = if analytic {
            let i = (rng.next_u64() % dom.len() as u64) as usize;
            let x = dom.point(i);
            let h = diam * 10f64.powf(-8.0 * rng.next_f64());
            let dir: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let nrm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let y: Vec<f64> = x.iter().zip(&dir).map(|(a, v)| a + h * v / nrm).collect();
            let px = p.rule.eval(&x).unwrap_or(f64::NAN);
            let py = p.rule.eval(&y).unwrap_or(f64::NAN);
            (x, y, px, py)
        } else {
            let i = (rng.next_u64() % dom.len() as u64) as usize;
            let j = (rng.next_u64() % dom.len() as u64) as usize;
            if i == j {
                continue;
            }
            (dom.point(i), dom.point(j), p.values[i], p.values[j])
        };
        let r = dist(&x, &y);
        if r == 0.0 {
            continue;
        }
        let v = (1.0 / px - 1.0 / py).abs() * (e + 1.0 / r).ln();
        if v > c1 {
            c1 = v;
            worst_pair = Some((x, y));
        }
    }
    let mut c2 = None;
    let mut worst_far = None;
    if let (Some(pi), true) = (p.p_inf, analytic) {
        let mut best = 0.0;
        for _ in 0..pair_samples {
            let r = 10f64.powf(6.0 * rng.next_f64());
            let dir: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let nrm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let x: Vec<f64> = dir.iter().map(|v| r * v / nrm).collect();
            let px = p.rule.eval(&x).unwrap_or(pi);
            let v = (1.0 / px - 1.0 / pi).abs() * (e + r).ln();
            if v > best {
                best = v;
                worst_far = Some(x);
            }
        }
        c2 = Some(best);
    }
    Ok(LogHolderReport {
        c1,
        c2,
        samples: pair_samples,
        worst_pair,
        worst_far,
    })
}

fn relation_holds(p: &VariableExponent, q: &VariableExponent, r: &VariableExponent) -> Result<()> {
    if p.len() != q.len() || p.len() != r.len() {
        return Err(Error::DomainMismatch("exponents live on different domains".into()));
    }
    for i in 0..p.len() {
        let gap = (1.0 / p.values[i] - 1.0 / q.values[i] - 1.0 / r.values[i]).abs();
        if gap > 1e-12 {
            return Err(Error::ExponentRelation(format!(
                "1/p = 1/q + 1/r fails at sample {i} by {gap:e}"
            )));
        }
    }
    Ok(())
}

/// `‖fg‖_{p} / (‖f‖_{q}·‖g‖_{r})` with `1/p = 1/q + 1/r`; `0` for zero data.
pub fn holder_product_check(
    f: &[f64],
    g: &[f64],
    p: &VariableExponent,
    q: &VariableExponent,
    r: &VariableExponent,
) -> Result<f64> {
    relation_holds(p, q, r)?;
    check_len(g, p)?;
    let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    let den = luxemburg_norm(f, q)? * luxemburg_norm(g, r)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(luxemburg_norm(&fg, p)? / den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// Best `∫|f||g|` over the trial set.
    pub sup: f64,
    pub norm: f64,
    /// Value attained by the near-optimizer `(|f|/‖f‖)^{p−1}`.
    pub optimizer_value: f64,
    /// `sup/‖f‖`; reported, not asserted.
    pub reverse_ratio: f64,
    pub holds: bool,
}

/// Lower-bound check of the duality formula over random and optimal trials.
pub fn duality_lower_bound(f: &[f64], p: &VariableExponent, trials: usize, seed: u64) -> Result<DualityReport> {
    let pc = conjugate_exponent(p)?;
    let norm = luxemburg_norm(f, p)?;
    if norm == 0.0 {
        return Ok(DualityReport {
            sup: 0.0,
            norm: 0.0,
            optimizer_value: 0.0,
            reverse_ratio: 0.0,
            holds: true,
        });
    }
    let w = p.weights();
    let pair = |g: &[f64]| -> Result<f64> {
        let gn = luxemburg_norm(g, &pc)?;
        if gn == 0.0 {
            return Ok(0.0);
        }
        Ok(exec::sum(f.len(), |i| w[i] * f[i].abs() * g[i].abs()) / gn)
    };
    let opt: Vec<f64> = f
        .iter()
        .zip(p.values())
        .map(|(v, pi)| (v.abs() / norm).powf(pi - 1.0))
        .collect();
    let optimizer_value = pair(&opt)?;
    let mut sup = optimizer_value;
    let mut rng = SeedStream::new(seed);
    for _ in 0..trials {
        let g: Vec<f64> = (0..f.len()).map(|_| rng.next_f64()).collect();
        sup = sup.max(pair(&g)?);
    }
    let tol = if p.is_constant() { 1e-6 } else { 1e-9 };
    Ok(DualityReport {
        sup,
        norm,
        optimizer_value,
        reverse_ratio: sup / norm,
        holds: sup >= (1.0 - tol) * norm,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub applicable: bool,
    pub ratio: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `‖f‖_{q₁} ≤ (1+|𝒳|)‖f‖_{q₂}` when `q₁ ≤ q₂`.
pub fn embedding_check(f: &[f64], q1: &VariableExponent, q2: &VariableExponent) -> Result<EmbeddingReport> {
    if q1.len() != q2.len() {
        return Err(Error::DomainMismatch("exponents live on different domains".into()));
    }
    let bound = 1.0 + q1.domain().measure();
    let applicable = q1.values.iter().zip(&q2.values).all(|(a, b)| a <= b);
    if !applicable {
        return Ok(EmbeddingReport {
            applicable,
            ratio: f64::NAN,
            bound,
            holds: false,
        });
    }
    let n1 = luxemburg_norm(f, q1)?;
    let n2 = luxemburg_norm(f, q2)?;
    let ratio = if n2 == 0.0 { 0.0 } else { n1 / n2 };
    Ok(EmbeddingReport {
        applicable,
        ratio,
        bound,
        holds: ratio <= bound * (1.0 + 1e-12),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitNormReport {
    pub t_end: f64,
    pub norm: f64,
    pub factor: f64,
    pub ratio: f64,
}

/// `‖1‖_{L^{p(·)}([0,T])}` and its ratio to `max{T^{1/p⁻}, T^{1/p⁺}}`.
pub fn unit_norm_time(p: &VariableExponent) -> Result<UnitNormReport> {
    let t_end = p.domain().measure();
    let ones = vec![1.0; p.len()];
    let norm = luxemburg_norm(&ones, p)?;
    let factor = t_end.powf(1.0 / p.p_minus).max(t_end.powf(1.0 / p.p_plus));
    Ok(UnitNormReport {
        t_end,
        norm,
        factor,
        ratio: norm / factor,
    })
}
