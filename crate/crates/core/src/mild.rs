//! Mild solutions: semigroup, Duhamel integrals, the bilinear term,
//! Picard iteration on whole trajectories, and an independent
//! exponential-Euler time marcher.
//!
//! Model: `∂_t u = −ν(−Δ)^α u − ℙ div(u⊗u) + ℙ f`.
//!
//! Time integrals `∫₀^t e^{−(t−s)λ} N(s) ds` use product integration: `N`
//! is interpolated linearly between nodes and integrated exactly against
//! the exponential, which reduces to the trapezoid rule as `λΔt → 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::grid::{
    dealias_in_place, divergence_spectral, forward_transform, inverse_unchecked, wavevector_norm2, Field,
    GridSpec, SpectralField,
};
use crate::operators::leray_project;
use crate::random::SeedStream;
use crate::theorems;
use crate::varlp::ExponentRule;

/// Multiply by `e^{−t|ξ|^{2α}}`.
pub fn semigroup_apply(alpha: f64, t: f64, spec: &SpectralField) -> Result<SpectralField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("semigroup time {t} must be nonnegative")));
    }
    let g = *spec.grid();
    let mut out = spec.clone();
    if t > 0.0 {
        out.apply_multiplier(|i| (-t * wavevector_norm2(&g, i).powf(alpha)).exp());
    }
    Ok(out)
}

/// Norm used to monitor Picard iterates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WorkingNorm {
    /// Sup over nodes of the largest coefficient modulus.
    #[default]
    SpectralMax,
    /// Luxemburg-in-time norm of `t ↦ ‖u(t)‖_{L^q}`.
    Et { p: ExponentRule, q: f64 },
    /// `max{‖·‖_{L^{p(·)}_x L^∞_t}, ‖·‖_{L^{3/(2α−1)}_x L^∞_t}}`.
    EScript { p: ExponentRule },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub t_end: f64,
    /// Uniform time nodes including `0` and `T`.
    pub nodes: usize,
    pub grid: GridSpec,
    pub dealias: bool,
    pub tol: f64,
    pub max_iter: usize,
    /// Dissipation coefficient (1 by default).
    pub viscosity: f64,
    /// Use the symbol `|ξ|²` directly instead of `(|ξ|²)^α`.
    pub classical_symbol: bool,
    /// Include the bilinear term (disable for the linear problem).
    pub nonlinear: bool,
    pub working_norm: WorkingNorm,
    /// Upper bound on bytes held by one trajectory.
    pub memory_budget: usize,
}

impl SolverConfig {
    pub fn new(alpha: f64, t_end: f64, nodes: usize, grid: GridSpec) -> Result<Self> {
        let cfg = Self {
            alpha,
            t_end,
            nodes,
            grid,
            dealias: true,
            tol: 1e-10,
            max_iter: 50,
            viscosity: 1.0,
            classical_symbol: false,
            nonlinear: true,
            working_norm: WorkingNorm::SpectralMax,
            memory_budget: 4 << 30,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return Err(invalid(format!("alpha = {} out of (0.5, 1]", self.alpha)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid("T must be positive"));
        }
        if self.nodes < 2 {
            return Err(invalid("need at least two time nodes"));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(invalid("tolerance and max_iter must be positive"));
        }
        if !(self.viscosity > 0.0 && self.viscosity.is_finite()) {
            return Err(invalid("viscosity must be positive"));
        }
        let bytes = self.nodes * self.grid.dim() * self.grid.len() * 16;
        if bytes > self.memory_budget {
            return Err(invalid(format!(
                "trajectory needs {bytes} bytes, above the budget of {}",
                self.memory_budget
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_end / (self.nodes - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.t_end * i as f64 / (self.nodes - 1) as f64).collect()
    }

    /// Dissipation symbol `λ(ξ)` at a flat mode index.
    pub fn symbol(&self, flat: usize) -> f64 {
        let k2 = wavevector_norm2(&self.grid, flat);
        self.viscosity * if self.classical_symbol { k2 } else { k2.powf(self.alpha) }
    }
}

/// Time profile of a separable forcing `θ(t)·f₀(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    #[default]
    Constant,
    Exponential { rate: f64 },
    Cosine { omega: f64 },
}

impl TimeProfile {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Exponential { rate } => (-rate * t).exp(),
            TimeProfile::Cosine { omega } => (omega * t).cos(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Forcing {
    Zero,
    /// `f(t,x) = θ(t)·f₀(x)`.
    Field { field: Field, profile: TimeProfile },
    /// `f = div 𝓕` with `𝓕(t,x) = θ(t)·𝓕₀(x)`; component `j·d + k` holds `𝓕_{jk}`.
    Tensor { tensor: Field, profile: TimeProfile },
}

impl Forcing {
    /// `ℙf` in spectral form, without the time profile.
    fn spatial(&self, grid: &GridSpec) -> Result<Option<(SpectralField, TimeProfile)>> {
        let d = grid.dim();
        match self {
            Forcing::Zero => Ok(None),
            Forcing::Field { field, profile } => {
                if field.grid() != grid || field.components() != d {
                    return Err(Error::GridMismatch("forcing field does not match the solver grid".into()));
                }
                Ok(Some((leray_project(&forward_transform(field)?)?, *profile)))
            }
            Forcing::Tensor { tensor, profile } => {
                if tensor.grid() != grid || tensor.components() != d * d {
                    return Err(Error::GridMismatch("forcing tensor must have d*d components on the solver grid".into()));
                }
                let th = forward_transform(tensor)?;
                Ok(Some((leray_project(&tensor_divergence(&th)?)?, *profile)))
            }
        }
    }

    /// `ℙf(t_i)` at every node (zeros for no forcing).
    pub fn nodes(&self, cfg: &SolverConfig) -> Result<Vec<SpectralField>> {
        let times = cfg.times();
        match self.spatial(&cfg.grid)? {
            None => Ok(vec![SpectralField::zeros(cfg.grid, cfg.grid.dim()); times.len()]),
            Some((f, prof)) => Ok(times.iter().map(|&t| f.scaled(prof.at(t))).collect()),
        }
    }

    /// Sampled spatial forcing `f(t_i)` in physical space (before projection).
    pub fn physical_nodes(&self, cfg: &SolverConfig) -> Result<Vec<Field>> {
        let d = cfg.grid.dim();
        let times = cfg.times();
        let base = match self {
            Forcing::Zero => return Ok(vec![Field::zeros(cfg.grid, d); times.len()]),
            Forcing::Field { field, profile } => (field.clone(), *profile),
            Forcing::Tensor { tensor, profile } => {
                (inverse_unchecked(&tensor_divergence(&forward_transform(tensor)?)?), *profile)
            }
        };
        Ok(times.iter().map(|&t| base.0.scaled(base.1.at(t))).collect())
    }
}

/// Row divergence `(div M)_j = Σ_k iξ_k M_{jk}` of a `d×d` spectral tensor.
pub fn tensor_divergence(m: &SpectralField) -> Result<SpectralField> {
    let g = *m.grid();
    let d = g.dim();
    if m.components() != d * d {
        return Err(Error::Components {
            expected: d * d,
            found: m.components(),
        });
    }
    let len = g.len();
    let src = m.data();
    let data = exec::map_range(d * len, |idx| {
        let (j, i) = (idx / len, idx % len);
        let xi = g.odd_wavevector(i);
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (k, x) in xi.iter().enumerate().take(d) {
            acc += num_complex::Complex64::new(0.0, *x) * src[(j * d + k) * len + i];
        }
        acc
    });
    SpectralField::new(g, d, data)
}

/// Time-indexed spectral snapshots.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralField>,
    pub config_hash: Option<String>,
}

impl Trajectory {
    pub fn zeros(cfg: &SolverConfig) -> Self {
        Self {
            times: cfg.times(),
            snapshots: vec![SpectralField::zeros(cfg.grid, cfg.grid.dim()); cfg.nodes],
            config_hash: None,
        }
    }

    /// Same field at every node.
    pub fn constant(cfg: &SolverConfig, spec: &SpectralField) -> Self {
        Self {
            times: cfg.times(),
            snapshots: vec![spec.clone(); cfg.nodes],
            config_hash: None,
        }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn last(&self) -> &SpectralField {
        self.snapshots.last().expect("nonempty trajectory")
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            times: self.times.clone(),
            snapshots: self.snapshots.iter().map(|s| s.scaled(a)).collect(),
            config_hash: self.config_hash.clone(),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.times != other.times {
            return Err(Error::GridMismatch("trajectories use different time nodes".into()));
        }
        if self.snapshots.first().map(|s| *s.grid()) != other.snapshots.first().map(|s| *s.grid()) {
            return Err(Error::GridMismatch("trajectories use different grids".into()));
        }
        Ok(())
    }

    /// `self + a·other`.
    pub fn add_scaled(&self, a: f64, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (s, o) in out.snapshots.iter_mut().zip(&other.snapshots) {
            s.axpy(a, o)?;
        }
        Ok(out)
    }

    /// Sup over nodes of the coefficient max-difference.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        let mut m = 0.0f64;
        for (s, o) in self.snapshots.iter().zip(&other.snapshots) {
            m = m.max(s.max_diff(o)?);
        }
        Ok(m)
    }

    /// Sup over nodes of the largest coefficient modulus.
    pub fn spectral_max(&self) -> f64 {
        self.snapshots.iter().map(|s| s.max_abs()).fold(0.0, f64::max)
    }

    /// Largest `|div u|` over snapshots relative to the field magnitude.
    pub fn max_divergence(&self) -> f64 {
        self.snapshots
            .iter()
            .map(|s| {
                let m = s.max_abs();
                if m == 0.0 {
                    0.0
                } else {
                    divergence_spectral(s).map(|d| d.max_abs()).unwrap_or(f64::INFINITY) / m
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn physical(&self) -> Vec<Field> {
        self.snapshots.iter().map(inverse_unchecked).collect()
    }
}

/// Per-mode product-integration weights for one uniform step.
struct StepWeights {
    e: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

fn phi_weights(z: f64) -> (f64, f64) {
    // a/h = (1 − e^{−z}(1+z))/z², b/h = (z − 1 + e^{−z})/z².
    if z < 0.1 {
        let mut a = 0.0;
        let mut b = 0.0;
        let mut term = 1.0;
        for n in 2..16 {
            term *= if n == 2 { 0.5 } else { -z / n as f64 };
            a += (n - 1) as f64 * term;
            b += term;
        }
        (a, b)
    } else {
        let em = (-z).exp();
        ((1.0 - em * (1.0 + z)) / (z * z), (z - 1.0 + em) / (z * z))
    }
}

impl StepWeights {
    fn new(cfg: &SolverConfig, h: f64) -> Self {
        let len = cfg.grid.len();
        let rows = exec::map_range(len, |i| {
            let z = cfg.symbol(i) * h;
            let (a, b) = phi_weights(z);
            ((-z).exp(), h * a, h * b)
        });
        Self {
            e: rows.iter().map(|r| r.0).collect(),
            a: rows.iter().map(|r| r.1).collect(),
            b: rows.iter().map(|r| r.2).collect(),
        }
    }
}

/// `S_i = ∫₀^{t_i} e^{−(t_i−s)λ} N(s) ds` at every node.
fn duhamel_nodes(cfg: &SolverConfig, n: &[SpectralField]) -> Vec<SpectralField> {
    let w = StepWeights::new(cfg, cfg.dt());
    let len = cfg.grid.len();
    let d = cfg.grid.dim();
    let mut out = Vec::with_capacity(n.len());
    out.push(SpectralField::zeros(cfg.grid, d));
    for i in 1..n.len() {
        let mut s = out[i - 1].clone();
        let (prev, cur) = (n[i - 1].data(), n[i].data());
        exec::for_each_mut(s.data_mut(), |idx, v| {
            let m = idx % len;
            *v = *v * w.e[m] + prev[idx] * w.a[m] + cur[idx] * w.b[m];
        });
        out.push(s);
    }
    out
}

/// `∫₀^t 𝔤_{t−s} ∗ ℙf(s) ds` at every node.
pub fn duhamel_force(cfg: &SolverConfig, forcing: &Forcing) -> Result<Trajectory> {
    cfg.validate()?;
    let n = forcing.nodes(cfg)?;
    Ok(Trajectory {
        times: cfg.times(),
        snapshots: duhamel_nodes(cfg, &n),
        config_hash: None,
    })
}

/// `ℙ div(u⊗v)` with optional 2/3 dealiasing of inputs and product.
pub fn projected_divergence(u: &SpectralField, v: &SpectralField, dealias: bool) -> Result<SpectralField> {
    let g = *u.grid();
    let d = g.dim();
    if v.grid() != u.grid() || u.components() != d || v.components() != d {
        return Err(Error::GridMismatch("bilinear inputs must be d-component fields on one grid".into()));
    }
    let prep = |s: &SpectralField| {
        let mut s = s.clone();
        if dealias {
            dealias_in_place(&mut s);
        }
        inverse_unchecked(&s)
    };
    let up = prep(u);
    let vp = if std::ptr::eq(u, v) { up.clone() } else { prep(v) };
    let len = g.len();
    let mut m = Vec::with_capacity(d * d * len);
    for j in 0..d {
        for k in 0..d {
            let (uj, vk) = (up.component(j), vp.component(k));
            m.extend((0..len).map(|i| uj[i] * vk[i]));
        }
    }
    let mut mh = forward_transform(&Field::new(g, d * d, m)?)?;
    if dealias {
        dealias_in_place(&mut mh);
    }
    leray_project(&tensor_divergence(&mh)?)
}

fn check_traj(cfg: &SolverConfig, u: &Trajectory) -> Result<()> {
    if u.times.len() != cfg.nodes || u.snapshots.iter().any(|s| *s.grid() != cfg.grid) {
        return Err(Error::GridMismatch("trajectory does not match the solver configuration".into()));
    }
    Ok(())
}

/// `B(u,v)(t) = ∫₀^t 𝔤_{t−s} ∗ ℙ div(u⊗v)(s) ds`.
pub fn bilinear_b(cfg: &SolverConfig, u: &Trajectory, v: &Trajectory) -> Result<Trajectory> {
    check_traj(cfg, u)?;
    check_traj(cfg, v)?;
    let n: Vec<SpectralField> = exec::map_range(cfg.nodes, |i| {
        projected_divergence(&u.snapshots[i], &v.snapshots[i], cfg.dealias)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    Ok(Trajectory {
        times: cfg.times(),
        snapshots: duhamel_nodes(cfg, &n),
        config_hash: None,
    })
}

/// `𝔤_t ∗ u₀` at every node.
pub fn semigroup_trajectory(cfg: &SolverConfig, u0: &SpectralField) -> Trajectory {
    let g = cfg.grid;
    let times = cfg.times();
    let snapshots = times
        .iter()
        .map(|&t| {
            let mut s = u0.clone();
            s.apply_multiplier(|i| (-t * cfg.symbol(i)).exp());
            s
        })
        .collect();
    let _ = g;
    Trajectory {
        times,
        snapshots,
        config_hash: None,
    }
}

/// Evaluate the configured working norm.
pub fn working_norm(cfg: &SolverConfig, traj: &Trajectory) -> Result<f64> {
    match &cfg.working_norm {
        WorkingNorm::SpectralMax => Ok(traj.spectral_max()),
        WorkingNorm::Et { p, q } => theorems::et_norm_rule(traj, p, *q),
        WorkingNorm::EScript { p } => theorems::e_script_norm_rule(traj, p, cfg.alpha),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub iterations: usize,
    pub increments: Vec<f64>,
    /// `increment_k / increment_{k−1}`.
    pub ratios: Vec<f64>,
    /// `‖e₀‖` in the working norm.
    pub delta: f64,
    pub final_norm: f64,
    pub c_b: Option<f64>,
    pub converged: bool,
    pub diverged: bool,
    /// `final_norm ≤ 2δ(1+1e-9)`.
    pub within_two_delta: bool,
    pub preprojected: bool,
    pub initial_divergence: f64,
    pub max_divergence: f64,
}

/// Picard iteration `e_{k+1} = e₀ − B(e_k, e_k)` on the whole time grid.
pub fn picard_iterate(cfg: &SolverConfig, u0: &Field, forcing: &Forcing) -> Result<(Option<Trajectory>, PicardReport)> {
    cfg.validate()?;
    if u0.grid() != &cfg.grid || u0.components() != cfg.grid.dim() {
        return Err(Error::GridMismatch("initial data does not match the solver grid".into()));
    }
    let raw = forward_transform(u0)?;
    let scale = raw.max_abs();
    let initial_divergence = if scale == 0.0 {
        0.0
    } else {
        divergence_spectral(&raw)?.max_abs() / scale
    };
    let preprojected = initial_divergence > 1e-10;
    let u0h = if preprojected { leray_project(&raw)? } else { raw };

    let e0 = semigroup_trajectory(cfg, &u0h).add_scaled(1.0, &duhamel_force(cfg, forcing)?)?;
    let delta = working_norm(cfg, &e0)?;
    let mut e = e0.clone();
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    let mut diverged = false;
    let mut growth = 0;
    for _ in 0..cfg.max_iter {
        let next = if cfg.nonlinear {
            e0.add_scaled(-1.0, &bilinear_b(cfg, &e, &e)?)?
        } else {
            e0.clone()
        };
        let inc = next.max_diff(&e)?;
        if let Some(&prev) = increments.last() {
            let r: f64 = if prev > 0.0 { inc / prev } else { 0.0 };
            ratios.push(r);
            growth = if r > 1.0 { growth + 1 } else { 0 };
        }
        increments.push(inc);
        e = next;
        if !inc.is_finite() || growth >= 3 {
            diverged = true;
            break;
        }
        if inc <= cfg.tol {
            converged = true;
            break;
        }
    }
    let final_norm = if diverged { f64::INFINITY } else { working_norm(cfg, &e)? };
    let report = PicardReport {
        iterations: increments.len(),
        increments,
        ratios,
        delta,
        final_norm,
        c_b: None,
        converged,
        diverged,
        within_two_delta: final_norm <= 2.0 * delta * (1.0 + 1e-9),
        preprojected,
        initial_divergence,
        max_divergence: if diverged { f64::NAN } else { e.max_divergence() },
    };
    Ok(((!diverged).then_some(e), report))
}

/// Exponential-Euler marcher
/// `u ← e^{−Δtλ}[u + Δt(ℙf − ℙ div(u⊗u))]` with `substeps` steps per node interval.
pub fn time_march_oracle(cfg: &SolverConfig, u0: &Field, forcing: &Forcing, substeps: usize) -> Result<Trajectory> {
    cfg.validate()?;
    if substeps == 0 {
        return Err(invalid("substeps must be >= 1"));
    }
    let raw = forward_transform(u0)?;
    let mut u = if raw.max_abs() > 0.0 && divergence_spectral(&raw)?.max_abs() > 1e-10 * raw.max_abs() {
        leray_project(&raw)?
    } else {
        raw
    };
    let h = cfg.dt() / substeps as f64;
    let decay: Vec<f64> = (0..cfg.grid.len()).map(|i| (-h * cfg.symbol(i)).exp()).collect();
    let forced = forcing.spatial(&cfg.grid)?;
    let initial = u.max_abs().max(f64::MIN_POSITIVE);
    let len = cfg.grid.len();
    let mut snapshots = vec![u.clone()];
    let mut t = 0.0;
    for node in 1..cfg.nodes {
        for s in 0..substeps {
            let mut rhs = match &forced {
                Some((f, prof)) => f.scaled(prof.at(t)),
                None => SpectralField::zeros(cfg.grid, cfg.grid.dim()),
            };
            if cfg.nonlinear {
                rhs.axpy(-1.0, &projected_divergence(&u, &u, cfg.dealias)?)?;
            }
            u.axpy(h, &rhs)?;
            exec::for_each_mut(u.data_mut(), |i, v| *v *= decay[i % len]);
            t = cfg.t_end * (node - 1) as f64 / (cfg.nodes - 1) as f64 + (s + 1) as f64 * h;
            let m = u.max_abs();
            if !m.is_finite() || m > 1e6 * initial {
                return Err(Error::Numerical(format!("time march blew up near t = {t:.4}: max coefficient {m:e}")));
            }
        }
        snapshots.push(u.clone());
    }
    Ok(Trajectory {
        times: cfg.times(),
        snapshots,
        config_hash: None,
    })
}

/// Pressure `P̂ = (ξ⊗ξ/|ξ|²):(u⊗u)^`, zero mode 0. With this sign the
/// gradient part of `div(u⊗u)` is `∇P`.
pub fn recover_pressure(u: &SpectralField) -> Result<SpectralField> {
    let g = *u.grid();
    let d = g.dim();
    if u.components() != d {
        return Err(Error::Components {
            expected: d,
            found: u.components(),
        });
    }
    let up = inverse_unchecked(u);
    let len = g.len();
    let mut m = Vec::with_capacity(d * d * len);
    for j in 0..d {
        for k in 0..d {
            let (a, b) = (up.component(j), up.component(k));
            m.extend((0..len).map(|i| a[i] * b[i]));
        }
    }
    let mh = forward_transform(&Field::new(g, d * d, m)?)?;
    let src = mh.data();
    let data = exec::map_range(len, |i| {
        let xi = g.odd_wavevector(i);
        let n2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        if n2 > 0.0 {
            for j in 0..d {
                for k in 0..d {
                    acc += src[(j * d + k) * len + i] * (xi[j] * xi[k] / n2);
                }
            }
        }
        acc
    });
    SpectralField::new(g, 1, data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbEstimate {
    pub c_b: f64,
    pub per_trial: Vec<f64>,
    /// Smallness threshold `1/(4C_B)`.
    pub threshold: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Random smooth-in-time, divergence-free trajectory of unit working norm:
/// `e(t) = 𝔤_t ∗ u₀ + (t/T)·v₀`.
pub fn random_trajectory(cfg: &SolverConfig, seed: u64) -> Result<Trajectory> {
    let mut rng = SeedStream::new(seed);
    let u0 = forward_transform(&crate::grid::build_preset(
        &crate::grid::Preset::RandomDivfree,
        cfg.grid,
        1.0,
        rng.next_u64(),
    )?)?;
    let v0 = forward_transform(&crate::grid::build_preset(
        &crate::grid::Preset::RandomDivfree,
        cfg.grid,
        rng.uniform(0.0, 1.0),
        rng.next_u64(),
    )?)?;
    let mut e = semigroup_trajectory(cfg, &u0);
    for (s, &t) in e.snapshots.iter_mut().zip(&cfg.times()) {
        s.axpy(t / cfg.t_end, &v0)?;
    }
    let n = working_norm(cfg, &e)?;
    Ok(e.scaled(1.0 / n))
}

/// Empirical `C_B = sup ‖B(e,e)‖` over random unit-norm trajectories.
pub fn estimate_cb(cfg: &SolverConfig, trials: usize, seed: u64) -> Result<CbEstimate> {
    cfg.validate()?;
    if trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    if cfg.grid.dim() < 2 {
        return Err(invalid("C_B estimation needs d >= 2"));
    }
    let mut rng = SeedStream::new(seed);
    let seeds: Vec<u64> = (0..trials).map(|_| rng.next_u64()).collect();
    let mut per_trial = Vec::with_capacity(trials);
    for s in seeds {
        let e = random_trajectory(cfg, s)?;
        per_trial.push(working_norm(cfg, &bilinear_b(cfg, &e, &e)?)?);
    }
    let c_b = per_trial.iter().copied().fold(0.0, f64::max);
    Ok(CbEstimate {
        c_b,
        threshold: if c_b > 0.0 { 1.0 / (4.0 * c_b) } else { f64::INFINITY },
        per_trial,
        trials,
        seed,
    })
}
