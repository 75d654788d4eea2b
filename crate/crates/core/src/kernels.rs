//! Fractional heat kernel, its gradient, the Oseen-type kernel of
//! `e^{−t(−Δ)^α} ℙ div`, and numerical checks of their decay and
//! smoothing estimates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec;
use crate::grid::{forward_transform, inverse_unchecked, wavevector_norm2, within_cutoff, Field, SpectralField};
use crate::mild::semigroup_apply;
use crate::quad::{adaptive, bessel_j, sph_j0, sph_j1, Sum};
use crate::varlp::lp_norm;

/// `ln(1e16)`: the symbol is cut where `e^{−tρ^{2α}} < 1e-16`.
const LN_CUTOFF: f64 = 36.841_361_487_904_73;
const MAX_PANELS: usize = 400_000;

fn check_alpha_t(alpha: f64, t: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha = {alpha} outside (0, 1]")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("t = {t} must be positive")));
    }
    Ok(())
}

fn radial_prefactor(dim: usize) -> f64 {
    match dim {
        1 => 1.0 / PI,
        2 => 1.0 / (2.0 * PI),
        _ => 1.0 / (2.0 * PI * PI),
    }
}

/// Radial profile of `𝔤_t^α` in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    pub alpha: f64,
    pub t: f64,
    pub dim: usize,
    /// Per-panel absolute tolerance, relative to the kernel scale.
    pub tol: f64,
}

impl KernelProfile {
    pub fn new(alpha: f64, t: f64, dim: usize) -> Result<Self> {
        check_alpha_t(alpha, t)?;
        if !(1..=3).contains(&dim) {
            return Err(invalid("kernel dimension must be 1, 2 or 3"));
        }
        Ok(Self { alpha, t, dim, tol: 1e-15 })
    }

    fn rho_max(&self) -> f64 {
        (LN_CUTOFF / self.t).powf(0.5 / self.alpha)
    }

    fn envelope(&self, rho: f64) -> f64 {
        (-self.t * rho.powf(2.0 * self.alpha)).exp()
    }

    /// `c_d ∫ e^{−tρ^{2α}} ρ^{k} dρ`, the natural size of the integrals.
    fn moment(&self, k: usize) -> f64 {
        let a2 = 2.0 * self.alpha;
        let s = (k as f64 + 1.0) / a2;
        radial_prefactor(self.dim) * libm::tgamma(s) / a2 * self.t.powf(-s)
    }

    /// `𝔤_t^α(0)`.
    pub fn peak(&self) -> f64 {
        self.moment(self.dim - 1)
    }

    fn integrate<F: Fn(f64) -> f64>(&self, f: F, r: f64, scale: f64) -> f64 {
        let rho_max = self.rho_max();
        let tol = self.tol * scale;
        let width = if r > 0.0 { PI / r } else { rho_max };
        let panels = ((rho_max / width).ceil() as usize).clamp(1, MAX_PANELS);
        let step = rho_max / panels as f64;
        let mut acc = Sum::default();
        for k in 0..panels {
            acc.add(adaptive(&f, k as f64 * step, (k + 1) as f64 * step, tol));
        }
        acc.value()
    }

    /// `𝔤_t^α(r)`.
    pub fn value(&self, r: f64) -> f64 {
        let r = r.abs();
        let c = radial_prefactor(self.dim);
        let v = match self.dim {
            1 => self.integrate(|p| self.envelope(p) * (p * r).cos(), r, 1.0 / c * self.peak()),
            2 => self.integrate(|p| self.envelope(p) * p * bessel_j(0, p * r), r, self.peak() / c),
            _ => self.integrate(|p| self.envelope(p) * p * p * sph_j0(p * r), r, self.peak() / c),
        };
        c * v
    }

    /// Radial derivative `∂_r 𝔤_t^α(r)`; `|∇𝔤| = |∂_r 𝔤|`.
    pub fn grad(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let sign = r.signum();
        let r = r.abs();
        let c = radial_prefactor(self.dim);
        let scale = self.moment(self.dim) / c;
        let v = match self.dim {
            1 => self.integrate(|p| self.envelope(p) * p * (p * r).sin(), r, scale),
            2 => self.integrate(|p| self.envelope(p) * p * p * bessel_j(1, p * r), r, scale),
            _ => self.integrate(|p| self.envelope(p) * p * p * p * sph_j1(p * r), r, scale),
        };
        -sign * c * v
    }

    /// Values at many radii, evaluated in parallel.
    pub fn values(&self, radii: &[f64]) -> Vec<f64> {
        exec::map_range(radii.len(), |i| self.value(radii[i]))
    }

    pub fn grads(&self, radii: &[f64]) -> Vec<f64> {
        exec::map_range(radii.len(), |i| self.grad(radii[i]))
    }
}

/// `𝔤_t^α(r)` in three dimensions.
pub fn heat_kernel_radial(alpha: f64, t: f64, r: f64) -> Result<f64> {
    Ok(KernelProfile::new(alpha, t, 3)?.value(r))
}

/// `∂_r 𝔤_t^α(r)` in three dimensions.
pub fn grad_heat_kernel(alpha: f64, t: f64, r: f64) -> Result<f64> {
    Ok(KernelProfile::new(alpha, t, 3)?.grad(r))
}

/// Checks nonnegativity and radial monotonicity on sorted radii,
/// allowing quadrature noise of `1e-12·𝔤(0)`.
pub fn is_radially_decreasing(profile: &KernelProfile, radii: &[f64]) -> bool {
    let v = profile.values(radii);
    let tol = 1e-12 * profile.peak();
    v.iter().all(|&g| g >= -tol) && v.windows(2).all(|w| w[1] <= w[0] + tol)
}

/// Options for the Oseen kernel synthesis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OseenOptions {
    /// Auxiliary box length as a multiple of `max(|x|, t^{1/2α})`.
    pub box_factor: f64,
    /// Symbol cutoff deciding the highest synthesized mode.
    pub cutoff: f64,
    /// Multiplies the number of modes (2.0 doubles the resolution).
    pub mode_scale: f64,
    /// Fixed box length; evaluation points beyond `L/box_factor` are rejected.
    pub box_length: Option<f64>,
}

impl Default for OseenOptions {
    fn default() -> Self {
        Self {
            box_factor: 8.0,
            cutoff: 1e-16,
            mode_scale: 1.0,
            box_length: None,
        }
    }
}

/// `K[j][h][k]`: kernel of the multiplier `e^{−t|ξ|^{2α}} (δ_{jk} − ξ_jξ_k/|ξ|²) iξ_h`.
pub type OseenTensor = [[[f64; 3]; 3]; 3];

/// Oseen-type kernel `K_t^α` in three dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OseenProfile {
    pub alpha: f64,
    pub t: f64,
    pub options: OseenOptions,
}

impl OseenProfile {
    pub fn new(alpha: f64, t: f64, options: OseenOptions) -> Result<Self> {
        check_alpha_t(alpha, t)?;
        if !(options.box_factor >= 2.0 && options.mode_scale > 0.0 && options.cutoff > 0.0 && options.cutoff < 1.0) {
            return Err(invalid("invalid Oseen synthesis options"));
        }
        Ok(Self { alpha, t, options })
    }

    fn core_scale(&self, x: &[f64; 3]) -> f64 {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        r.max(self.t.powf(0.5 / self.alpha))
    }

    /// Auxiliary box used for the point `x`.
    pub fn box_length(&self, x: &[f64; 3]) -> Result<f64> {
        match self.options.box_length {
            Some(l) => {
                let reach = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if reach > l / self.options.box_factor {
                    return Err(invalid(format!(
                        "point at distance {reach} lies outside the reliable core of a box of length {l}"
                    )));
                }
                Ok(l)
            }
            None => Ok(self.options.box_factor * self.core_scale(x)),
        }
    }

    /// Number of modes per half-axis.
    pub fn modes(&self, length: f64) -> usize {
        let xi_max = ((-self.options.cutoff.ln()) / self.t).powf(0.5 / self.alpha);
        (self.options.mode_scale * xi_max * length / (2.0 * PI)).ceil() as usize
    }

    /// Kernel tensor at `x` by direct Fourier synthesis.
    pub fn eval(&self, x: [f64; 3]) -> Result<OseenTensor> {
        let length = self.box_length(&x)?;
        let kmax = self.modes(length) as i64;
        let k0 = 2.0 * PI / length;
        let xi_cut2 = ((-self.options.cutoff.ln()) / self.t).powf(1.0 / self.alpha);
        let (t, alpha) = (self.t, self.alpha);
        let slabs = exec::map_range(kmax as usize + 1, |i| {
            let a = i as i64;
            let mut acc = [Sum::default(); 27];
            for b in -kmax..=kmax {
                for c in -kmax..=kmax {
                    // Half lattice; the mirrored half contributes equally.
                    if a == 0 && (b < 0 || (b == 0 && c <= 0)) {
                        continue;
                    }
                    let xi = [a as f64 * k0, b as f64 * k0, c as f64 * k0];
                    let n2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
                    if n2 > xi_cut2 * self.options.mode_scale.powi(2).max(1.0) {
                        continue;
                    }
                    let e = (-t * n2.powf(alpha)).exp();
                    let s = (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]).sin();
                    let w = -2.0 * e * s;
                    for j in 0..3 {
                        for k in 0..3 {
                            let pjk = if j == k { 1.0 } else { 0.0 } - xi[j] * xi[k] / n2;
                            for h in 0..3 {
                                acc[9 * j + 3 * h + k].add(w * pjk * xi[h]);
                            }
                        }
                    }
                }
            }
            acc.map(|s| s.value())
        });
        let mut total = [Sum::default(); 27];
        for slab in &slabs {
            for (t, v) in total.iter_mut().zip(slab) {
                t.add(*v);
            }
        }
        let norm = length.powi(-3);
        let mut out = [[[0.0; 3]; 3]; 3];
        for j in 0..3 {
            for h in 0..3 {
                for k in 0..3 {
                    out[j][h][k] = total[9 * j + 3 * h + k].value() * norm;
                }
            }
        }
        Ok(out)
    }
}

/// `K_t^α(x)` with default synthesis options.
pub fn oseen_kernel(alpha: f64, t: f64, x: [f64; 3]) -> Result<OseenTensor> {
    OseenProfile::new(alpha, t, OseenOptions::default())?.eval(x)
}

/// Frobenius norm of an Oseen tensor.
pub fn tensor_norm(k: &OseenTensor) -> f64 {
    k.iter().flatten().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKernel {
    GradHeat,
    Oseen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub kernel: DecayKernel,
    pub alpha: f64,
    pub dim: usize,
    pub times: Vec<f64>,
    /// Radii in units of `t^{1/(2α)}`.
    pub scaled_radii: Vec<f64>,
    /// `sup_r |k(t,r)|·(t^{1/(2α)}+r)^{d+1}` per time.
    pub per_t_sup: Vec<f64>,
    /// Empirical constant: the largest per-time sup.
    pub sup: f64,
    /// `(max − min)/max` over the per-time sups.
    pub drift: f64,
    pub finite: bool,
}

/// Weighted sup of a kernel on the lattice `r = t^{1/(2α)}·s`, `s ∈ scaled_radii`.
///
/// Sampling radii on the self-similar lattice makes the per-time sups
/// equal up to quadrature error when the kernel obeys its scaling law.
pub fn verify_decay(kernel: DecayKernel, alpha: f64, times: &[f64], scaled_radii: &[f64]) -> Result<DecayReport> {
    if times.is_empty() || scaled_radii.is_empty() {
        return Err(invalid("times and radii must be nonempty"));
    }
    if times.iter().chain(scaled_radii).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid("times and radii must be positive"));
    }
    let dim = 3;
    let mut per_t_sup = Vec::with_capacity(times.len());
    for &t in times {
        let tau = t.powf(0.5 / alpha);
        let radii: Vec<f64> = scaled_radii.iter().map(|s| s * tau).collect();
        let mags: Vec<f64> = match kernel {
            DecayKernel::GradHeat => KernelProfile::new(alpha, t, dim)?.grads(&radii).iter().map(|g| g.abs()).collect(),
            DecayKernel::Oseen => {
                let prof = OseenProfile::new(alpha, t, OseenOptions::default())?;
                let dirs = [[1.0, 0.0, 0.0], [1.0 / 3f64.sqrt(); 3]];
                let mut m = Vec::with_capacity(radii.len());
                for &r in &radii {
                    let mut best = 0.0f64;
                    for d in &dirs {
                        let k = prof.eval([r * d[0], r * d[1], r * d[2]])?;
                        best = best.max(tensor_norm(&k));
                    }
                    m.push(best);
                }
                m
            }
        };
        let sup = mags
            .iter()
            .zip(&radii)
            .map(|(m, r)| m * (tau + r).powi(dim as i32 + 1))
            .fold(0.0, f64::max);
        per_t_sup.push(sup);
    }
    let max = per_t_sup.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = per_t_sup.iter().copied().fold(f64::INFINITY, f64::min);
    let finite = per_t_sup.iter().all(|v| v.is_finite());
    Ok(DecayReport {
        kernel,
        alpha,
        dim,
        times: times.to_vec(),
        scaled_radii: scaled_radii.to_vec(),
        per_t_sup,
        sup: max,
        drift: if max > 0.0 { (max - min) / max } else { 0.0 },
        finite,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub alpha: f64,
    pub nu: f64,
    pub r: f64,
    pub p: f64,
    pub dim: usize,
    pub times: Vec<f64>,
    /// `‖(−Δ)^{ν/2}𝔤_t∗φ‖_p / ‖φ‖_r`.
    pub ratios: Vec<f64>,
    pub slope: f64,
    pub predicted: f64,
    pub relative_error: f64,
    /// Set when `φ` carries energy above the 2/3 cutoff.
    pub aliasing_warning: bool,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Log-log decay rate of `‖(−Δ)^{ν/2} 𝔤_t^α ∗ φ‖_{L^p} / ‖φ‖_{L^r}` over `times`.
pub fn smoothing_estimate(alpha: f64, nu: f64, r: f64, p: f64, phi: &Field, times: &[f64]) -> Result<SmoothingReport> {
    if !(1.0 <= r && r <= p) {
        return Err(invalid("need 1 <= r <= p"));
    }
    if phi.components() != 1 {
        return Err(invalid("smoothing estimate takes a scalar field"));
    }
    if times.len() < 2 || times.iter().any(|t| !(*t > 0.0)) {
        return Err(invalid("need at least two positive times"));
    }
    if !(nu >= 0.0) {
        return Err(invalid("nu must be nonnegative"));
    }
    let g = *phi.grid();
    let weights = vec![g.cell_volume(); g.len()];
    let base = lp_norm(phi.data(), &weights, r)?;
    if base == 0.0 {
        return Err(invalid("phi must be nonzero"));
    }
    let spec = forward_transform(phi)?;
    let outside: f64 = (0..g.len())
        .filter(|&i| !within_cutoff(&g, i))
        .map(|i| spec.data()[i].norm_sqr())
        .sum();
    let aliasing_warning = outside > 1e-8 * spec.energy() / g.volume();
    let mut ratios = Vec::with_capacity(times.len());
    for &t in times {
        let mut s = spec.clone();
        s.apply_multiplier(|i| {
            let k2 = wavevector_norm2(&g, i);
            k2.powf(0.5 * nu) * (-t * k2.powf(alpha)).exp()
        });
        let out = inverse_unchecked(&s);
        ratios.push(lp_norm(out.data(), &weights, p)? / base);
    }
    let slope = loglog_slope(times, &ratios);
    let d = g.dim() as f64;
    let inv = |v: f64| if v.is_infinite() { 0.0 } else { 1.0 / v };
    let predicted = -nu / (2.0 * alpha) - d / (2.0 * alpha) * (inv(r) - inv(p));
    let relative_error = if predicted == 0.0 {
        slope.abs()
    } else {
        ((slope - predicted) / predicted).abs()
    };
    Ok(SmoothingReport {
        alpha,
        nu,
        r,
        p,
        dim: g.dim(),
        times: times.to_vec(),
        ratios,
        slope,
        predicted,
        relative_error,
        aliasing_warning,
    })
}

/// `∫₀^∞ ds / (s^{1/(2α)} + r)⁴`, equal to `c_α·r^{2α−4}`.
pub fn time_integral_constant(alpha: f64, r: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid("alpha must lie in (0, 1]"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("r must be positive"));
    }
    let gamma = 0.5 / alpha;
    let f = |s: f64| (s.powf(gamma) + r).powi(-4);
    let split = r.powf(2.0 * alpha);
    let scale = split * r.powi(-4);
    let head = adaptive(&f, 0.0, split, 1e-16 * scale);
    // Tail s = split/u² maps [split, ∞) onto (0, 1].
    let tail = adaptive(
        &|u: f64| {
            if u == 0.0 {
                0.0
            } else {
                f(split / (u * u)) * 2.0 * split / (u * u * u)
            }
        },
        0.0,
        1.0,
        1e-16 * scale,
    );
    Ok(head + tail)
}

/// `c_α = ∫₀^∞ dβ / (1 + β^{1/(2α)})⁴`.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    time_integral_constant(alpha, 1.0)
}

/// Max deviation between `S(t)S(s)F` and `S(t+s)F`.
pub fn semigroup_check(alpha: f64, t: f64, s: f64, f: &SpectralField) -> Result<f64> {
    let two = semigroup_apply(alpha, t, &semigroup_apply(alpha, s, f)?)?;
    let one = semigroup_apply(alpha, t + s, f)?;
    two.max_diff(&one)
}
