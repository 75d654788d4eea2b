//! Maximal function, Riesz transforms and potentials, Leray projector,
//! and empirical boundedness ratios.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::grid::{forward_transform, inverse_unchecked, Field, GridSpec, SpectralField};
use crate::random::SeedStream;
use crate::varlp::{luxemburg_norm, mixed_norm, Domain, VariableExponent};

/// Geometric radii `r₀·2^k` inside `[h, L/2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusLadder {
    radii: Vec<f64>,
}

impl RadiusLadder {
    pub fn geometric(grid: &GridSpec, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(invalid("ladder base radius must be positive"));
        }
        let (lo, hi) = (grid.spacing(), grid.length() / 2.0);
        let mut radii = Vec::new();
        let mut r = r0;
        while r < lo * (1.0 - 1e-12) {
            r *= 2.0;
        }
        while r <= hi * (1.0 + 1e-12) {
            radii.push(r);
            r *= 2.0;
        }
        if radii.is_empty() {
            return Err(invalid("radius ladder is empty for this grid"));
        }
        Ok(Self { radii })
    }

    /// Ladder starting at the grid spacing.
    pub fn standard(grid: &GridSpec) -> Self {
        Self::geometric(grid, grid.spacing()).expect("grid spacing ladder is never empty")
    }

    /// Every distinct minimum-image distance in `[h, L/2]`.
    pub fn exhaustive(grid: &GridSpec) -> Self {
        let mut r2: Vec<i64> = (0..grid.len())
            .map(|i| grid.signed_index(i).iter().map(|k| k * k).sum::<i64>())
            .filter(|&s| s > 0 && 4 * s <= (grid.n() * grid.n()) as i64)
            .collect();
        r2.sort_unstable();
        r2.dedup();
        let h = grid.spacing();
        Self {
            radii: r2.into_iter().map(|s| (s as f64).sqrt() * h).collect(),
        }
    }

    pub fn from_radii(mut radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
            return Err(invalid("ladder radii must be positive and nonempty"));
        }
        radii.sort_by(f64::total_cmp);
        Ok(Self { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// Minimum-image distance from the origin of grid offset `flat`.
fn offset_distance(grid: &GridSpec, flat: usize) -> f64 {
    let k = grid.signed_index(flat);
    let s: i64 = k.iter().map(|v| v * v).sum();
    (s as f64).sqrt() * grid.spacing()
}

/// Circular convolution `Σ_y a[x−y]·b[y]` via FFT (no cell volume).
fn circular_convolve(grid: &GridSpec, kernel_hat: &SpectralField, b_hat: &SpectralField) -> Vec<f64> {
    let n = grid.len() as f64;
    let mut prod = b_hat.clone();
    let kh = kernel_hat.data();
    exec::for_each_mut(prod.data_mut(), |i, v| *v *= kh[i] * n);
    inverse_unchecked(&prod).into_data()
}

fn scalar(grid: GridSpec, data: Vec<f64>) -> Field {
    Field::new(grid, 1, data).expect("finite scalar samples")
}

/// Centred ball averages of `|f|` for each radius.
fn ball_averages(grid: &GridSpec, abs_hat: &SpectralField, radii: &[f64]) -> Vec<Vec<f64>> {
    radii
        .iter()
        .map(|&r| {
            let ind: Vec<f64> = (0..grid.len())
                .map(|i| if offset_distance(grid, i) <= r * (1.0 + 1e-12) { 1.0 } else { 0.0 })
                .collect();
            let count: f64 = ind.iter().sum();
            let ind_hat = forward_transform(&scalar(*grid, ind)).expect("finite indicator");
            let mut avg = circular_convolve(grid, &ind_hat, abs_hat);
            avg.iter_mut().for_each(|v| *v = (*v / count).max(0.0));
            avg
        })
        .collect()
}

/// Centred discrete Hardy-Littlewood maximal function of `|f|`.
///
/// The single-cell ball (the `r → 0` limit) is always included, so
/// `ℳf ≥ |f|` pointwise.
pub fn maximal_function(f: &Field, ladder: &RadiusLadder) -> Field {
    let grid = *f.grid();
    let abs = scalar(grid, f.magnitude());
    let abs_hat = forward_transform(&abs).expect("finite field");
    let avgs = ball_averages(&grid, &abs_hat, ladder.radii());
    let a = abs.data();
    let out = exec::map_range(grid.len(), |i| avgs.iter().map(|v| v[i]).fold(a[i], f64::max));
    scalar(grid, out)
}

/// Uncentred 1D maximal function by brute force over all discrete
/// intervals containing each point. Quadratic cost; an oracle only.
pub fn maximal_function_uncentered_1d(f: &Field) -> Result<Field> {
    let grid = *f.grid();
    if grid.dim() != 1 {
        return Err(invalid("uncentred oracle is one-dimensional"));
    }
    let a = f.magnitude();
    let n = a.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + a[i];
    }
    let out = exec::map_range(n, |x| {
        let mut best = 0.0f64;
        for lo in 0..=x {
            for hi in x..n {
                best = best.max((prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64);
            }
        }
        best
    });
    Ok(scalar(grid, out))
}

fn on_grid(p: &VariableExponent, grid: &GridSpec) -> Result<()> {
    match p.domain() {
        Domain::Grid(g) if g == grid => Ok(()),
        _ => Err(Error::DomainMismatch("exponent must live on the field's grid".into())),
    }
}

/// `‖ℳf‖_{p(·)} / ‖f‖_{p(·)}`; `0` for `f ≡ 0`.
pub fn maximal_bound_check(f: &Field, p: &VariableExponent) -> Result<f64> {
    if p.p_minus() <= 1.0 {
        return Err(invalid("maximal bound needs p- > 1"));
    }
    on_grid(p, f.grid())?;
    let mf = maximal_function(f, &RadiusLadder::standard(f.grid()));
    let den = luxemburg_norm(&f.magnitude(), p)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(luxemburg_norm(mf.data(), p)? / den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvBoundReport {
    pub phi_l1: f64,
    /// `max_x |(φ∗f)(x)| − ‖φ‖₁·ℳf(x)`.
    pub max_margin: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub radii: usize,
}

/// Pointwise check of `|φ∗f| ≤ ‖φ‖₁ ℳf` for a radially decreasing `φ`.
///
/// `φ` is sampled at minimum-image distances and truncated beyond `L/2`;
/// the maximal function uses every distinct distance as a radius, which
/// makes the discrete inequality exact up to roundoff.
pub fn conv_radial_bound_check<P>(phi: P, f: &Field) -> Result<ConvBoundReport>
where
    P: Fn(f64) -> f64 + Sync + Send,
{
    let grid = *f.grid();
    let half = grid.length() / 2.0;
    let ladder = RadiusLadder::exhaustive(&grid);
    let mut profile = vec![(0.0, phi(0.0))];
    profile.extend(ladder.radii().iter().map(|&r| (r, phi(r))));
    let decreasing = profile.iter().all(|p| p.1 >= 0.0 && p.1.is_finite())
        && profile.windows(2).all(|w| w[1].1 <= w[0].1);
    if !decreasing {
        return Err(invalid("phi must be nonnegative and radially decreasing"));
    }
    let samples = exec::map_range(grid.len(), |i| {
        let r = offset_distance(&grid, i);
        if r <= half * (1.0 + 1e-12) {
            phi(r)
        } else {
            0.0
        }
    });
    let dv = grid.cell_volume();
    let phi_l1 = exec::sum(samples.len(), |i| samples[i]) * dv;
    let phi_hat = forward_transform(&scalar(grid, samples))?;
    let conv_hat = {
        let f_hat = forward_transform(&scalar(grid, f.component(0).to_vec()))?;
        if f.components() != 1 {
            return Err(invalid("convolution bound takes a scalar field"));
        }
        f_hat
    };
    let conv: Vec<f64> = circular_convolve(&grid, &phi_hat, &conv_hat).iter().map(|v| v * dv).collect();
    let mf = maximal_function(f, &ladder);
    let max_margin = exec::max(grid.len(), |i| conv[i].abs() - phi_l1 * mf.data()[i]);
    let tolerance = 1e-10 * phi_l1 * f.max_abs();
    Ok(ConvBoundReport {
        phi_l1,
        max_margin,
        tolerance,
        holds: max_margin <= tolerance,
        radii: ladder.radii().len(),
    })
}

/// Riesz transform along `axis` (0-based): multiplier `−iξ_j/|ξ|`, zero at `ξ = 0`.
pub fn riesz_transform(spec: &SpectralField, axis: usize) -> Result<SpectralField> {
    let g = *spec.grid();
    if axis >= g.dim() {
        return Err(invalid(format!("axis {axis} out of range for d = {}", g.dim())));
    }
    let len = g.len();
    let mut out = spec.clone();
    exec::for_each_mut(out.data_mut(), |i, v| {
        let xi = g.odd_wavevector(i % len);
        let n = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        *v = if n == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            *v * Complex64::new(0.0, -xi[axis] / n)
        };
    });
    Ok(out)
}

/// Leray projector `δ_{jk} − ξ_jξ_k/|ξ|²`; the zero mode passes through.
pub fn leray_project(spec: &SpectralField) -> Result<SpectralField> {
    let g = *spec.grid();
    let d = g.dim();
    if spec.components() != d {
        return Err(Error::Components {
            expected: d,
            found: spec.components(),
        });
    }
    let len = g.len();
    let src = spec.data();
    let data = exec::map_range(d * len, |idx| {
        let (j, i) = (idx / len, idx % len);
        let xi = g.odd_wavevector(i);
        let n2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if n2 == 0.0 {
            return src[idx];
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for (k, x) in xi.iter().enumerate().take(d) {
            dot += src[k * len + i] * *x;
        }
        src[idx] - dot * (xi[j] / n2)
    });
    SpectralField::new(g, d, data)
}

fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        _ => 4.0 * PI / 3.0,
    }
}

fn check_beta(beta: f64, d: usize) -> Result<()> {
    if !(beta > 0.0 && beta < d as f64) {
        return Err(invalid(format!("beta = {beta} outside (0, {d})")));
    }
    Ok(())
}

/// Kernel `|z|^{β−d}` at minimum-image offsets; the origin cell holds the
/// exact integral over the ball of one cell's volume, divided by that volume.
fn potential_kernel(grid: &GridSpec, beta: f64) -> Vec<f64> {
    let d = grid.dim();
    let dv = grid.cell_volume();
    let rho = (dv / unit_ball_volume(d)).powf(1.0 / d as f64);
    let centre = sphere_area(d) * rho.powf(beta) / beta / dv;
    (0..grid.len())
        .map(|i| {
            if i == 0 {
                centre
            } else {
                offset_distance(grid, i).powf(beta - d as f64)
            }
        })
        .collect()
}

/// Riesz potential `I_β(f)(x) = ∫ |f(y)| |x−y|^{β−d} dy` by direct summation
/// over the primary box (minimum-image distances).
pub fn riesz_potential_direct(f: &Field, beta: f64) -> Result<Field> {
    let grid = *f.grid();
    check_beta(beta, grid.dim())?;
    let kern = potential_kernel(&grid, beta);
    let a = f.magnitude();
    let dv = grid.cell_volume();
    let n = grid.n();
    let out = exec::map_range(grid.len(), |x| {
        let cx = grid.coords(x);
        let mut acc = 0.0;
        for (y, &ay) in a.iter().enumerate() {
            if ay == 0.0 {
                continue;
            }
            let cy = grid.coords(y);
            let mut off = [0usize; 3];
            for k in 0..grid.dim() {
                off[k] = (cx[k] + n - cy[k]) % n;
            }
            acc += kern[grid.flat(off)] * ay;
        }
        acc * dv
    });
    Ok(scalar(grid, out))
}

/// FFT fast path of [`riesz_potential_direct`]: the same truncated kernel,
/// convolved spectrally.
pub fn riesz_potential_fft(f: &Field, beta: f64) -> Result<Field> {
    let grid = *f.grid();
    check_beta(beta, grid.dim())?;
    let kh = forward_transform(&scalar(grid, potential_kernel(&grid, beta)))?;
    let ah = forward_transform(&scalar(grid, f.magnitude()))?;
    let dv = grid.cell_volume();
    let out = circular_convolve(&grid, &kh, &ah).into_iter().map(|v| v * dv).collect();
    Ok(scalar(grid, out))
}

/// Continuum multiplier `γ(β)|ξ|^{−β}` applied to `|f|`, mean removed.
/// Differs from the truncated direct sum by the box-boundary cut.
pub fn riesz_potential_multiplier(f: &Field, beta: f64) -> Result<Field> {
    let grid = *f.grid();
    let d = grid.dim() as f64;
    check_beta(beta, grid.dim())?;
    let gamma = PI.powf(d / 2.0) * 2f64.powf(beta) * libm::tgamma(beta / 2.0) / libm::tgamma((d - beta) / 2.0);
    let mut s = forward_transform(&scalar(grid, f.magnitude()))?;
    s.apply_multiplier(|i| {
        let n2 = grid.wavevector(i).iter().map(|v| v * v).sum::<f64>();
        if n2 == 0.0 {
            0.0
        } else {
            gamma * n2.powf(-beta / 2.0)
        }
    });
    Ok(inverse_unchecked(&s))
}

/// `‖I_β f‖_{q(·)} / ‖f‖_{p(·)}` with `1/q = 1/p − β/d`; `0` for `f ≡ 0`.
pub fn riesz_potential_bound_check(f: &Field, beta: f64, p: &VariableExponent) -> Result<f64> {
    let grid = *f.grid();
    check_beta(beta, grid.dim())?;
    on_grid(p, &grid)?;
    let q = p.sobolev(beta, grid.dim() as f64)?;
    let den = luxemburg_norm(&f.magnitude(), p)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    let ip = riesz_potential_fft(f, beta)?;
    Ok(luxemburg_norm(ip.data(), &q)? / den)
}

/// Exponents of the mixed Riesz-potential bound.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedRieszExponents {
    pub beta: f64,
    pub p: VariableExponent,
    pub pp: f64,
    pub rho: VariableExponent,
}

impl MixedRieszExponents {
    /// Instantiation used for the bilinear term: `β = 2α−1`, inputs in
    /// `p(·)/2` and `𝔭 = 3/(2(2α−1))`, output in `ρ = p(·)`.
    pub fn bilinear(alpha: f64, p: &VariableExponent) -> Result<Self> {
        if !(alpha > 0.5 && alpha <= 1.0) {
            return Err(invalid("alpha must lie in (1/2, 1]"));
        }
        let beta = 2.0 * alpha - 1.0;
        Ok(Self {
            beta,
            p: p.scaled(0.5)?,
            pp: 3.0 / (2.0 * beta),
            rho: p.clone(),
        })
    }
}

/// `‖I_β f‖_{ρ(·)} / mixed_norm(f, p, 𝔭)`; `0` for `f ≡ 0`.
pub fn mixed_riesz_check(f: &Field, beta: f64, p: &VariableExponent, pp: f64, rho: &VariableExponent) -> Result<f64> {
    let grid = *f.grid();
    let d = grid.dim() as f64;
    on_grid(p, &grid)?;
    on_grid(rho, &grid)?;
    if !(beta > 0.0 && beta < (d / p.p_plus()).min(d / pp)) {
        return Err(invalid(format!(
            "beta = {beta} must lie in (0, min(d/p+, d/pp)) = (0, {})",
            (d / p.p_plus()).min(d / pp)
        )));
    }
    let den = mixed_norm(&f.magnitude(), p, pp)?;
    if den == 0.0 {
        return Ok(0.0);
    }
    let ip = riesz_potential_fft(f, beta)?;
    Ok(luxemburg_norm(ip.data(), rho)? / den)
}

/// Sup of an ensemble of ratios and its drift under doubling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStability {
    pub ratio_sup: f64,
    /// Sup over the first half of the ensemble.
    pub half_sup: f64,
    /// `ratio_sup / half_sup` (1 when the sup is already reached).
    pub drift: f64,
    pub finite: bool,
}

pub fn ensemble_stability(ratios: &[f64]) -> EnsembleStability {
    let sup = ratios.iter().copied().fold(0.0, f64::max);
    let half = ratios[..ratios.len().div_ceil(2)].iter().copied().fold(0.0, f64::max);
    EnsembleStability {
        ratio_sup: sup,
        half_sup: half,
        drift: if half > 0.0 { sup / half } else { 1.0 },
        finite: ratios.iter().all(|r| r.is_finite()),
    }
}

/// Random nonnegative scalar field, uniform in `[0, 1)`.
pub fn random_scalar(grid: GridSpec, seed: u64) -> Field {
    let mut rng = SeedStream::new(seed);
    let data = (0..grid.len()).map(|_| rng.next_f64()).collect();
    scalar(grid, data)
}

/// Sum of a few random smooth bumps supported in the central eighth of the box.
pub fn random_bump_field(grid: GridSpec, seed: u64) -> Field {
    let mut rng = SeedStream::new(seed);
    let l = grid.length();
    let h = grid.spacing();
    let d = grid.dim();
    let bumps: Vec<(Vec<f64>, f64, f64)> = (0..3)
        .map(|_| {
            let radius = rng.uniform(2.0 * h, (l / 16.0).max(2.0 * h));
            let reach = (l / 16.0 - radius).max(0.0);
            let c = (0..d).map(|_| l / 2.0 + rng.uniform(-reach, reach)).collect();
            (c, radius, rng.uniform(0.5, 1.5))
        })
        .collect();
    Field::from_fn(grid, 1, |x, _| {
        bumps
            .iter()
            .map(|(c, r, w)| {
                let s2: f64 = (0..d).map(|a| (x[a] - c[a]).powi(2)).sum::<f64>() / (r * r);
                if s2 < 1.0 {
                    w * (1.0 - s2).powi(3)
                } else {
                    0.0
                }
            })
            .sum()
    })
    .expect("finite bump samples")
}
