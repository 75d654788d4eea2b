//! Uniform periodic grids, fields, and their Fourier coefficients.
//!
//! Samples are stored component-major, then x-fastest: the flat index of
//! point `(i0, i1, i2)` is `i0 + N*(i1 + N*i2)`.
//!
//! Transform convention: the forward transform carries the `1/N^d` factor,
//! so a constant field `c` has coefficient `c` at `ξ = 0`. The inverse
//! transform is the plain Fourier sum. Parseval then reads
//! `Σ|f|²·dV = L^d·Σ|F|²`.

use std::f64::consts::TAU;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::random::SeedStream;
use crate::{exec, fft, operators};

/// Relative tolerance for Hermitian symmetry checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    length: f64,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("points per axis {n} must be even and >= 4")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {length} must be positive")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Number of grid points, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 2/3-rule cutoff `N/3` (rounded down).
    pub fn cutoff(&self) -> usize {
        self.n / 3
    }

    /// Base wavenumber `2π/L`.
    pub fn k0(&self) -> f64 {
        TAU / self.length
    }

    /// Per-axis indices of a flat index (unused axes are 0).
    pub fn coords(&self, flat: usize) -> [usize; 3] {
        let mut c = [0; 3];
        let mut r = flat;
        for slot in c.iter_mut().take(self.dim) {
            *slot = r % self.n;
            r /= self.n;
        }
        c
    }

    pub fn flat(&self, coords: [usize; 3]) -> usize {
        let mut f = 0;
        for a in (0..self.dim).rev() {
            f = f * self.n + coords[a];
        }
        f
    }

    /// Physical position `i·L/N`.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let c = self.coords(flat);
        let h = self.spacing();
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]
    }

    /// Signed wavenumber index in `[-N/2, N/2)`.
    pub fn signed(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn signed_index(&self, flat: usize) -> [i64; 3] {
        let c = self.coords(flat);
        let mut k = [0; 3];
        for a in 0..self.dim {
            k[a] = self.signed(c[a]);
        }
        k
    }

    /// Lattice wavevector `2πk/L`.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let k = self.signed_index(flat);
        let k0 = self.k0();
        [k[0] as f64 * k0, k[1] as f64 * k0, k[2] as f64 * k0]
    }

    /// Wavevector with Nyquist components zeroed, used by odd multipliers
    /// so that they keep real fields real.
    pub fn odd_wavevector(&self, flat: usize) -> [f64; 3] {
        let k = self.signed_index(flat);
        let k0 = self.k0();
        let nyq = -(self.n as i64) / 2;
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            if k[a] != nyq {
                out[a] = k[a] as f64 * k0;
            }
        }
        out
    }

    /// Flat index of the mode `-k`.
    pub fn negated(&self, flat: usize) -> usize {
        let c = self.coords(flat);
        let mut m = [0; 3];
        for a in 0..self.dim {
            m[a] = (self.n - c[a]) % self.n;
        }
        self.flat(m)
    }

    /// True when some component of the mode index reaches the Nyquist value.
    pub fn has_nyquist(&self, flat: usize) -> bool {
        let nyq = -(self.n as i64) / 2;
        self.signed_index(flat)[..self.dim].contains(&nyq)
    }
}

fn norm2(v: &[f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// Squared modulus of the true wavevector.
pub fn wavevector_norm2(grid: &GridSpec, flat: usize) -> f64 {
    norm2(&grid.wavevector(flat))
}

/// Real samples of an `m`-component field.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    components: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, components: usize, data: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return Err(invalid("a field needs at least one component"));
        }
        if data.len() != components * grid.len() {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                components * grid.len(),
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, components, data })
    }

    pub fn zeros(grid: GridSpec, components: usize) -> Self {
        Self {
            grid,
            components,
            data: vec![0.0; components * grid.len()],
        }
    }

    /// Build a field by evaluating `f(position, component)`.
    pub fn from_fn<F>(grid: GridSpec, components: usize, f: F) -> Result<Self>
    where
        F: Fn([f64; 3], usize) -> f64 + Sync + Send,
    {
        let len = grid.len();
        let data = exec::map_range(components * len, |i| f(grid.position(i % len), i / len));
        Self::new(grid, components, data)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.data[c * len..(c + 1) * len]
    }

    /// Pointwise Euclidean magnitude over components.
    pub fn magnitude(&self) -> Vec<f64> {
        let len = self.grid.len();
        exec::map_range(len, |i| {
            (0..self.components)
                .map(|c| self.data[c * len + i].powi(2))
                .sum::<f64>()
                .sqrt()
        })
    }

    pub fn max_abs(&self) -> f64 {
        exec::max(self.data.len(), |i| self.data[i].abs()).max(0.0)
    }

    /// Sum of all samples of one component times the cell volume.
    pub fn integral(&self, c: usize) -> f64 {
        let comp = self.component(c);
        exec::sum(comp.len(), |i| comp[i]) * self.grid.cell_volume()
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: self.grid,
            components: self.components,
            data: self.data.iter().map(|v| v * a).collect(),
        }
    }

    /// Circular shift by whole cells along each axis.
    pub fn shifted(&self, shift: [usize; 3]) -> Field {
        let g = self.grid;
        let len = g.len();
        let data = exec::map_range(self.data.len(), |i| {
            let c = g.coords(i % len);
            let mut s = [0; 3];
            for a in 0..g.dim() {
                s[a] = (c[a] + g.n() - shift[a] % g.n()) % g.n();
            }
            self.data[(i / len) * len + g.flat(s)]
        });
        Field {
            grid: g,
            components: self.components,
            data,
        }
    }
}

/// Fourier coefficients of a real field, laid out like [`Field`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    components: usize,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, components: usize, data: Vec<Complex64>) -> Result<Self> {
        if components == 0 || data.len() != components * grid.len() {
            return Err(invalid("spectral data length does not match grid and components"));
        }
        Ok(Self { grid, components, data })
    }

    pub fn zeros(grid: GridSpec, components: usize) -> Self {
        Self {
            grid,
            components,
            data: vec![Complex64::new(0.0, 0.0); components * grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.data[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.data[c * len..(c + 1) * len]
    }

    /// Coefficient of component `c` at signed mode index `k`.
    pub fn mode(&self, c: usize, k: [i64; 3]) -> Complex64 {
        let n = self.grid.n() as i64;
        let mut idx = [0usize; 3];
        for a in 0..self.grid.dim() {
            idx[a] = k[a].rem_euclid(n) as usize;
        }
        self.data[c * self.grid.len() + self.grid.flat(idx)]
    }

    pub fn set_mode(&mut self, c: usize, k: [i64; 3], v: Complex64) {
        let n = self.grid.n() as i64;
        let mut idx = [0usize; 3];
        for a in 0..self.grid.dim() {
            idx[a] = k[a].rem_euclid(n) as usize;
        }
        let len = self.grid.len();
        let f = self.grid.flat(idx);
        self.data[c * len + f] = v;
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        exec::max(self.data.len(), |i| self.data[i].norm()).max(0.0)
    }

    /// Parseval energy `L^d·Σ|F|²`, equal to `Σ|f|²·dV`.
    pub fn energy(&self) -> f64 {
        exec::sum(self.data.len(), |i| self.data[i].norm_sqr()) * self.grid.volume()
    }

    /// Multiply every coefficient of every component by `m(flat)`.
    pub fn apply_multiplier<F>(&mut self, m: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let len = self.grid.len();
        exec::for_each_mut(&mut self.data, |i, v| *v *= m(i % len));
    }

    pub fn scale(&mut self, a: f64) {
        exec::for_each_mut(&mut self.data, |_, v| *v *= a);
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("spectral fields live on different grids".into()));
        }
        if self.components != other.components {
            return Err(Error::Components {
                expected: self.components,
                found: other.components,
            });
        }
        Ok(())
    }

    /// `self += a·other`.
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        let o = &other.data;
        exec::for_each_mut(&mut self.data, |i, v| *v += o[i] * a);
        Ok(())
    }

    /// Max modulus of `self − other`.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(exec::max(self.data.len(), |i| (self.data[i] - other.data[i]).norm()).max(0.0))
    }

    /// Largest `|F(−ξ) − conj F(ξ)|` relative to the largest modulus.
    pub fn hermitian_deviation(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let len = self.grid.len();
        let g = self.grid;
        exec::max(self.data.len(), |i| {
            let c = i / len;
            let j = g.negated(i % len);
            (self.data[c * len + j] - self.data[i].conj()).norm()
        }) / scale
    }
}

/// Forward transform with the `1/N^d` factor.
pub fn forward_transform(f: &Field) -> Result<SpectralField> {
    if let Some(index) = f.data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let g = f.grid;
    let len = g.len();
    let scale = 1.0 / len as f64;
    let mut data: Vec<Complex64> = f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for c in 0..f.components {
        fft::fft_nd(&mut data[c * len..(c + 1) * len], g.n(), g.dim(), false);
    }
    exec::for_each_mut(&mut data, |_, v| *v *= scale);
    Ok(SpectralField {
        grid: g,
        components: f.components,
        data,
    })
}

/// Inverse transform; rejects input that is not Hermitian to `1e-12`.
pub fn inverse_transform(spec: &SpectralField) -> Result<Field> {
    let dev = spec.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            deviation: dev,
            tolerance: HERMITIAN_TOL,
        });
    }
    Ok(inverse_unchecked(spec))
}

/// Inverse transform that skips the symmetry check, for internal use on
/// coefficients produced by symmetry-preserving operations.
pub fn inverse_unchecked(spec: &SpectralField) -> Field {
    let g = spec.grid;
    let len = g.len();
    let mut data = spec.data.clone();
    for c in 0..spec.components {
        fft::fft_nd(&mut data[c * len..(c + 1) * len], g.n(), g.dim(), true);
    }
    Field {
        grid: g,
        components: spec.components,
        data: data.into_iter().map(|v| v.re).collect(),
    }
}

/// Spectral divergence `Σ_j iξ_j F_j`.
pub fn divergence_spectral(spec: &SpectralField) -> Result<SpectralField> {
    let g = spec.grid;
    if spec.components != g.dim() {
        return Err(Error::Components {
            expected: g.dim(),
            found: spec.components,
        });
    }
    let len = g.len();
    let data = exec::map_range(len, |i| {
        let xi = g.odd_wavevector(i);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, x) in xi.iter().enumerate().take(g.dim()) {
            acc += Complex64::new(0.0, *x) * spec.data[j * len + i];
        }
        acc
    });
    Ok(SpectralField {
        grid: g,
        components: 1,
        data,
    })
}

/// Spectral gradient of a scalar, `iξ F`.
pub fn gradient_spectral(spec: &SpectralField) -> Result<SpectralField> {
    let g = spec.grid;
    if spec.components != 1 {
        return Err(Error::Components {
            expected: 1,
            found: spec.components,
        });
    }
    let len = g.len();
    let d = g.dim();
    let data = exec::map_range(d * len, |i| {
        let (j, f) = (i / len, i % len);
        Complex64::new(0.0, g.odd_wavevector(f)[j]) * spec.data[f]
    });
    Ok(SpectralField {
        grid: g,
        components: d,
        data,
    })
}

/// Spectral curl `iξ × F` of a 3D vector field.
pub fn curl_spectral(spec: &SpectralField) -> Result<SpectralField> {
    let g = spec.grid;
    if g.dim() != 3 || spec.components != 3 {
        return Err(invalid("curl needs a three-component field in three dimensions"));
    }
    let len = g.len();
    let data = exec::map_range(3 * len, |i| {
        let (j, f) = (i / len, i % len);
        let xi = g.odd_wavevector(f);
        let (a, b) = ((j + 1) % 3, (j + 2) % 3);
        let ia = Complex64::new(0.0, xi[a]);
        let ib = Complex64::new(0.0, xi[b]);
        ia * spec.data[b * len + f] - ib * spec.data[a * len + f]
    });
    Ok(SpectralField {
        grid: g,
        components: 3,
        data,
    })
}

/// True when every `|k_j| ≤ N/3`.
pub fn within_cutoff(grid: &GridSpec, flat: usize) -> bool {
    let cut = grid.cutoff() as i64;
    grid.signed_index(flat)[..grid.dim()].iter().all(|k| k.abs() <= cut)
}

/// 2/3-rule truncation.
pub fn dealias(spec: &SpectralField) -> SpectralField {
    let mut out = spec.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(spec: &mut SpectralField) {
    let g = spec.grid;
    spec.apply_multiplier(|f| if within_cutoff(&g, f) { 1.0 } else { 0.0 });
}

/// Analytic and random test fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Preset {
    TaylorGreen2d,
    AbcBeltrami3d,
    RandomDivfree,
    GradientField,
    /// Unit-mass bump centred in the box; radius defaults to `L/16`.
    Bump {
        #[serde(default)]
        radius: Option<f64>,
    },
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "taylor_green_2d" => Ok(Preset::TaylorGreen2d),
            "abc_beltrami_3d" => Ok(Preset::AbcBeltrami3d),
            "random_divfree" => Ok(Preset::RandomDivfree),
            "gradient_field" => Ok(Preset::GradientField),
            "bump" => Ok(Preset::Bump { radius: None }),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

impl Preset {
    pub fn id(&self) -> &'static str {
        match self {
            Preset::TaylorGreen2d => "taylor_green_2d",
            Preset::AbcBeltrami3d => "abc_beltrami_3d",
            Preset::RandomDivfree => "random_divfree",
            Preset::GradientField => "gradient_field",
            Preset::Bump { .. } => "bump",
        }
    }
}

/// Build a preset by name.
pub fn make_preset(name: &str, grid: GridSpec, amplitude: f64, seed: u64) -> Result<Field> {
    build_preset(&name.parse()?, grid, amplitude, seed)
}

pub fn build_preset(preset: &Preset, grid: GridSpec, amplitude: f64, seed: u64) -> Result<Field> {
    if !amplitude.is_finite() {
        return Err(invalid("amplitude must be finite"));
    }
    let k0 = grid.k0();
    let d = grid.dim();
    match preset {
        Preset::TaylorGreen2d => {
            if d < 2 {
                return Err(invalid("taylor_green_2d needs d >= 2"));
            }
            Field::from_fn(grid, d, |x, c| {
                let (a, b) = (k0 * x[0], k0 * x[1]);
                match c {
                    0 => amplitude * a.sin() * b.cos(),
                    1 => -amplitude * a.cos() * b.sin(),
                    _ => 0.0,
                }
            })
        }
        Preset::AbcBeltrami3d => {
            if d != 3 {
                return Err(invalid("abc_beltrami_3d needs d = 3"));
            }
            Field::from_fn(grid, 3, |x, c| {
                let y = [k0 * x[0], k0 * x[1], k0 * x[2]];
                amplitude
                    * match c {
                        0 => y[2].sin() + y[1].cos(),
                        1 => y[0].sin() + y[2].cos(),
                        _ => y[1].sin() + y[0].cos(),
                    }
            })
        }
        Preset::GradientField => Field::from_fn(grid, d, |x, c| {
            let y: Vec<f64> = (0..d).map(|a| k0 * x[a]).collect();
            let others: f64 = (0..d).filter(|&a| a != c).map(|a| y[a].cos()).product();
            amplitude * k0 * (y[c].cos() - y[c].sin() * others)
        }),
        Preset::Bump { radius } => {
            let r = radius.unwrap_or(grid.length() / 16.0);
            if !(r.is_finite() && r > 0.0) {
                return Err(invalid("bump radius must be positive"));
            }
            let centre = grid.length() / 2.0;
            let raw = Field::from_fn(grid, 1, |x, _| {
                let s2: f64 = (0..d).map(|a| (x[a] - centre).powi(2)).sum::<f64>() / (r * r);
                if s2 < 1.0 {
                    (1.0 - s2).powi(3)
                } else {
                    0.0
                }
            })?;
            let mass = raw.integral(0);
            Ok(raw.scaled(amplitude / mass))
        }
        Preset::RandomDivfree => random_divfree(grid, amplitude, seed),
    }
}

/// Band limit of the random preset: `|k_j| ≤ max(2, N/8)`.
pub fn random_band(grid: &GridSpec) -> usize {
    (grid.n() / 8).max(2)
}

fn random_divfree(grid: GridSpec, amplitude: f64, seed: u64) -> Result<Field> {
    let d = grid.dim();
    if d < 2 {
        return Err(invalid("random_divfree needs d >= 2"));
    }
    let mut rng = SeedStream::new(seed);
    let raw: Vec<f64> = (0..d * grid.len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mut spec = forward_transform(&Field::new(grid, d, raw)?)?;
    let band = random_band(&grid) as i64;
    spec.apply_multiplier(|f| {
        let k = grid.signed_index(f);
        let inside = k[..d].iter().all(|x| x.abs() <= band);
        let mean = k[..d].iter().all(|&x| x == 0);
        if inside && !mean {
            1.0
        } else {
            0.0
        }
    });
    let spec = operators::leray_project(&spec)?;
    let field = inverse_unchecked(&spec);
    let peak = field.max_abs();
    if peak == 0.0 {
        return Ok(field);
    }
    Ok(field.scaled(amplitude / peak))
}
