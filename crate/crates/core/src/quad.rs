//! Adaptive Gauss-Kronrod quadrature and the special functions the radial
//! kernels need.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7/K15 pair on `[a, b]`: `(kronrod, |kronrod − gauss|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive bisection until the G7/K15 error estimate is below `abs_tol`.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, whole: (f64, f64), depth: u32, acc: &mut Sum) {
        let (v, e) = whole;
        if e <= tol || depth == 0 || (b - a) <= 1e-15 * (a.abs() + b.abs()) {
            acc.add(v);
            return;
        }
        let m = 0.5 * (a + b);
        let l = gk15(f, a, m);
        let r = gk15(f, m, b);
        rec(f, a, m, 0.5 * tol, l, depth - 1, acc);
        rec(f, m, b, 0.5 * tol, r, depth - 1, acc);
    }
    let mut acc = Sum::default();
    rec(f, a, b, abs_tol, gk15(f, a, b), 40, &mut acc);
    acc.value()
}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Spherical Bessel `j0(z) = sin z / z`.
pub fn sph_j0(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        let z2 = z * z;
        1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0))
    } else {
        z.sin() / z
    }
}

/// Spherical Bessel `j1(z) = (sin z − z cos z)/z²`.
pub fn sph_j1(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let z2 = z * z;
        z / 3.0 * (1.0 - z2 / 10.0 * (1.0 - z2 / 28.0 * (1.0 - z2 / 54.0 * (1.0 - z2 / 88.0))))
    } else {
        (z.sin() - z * z.cos()) / (z * z)
    }
}

const BESSEL_SWITCH: f64 = 25.0;

/// Cylindrical Bessel `J_n` for `n ∈ {0, 1}` and `z ≥ 0`.
pub fn bessel_j(n: u32, z: f64) -> f64 {
    debug_assert!(n <= 1);
    let z = z.abs();
    if z < BESSEL_SWITCH {
        // Periodic trapezoid on (1/2π)∫ cos(nθ − z sin θ) dθ.
        const M: usize = 96;
        let mut s = Sum::default();
        for i in 0..M {
            let th = std::f64::consts::TAU * i as f64 / M as f64;
            s.add((n as f64 * th - z * th.sin()).cos());
        }
        s.value() / M as f64
    } else {
        hankel(n, z)
    }
}

fn hankel(n: u32, z: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let x8 = 8.0 * z;
    for k in 1..30 {
        let kk = k as f64;
        term *= (mu - (2.0 * kk - 1.0).powi(2)) / (kk * x8);
        if k % 2 == 1 {
            q += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            p += if (k / 2) % 2 == 0 { term } else { -term };
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = z - (0.5 * n as f64 + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomials_exactly() {
        let (v, e) = gk15(&|x: f64| x.powi(20), 0.0, 1.0);
        assert!((v - 1.0 / 21.0).abs() < 1e-15);
        assert!(e < 1e-3);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-14);
        assert!((v - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn bessel_reference_values() {
        // Reference values from standard tables.
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_6),
            (1, 1.0, 0.440_050_585_744_933_55),
            (0, 10.0, -0.245_935_764_451_348_32),
            (1, 10.0, 0.043_472_746_168_861_6),
            (0, 30.0, -0.086_367_983_581_040_21),
            (1, 30.0, -0.118_751_062_616_622_91),
            (0, 24.9, 0.083_245_968_353_015_51),
            (0, 25.1, 0.108_275_671_499_949_46),
            (1, 24.9, -0.134_855_699_531_408_86),
            (1, 25.1, -0.114_634_784_134_422_57),
        ];
        for (n, z, want) in cases {
            let got = bessel_j(n, z);
            assert!((got - want).abs() < 1e-13, "J{n}({z}) = {got}, want {want}");
        }
    }

    #[test]
    fn spherical_bessel_branches_agree() {
        for z in [1e-3, 0.1] {
            let a = sph_j1(z * (1.0 - 1e-9));
            let b = (z.sin() - z * z.cos()) / (z * z);
            assert!((a - b).abs() < 1e-10);
            assert!((sph_j0(z) - z.sin() / z).abs() < 1e-15);
        }
    }
}
