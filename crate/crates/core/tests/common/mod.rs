//! Shared helpers for the integration suites: a deterministic RNG and
//! implementation-independent oracles.
#![allow(dead_code)] // each suite uses its own subset

use num_complex::Complex;
use spinsim_core::linalg::HermitianMatrix;
use spinsim_core::rates::GeneratorMatrix;

/// SplitMix64: tiny, seedable, bit-stable across platforms.
pub struct Rng(pub u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = (1.0 - self.uniform()).max(f64::MIN_POSITIVE);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Brute-force eigenvalue oracle for 3x3 Hermitian matrices: real roots of
/// the characteristic polynomial via the trigonometric cubic formula.
/// Independent of the Jacobi path used by the library.
pub fn char_poly_eigenvalues(h: &HermitianMatrix<f64>) -> [f64; 3] {
    let g = |i: usize, j: usize| h.get(i, j);
    let t1 = g(0, 0).re + g(1, 1).re + g(2, 2).re;
    let t2 = g(0, 0).re * g(1, 1).re + g(0, 0).re * g(2, 2).re + g(1, 1).re * g(2, 2).re
        - g(0, 1).norm_sqr()
        - g(0, 2).norm_sqr()
        - g(1, 2).norm_sqr();
    let det: Complex<f64> = g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
        - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
        + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0));
    let det = det.re;
    let a = -t1;
    let b = t2;
    let c = -det;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    if p.abs() < 1e-9 {
        let r = -a / 3.0;
        return [r, r, r];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        *o = m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - a / 3.0;
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

/// Long-time integration oracle: applies the one-step RK4 propagator
/// A = I + hM + (hM)^2/2 + (hM)^3/6 + (hM)^4/24 a power-of-two number of
/// times via repeated squaring. Equivalent to fixed-step RK4 but reaches
/// t = 1e4 / min-rate in ~30 matrix squarings, and shares no code with the
/// linear-solve steady state it checks.
pub fn long_time_populations(m: &GeneratorMatrix<f64>, p0: &[f64], t: f64) -> Vec<f64> {
    let n = m.dim();
    let mut max_diag: f64 = 0.0;
    for j in 0..n {
        max_diag = max_diag.max(m.get(j, j).abs());
    }
    if max_diag == 0.0 || t == 0.0 {
        return p0.to_vec();
    }
    let steps_needed = (t * max_diag / 0.1).ceil();
    let mut pow = 0u32;
    while (1u64 << pow) < steps_needed as u64 {
        pow += 1;
    }
    let h = t / (1u64 << pow) as f64;

    let mat_mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    c[i * n + j] += aik * b[k * n + j];
                }
            }
        }
        c
    };

    let mut hm = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            hm[i * n + j] = h * m.get(i, j);
        }
    }
    // RK4 one-step propagator as a matrix polynomial in hM.
    let hm2 = mat_mul(&hm, &hm);
    let hm3 = mat_mul(&hm2, &hm);
    let hm4 = mat_mul(&hm3, &hm);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        a[i * n + i] = 1.0;
    }
    for k in 0..n * n {
        a[k] += hm[k] + hm2[k] / 2.0 + hm3[k] / 6.0 + hm4[k] / 24.0;
    }
    for _ in 0..pow {
        a = mat_mul(&a, &a);
    }
    let mut out = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            out[i] += a[i * n + j] * p0[j];
        }
    }
    out
}
