//! The change of variables between radial profiles and Lotka-Volterra orbits,
//! the non-autonomous vector field, and the integral-form residual of the
//! radial k-Hessian equation.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::exponents::ProblemParams;
use crate::quad;
use crate::weights::WeightSpec;
use crate::{Error, Result};

/// `binom(n,k)/n` as a reduced fraction.
pub fn c_nk_ratio(n: u32, k: u32) -> Result<(u64, u64)> {
    if k < 1 || k > n {
        return Err(Error::domain(format!("c_nk needs 1 <= k <= n, got n={n}, k={k}")));
    }
    let mut b: u128 = 1;
    for i in 0..k as u128 {
        b = b * (n as u128 - i) / (i + 1);
    }
    let d = n as u128;
    let g = gcd(b, d);
    Ok(((b / g) as u64, (d / g) as u64))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `c_{n,k} = binom(n,k)/n`.
pub fn c_nk(n: u32, k: u32) -> Result<f64> {
    let (a, b) = c_nk_ratio(n, k)?;
    Ok(a as f64 / b as f64)
}

/// A point of the phase plane together with its time t = ln r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// One sample (r, w(r), w'(r)) of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub r: f64,
    pub w: f64,
    pub wprime: f64,
}

/// The non-autonomous field with ν(t) = n + R(e^t).
#[derive(Debug, Clone)]
pub struct LVField {
    pub params: ProblemParams,
    pub weight: WeightSpec,
}

/// Beyond this |t| the limits l0 / l_∞ replace R(e^t).
pub const NU_GUARD: f64 = 700.0;

impl LVField {
    pub fn new(params: ProblemParams, weight: WeightSpec) -> Self {
        Self { params, weight }
    }

    pub fn nu(&self, t: f64) -> f64 {
        let n = self.params.nf();
        if t < -NU_GUARD {
            n + self.weight.l0()
        } else if t > NU_GUARD {
            n + self.weight.l_inf()
        } else {
            n + self.weight.big_r_s(t)
        }
    }

    pub fn nu_minus(&self) -> f64 {
        self.params.nf() + self.weight.l0()
    }

    pub fn nu_plus(&self) -> f64 {
        self.params.nf() + self.weight.l_inf()
    }
}

/// (x, y, t) from a sample with w < 0 and w' > 0.
pub fn forward(w: f64, wprime: f64, r: f64, p: &ProblemParams, wt: &WeightSpec) -> Result<PhasePoint> {
    if !(w < 0.0) || !(wprime > 0.0) || !(r > 0.0) {
        return Err(Error::domain(format!("transform needs w < 0, w' > 0, r > 0; got w={w}, w'={wprime}, r={r}")));
    }
    let k = p.kf();
    let t = r.ln();
    let ln_x = k * t - c_nk(p.n, p.k)?.ln() + p.lambda.ln() + wt.ln_rho_s(t) + p.q * (-w).ln() - k * wprime.ln();
    Ok(PhasePoint { t, x: ln_x.exp(), y: r * wprime / (-w) })
}

/// `ln(-w)` at a phase point; shared by [`inverse`] and the orbit-to-profile map.
pub(crate) fn ln_minus_w(pt: &PhasePoint, p: &ProblemParams, wt: &WeightSpec, cnk: f64) -> f64 {
    let k = p.kf();
    let ln_coef = p.lambda.ln() - cnk.ln() + 2.0 * k * pt.t + wt.ln_rho_s(pt.t);
    (pt.x.ln() + k * pt.y.ln() - ln_coef) / (p.q - k)
}

/// Recover (r, w, w') from a phase point with x, y > 0.
pub fn inverse(pt: &PhasePoint, p: &ProblemParams, wt: &WeightSpec) -> Result<ProfileSample> {
    if !(pt.x > 0.0) || !(pt.y > 0.0) {
        return Err(Error::domain(format!("inverse transform needs x > 0 and y > 0; got ({}, {})", pt.x, pt.y)));
    }
    let r = pt.t.exp();
    let w = -ln_minus_w(pt, p, wt, c_nk(p.n, p.k)?).exp();
    Ok(ProfileSample { r, w, wprime: -w * pt.y / r })
}

/// Right-hand side of the non-autonomous Lotka-Volterra system.
pub fn lv_rhs(t: f64, x: f64, y: f64, field: &LVField) -> (f64, f64) {
    let p = &field.params;
    let k = p.kf();
    (x * (field.nu(t) - x - p.q * y), y * (-(p.nf() - 2.0 * k) / k + x / k + y))
}

/// Pointwise relative residual of the integral identity
/// `c r^{n-k} (w')^k = λ ∫_0^r s^{n-1} ρ(s) (-w(s))^q ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub max: f64,
    pub l2: f64,
    pub values: Vec<f64>,
}

fn hermite(s0: f64, s1: f64, v0: f64, v1: f64, d0: f64, d1: f64, s: f64) -> f64 {
    let h = s1 - s0;
    let u = (s - s0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * v0 + (u3 - 2.0 * u2 + u) * h * d0 + (-2.0 * u3 + 3.0 * u2) * v1 + (u3 - u2) * h * d1
}

/// Residual of sampled data against the equation, in integral form.
pub fn hessian_residual(samples: &[ProfileSample], p: &ProblemParams, wt: &WeightSpec) -> Result<ResidualReport> {
    if samples.len() < 5 {
        return Err(Error::input("residual needs at least 5 samples"));
    }
    for (i, pair) in samples.windows(2).enumerate() {
        if !(pair[1].r > pair[0].r) {
            return Err(Error::input(format!("samples not strictly increasing in r at index {}", i + 1)));
        }
    }
    if !(samples[0].r > 0.0) {
        return Err(Error::input("samples need r > 0"));
    }
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let cnk = c_nk(p.n, p.k)?;
    let m = (wt.l0() + 2.0 * k) / k;
    let f0 = samples[0];
    // head of the integral, from the leading series of w at the origin
    let head = quad::integrate(
        |r: f64| {
            if r <= 0.0 {
                return 0.0;
            }
            let wv = f0.w + f0.wprime * f0.r / m * ((r / f0.r).powf(m) - 1.0);
            r.powf(n - 1.0) * wt.rho(r) * (-wv).powf(q)
        },
        0.0,
        f0.r,
        0.0,
        1e-14,
    )?;
    let mut acc = head;
    let mut values = Vec::with_capacity(samples.len());
    let integrand = |s: f64, wv: f64| ((n * s) + wt.ln_rho_s(s) + q * (-wv).ln()).exp();
    for i in 0..samples.len() {
        if i > 0 {
            let (a, b) = (samples[i - 1], samples[i]);
            let (s0, s1) = (a.r.ln(), b.r.ln());
            let (d0, d1) = (a.r * a.wprime, b.r * b.wprime);
            let piece = quad::integrate(|s| integrand(s, hermite(s0, s1, a.w, b.w, d0, d1, s)), s0, s1, 0.0, 1e-13)?;
            acc += piece;
        }
        let smp = samples[i];
        let lhs = cnk * smp.r.powf(n - k) * smp.wprime.powf(k);
        let rhs = p.lambda * acc;
        values.push((lhs - rhs).abs() / rhs.abs());
    }
    let max = values.iter().cloned().fold(0.0, f64::max);
    let l2 = (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt();
    Ok(ResidualReport { max, l2, values })
}
