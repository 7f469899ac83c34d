//! Critical exponents, the decay parameter δ, stationary points of the
//! autonomous limit systems and their linear classification.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

/// Exact-equality tolerance for the boundary cases l = -n and l = -2k.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Dimension, Hessian order, exponent and eigenvalue parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub n: u32,
    pub k: u32,
    pub q: f64,
    pub lambda: f64,
}

impl ProblemParams {
    pub fn new(n: u32, k: u32, q: f64, lambda: f64) -> Result<Self> {
        if k < 1 || n <= 2 * k {
            return Err(Error::domain(format!("need n > 2k >= 2, got n={n}, k={k}")));
        }
        if !(q > k as f64) || !q.is_finite() {
            return Err(Error::domain(format!("need q > k, got q={q}, k={k}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("need lambda > 0, got {lambda}")));
        }
        Ok(Self { n, k, q, lambda })
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(self.n, self.k, self.q, lambda)
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn kf(&self) -> f64 {
        self.k as f64
    }

    /// `(n-2k)/k`, the y-coordinate of P2.
    pub fn p2_y(&self) -> f64 {
        (self.nf() - 2.0 * self.kf()) / self.kf()
    }
}

fn check_nk(k: u32, n: u32) -> Result<()> {
    if k < 1 || n <= 2 * k {
        return Err(Error::domain(format!("need n > 2k >= 2, got n={n}, k={k}")));
    }
    Ok(())
}

/// Tso-type exponent `((n+2)k + σ(k+1))/(n-2k)`.
pub fn q_star(k: u32, sigma: f64, n: u32) -> Result<f64> {
    check_nk(k, n)?;
    let (k, n) = (k as f64, n as f64);
    Ok(((n + 2.0) * k + sigma * (k + 1.0)) / (n - 2.0 * k))
}

/// Joseph-Lundgren-type exponent; `+inf` when `n <= 2k + 8 + 4σ/k`.
pub fn q_jl(k: u32, sigma: f64, n: u32) -> Result<f64> {
    check_nk(k, n)?;
    let (k, n) = (k as f64, n as f64);
    if n <= 2.0 * k + 8.0 + 4.0 * sigma / k {
        return Ok(f64::INFINITY);
    }
    let rad = k * (2.0 * k + sigma) * ((k + 1.0) * n - k * (2.0 - sigma));
    if rad < 0.0 {
        return Err(Error::numeric(format!("negative radicand {rad} in q_JL")));
    }
    let s = 2.0 * rad.sqrt();
    let num = k * (k + 1.0) * n - k * k * (2.0 - sigma) + 2.0 * k + sigma - s;
    let den = k * (k + 1.0) * n - 2.0 * k * k * (k + 3.0) - 2.0 * k * sigma - s;
    Ok(k * num / den)
}

/// δ = -(2k + l_∞)/k.
pub fn delta_param(k: u32, l_inf: f64) -> f64 {
    // + 0.0 turns -0 into 0
    -(2.0 * k as f64 + l_inf) / k as f64 + 0.0
}

/// Roots μ1 < μ2 of `μ² - 2(2q/k - 1)μ + 1 = 0`.
pub fn mu12(k: u32, q: f64) -> (f64, f64) {
    let s = q / k as f64;
    let d = 2.0 * (s * s - s).max(0.0).sqrt();
    let c = 2.0 * s - 1.0;
    (c - d, c + d)
}

/// Node condition for P4 at infinity: l_∞ below the μ2 threshold or above the μ1 one.
pub fn p4_node_condition(p: &ProblemParams, l_inf: f64) -> bool {
    let (m1, m2) = mu12(p.k, p.q);
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let lo = (q * (n - 2.0 * k) - k * (n + 2.0 * m2)) / (k + m2);
    let hi = (q * (n - 2.0 * k) - k * (n + 2.0 * m1)) / (k + m1);
    l_inf < lo || l_inf > hi
}

/// γ = (q/k)(n-2k) - (n + l_∞), the rate at which x decays along a P2 orbit.
pub fn p2_rate(p: &ProblemParams, l_inf: f64) -> Result<f64> {
    let g = p.q / p.kf() * (p.nf() - 2.0 * p.kf()) - (p.nf() + l_inf);
    if g <= 0.0 {
        return Err(Error::Assumption(format!("gamma = {g} is not positive")));
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLabel {
    P1,
    P2,
    P3,
    P4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Saddle,
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    Center,
    SaddleNode,
    DegenerateNode,
}

impl PointKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointKind::Saddle => "saddle",
            PointKind::StableNode => "stable node",
            PointKind::UnstableNode => "unstable node",
            PointKind::StableFocus => "stable focus",
            PointKind::UnstableFocus => "unstable focus",
            PointKind::Center => "center",
            PointKind::SaddleNode => "saddle-node",
            PointKind::DegenerateNode => "degenerate node",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPoint {
    pub label: PointLabel,
    pub x: f64,
    pub y: f64,
    pub nu: f64,
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
    /// Unit eigenvectors (columns paired with `eigenvalues`) when both are real.
    pub eigenvectors: Option<[[f64; 2]; 2]>,
    pub kind: PointKind,
}

/// Right-hand side of the autonomous system with constant ν.
pub fn lv_autonomous(p: &ProblemParams, nu: f64, x: f64, y: f64) -> (f64, f64) {
    let k = p.kf();
    (x * (nu - x - p.q * y), y * (-(p.nf() - 2.0 * k) / k + x / k + y))
}

/// Jacobian of the autonomous system at (a, b).
pub fn jacobian(p: &ProblemParams, nu: f64, a: f64, b: f64) -> [[f64; 2]; 2] {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    [[nu - 2.0 * a - q * b, -q * a], [b / k, a / k + 2.0 * b - (n - 2.0 * k) / k]]
}

/// Closed-form eigenvalues of a 2x2 matrix, real ones ordered ascending.
pub fn eigenvalues(m: &[[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = if half >= 0.0 { half + s } else { half - s };
        let small = if big != 0.0 { det / big } else { 0.0 };
        let (lo, hi) = if big < small { (big, small) } else { (small, big) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(half, -s), Complex64::new(half, s)]
    }
}

fn eigenvector(m: &[[f64; 2]; 2], mu: f64, fallback: [f64; 2]) -> [f64; 2] {
    let v1 = [m[0][1], mu - m[0][0]];
    let v2 = [mu - m[1][1], m[1][0]];
    let n1 = v1[0].hypot(v1[1]);
    let n2 = v2[0].hypot(v2[1]);
    let scale = 1e-14 * (1.0 + m[0][0].abs() + m[1][1].abs() + m[0][1].abs() + m[1][0].abs());
    let (v, nv) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    if nv <= scale {
        return fallback;
    }
    [v[0] / nv, v[1] / nv]
}

fn kind_from_matrix(m: &[[f64; 2]; 2]) -> PointKind {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = 1.0 + m[0][0].abs().max(m[1][1].abs()).max(m[0][1].abs()).max(m[1][0].abs());
    let eps = 1e-12 * scale * scale;
    if det.abs() <= eps {
        return PointKind::SaddleNode;
    }
    if det < 0.0 {
        return PointKind::Saddle;
    }
    let disc = 0.25 * tr * tr - det;
    if disc.abs() <= eps {
        return PointKind::DegenerateNode;
    }
    if disc > 0.0 {
        if tr < 0.0 {
            PointKind::StableNode
        } else {
            PointKind::UnstableNode
        }
    } else if tr.abs() <= 1e-12 * scale {
        PointKind::Center
    } else if tr < 0.0 {
        PointKind::StableFocus
    } else {
        PointKind::UnstableFocus
    }
}

/// Coordinates of P4 for the limit value `l` of R.
pub fn p4_coords(p: &ProblemParams, l: f64) -> (f64, f64) {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    ((q * (n - 2.0 * k) - k * (n + l)) / (q - k), (2.0 * k + l) / (q - k))
}

/// The four stationary points of the autonomous system with ν = n + l.
pub fn stationary_points(p: &ProblemParams, l: f64) -> Vec<StationaryPoint> {
    let (n, k) = (p.nf(), p.kf());
    let nu = n + l;
    let (x4, y4) = p4_coords(p, l);
    let at_minus_n = (l + n).abs() <= BOUNDARY_TOL;
    let at_minus_2k = (l + 2.0 * k).abs() <= BOUNDARY_TOL;
    let pts = [
        (PointLabel::P1, 0.0, 0.0),
        (PointLabel::P2, 0.0, (n - 2.0 * k) / k),
        (PointLabel::P3, nu, 0.0),
        (PointLabel::P4, x4, y4),
    ];
    pts.iter()
        .map(|&(label, x, y)| {
            let jac = jacobian(p, nu, x, y);
            let eig = eigenvalues(&jac);
            let forced = match label {
                PointLabel::P1 => at_minus_n,
                PointLabel::P3 => at_minus_n || at_minus_2k,
                PointLabel::P4 => at_minus_2k,
                PointLabel::P2 => false,
            };
            let kind = match (forced, kind_from_matrix(&jac)) {
                (true, _) => PointKind::SaddleNode,
                // only P4 is reported as degenerate; elsewhere a repeated root keeps the node label
                (false, PointKind::DegenerateNode) if label != PointLabel::P4 => {
                    if jac[0][0] + jac[1][1] < 0.0 {
                        PointKind::StableNode
                    } else {
                        PointKind::UnstableNode
                    }
                }
                (false, kind) => kind,
            };
            let eigenvectors = if eig[0].im == 0.0 {
                let v0 = eigenvector(&jac, eig[0].re, [1.0, 0.0]);
                let v1 = eigenvector(&jac, eig[1].re, [0.0, 1.0]);
                Some([v0, v1])
            } else {
                None
            };
            StationaryPoint { label, x, y, nu, jacobian: jac, eigenvalues: eig, eigenvectors, kind }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(n: u32, k: u32, q: f64) -> ProblemParams {
        ProblemParams::new(n, k, q, 1.0).unwrap()
    }

    #[test]
    fn tso_values() {
        assert_eq!(q_star(1, 0.0, 3).unwrap(), 5.0);
        assert_eq!(q_star(2, 2.0, 7).unwrap(), 8.0);
        for n in 5..12 {
            assert!((q_star(2, -4.0, n).unwrap() - 2.0).abs() < 1e-14);
        }
        assert!(q_star(2, 0.0, 4).is_err());
    }

    #[test]
    fn jl_values() {
        let v = q_jl(1, 0.0, 11).unwrap();
        let s10 = 10f64.sqrt();
        assert!((v - (11.0 - 2.0 * s10) / (7.0 - 2.0 * s10)).abs() < 1e-12);
        assert!((v - 6.92198).abs() < 1e-4);
        // classical Laplacian form 1 + 4/(n - 4 - 2 sqrt(n-1))
        for n in 11..30u32 {
            let nf = n as f64;
            let classical = 1.0 + 4.0 / (nf - 4.0 - 2.0 * (nf - 1.0).sqrt());
            assert!((q_jl(1, 0.0, n).unwrap() - classical).abs() < 1e-10, "n={n}");
        }
        assert!(q_jl(1, 0.0, 10).unwrap().is_infinite());
        assert!(q_jl(2, 0.0, 12).unwrap().is_infinite());
    }

    #[test]
    fn jl_exceeds_tso() {
        for n in 11..=20u32 {
            for i in 0..=8 {
                let s = 0.5 * i as f64;
                let jl = q_jl(1, s, n).unwrap();
                if jl.is_finite() {
                    assert!(jl > q_star(1, s, n).unwrap(), "n={n} s={s}");
                }
                assert!(q_star(1, s + 0.1, n).unwrap() > q_star(1, s, n).unwrap());
            }
        }
    }

    #[test]
    fn delta_and_gamma() {
        assert_eq!(delta_param(1, -2.0), 0.0);
        assert_eq!(delta_param(1, -3.0), 1.0);
        assert_eq!(delta_param(2, 1.0), -2.5);
        assert_eq!(p2_rate(&pp(3, 1, 3.0), -2.0).unwrap(), 2.0);
        assert_eq!(p2_rate(&pp(5, 1, 3.0), -3.0).unwrap(), 7.0);
        assert_eq!(p2_rate(&pp(3, 1, 5.0), 0.0).unwrap(), 2.0);
        assert!(p2_rate(&pp(3, 1, 2.0), 0.0).is_err());
    }

    #[test]
    fn mu_values() {
        let (a, b) = mu12(1, 2.0);
        assert!((a - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-14);
        assert!((b - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-14);
        let (a, b) = mu12(1, 6.0);
        assert!((a - (11.0 - 2.0 * 30f64.sqrt())).abs() < 1e-12);
        assert!((b - (11.0 + 2.0 * 30f64.sqrt())).abs() < 1e-12);
        let (a, b) = mu12(3, 3.0 * (1.0 + 1e-12));
        assert!((a - 1.0).abs() < 1e-5 && (b - 1.0).abs() < 1e-5);
    }

    #[test]
    fn canonical_p4_focus() {
        let pts = stationary_points(&pp(3, 1, 6.0), 0.0);
        let p4 = &pts[3];
        assert!((p4.x - 0.6).abs() < 1e-15 && (p4.y - 0.4).abs() < 1e-15);
        assert_eq!(p4.kind, PointKind::StableFocus);
        assert!((p4.eigenvalues[0].re + 0.1).abs() < 1e-12);
        let m = [[-0.6, -3.6], [0.4, 0.4]];
        for (i, row) in p4.jacobian.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((v - m[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn saddle_node_and_p4() {
        let pts = stationary_points(&pp(3, 1, 3.0), -2.0);
        assert!((pts[2].x - 1.0).abs() < 1e-15 && pts[2].y == 0.0);
        assert!((pts[3].x - 1.0).abs() < 1e-15 && pts[3].y.abs() < 1e-15);
        assert_eq!(pts[2].kind, PointKind::SaddleNode);
        assert_eq!(pts[3].kind, PointKind::SaddleNode);
        let p4 = &stationary_points(&pp(5, 1, 5.0), 2.0)[3];
        assert_eq!((p4.x, p4.y), (2.0, 1.0));
    }

    #[test]
    fn stationarity_and_characteristic_roots() {
        for &(n, k, q) in &[(3, 1, 6.0), (5, 2, 3.0), (7, 2, 8.0), (12, 1, 3.0)] {
            let p = pp(n, k, q);
            for &l in &[-9.0, -3.5, -2.0, 0.0, 1.7] {
                for s in stationary_points(&p, l) {
                    let (dx, dy) = lv_autonomous(&p, s.nu, s.x, s.y);
                    assert!(dx.abs() < 1e-12 && dy.abs() < 1e-12);
                    let m = s.jacobian;
                    let tr = m[0][0] + m[1][1];
                    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                    for e in s.eigenvalues {
                        let r = e * e - e * tr + det;
                        assert!(r.norm() < 1e-10);
                    }
                    if let Some(v) = s.eigenvectors {
                        for (i, e) in s.eigenvalues.iter().enumerate() {
                            let av = [m[0][0] * v[i][0] + m[0][1] * v[i][1], m[1][0] * v[i][0] + m[1][1] * v[i][1]];
                            assert!((av[0] - e.re * v[i][0]).abs() < 1e-10);
                            assert!((av[1] - e.re * v[i][1]).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn table_scan() {
        use PointKind::*;
        let p = pp(5, 1, 4.0);
        let n = 5.0;
        let cols = [-n - 1.0, -n, 0.5 * (-n - 2.0), -2.0, -1.0];
        let kinds: Vec<[PointKind; 4]> = cols
            .iter()
            .map(|&l| {
                let s = stationary_points(&p, l);
                [s[0].kind, s[1].kind, s[2].kind, s[3].kind]
            })
            .collect();
        assert_eq!(kinds[0], [StableNode, Saddle, Saddle, Saddle]);
        assert_eq!(kinds[1][0], SaddleNode);
        assert_eq!(kinds[1][2], SaddleNode);
        assert_eq!(kinds[2][2], StableNode);
        assert_eq!(kinds[2][3], Saddle);
        assert_eq!(kinds[3][2], SaddleNode);
        assert_eq!(kinds[3][3], SaddleNode);
        assert_eq!(kinds[4][0], Saddle);
        assert_eq!(kinds[4][1], Saddle);
        assert_eq!(kinds[4][2], Saddle);
        assert!(matches!(kinds[4][3], StableNode | StableFocus | DegenerateNode));
    }

    #[test]
    fn node_condition_matches_discriminant() {
        let p = pp(12, 1, 3.0);
        for i in 0..40 {
            let l = -1.9 + 0.2 * i as f64;
            let s = &stationary_points(&p, l)[3];
            let node = matches!(s.kind, PointKind::StableNode | PointKind::UnstableNode);
            let focus = matches!(s.kind, PointKind::StableFocus | PointKind::UnstableFocus);
            if node {
                assert!(p4_node_condition(&p, l), "l={l}");
            }
            if focus {
                assert!(!p4_node_condition(&p, l), "l={l}");
            }
        }
    }

    #[test]
    fn p4_in_g_minus() {
        for &(n, k, q) in &[(3u32, 1u32, 6.0), (5, 1, 5.0), (7, 2, 9.0)] {
            let p = pp(n, k, q);
            let (nf, kf) = (n as f64, k as f64);
            for i in 1..20 {
                let l = -2.0 * kf + 0.3 * i as f64;
                let (x, y) = p4_coords(&p, l);
                if x <= 0.0 {
                    continue;
                }
                let g = x + (nf - 2.0 * kf) * (q + 1.0) / (kf + 1.0) * (kf / (nf - 2.0 * kf) * y - 1.0);
                assert!(g < 0.0, "n={n} k={k} q={q} l={l}");
            }
        }
    }
}
