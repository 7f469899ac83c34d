//! Multiplicity of solutions of the Dirichlet problem on the unit ball via
//! the curve a ↦ λ(a), intersection numbers between regular and singular
//! profiles, and the scaling F_a.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::exponents::ProblemParams;
use crate::solver::{solve_ivp_at, IntegratorConfig, RadialSolution};
use crate::transform::ProfileSample;
use crate::weights::WeightSpec;
use crate::{Error, Result};

/// Maximal number of bisections when refining a crossing.
pub const MAX_BISECTIONS: usize = 60;
/// Relative width in a at which a crossing counts as refined.
pub const ROOT_REL_WIDTH: f64 = 1e-6;

/// λ(a) = λ_ref (-w(1))^{q-k}, where w solves the initial value problem at
/// λ = λ_ref with w(0) = -a. Then (λ_ref/λ(a))^{1/(q-k)} w equals -1 at r = 1,
/// so u = 1 + that profile solves the Dirichlet problem with λ = λ(a).
pub fn lambda_of_a(p: &ProblemParams, wt: &WeightSpec, lambda_ref: f64, a: f64, cfg: &IntegratorConfig) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("a must be positive and finite, got {a}")));
    }
    let pr = p.with_lambda(lambda_ref)?;
    let sol = solve_ivp_at(&pr, wt, -a, &[1.0], cfg)?;
    if let Some(t) = &sol.truncated {
        return Err(Error::domain(format!(
            "chart error: the solution with w(0) = -{a} reaches zero at r = {} < 1",
            t.r
        )));
    }
    let last = sol.samples[sol.samples.len() - 1];
    if (last.r - 1.0).abs() > 1e-12 {
        return Err(Error::numeric("profile did not reach r = 1"));
    }
    Ok(lambda_ref * (-last.w).powf(p.q - p.kf()))
}

/// Log-spaced grid of `count` points on [a_min, a_max].
pub fn a_grid(a_min: f64, a_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(a_min > 0.0 && a_max > a_min) || !a_max.is_finite() {
        return Err(Error::domain(format!("need 0 < a_min < a_max, got [{a_min}, {a_max}]")));
    }
    if count < 16 {
        return Err(Error::domain(format!("a sweep needs at least 16 points, got {count}")));
    }
    let (l0, l1) = (a_min.ln(), a_max.ln());
    let mut g: Vec<f64> = (0..count).map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp()).collect();
    g[0] = a_min;
    g[count - 1] = a_max;
    Ok(g)
}

#[derive(Debug, Clone)]
pub struct BifurcationCurve {
    /// (a, λ(a)) with a strictly increasing.
    pub points: Vec<(f64, f64)>,
    pub lambda_tilde: f64,
    pub params: ProblemParams,
    pub weight: WeightSpec,
    pub grid: (f64, f64, usize),
    pub cfg: IntegratorConfig,
}

impl BifurcationCurve {
    /// Assemble a curve from values computed elsewhere (e.g. in parallel).
    pub fn from_points(
        points: Vec<(f64, f64)>,
        lambda_tilde: f64,
        params: ProblemParams,
        weight: WeightSpec,
        cfg: IntegratorConfig,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::input("empty bifurcation curve"));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::input("curve abscissae must be strictly increasing"));
        }
        if points.iter().any(|&(a, l)| !(a > 0.0 && l > 0.0)) {
            return Err(Error::input("curve points must be positive"));
        }
        let grid = (points[0].0, points[points.len() - 1].0, points.len());
        Ok(Self { points, lambda_tilde, params, weight, grid, cfg })
    }

    pub fn max_lambda(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// Relative gap |λ(a_max)/λ̃ - 1| at the right end of the grid.
    pub fn end_gap(&self) -> f64 {
        (self.points[self.points.len() - 1].1 / self.lambda_tilde - 1.0).abs()
    }
}

/// λ(a) on a log grid, with λ_ref = λ̃.
pub fn sweep(
    p: &ProblemParams,
    wt: &WeightSpec,
    lambda_tilde: f64,
    a_min: f64,
    a_max: f64,
    count: usize,
    cfg: &IntegratorConfig,
) -> Result<BifurcationCurve> {
    let grid = a_grid(a_min, a_max, count)?;
    let mut pts = Vec::with_capacity(count);
    for a in grid {
        pts.push((a, lambda_of_a(p, wt, lambda_tilde, a, cfg)?));
    }
    BifurcationCurve::from_points(pts, lambda_tilde, *p, wt.clone(), *cfg)
}

/// Values of a with λ(a) = `query`, one per sign change along the grid,
/// each refined by bisection in ln a.
pub fn solutions(curve: &BifurcationCurve, query: f64) -> Result<Vec<f64>> {
    if !(query > 0.0) || query > curve.max_lambda() {
        return Ok(Vec::new());
    }
    let mut roots = Vec::new();
    for w in curve.points.windows(2) {
        let (fa, fb) = (w[0].1 - query, w[1].1 - query);
        if fa == 0.0 {
            roots.push(w[0].0);
            continue;
        }
        if fa * fb >= 0.0 {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (w[0].0, w[1].0, fa);
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= ROOT_REL_WIDTH * lo {
                break;
            }
            let mid = (lo * hi).sqrt();
            let fm = lambda_of_a(&curve.params, &curve.weight, curve.lambda_tilde, mid, &curve.cfg)? - query;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push((lo * hi).sqrt());
    }
    let last = curve.points[curve.points.len() - 1];
    if last.1 == query {
        roots.push(last.0);
    }
    Ok(roots)
}

/// Number of solutions of the Dirichlet problem with λ = `query` seen on the curve.
pub fn count_solutions(curve: &BifurcationCurve, query: f64) -> Result<usize> {
    Ok(solutions(curve, query)?.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Intersections {
    pub count: usize,
    pub roots: Vec<f64>,
}

/// Zeros of w̃ - w on (r_lo, r_hi], counted as sign changes on the merged
/// sample grid and located by bisection on the interpolants.
pub fn intersection_count(
    singular: &RadialSolution,
    regular: &RadialSolution,
    interval: (f64, f64),
) -> Result<Intersections> {
    let (s0, s1) = singular.r_range();
    let (g0, g1) = regular.r_range();
    let lo = s0.max(g0).max(interval.0);
    let hi = s1.min(g1).min(interval.1);
    if !(hi > lo) {
        return Err(Error::input(format!(
            "profiles do not overlap on the interval: singular [{s0}, {s1}], regular [{g0}, {g1}], interval ({}, {}]",
            interval.0, interval.1
        )));
    }
    let mut grid: Vec<f64> =
        singular.samples.iter().chain(&regular.samples).map(|s| s.r).filter(|&r| r > lo && r < hi).collect();
    grid.push(lo);
    grid.push(hi);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let diff = |r: f64| -> f64 {
        match (singular.w_at(r), regular.w_at(r)) {
            (Some(a), Some(b)) => a - b,
            _ => f64::NAN,
        }
    };
    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &r in &grid {
        let d = diff(r);
        if !d.is_finite() {
            return Err(Error::numeric(format!("profile interpolation failed at r = {r}")));
        }
        if d == 0.0 {
            continue;
        }
        if let Some((rp, dp)) = prev {
            if (d > 0.0) != (dp > 0.0) {
                let (mut a, mut b, mut fa) = (rp, r, dp);
                for _ in 0..200 {
                    if b - a <= 1e-12 * a {
                        break;
                    }
                    let m = 0.5 * (a + b);
                    let fm = diff(m);
                    if fm == 0.0 {
                        a = m;
                        b = m;
                        break;
                    }
                    if (fm > 0.0) == (fa > 0.0) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        prev = Some((r, d));
    }
    Ok(Intersections { count: roots.len(), roots })
}

/// (F_a w)(r) = w(r / a^γ)/a with γ = (q-k)/(2k+l0).
pub fn rescale_fa(sol: &RadialSolution, a: f64, l0: f64) -> Result<RadialSolution> {
    if !(a > 0.0) {
        return Err(Error::domain(format!("a must be positive, got {a}")));
    }
    let (k, q) = (sol.params.kf(), sol.params.q);
    let gs = (q - k) / (2.0 * k + l0);
    let ag = a.powf(gs);
    let samples =
        sol.samples.iter().map(|s| ProfileSample { r: s.r * ag, w: s.w / a, wprime: s.wprime / (a * ag) }).collect();
    let mut out = RadialSolution::from_samples(samples, sol.w0 / a, sol.params, sol.weight.clone())?;
    out.stats = sol.stats;
    out.truncated = sol.truncated.clone();
    Ok(out)
}

/// sup |F - G| over the common samples of F in [lo, hi].
pub fn sup_distance(f: &RadialSolution, g: &RadialSolution, lo: f64, hi: f64) -> Result<f64> {
    let mut m: f64 = 0.0;
    let mut seen = 0;
    for s in f.samples.iter().filter(|s| s.r >= lo && s.r <= hi) {
        let v = g.w_at(s.r).ok_or_else(|| Error::input(format!("second profile does not cover r = {}", s.r)))?;
        m = m.max((s.w - v).abs());
        seen += 1;
    }
    if seen == 0 {
        return Err(Error::input("no samples in the comparison interval"));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_ivp;

    fn canonical() -> (ProblemParams, WeightSpec) {
        (ProblemParams::new(3, 1, 6.0, 0.24).unwrap(), WeightSpec::constant(1.0).unwrap())
    }

    #[test]
    fn small_a_limit() {
        let (p, wt) = canonical();
        let c = IntegratorConfig::default();
        let l1 = lambda_of_a(&p, &wt, 0.24, 1e-3, &c).unwrap();
        let l2 = lambda_of_a(&p, &wt, 0.24, 1e-4, &c).unwrap();
        assert!(l2 < l1 && l1 < 0.01);
        assert!(lambda_of_a(&p, &wt, 0.24, -1.0, &c).is_err());
    }

    #[test]
    fn fixture_at_one() {
        let (p, wt) = canonical();
        let l = lambda_of_a(&p, &wt, 0.24, 1.0, &IntegratorConfig::default()).unwrap();
        assert!((l / 0.198419 - 1.0).abs() < 1e-4, "{l}");
    }

    #[test]
    fn lambda_ref_invariance() {
        let (p, wt) = canonical();
        let c = IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
        // the chart at λ_ref = 1 is the one at 0.24 with amplitudes scaled by 0.24^{1/(q-k)}
        let a = lambda_of_a(&p, &wt, 0.24, 3.0, &c).unwrap();
        let b = lambda_of_a(&p, &wt, 1.0, 3.0 * 0.24f64.powf(0.2), &c).unwrap();
        assert!((a / b - 1.0).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn grid_and_counts() {
        assert!(a_grid(1.0, 10.0, 8).is_err());
        assert!(a_grid(0.0, 10.0, 20).is_err());
        let g = a_grid(1.0, 1e4, 41).unwrap();
        assert_eq!(g.len(), 41);
        assert!((g[10] - 10.0).abs() < 1e-12);
        let (p, wt) = canonical();
        let curve = BifurcationCurve::from_points(
            alloc::vec![(1.0, 0.1), (2.0, 0.3), (3.0, 0.2), (4.0, 0.25)],
            0.24,
            p,
            wt,
            IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(count_solutions(&curve, 0.5).unwrap(), 0);
        assert_eq!(count_solutions(&curve, 0.0).unwrap(), 0);
    }

    #[test]
    fn identical_profiles_do_not_intersect() {
        let (p, wt) = canonical();
        let s = solve_ivp(&p, &wt, -1.0, 10.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(intersection_count(&s, &s, (0.0, 10.0)).unwrap().count, 0);
        assert!(intersection_count(&s, &s, (20.0, 30.0)).is_err());
    }

    #[test]
    fn rescale_identity_and_power_invariance() {
        let (p, wt) = canonical();
        let s = solve_ivp(&p, &wt, -2.0, 10.0, &IntegratorConfig::default()).unwrap();
        let r = rescale_fa(&s, 1.0, 0.0).unwrap();
        for (a, b) in s.samples.iter().zip(&r.samples) {
            assert_eq!(a, b);
        }
        // w = -r^{-2/5} is invariant
        let pts: Vec<ProfileSample> = (1..50)
            .map(|i| {
                let r = 0.1 * i as f64;
                ProfileSample { r, w: -r.powf(-0.4), wprime: 0.4 * r.powf(-1.4) }
            })
            .collect();
        let sing = RadialSolution::from_samples(pts, f64::NEG_INFINITY, p, wt).unwrap();
        let f = rescale_fa(&sing, 7.0, 0.0).unwrap();
        for s in &f.samples {
            assert!((s.w + s.r.powf(-0.4)).abs() < 1e-13);
            assert!((s.wprime - 0.4 * s.r.powf(-1.4)).abs() < 1e-13);
        }
    }
}
