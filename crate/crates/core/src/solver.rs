//! Regular solutions by shooting from the origin, direct Lotka-Volterra
//! orbits, the singular solution emanating from P4, and the monotone
//! iteration for maximal solutions on the unit ball.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::exponents::{p4_coords, ProblemParams};
use crate::integrate::{integrate, StepControl, Termination};
use crate::quad::CumulativeRule;
use crate::transform::{c_nk, forward, ln_minus_w, LVField, PhasePoint, ProfileSample};
use crate::weights::WeightSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound for the first radius of a shot; see [`start_radius`].
    pub r_start: f64,
    pub t_span: (f64, f64),
    pub max_steps: usize,
    pub samples_per_decade: usize,
    /// Output spacing in t for orbits.
    pub orbit_dt: f64,
    /// Orbits stop once x + y exceeds this.
    pub orbit_divergence: f64,
    /// Maximal-solution iterates are declared divergent below `-iterate_divergence`.
    pub iterate_divergence: f64,
    /// λ* bracket expansion stops at this multiple of the analytic lower bound.
    pub bracket_growth: f64,
    /// Default backward time T for the singular orbit.
    pub singular_t: f64,
    /// Final time of the singular orbit.
    pub singular_t_end: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            r_start: 1e-6,
            t_span: (-40.0, 40.0),
            max_steps: 2_000_000,
            samples_per_decade: 100,
            orbit_dt: 0.02,
            orbit_divergence: 1e12,
            iterate_divergence: 1e8,
            bracket_growth: 1_048_576.0,
            singular_t: 30.0,
            singular_t_end: 10.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.r_start > 0.0
            && self.t_span.0 < self.t_span.1
            && self.max_steps > 0
            && self.samples_per_decade > 0
            && self.orbit_dt > 0.0
            && self.orbit_divergence > 0.0
            && self.iterate_divergence > 0.0
            && self.bracket_growth > 1.0
            && self.singular_t > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain("integrator configuration has a nonpositive or inverted entry"))
        }
    }

    fn control(&self) -> StepControl {
        StepControl { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_steps: self.max_steps, h_max: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Why a profile stops before the requested radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub r: f64,
    pub reason: String,
}

/// Sampled radial profile (r, w, w') with r strictly increasing.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub samples: Vec<ProfileSample>,
    /// w(0); `-inf` for a singular profile.
    pub w0: f64,
    pub params: ProblemParams,
    pub weight: WeightSpec,
    pub stats: SolveStats,
    pub truncated: Option<Truncation>,
}

impl RadialSolution {
    pub fn from_samples(
        samples: Vec<ProfileSample>,
        w0: f64,
        params: ProblemParams,
        weight: WeightSpec,
    ) -> Result<Self> {
        if samples.windows(2).any(|p| !(p[1].r > p[0].r)) {
            return Err(Error::input("profile samples must be strictly increasing in r"));
        }
        Ok(Self { samples, w0, params, weight, stats: SolveStats::default(), truncated: None })
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.samples[0].r, self.samples[self.samples.len() - 1].r)
    }

    /// w(r) by cubic Hermite interpolation in ln r; `None` outside the samples.
    pub fn w_at(&self, r: f64) -> Option<f64> {
        let (lo, hi) = self.r_range();
        if !(r >= lo && r <= hi) {
            return None;
        }
        let i = self.samples.partition_point(|s| s.r <= r);
        if i >= self.samples.len() {
            return Some(self.samples[self.samples.len() - 1].w);
        }
        let (a, b) = (self.samples[i - 1], self.samples[i]);
        let (s0, s1) = (a.r.ln(), b.r.ln());
        let h = s1 - s0;
        let u = (r.ln() - s0) / h;
        let (u2, u3) = (u * u, u * u * u);
        Some(
            (2.0 * u3 - 3.0 * u2 + 1.0) * a.w
                + (u3 - 2.0 * u2 + u) * h * a.r * a.wprime
                + (-2.0 * u3 + 3.0 * u2) * b.w
                + (u3 - u2) * h * b.r * b.wprime,
        )
    }

    /// Forward transform of every sample.
    pub fn to_orbit(&self) -> Result<Orbit> {
        let mut samples = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            samples.push(forward(s.w, s.wprime, s.r, &self.params, &self.weight)?);
        }
        Ok(Orbit {
            samples,
            provenance: Provenance::FromProfile,
            params: self.params,
            weight: self.weight.clone(),
            end: if self.truncated.is_some() { OrbitEnd::Truncated } else { OrbitEnd::Completed },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FromProfile,
    DirectLv,
    SingularFromP4,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::FromProfile => "from-profile",
            Provenance::DirectLv => "direct-LV",
            Provenance::SingularFromP4 => "singular-from-P4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitEnd {
    Completed,
    /// x + y exceeded the divergence threshold at this t.
    Diverged(f64),
    /// The underlying profile stopped early.
    Truncated,
}

/// Sampled trajectory (t, x, y) with t strictly increasing.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub samples: Vec<PhasePoint>,
    pub provenance: Provenance,
    pub params: ProblemParams,
    pub weight: WeightSpec,
    pub end: OrbitEnd,
}

impl Orbit {
    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    /// Profile recovered through the inverse transform at parameter `lambda`.
    pub fn to_profile(&self, lambda: f64) -> Result<RadialSolution> {
        let p = self.params.with_lambda(lambda)?;
        let cnk = c_nk(p.n, p.k)?;
        let mut out = Vec::with_capacity(self.samples.len());
        for pt in &self.samples {
            if !(pt.x > 0.0 && pt.y > 0.0) {
                return Err(Error::domain("inverse transform needs an orbit inside the open quadrant"));
            }
            let r = pt.t.exp();
            let w = -ln_minus_w(pt, &p, &self.weight, cnk).exp();
            out.push(ProfileSample { r, w, wprime: -w * pt.y / r });
        }
        RadialSolution::from_samples(out, f64::NEG_INFINITY, p, self.weight.clone())
    }
}

/// Series coefficients of the regular solution at the origin:
/// w ≈ w0 + c1 r^m + c2 r^{2m}, with m = (l0+2k)/k.
#[derive(Debug, Clone, Copy)]
struct Series {
    m: f64,
    amp: f64,
    c1: f64,
    c2: f64,
    b: f64,
}

fn series(p: &ProblemParams, wt: &WeightSpec, w0: f64) -> Result<Series> {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let l0 = wt.l0();
    if !(n + l0 > 0.0) {
        return Err(Error::domain(format!("regular solutions need n + l0 > 0, got {}", n + l0)));
    }
    let m = (l0 + 2.0 * k) / k;
    let b = p.lambda / c_nk(p.n, p.k)? * wt.k0() * (-w0).powf(q);
    let amp = (b / (n + l0)).powf(1.0 / k);
    let c1 = amp / m;
    let c2 = -amp * amp * q * (n + l0) / (2.0 * m * m * k * (-w0) * (n + l0 + m));
    Ok(Series { m, amp, c1, c2, b })
}

/// First radius of a shot: the configured value, or smaller when the series
/// correction would exceed 1e-10 relative to |w0| there. The radius is then
/// lowered by decades (not below 1e-40) until ρ is a pure power to 1e-10,
/// since the series assumes ρ = K0 r^{l0}.
pub fn start_radius(p: &ProblemParams, wt: &WeightSpec, w0: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let s = series(p, wt, w0)?;
    let r_eps = (1e-10 * s.m * (-w0) / s.amp).powf(1.0 / s.m);
    let mut ls = cfg.r_start.min(r_eps).ln();
    let floor = -40.0 * core::f64::consts::LN_10;
    while ls > floor && !(wt.r_minus_l0_s(ls).abs() <= 1e-10) {
        ls -= core::f64::consts::LN_10;
    }
    Ok(ls.max(floor).exp())
}

fn log_grid(s0: f64, s1: f64, per_decade: usize) -> Vec<f64> {
    let count = (((s1 - s0) / core::f64::consts::LN_10) * per_decade as f64).ceil().max(1.0) as usize;
    let mut v: Vec<f64> = (0..=count).map(|i| s0 + (s1 - s0) * i as f64 / count as f64).collect();
    v[count] = s1;
    v
}

/// Regular solution with w(0) = w0 on a log grid up to `r_max`.
pub fn solve_ivp(
    p: &ProblemParams,
    wt: &WeightSpec,
    w0: f64,
    r_max: f64,
    cfg: &IntegratorConfig,
) -> Result<RadialSolution> {
    if !(r_max > 0.0) {
        return Err(Error::domain("r_max must be positive"));
    }
    let rs = start_radius(p, wt, w0_checked(w0)?, cfg)?;
    if r_max <= rs {
        return Err(Error::domain(format!("r_max = {r_max} is not beyond the start radius {rs}")));
    }
    let s = log_grid(rs.ln(), r_max.ln(), cfg.samples_per_decade);
    shoot(p, wt, w0, rs, &s, cfg)
}

/// Regular solution sampled at the start radius and the given increasing radii.
pub fn solve_ivp_at(
    p: &ProblemParams,
    wt: &WeightSpec,
    w0: f64,
    radii: &[f64],
    cfg: &IntegratorConfig,
) -> Result<RadialSolution> {
    let rs = start_radius(p, wt, w0_checked(w0)?, cfg)?;
    let mut s = vec![rs.ln()];
    for &r in radii {
        if !(r > 0.0) {
            return Err(Error::domain("sample radii must be positive"));
        }
        let v = r.ln();
        if v <= s[0] {
            continue;
        }
        if v <= *s.last().unwrap() {
            return Err(Error::input("sample radii must be strictly increasing"));
        }
        s.push(v);
    }
    shoot(p, wt, w0, rs, &s, cfg)
}

fn w0_checked(w0: f64) -> Result<f64> {
    if !(w0 < 0.0) || !w0.is_finite() {
        return Err(Error::domain(format!("w0 must be negative and finite, got {w0}")));
    }
    Ok(w0)
}

/// Integrate (ln(-w), ln Φ) in s = ln r, where Φ = r^{n-k}(w')^k. In these
/// variables the system reads (ln(-w))' = -y and (ln Φ)' = x.
fn shoot(
    p: &ProblemParams,
    wt: &WeightSpec,
    w0: f64,
    rs: f64,
    s_out: &[f64],
    cfg: &IntegratorConfig,
) -> Result<RadialSolution> {
    cfg.validate()?;
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let sr = series(p, wt, w0)?;
    let l0 = wt.l0();
    let rm = rs.powf(sr.m);
    let w_start = w0 + sr.c1 * rm + sr.c2 * rm * rm;
    let eps = sr.amp / (sr.m * (-w0)) * rm;
    let phi_start = sr.b * rs.powf(n + l0) / (n + l0) * (1.0 - q * eps * (n + l0) / (n + l0 + sr.m));
    let s0 = rs.ln();
    let y0 = [(-w_start).ln(), phi_start.ln()];
    let ln_lc = p.lambda.ln() - c_nk(p.n, p.k)?.ln();
    let kn = (k - n) / k;
    let rhs = |s: f64, u: &[f64; 2]| {
        let x = (ln_lc + wt.ln_rho_s(s) + q * u[0] - u[1] + n * s).exp();
        let y = (s + u[1] / k + kn * s - u[0]).exp();
        [-y, x]
    };
    let y_of = |s: f64, u: &[f64; 2]| (s + u[1] / k + kn * s - u[0]).exp();
    let tr = integrate(rhs, s0, y0, s_out, &cfg.control(), |s, u| y_of(s, u) > 1e8);
    let mut samples = Vec::with_capacity(tr.t.len());
    for (s, u) in tr.t.iter().zip(&tr.y) {
        let r = s.exp();
        samples.push(ProfileSample { r, w: -u[0].exp(), wprime: ((u[1] + (k - n) * s) / k).exp() });
    }
    let stats = SolveStats { steps: tr.stats.steps, rejected: tr.stats.rejected, evaluations: tr.stats.evaluations };
    let r_last = tr.t_last.exp();
    let big_y = y_of(tr.t_last, &tr.y_last);
    let truncated = match tr.termination {
        Termination::Completed => None,
        Termination::Stopped => Some(Truncation { r: r_last, reason: format!("w reaches 0 near r = {r_last}") }),
        Termination::StepUnderflow | Termination::NonFinite if big_y > 1e3 => {
            Some(Truncation { r: r_last, reason: format!("w reaches 0 near r = {r_last}") })
        }
        Termination::StepUnderflow => return Err(Error::numeric(format!("step size underflow at r = {r_last}"))),
        Termination::NonFinite => return Err(Error::numeric(format!("non-finite state at r = {r_last}"))),
        Termination::MaxSteps => return Err(Error::numeric(format!("step budget exhausted at r = {r_last}"))),
    };
    if samples.len() < 2 {
        return Err(Error::numeric(format!("profile breaks down immediately (r = {r_last})")));
    }
    Ok(RadialSolution { samples, w0, params: *p, weight: wt.clone(), stats, truncated })
}

fn t_grid(t0: f64, t1: f64, dt: f64, extra: Option<f64>) -> Vec<f64> {
    let count = ((t1 - t0).abs() / dt).ceil().max(1.0) as usize;
    let mut v: Vec<f64> = (0..=count).map(|i| t0 + (t1 - t0) * i as f64 / count as f64).collect();
    v[count] = t1;
    if let Some(e) = extra {
        let (lo, hi) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
        if e > lo && e < hi && !v.contains(&e) {
            v.push(e);
            if t0 < t1 {
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            } else {
                v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            }
        }
    }
    v
}

/// Integrate the non-autonomous system from `init` to `t_end` (either direction).
/// Components that start at zero stay on their invariant axis; positive ones are
/// integrated in logarithmic form.
pub fn solve_orbit(field: &LVField, init: PhasePoint, t_end: f64, cfg: &IntegratorConfig) -> Result<Orbit> {
    solve_orbit_with(field, init, t_end, cfg, Provenance::DirectLv)
}

fn solve_orbit_with(
    field: &LVField,
    init: PhasePoint,
    t_end: f64,
    cfg: &IntegratorConfig,
    provenance: Provenance,
) -> Result<Orbit> {
    cfg.validate()?;
    if !(init.x >= 0.0 && init.y >= 0.0) || !init.x.is_finite() || !init.y.is_finite() {
        return Err(Error::domain(format!("initial point ({}, {}) is outside the closed quadrant", init.x, init.y)));
    }
    if t_end == init.t {
        return Err(Error::domain("t_end equals the initial time"));
    }
    let p = field.params;
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let (xl, yl) = (init.x > 0.0, init.y > 0.0);
    let u0 = [if xl { init.x.ln() } else { 0.0 }, if yl { init.y.ln() } else { 0.0 }];
    let xy = |u: &[f64; 2]| (if xl { u[0].exp() } else { 0.0 }, if yl { u[1].exp() } else { 0.0 });
    let rhs = |t: f64, u: &[f64; 2]| {
        let (x, y) = xy(u);
        [if xl { field.nu(t) - x - q * y } else { 0.0 }, if yl { -(n - 2.0 * k) / k + x / k + y } else { 0.0 }]
    };
    let outs = t_grid(init.t, t_end, cfg.orbit_dt, Some(0.0));
    let div = cfg.orbit_divergence;
    let tr = integrate(rhs, init.t, u0, &outs, &cfg.control(), |_, u| {
        let (x, y) = xy(u);
        x + y > div
    });
    let mut samples: Vec<PhasePoint> =
        tr.t.iter()
            .zip(&tr.y)
            .map(|(t, u)| {
                let (x, y) = xy(u);
                PhasePoint { t: *t, x, y }
            })
            .collect();
    let end = match tr.termination {
        Termination::Completed => OrbitEnd::Completed,
        Termination::Stopped | Termination::NonFinite | Termination::StepUnderflow => OrbitEnd::Diverged(tr.t_last),
        Termination::MaxSteps => return Err(Error::numeric(format!("step budget exhausted at t = {}", tr.t_last))),
    };
    if t_end < init.t {
        samples.reverse();
    }
    Ok(Orbit { samples, provenance, params: p, weight: field.weight.clone(), end })
}

/// The orbit leaving P4(ν₋) at t = -T, integrated to `cfg.singular_t_end`.
pub fn singular_orbit(p: &ProblemParams, wt: &WeightSpec, big_t: f64, cfg: &IntegratorConfig) -> Result<Orbit> {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let l0 = wt.l0();
    let (xh, yh) = p4_coords(p, l0);
    if !(xh > 0.0 && yh > 0.0) {
        return Err(Error::domain(format!(
            "P4 = ({xh}, {yh}) is not in the open quadrant: needs q > k(n+l0)/(n-2k) = {} and l0 > -2k",
            k * (n + l0) / (n - 2.0 * k)
        )));
    }
    if !(big_t > 0.0) || !(cfg.singular_t_end > -big_t) {
        return Err(Error::domain("singular orbit needs T > 0 and t_end > -T"));
    }
    let _ = q;
    let field = LVField::new(*p, wt.clone());
    solve_orbit_with(
        &field,
        PhasePoint { t: -big_t, x: xh, y: yh },
        cfg.singular_t_end,
        cfg,
        Provenance::SingularFromP4,
    )
}

/// λ̃ = c_{n,k} x(0) y(0)^k / ρ(1) and the singular profile at λ = λ̃.
pub fn singular_solution(p: &ProblemParams, wt: &WeightSpec, cfg: &IntegratorConfig) -> Result<(f64, RadialSolution)> {
    let orb = singular_orbit(p, wt, cfg.singular_t, cfg)?;
    if orb.end != OrbitEnd::Completed {
        return Err(Error::numeric("singular orbit diverged before t = 0"));
    }
    let at0 =
        orb.samples.iter().find(|s| s.t == 0.0).ok_or_else(|| Error::numeric("singular orbit does not reach t = 0"))?;
    let lt = c_nk(p.n, p.k)? * at0.x * at0.y.powf(p.kf()) / wt.rho(1.0);
    let prof = orb.to_profile(lt)?;
    Ok((lt, prof))
}

/// Outcome of the monotone iteration on the unit ball.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum MaximalOutcome {
    Converged { solution: RadialSolution, iterations: usize },
    Diverged { iterations: usize, min_u: f64 },
    NotConverged { iterations: usize, last_change: f64 },
}

impl MaximalOutcome {
    pub fn converged(&self) -> bool {
        matches!(self, MaximalOutcome::Converged { .. })
    }
}

/// Nodes used by the iteration (Clenshaw-Curtis on [0,1]).
pub const MAXIMAL_NODES: usize = 257;

/// Picard-type iteration u_0 = 0, u_i = -K_λ ∫_r^1 τ^{(k-n)/k}(∫_0^τ s^{n-1}ρ(1-u_{i-1})^q)^{1/k}.
pub struct MaximalIteration {
    rule: CumulativeRule,
    base: Vec<f64>,
    radial: Vec<f64>,
    kl: f64,
    k: f64,
    q: f64,
    u: Vec<f64>,
    h: Vec<f64>,
    work: Vec<f64>,
    work2: Vec<f64>,
}

impl MaximalIteration {
    pub fn new(p: &ProblemParams, wt: &WeightSpec) -> Result<Self> {
        let (n, k) = (p.nf(), p.kf());
        if !(n + wt.l0() > 0.0) {
            return Err(Error::domain("iteration needs n + l0 > 0"));
        }
        let rule = CumulativeRule::new(MAXIMAL_NODES - 1);
        let base: Vec<f64> = rule
            .nodes
            .iter()
            .map(|&r| if r > 0.0 { ((n - 1.0) * r.ln() + wt.ln_rho_s(r.ln())).exp() } else { 0.0 })
            .collect();
        let radial: Vec<f64> = rule.nodes.iter().map(|&r| if r > 0.0 { r.powf((k - n) / k) } else { 0.0 }).collect();
        let kl = (p.lambda / c_nk(p.n, p.k)?).powf(1.0 / k);
        let np = rule.len();
        Ok(Self {
            rule,
            base,
            radial,
            kl,
            k,
            q: p.q,
            u: vec![0.0; np],
            h: vec![0.0; np],
            work: vec![0.0; np],
            work2: vec![0.0; np],
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.rule.nodes
    }

    pub fn current(&self) -> &[f64] {
        &self.u
    }

    /// Advance one step; returns the sup-norm change.
    pub fn step(&mut self) -> f64 {
        let np = self.u.len();
        for i in 0..np {
            self.work[i] = self.base[i] * (1.0 - self.u[i]).powf(self.q);
        }
        self.rule.cumulative(&self.work, &mut self.work2);
        for i in 0..np {
            self.h[i] = self.radial[i] * self.work2[i].max(0.0).powf(1.0 / self.k);
        }
        self.rule.cumulative(&self.h, &mut self.work);
        let total = self.work[np - 1];
        let mut change: f64 = 0.0;
        for i in 0..np {
            let v = -self.kl * (total - self.work[i]);
            change = change.max((v - self.u[i]).abs());
            self.u[i] = v;
        }
        if change.is_nan() {
            f64::INFINITY
        } else {
            change
        }
    }

    /// u'(r) = K_λ r^{(k-n)/k} (∫_0^r ...)^{1/k} from the last step.
    pub fn derivative(&self) -> Vec<f64> {
        self.h.iter().map(|v| self.kl * v).collect()
    }
}

pub fn maximal_solution_iterate(
    p: &ProblemParams,
    wt: &WeightSpec,
    tol: f64,
    max_iter: usize,
) -> Result<MaximalOutcome> {
    maximal_with_threshold(p, wt, tol, max_iter, IntegratorConfig::default().iterate_divergence)
}

pub fn maximal_with_threshold(
    p: &ProblemParams,
    wt: &WeightSpec,
    tol: f64,
    max_iter: usize,
    threshold: f64,
) -> Result<MaximalOutcome> {
    let mut it = MaximalIteration::new(p, wt)?;
    let mut change = f64::INFINITY;
    for i in 1..=max_iter {
        change = it.step();
        let min_u = it.u.iter().cloned().fold(f64::INFINITY, f64::min);
        if !min_u.is_finite() || min_u < -threshold || !change.is_finite() {
            return Ok(MaximalOutcome::Diverged { iterations: i, min_u });
        }
        if change < tol {
            // one more step so that u' is consistent with the returned u
            it.step();
            let du = it.derivative();
            let samples: Vec<ProfileSample> = it
                .rule
                .nodes
                .iter()
                .zip(it.u.iter().zip(&du))
                .filter(|(r, _)| **r > 0.0)
                .map(|(&r, (&u, &d))| ProfileSample { r, w: u - 1.0, wprime: d })
                .collect();
            let w0 = it.u[0] - 1.0;
            let solution = RadialSolution::from_samples(samples, w0, *p, wt.clone())?;
            return Ok(MaximalOutcome::Converged { solution, iterations: i + 1 });
        }
    }
    Ok(MaximalOutcome::NotConverged { iterations: max_iter, last_change: change })
}

/// Bracket for λ* from bisection on convergence of the monotone iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaStar {
    pub lower: f64,
    pub upper: f64,
    /// C^{-1} binom(n,k) ((q-k)/q)^q (2k/(q-k))^k with C = max ρ on [0,1].
    pub analytic_lower: f64,
    pub bisections: usize,
}

/// The analytic lower bound for λ*; zero if ρ is unbounded on [0,1].
pub fn lambda_star_lower_bound(p: &ProblemParams, wt: &WeightSpec) -> Result<f64> {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let mut c: f64 = if wt.l0() >= 0.0 { wt.k0() * if wt.l0() == 0.0 { 1.0 } else { 0.0 } } else { f64::INFINITY };
    for i in 1..=2000 {
        c = c.max(wt.rho(i as f64 / 2000.0));
    }
    let binom = c_nk(p.n, p.k)? * n;
    Ok(binom * ((q - k) / q).powf(q) * (2.0 * k / (q - k)).powf(k) / c)
}

pub const LAMBDA_STAR_TOL: f64 = 1e-10;
pub const LAMBDA_STAR_MAX_ITER: usize = 20_000;

pub fn estimate_lambda_star(p: &ProblemParams, wt: &WeightSpec, cfg: &IntegratorConfig) -> Result<LambdaStar> {
    let analytic = lambda_star_lower_bound(p, wt)?;
    if !(analytic > 0.0) {
        return Err(Error::domain("rho is unbounded on [0,1]; no analytic starting bracket"));
    }
    let pred = |lam: f64| -> Result<bool> {
        let pl = p.with_lambda(lam)?;
        Ok(maximal_with_threshold(&pl, wt, LAMBDA_STAR_TOL, LAMBDA_STAR_MAX_ITER, cfg.iterate_divergence)?.converged())
    };
    let mut lo = analytic;
    if !pred(lo)? {
        return Err(Error::numeric("iteration fails to converge at the analytic lower bound"));
    }
    let mut hi = 64.0 * analytic;
    while pred(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > cfg.bracket_growth * analytic {
            return Err(Error::numeric(format!("iteration still converges at lambda = {lo}: bracket unbounded")));
        }
    }
    let mut bis = 0;
    while hi - lo >= 1e-3 * lo {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        bis += 1;
    }
    Ok(LambdaStar { lower: lo, upper: hi, analytic_lower: analytic, bisections: bis })
}
