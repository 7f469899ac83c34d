//! Weight functions ρ, their logarithmic derivative R(r) = rρ'(r)/ρ(r) and the
//! limits and constants the analysis depends on.
//!
//! Every family is evaluated through `ln ρ` as a function of `s = ln r`, which
//! keeps the solvers free of overflow for r anywhere in `[1e-300, 1e300]`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::exponents::{delta_param, q_star, ProblemParams};
use crate::quad;
use crate::transform::c_nk;
use crate::{Error, Result};

/// Shared evaluator `r ↦ R(r)`.
pub type RFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Relative step of the centered log-derivative.
pub const NUMERIC_R_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Constant,
    Power,
    Rational,
    Matukuma,
    Example1,
    CustomFromR,
    Tabulated,
}

impl WeightKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightKind::Constant => "constant",
            WeightKind::Power => "power",
            WeightKind::Rational => "rational",
            WeightKind::Matukuma => "matukuma",
            WeightKind::Example1 => "example1",
            WeightKind::CustomFromR => "custom-from-R",
            WeightKind::Tabulated => "tabulated",
        }
    }
}

#[derive(Clone)]
enum Repr {
    Power {
        c: f64,
        sigma: f64,
    },
    /// a r^β / (ã + r^γ)
    Rational {
        a: f64,
        atilde: f64,
        beta: f64,
        gamma: f64,
    },
    Matukuma {
        mu: f64,
    },
    Custom(Arc<CustomWeight>),
    Tabulated(Arc<Table>),
}

/// An immutable weight; cheap to clone and safe to share between threads.
#[derive(Clone)]
pub struct WeightSpec {
    kind: WeightKind,
    repr: Repr,
    scale: f64,
    l0: f64,
    l_inf: f64,
    vartheta: Option<f64>,
    k0: f64,
    c_rho: f64,
}

impl fmt::Debug for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSpec")
            .field("kind", &self.kind)
            .field("scale", &self.scale)
            .field("l0", &self.l0)
            .field("l_inf", &self.l_inf)
            .field("vartheta", &self.vartheta)
            .field("k0", &self.k0)
            .field("c_rho", &self.c_rho)
            .finish()
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `1/(1 + e^{-x})`.
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl WeightSpec {
    /// ρ ≡ c.
    pub fn constant(c: f64) -> Result<Self> {
        let c = positive("c", c)?;
        Ok(Self {
            kind: WeightKind::Constant,
            repr: Repr::Power { c, sigma: 0.0 },
            scale: 1.0,
            l0: 0.0,
            l_inf: 0.0,
            vartheta: None,
            k0: c,
            c_rho: c,
        })
    }

    /// ρ = c r^σ.
    pub fn power(c: f64, sigma: f64) -> Result<Self> {
        let c = positive("c", c)?;
        if !sigma.is_finite() {
            return Err(Error::domain("sigma must be finite"));
        }
        Ok(Self {
            kind: WeightKind::Power,
            repr: Repr::Power { c, sigma },
            scale: 1.0,
            l0: sigma,
            l_inf: sigma,
            vartheta: None,
            k0: c,
            c_rho: c,
        })
    }

    /// ρ = a r^β / (ã + r^γ) with γ > 0.
    pub fn rational(a: f64, atilde: f64, beta: f64, gamma: f64) -> Result<Self> {
        let a = positive("a", a)?;
        let atilde = positive("atilde", atilde)?;
        let gamma = positive("gamma", gamma)?;
        if !beta.is_finite() {
            return Err(Error::domain("beta must be finite"));
        }
        Ok(Self {
            kind: WeightKind::Rational,
            repr: Repr::Rational { a, atilde, beta, gamma },
            scale: 1.0,
            l0: beta,
            l_inf: beta - gamma,
            vartheta: Some(gamma),
            k0: a / atilde,
            c_rho: a,
        })
    }

    /// ρ = r^{μ-2}(1+r²)^{-μ/2}.
    pub fn matukuma(mu: f64) -> Result<Self> {
        let mu = positive("mu", mu)?;
        Ok(Self {
            kind: WeightKind::Matukuma,
            repr: Repr::Matukuma { mu },
            scale: 1.0,
            l0: mu - 2.0,
            l_inf: -2.0,
            vartheta: Some(2.0),
            k0: 1.0,
            c_rho: 1.0,
        })
    }

    /// The weight for which `-(1+r²)^{-(n-2k)/(2k)}` solves the entire-space
    /// problem with q = kn/(n-2k): ρ = c_{n,k}((n-2k)/k)^k n/(1+r²).
    pub fn example1(n: u32, k: u32) -> Result<Self> {
        if k < 1 || n <= 2 * k {
            return Err(Error::domain(format!("need n > 2k >= 2, got n={n}, k={k}")));
        }
        let (nf, kf) = (n as f64, k as f64);
        let a = c_nk(n, k)? * ((nf - 2.0 * kf) / kf).powi(k as i32) * nf;
        let mut w = Self::rational(a, 1.0, 0.0, 2.0)?;
        w.kind = WeightKind::Example1;
        Ok(w)
    }

    /// The exponent q = kn/(n-2k) that pairs with [`WeightSpec::example1`].
    pub fn example1_exponent(n: u32, k: u32) -> f64 {
        let (nf, kf) = (n as f64, k as f64);
        kf * nf / (nf - 2.0 * kf)
    }

    /// ρ = K0 r^{l0} exp(∫_0^r (R(s)-l0)/s ds).
    pub fn from_r(rfun: RFn, l0: f64, k0: f64) -> Result<Self> {
        build_weight_from_r(rfun, l0, k0)
    }

    /// Piecewise power law through `(r_i, ρ_i)` (linear in `ln ρ` against `ln r`).
    pub fn tabulated(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::input("a tabulated weight needs at least two rows"));
        }
        let mut s = Vec::with_capacity(points.len());
        let mut lr = Vec::with_capacity(points.len());
        for (i, &(r, rho)) in points.iter().enumerate() {
            if !(r > 0.0) || !(rho > 0.0) || !r.is_finite() || !rho.is_finite() {
                return Err(Error::input(format!("row {i}: r and rho must be positive and finite")));
            }
            if i > 0 && r <= points[i - 1].0 {
                return Err(Error::input(format!("row {i}: r must be strictly increasing")));
            }
            s.push(r.ln());
            lr.push(rho.ln());
        }
        let m = s.len();
        let l0 = (lr[1] - lr[0]) / (s[1] - s[0]);
        let l_inf = (lr[m - 1] - lr[m - 2]) / (s[m - 1] - s[m - 2]);
        let k0 = (lr[0] - l0 * s[0]).exp();
        let c_rho = (lr[m - 1] - l_inf * s[m - 1]).exp();
        Ok(Self {
            kind: WeightKind::Tabulated,
            repr: Repr::Tabulated(Arc::new(Table { s, ln_rho: lr })),
            scale: 1.0,
            l0,
            l_inf,
            vartheta: None,
            k0,
            c_rho,
        })
    }

    /// The same weight multiplied by a positive constant.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let factor = positive("scale factor", factor)?;
        let mut w = self.clone();
        w.scale *= factor;
        w.k0 *= factor;
        w.c_rho *= factor;
        Ok(w)
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }
    pub fn l0(&self) -> f64 {
        self.l0
    }
    pub fn l_inf(&self) -> f64 {
        self.l_inf
    }
    /// Tail rate in R - l_∞ = O(r^{-ϑ}); `None` when R - l_∞ vanishes identically
    /// or, for user weights, no clean rate was found.
    pub fn vartheta(&self) -> Option<f64> {
        self.vartheta
    }
    pub fn k0(&self) -> f64 {
        self.k0
    }
    pub fn c_rho(&self) -> f64 {
        self.c_rho
    }
    /// True when R is given in closed form rather than by differencing.
    pub fn has_closed_form_r(&self) -> bool {
        !matches!(self.repr, Repr::Tabulated(_))
    }

    /// `ln ρ(e^s)`; NaN if a quadrature inside a user weight fails.
    pub fn ln_rho_s(&self, s: f64) -> f64 {
        let base = match &self.repr {
            Repr::Power { c, sigma } => c.ln() + sigma * s,
            Repr::Rational { a, atilde, beta, gamma } => {
                a.ln() + beta * s - atilde.ln() - softplus(gamma * s - atilde.ln())
            }
            Repr::Matukuma { mu } => (mu - 2.0) * s - 0.5 * mu * softplus(2.0 * s),
            Repr::Custom(cw) => cw.ln_rho_s(s),
            Repr::Tabulated(t) => t.ln_rho_s(s),
        };
        base + self.scale.ln()
    }

    /// ρ(r) for r > 0, no argument checks.
    pub fn rho(&self, r: f64) -> f64 {
        self.ln_rho_s(r.ln()).exp()
    }

    /// R(e^s) - l0, evaluated without cancellation for closed forms.
    pub fn r_minus_l0_s(&self, s: f64) -> f64 {
        match &self.repr {
            Repr::Power { .. } => 0.0,
            Repr::Rational { atilde, gamma, .. } => -gamma * logistic(gamma * s - atilde.ln()),
            Repr::Matukuma { mu } => -mu * logistic(2.0 * s),
            Repr::Custom(cw) => (cw.rfun)(s.exp()) - cw.l0,
            Repr::Tabulated(_) => self.numeric_r_s(s) - self.l0,
        }
    }

    /// R(e^s) - l_∞, evaluated without cancellation for closed forms.
    pub fn r_minus_linf_s(&self, s: f64) -> f64 {
        match &self.repr {
            Repr::Power { .. } => 0.0,
            Repr::Rational { atilde, gamma, .. } => gamma * logistic(-(gamma * s - atilde.ln())),
            Repr::Matukuma { mu } => mu * logistic(-2.0 * s),
            _ => self.big_r_s(s) - self.l_inf,
        }
    }

    /// R(e^s).
    pub fn big_r_s(&self, s: f64) -> f64 {
        match &self.repr {
            Repr::Power { sigma, .. } => *sigma,
            Repr::Rational { beta, .. } => beta + self.r_minus_l0_s(s),
            Repr::Matukuma { mu } => mu - 2.0 + self.r_minus_l0_s(s),
            Repr::Custom(cw) => (cw.rfun)(s.exp()),
            Repr::Tabulated(_) => self.numeric_r_s(s),
        }
    }

    /// R(r) (closed form when available).
    pub fn big_r(&self, r: f64) -> f64 {
        self.big_r_s(r.ln())
    }

    /// Centered difference of ln ρ with relative step 1e-6.
    pub fn numeric_r_s(&self, s: f64) -> f64 {
        let hp = NUMERIC_R_STEP.ln_1p();
        let hm = (-NUMERIC_R_STEP).ln_1p();
        (self.ln_rho_s(s + hp) - self.ln_rho_s(s + hm)) / (hp - hm)
    }

    pub fn numeric_r(&self, r: f64) -> f64 {
        self.numeric_r_s(r.ln())
    }

    /// K(r) = r^{-l0} ρ(r).
    pub fn big_k(&self, r: f64) -> f64 {
        let s = r.ln();
        (self.ln_rho_s(s) - self.l0 * s).exp()
    }
}

/// ρ(r), rejecting nonpositive r and reporting quadrature failures.
pub fn eval_rho(w: &WeightSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("rho needs r > 0, got {r}")));
    }
    let v = w.rho(r);
    if !v.is_finite() {
        return Err(Error::numeric(format!("rho({r}) could not be evaluated")));
    }
    Ok(v)
}

#[derive(Debug)]
struct Table {
    s: Vec<f64>,
    ln_rho: Vec<f64>,
}

impl Table {
    fn ln_rho_s(&self, s: f64) -> f64 {
        let m = self.s.len();
        let i = match self.s.partition_point(|&v| v <= s) {
            0 => 0,
            p if p >= m => m - 2,
            p => p - 1,
        };
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let (y0, y1) = (self.ln_rho[i], self.ln_rho[i + 1]);
        y0 + (y1 - y0) * (s - s0) / (s1 - s0)
    }
}

struct CustomWeight {
    rfun: RFn,
    l0: f64,
    k0: f64,
    s_min: f64,
    ds: f64,
    /// I(s_min + j ds) with I(s) = ∫_{-∞}^s (R(e^u) - l0) du
    cum: Vec<f64>,
}

const CUSTOM_TOL: f64 = 1e-13;

impl CustomWeight {
    fn piece(&self, a: f64, b: f64) -> f64 {
        let rf = &self.rfun;
        let l0 = self.l0;
        quad::integrate(|u| rf(u.exp()) - l0, a, b, CUSTOM_TOL, CUSTOM_TOL).unwrap_or(f64::NAN)
    }

    fn integral(&self, s: f64) -> f64 {
        let m = self.cum.len();
        let s_max = self.s_min + self.ds * (m - 1) as f64;
        if s <= self.s_min {
            return self.cum[0] - self.piece(s, self.s_min);
        }
        if s >= s_max {
            return self.cum[m - 1] + self.piece(s_max, s);
        }
        let j = (((s - self.s_min) / self.ds).floor() as usize).min(m - 2);
        let sj = self.s_min + self.ds * j as f64;
        self.cum[j] + self.piece(sj, s)
    }

    fn ln_rho_s(&self, s: f64) -> f64 {
        self.k0.ln() + self.l0 * s + self.integral(s)
    }
}

fn aitken(a: f64, b: f64, c: f64) -> f64 {
    let d1 = b - a;
    let d2 = c - b;
    let den = d2 - d1;
    let scale = a.abs().max(b.abs()).max(c.abs()).max(1.0);
    if den.abs() <= 1e-13 * scale || d2.abs() <= 1e-13 * scale {
        c
    } else {
        c - d2 * d2 / den
    }
}

fn extrapolate(values: [f64; 4], what: &str) -> Result<f64> {
    let a1 = aitken(values[0], values[1], values[2]);
    let a2 = aitken(values[1], values[2], values[3]);
    if !(a1.is_finite() && a2.is_finite()) || (a1 - a2).abs() > 1e-4 {
        return Err(Error::Estimation(format!(
            "{what}: extrapolated levels disagree ({a1} vs {a2}; samples {values:?})"
        )));
    }
    Ok(a2)
}

/// Extrapolated limits of R at 0 (from r = 1e-2 ... 1e-8) and at infinity
/// (from r = 1e2 ... 1e8).
pub fn estimate_limits(w: &WeightSpec) -> Result<(f64, f64)> {
    let ln10 = core::f64::consts::LN_10;
    let at = |e: f64| w.big_r_s(e * ln10);
    let l0 = extrapolate([at(-2.0), at(-4.0), at(-6.0), at(-8.0)], "limit of R at 0")?;
    let li = extrapolate([at(2.0), at(4.0), at(6.0), at(8.0)], "limit of R at infinity")?;
    Ok((l0, li))
}

/// Least-squares line through (x_i, y_i): (slope, intercept, rms residual).
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    (slope, icpt, (rss / n).sqrt())
}

/// Tail rate ϑ from the slope of ln|R - l_∞| against ln r on [1e2, 1e4].
/// `Ok(None)` means R equals l_∞ on the whole window.
pub fn fit_vartheta(w: &WeightSpec) -> core::result::Result<Option<f64>, (f64, f64)> {
    let ln10 = core::f64::consts::LN_10;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut all_zero = true;
    for i in 0..=40 {
        let s = (2.0 + 0.05 * i as f64) * ln10;
        let d = w.r_minus_linf_s(s).abs();
        if d > 1e-14 {
            all_zero = false;
        }
        if d > 0.0 {
            xs.push(s);
            ys.push(d.ln());
        }
    }
    if all_zero {
        return Ok(None);
    }
    if xs.len() < 10 {
        return Err((1e4, w.r_minus_linf_s(4.0 * ln10)));
    }
    let (slope, _, res) = linear_fit(&xs, &ys);
    if res < 0.05 && slope < 0.0 {
        Ok(Some(-slope))
    } else {
        Err((1e4, w.r_minus_linf_s(4.0 * ln10)))
    }
}

/// Construct the weight K0 r^{l0} exp(∫_0^r (R(s)-l0)/s ds) from R.
pub fn build_weight_from_r(rfun: RFn, l0: f64, k0: f64) -> Result<WeightSpec> {
    let k0 = positive("K0", k0)?;
    if !l0.is_finite() {
        return Err(Error::domain("l0 must be finite"));
    }
    let ln10 = core::f64::consts::LN_10;
    let s_min = -8.0 * ln10;
    let ds = 0.25;
    let steps = ((16.0 * ln10) / ds).ceil() as usize;
    let integrand = |u: f64| rfun(u.exp()) - l0;
    // tail ∫_{-∞}^{s_min}, decade by decade
    let mut tail = 0.0;
    let mut quiet = 0;
    let mut converged = false;
    for j in 0..120 {
        let b = s_min - j as f64 * ln10;
        let a = b - ln10;
        let piece = quad::integrate(integrand, a, b, 1e-16, CUSTOM_TOL)
            .map_err(|e| Error::domain(format!("weight construction: {e}")))?;
        tail += piece;
        if piece.abs() <= 1e-15 * tail.abs().max(1.0) {
            quiet += 1;
            if quiet >= 3 {
                converged = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if !converged || !tail.is_finite() {
        return Err(Error::domain("integral of (R(s)-l0)/s diverges at 0; no weight with this R and l0"));
    }
    let mut cum = Vec::with_capacity(steps + 1);
    cum.push(tail);
    for j in 0..steps {
        let a = s_min + ds * j as f64;
        let piece = quad::integrate(integrand, a, a + ds, 1e-15, CUSTOM_TOL)
            .map_err(|e| Error::numeric(format!("weight construction: {e}")))?;
        cum.push(cum[j] + piece);
    }
    let cw = Arc::new(CustomWeight { rfun, l0, k0, s_min, ds, cum });
    let mut w = WeightSpec {
        kind: WeightKind::CustomFromR,
        repr: Repr::Custom(cw),
        scale: 1.0,
        l0,
        l_inf: f64::NAN,
        vartheta: None,
        k0,
        c_rho: f64::NAN,
    };
    let at = |e: f64| w.big_r_s(e * ln10);
    if let Ok(li) = extrapolate([at(2.0), at(4.0), at(6.0), at(8.0)], "limit of R at infinity") {
        w.l_inf = li;
        let lk = |e: f64| w.ln_rho_s(e * ln10) - li * e * ln10;
        let c = aitken(lk(4.0), lk(6.0), lk(8.0));
        w.c_rho = c.exp();
        w.vartheta = fit_vartheta(&w).ok().flatten();
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Holds,
    Fails,
    Unchecked,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Holds => "holds",
            Status::Fails => "fails",
            Status::Unchecked => "unchecked",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub r: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionEntry {
    pub name: &'static str,
    pub status: Status,
    pub witness: Option<Witness>,
    pub note: String,
}

impl AssumptionEntry {
    fn new(name: &'static str, ok: bool, witness: Witness, note: String) -> Self {
        if ok {
            Self { name, status: Status::Holds, witness: None, note }
        } else {
            Self { name, status: Status::Fails, witness: Some(witness), note }
        }
    }
    fn unchecked(name: &'static str, note: String) -> Self {
        Self { name, status: Status::Unchecked, witness: None, note }
    }
    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }
}

/// Outcome of the sampled assumption checks; "holds" means "holds on the grid".
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub rho1: AssumptionEntry,
    pub rho2: AssumptionEntry,
    pub rho3: AssumptionEntry,
    pub rho4: AssumptionEntry,
    pub rho5: AssumptionEntry,
    pub rho6: AssumptionEntry,
    pub rho2_case1: bool,
    pub rho2_case2: bool,
    pub rho4_case1: bool,
    pub rho4_case2: bool,
    pub rho6_case1: bool,
    pub rho6_case2: bool,
    /// q equals q*(k, l0) to 1e-12.
    pub q_boundary: bool,
    pub l0: f64,
    pub l_inf: f64,
    pub vartheta: Option<f64>,
    pub q_star_l0: f64,
    pub delta: f64,
    /// lim r^δ (R - l_∞) when finite.
    pub kappa: Option<f64>,
    /// -lim ln|R - l_∞| / ln r when r^δ|R - l_∞| diverges.
    pub nu_hat: Option<f64>,
    pub grid: (f64, f64, usize),
}

impl AssumptionReport {
    /// (ρ.1)-(ρ.3): what the bounded problem on the ball needs.
    pub fn ball_ok(&self) -> bool {
        self.rho1.holds() && self.rho2.holds() && self.rho3.holds()
    }
    /// (ρ.1), (ρ.2), (ρ.4), (ρ.5): what the entire-space classification needs.
    pub fn entire_ok(&self) -> bool {
        self.rho1.holds() && self.rho2.holds() && self.rho4.holds() && self.rho5.holds()
    }
}

/// Default number of points of the log grid on [1e-6, 1e6].
pub const ASSUMPTION_GRID: usize = 2000;

pub fn check_assumptions(w: &WeightSpec, p: &ProblemParams) -> AssumptionReport {
    check_assumptions_on(w, p, 1e-6, 1e6, ASSUMPTION_GRID)
}

pub fn check_assumptions_on(
    w: &WeightSpec,
    p: &ProblemParams,
    r_lo: f64,
    r_hi: f64,
    points: usize,
) -> AssumptionReport {
    let (s_lo, s_hi) = (r_lo.ln(), r_hi.ln());
    let grid: Vec<f64> = (0..points).map(|i| s_lo + (s_hi - s_lo) * i as f64 / (points - 1) as f64).collect();
    let l0 = w.l0();
    let l_inf = w.l_inf();
    let qs = q_star(p.k, l0, p.n).unwrap_or(f64::NAN);
    let q = p.q;
    let q_boundary = (q - qs).abs() <= 1e-12 * qs.abs().max(1.0);
    let q_ge = q >= qs || q_boundary;
    let q_gt = q > qs && !q_boundary;

    // (ρ.1)
    let mut bad1 = None;
    for &s in &grid {
        let v = w.ln_rho_s(s);
        if !v.is_finite() {
            bad1 = Some(Witness { r: s.exp(), value: v.exp() });
            break;
        }
    }
    let rho1 = AssumptionEntry::new(
        "rho.1",
        bad1.is_none(),
        bad1.clone().unwrap_or(Witness { r: r_lo, value: 0.0 }),
        String::from("rho positive and finite on the grid"),
    );

    // (ρ.2)
    let mut worst = (f64::NEG_INFINITY, r_lo);
    let mut strict = true;
    for &s in &grid {
        let d = w.r_minus_l0_s(s);
        if d > worst.0 {
            worst = (d, s.exp());
        }
        if !(d < 0.0) {
            strict = false;
        }
    }
    let nonstrict = worst.0 <= 1e-9;
    let strict = strict && nonstrict;
    let rho2_case1 = strict && q_ge;
    let rho2_case2 = nonstrict && q_gt;
    let boundary_equal = q_boundary && nonstrict && !strict;
    let ok2 = rho2_case1 || rho2_case2 || boundary_equal;
    let note2 = if boundary_equal {
        format!("R <= l0 on grid and q = q*(k,l0) = {qs}: boundary case, neither strict branch certified")
    } else if !nonstrict {
        format!("R exceeds l0 = {l0} on the grid")
    } else if !ok2 {
        format!("q = {q} below q*(k,l0) = {qs}")
    } else {
        format!("q*(k,l0) = {qs}")
    };
    let wit2 =
        if !nonstrict { Witness { r: worst.1, value: worst.0 + l0 } } else { Witness { r: worst.1, value: q - qs } };
    let rho2 = AssumptionEntry::new("rho.2", ok2, wit2, note2);

    // (ρ.3)
    let mut kmax = (0.0f64, r_lo);
    let mut kpos = true;
    for &s in &grid {
        let kv = (w.ln_rho_s(s) - l0 * s).exp();
        if !(kv > 0.0) || !kv.is_finite() {
            kpos = false;
            kmax = (kv, s.exp());
            break;
        }
        if kv > kmax.0 {
            kmax = (kv, s.exp());
        }
    }
    let ok3 = kpos && kmax.0 <= w.k0() * (1.0 + 1e-9);
    let rho3 = AssumptionEntry::new(
        "rho.3",
        ok3,
        Witness { r: kmax.1, value: kmax.0 },
        format!("K(r) = r^(-l0) rho(r) against K(0) = {}", w.k0()),
    );

    // (ρ.4)
    let have_linf = l_inf.is_finite();
    let rho4_case1 = have_linf && l_inf < l0 - 1e-12 && q_ge;
    let rho4_case2 = have_linf && l_inf <= l0 + 1e-12 && q_gt;
    let ok4 = rho4_case1 || rho4_case2 || (have_linf && boundary_equal);
    let rho4 = if have_linf {
        AssumptionEntry::new(
            "rho.4",
            ok4,
            Witness { r: r_hi, value: w.big_r_s(s_hi) },
            format!("l_inf = {l_inf}, l0 = {l0}, q*(k,l0) = {qs}"),
        )
    } else {
        AssumptionEntry::new(
            "rho.4",
            false,
            Witness { r: r_hi, value: w.big_r_s(s_hi) },
            String::from("limit of R at infinity could not be established"),
        )
    };

    // (ρ.5)
    let fit = if have_linf { fit_vartheta(w) } else { Err((r_hi, f64::NAN)) };
    let (rho5, vartheta, exact_tail) = match fit {
        Ok(None) => (
            AssumptionEntry::new(
                "rho.5",
                true,
                Witness { r: 0.0, value: 0.0 },
                String::from("R equals l_inf on [1e2,1e4]"),
            ),
            None,
            true,
        ),
        Ok(Some(v)) => (
            AssumptionEntry::new("rho.5", true, Witness { r: 0.0, value: 0.0 }, format!("fitted vartheta = {v}")),
            Some(v),
            false,
        ),
        Err((r, v)) => (
            AssumptionEntry::new(
                "rho.5",
                false,
                Witness { r, value: v },
                String::from("no clean power-law tail on [1e2,1e4]"),
            ),
            None,
            false,
        ),
    };

    // (ρ.6)
    let delta = delta_param(p.k, l_inf);
    let nu_plus = p.nf() + l_inf;
    let mut kappa = None;
    let mut nu_hat = None;
    let mut rho6_case1 = false;
    let mut rho6_case2 = false;
    let rho6 = if !rho5.holds() {
        AssumptionEntry::unchecked("rho.6", String::from("needs a tail rate from rho.5"))
    } else if exact_tail {
        kappa = Some(0.0);
        rho6_case1 = nu_plus > delta;
        AssumptionEntry::new(
            "rho.6",
            rho6_case1,
            Witness { r: r_hi, value: nu_plus - delta },
            String::from("R - l_inf vanishes: option (1) with limit 0"),
        )
    } else {
        let th = vartheta.unwrap_or(f64::NAN);
        let ln10 = core::f64::consts::LN_10;
        if th >= delta - 0.05 {
            let kap = if th > delta + 0.05 {
                0.0
            } else {
                let psi = |e: f64| (delta * e * ln10).exp() * w.r_minus_linf_s(e * ln10);
                aitken(psi(4.0), psi(5.0), psi(6.0))
            };
            kappa = Some(kap);
            rho6_case1 = nu_plus > delta;
            AssumptionEntry::new(
                "rho.6",
                rho6_case1,
                Witness { r: r_hi, value: nu_plus - delta },
                format!("option (1): vartheta = {th} >= delta = {delta}"),
            )
        } else {
            nu_hat = Some(th);
            rho6_case2 = nu_plus > th;
            AssumptionEntry::new(
                "rho.6",
                rho6_case2,
                Witness { r: r_hi, value: nu_plus - th },
                format!("option (2): vartheta = {th} < delta = {delta}"),
            )
        }
    };

    AssumptionReport {
        rho1,
        rho2,
        rho3,
        rho4,
        rho5,
        rho6,
        rho2_case1,
        rho2_case2,
        rho4_case1,
        rho4_case2,
        rho6_case1,
        rho6_case2,
        q_boundary,
        l0,
        l_inf,
        vartheta,
        q_star_l0: qs,
        delta,
        kappa,
        nu_hat,
        grid: (r_lo, r_hi, points),
    }
}
