//! ω-limit classification of orbits (P2, fast/slow P3+, P4+), the constants
//! of the corresponding asymptotic profiles, decay-rate fits and the slopes of
//! the invariant curves through the limit point.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::exponents::{delta_param, p2_rate, p4_coords, q_star, stationary_points, PointKind, ProblemParams};
use crate::solver::{Orbit, OrbitEnd};
use crate::transform::{c_nk, ln_minus_w, LVField, PhasePoint};
use crate::weights::{check_assumptions, linear_fit, WeightSpec};
use crate::{Error, Result};

/// Sustained distance to the limit point required over the trailing window.
pub const PROXIMITY_TOL: f64 = 1e-4;
/// Slack for membership of G₋ and W₋.
pub const REGION_SLACK: f64 = 1e-9;
/// Minimal final time of an orbit submitted for classification.
pub const MIN_T_END: f64 = 20.0;
const DELTA_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    P2,
    P3PlusFast,
    P3PlusSlow,
    P4Plus,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::P2 => "P2",
            Verdict::P3PlusFast => "P3plus_fast",
            Verdict::P3PlusSlow => "P3plus_slow",
            Verdict::P4Plus => "P4plus",
            Verdict::Undetermined => "undetermined",
        }
    }
}

/// How the verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Proximity,
    Envelope,
    InverseT,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Proximity => "proximity",
            Method::Envelope => "envelope",
            Method::InverseT => "inverse-t",
        }
    }
}

/// Asymptotic constants. Roles by verdict:
/// - P2: `fitted` = lim e^{γt}x, `c2` = lim e^{γt}(y - (n-2k)/k), `c3`,`c4` the
///   coefficients of -w and w' (powers r^{-(n-2k)/k}, r^{-(n-k)/k});
/// - fast P3+: `fitted` = lim e^{δt}y, `c1` = lim(-w), `c2` the coefficient of w' ~ r^{-(δ+1)};
/// - slow P3+ and P4+: `c3`, `c4` the coefficients of -w and w'.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Constants {
    pub fitted: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayVariable {
    LnR,
    LnLnR,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayQuantity {
    MinusW,
    WPrime,
}

/// Least-squares slope of ln(quantity) against the decay variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub quantity: DecayQuantity,
    pub variable: DecayVariable,
    pub exponent: f64,
    pub predicted: f64,
    pub residual: f64,
    pub r_range: (f64, f64),
}

impl DecayFit {
    pub fn rel_error(&self) -> f64 {
        deviation(self.exponent, self.predicted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionHistory {
    pub first_g_minus: Option<f64>,
    pub first_w_minus: Option<f64>,
    pub g_minus_samples: usize,
    pub min_g: f64,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub verdict: Verdict,
    pub method: Option<Method>,
    pub limit_point: Option<(f64, f64)>,
    pub terminal_distance: Option<f64>,
    pub delta: f64,
    pub constants: Constants,
    pub decay: Option<DecayFit>,
    pub regions: RegionHistory,
    /// q sits on the boundary between the two cases of the growth assumption.
    pub q_boundary: bool,
    /// P4+ is a focus: the approach oscillates and no eigen-rates are fitted.
    pub p4_focus: bool,
    pub reason: Option<String>,
}

fn deviation(fitted: f64, predicted: f64) -> f64 {
    if predicted.abs() > 1e-12 {
        ((fitted - predicted) / predicted).abs()
    } else {
        (fitted - predicted).abs()
    }
}

pub fn g_value(p: &ProblemParams, x: f64, y: f64) -> f64 {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let nn = n - 2.0 * k;
    x + nn * (q + 1.0) / (k + 1.0) * (k / nn * y - 1.0)
}

pub fn w_value(p: &ProblemParams, x: f64, y: f64) -> f64 {
    let (n, k) = (p.nf(), p.kf());
    -(n - 2.0 * k) / k + x / k + y
}

/// (G, W, S) at a point of the phase plane.
pub fn region_values(t: f64, x: f64, y: f64, field: &LVField) -> (f64, f64, f64) {
    let p = &field.params;
    (g_value(p, x, y), w_value(p, x, y), field.nu(t) - x - p.q * y)
}

pub fn region_history(orb: &Orbit, p: &ProblemParams) -> RegionHistory {
    let mut h = RegionHistory { first_g_minus: None, first_w_minus: None, g_minus_samples: 0, min_g: f64::INFINITY };
    for s in &orb.samples {
        let g = g_value(p, s.x, s.y);
        h.min_g = h.min_g.min(g);
        if g <= -REGION_SLACK {
            h.g_minus_samples += 1;
            h.first_g_minus.get_or_insert(s.t);
        }
        if w_value(p, s.x, s.y) <= -REGION_SLACK {
            h.first_w_minus.get_or_insert(s.t);
        }
    }
    h
}

/// True iff once a sample has G <= 0 every later sample has G < slack.
pub fn check_inward_invariance(orb: &Orbit) -> bool {
    let p = &orb.params;
    match orb.samples.iter().position(|s| g_value(p, s.x, s.y) <= 0.0) {
        None => true,
        Some(i) => orb.samples[i..].iter().all(|s| g_value(p, s.x, s.y) < REGION_SLACK),
    }
}

/// No sample lies in G₋ (with slack).
pub fn never_in_g_minus(orb: &Orbit) -> bool {
    let p = &orb.params;
    orb.samples.iter().all(|s| g_value(p, s.x, s.y) > -REGION_SLACK)
}

/// Every sample in W₋ is also in G₋.
pub fn w_minus_inside_g_minus(orb: &Orbit) -> bool {
    let p = &orb.params;
    orb.samples.iter().filter(|s| w_value(p, s.x, s.y) < 0.0).all(|s| g_value(p, s.x, s.y) < 0.0)
}

fn dist(s: &PhasePoint, c: (f64, f64)) -> f64 {
    (s.x - c.0).hypot(s.y - c.1)
}

fn window(orb: &Orbit, frac: f64) -> &[PhasePoint] {
    let (t0, t1) = orb.t_range();
    let cut = t1 - frac * (t1 - t0);
    let i = orb.samples.partition_point(|s| s.t < cut);
    &orb.samples[i..]
}

fn max_dist(w: &[PhasePoint], c: (f64, f64)) -> f64 {
    w.iter().map(|s| dist(s, c)).fold(0.0, f64::max)
}

/// Maxima of the distance on four consecutive sub-windows of the trailing 40%
/// decrease strictly and the last one is below 1e-2.
fn envelope_converges(orb: &Orbit, c: (f64, f64)) -> bool {
    let w = window(orb, 0.4);
    if w.len() < 8 {
        return false;
    }
    let (ta, tb) = (w[0].t, w[w.len() - 1].t);
    let mut maxima = [0.0f64; 4];
    for s in w {
        let j = (((s.t - ta) / (tb - ta) * 4.0) as usize).min(3);
        maxima[j] = maxima[j].max(dist(s, c));
    }
    maxima.windows(2).all(|m| m[1] < m[0]) && maxima[3] < 1e-2
}

pub fn classify_orbit(orb: &Orbit, p: &ProblemParams, wt: &WeightSpec) -> Classification {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let l_inf = wt.l_inf();
    let delta = delta_param(p.k, l_inf);
    let q_boundary = q_star(p.k, wt.l0(), p.n).map(|qs| (q - qs).abs() <= 1e-9 * qs.abs().max(1.0)).unwrap_or(false);
    let p4_focus = delta < -DELTA_EPS
        && matches!(stationary_points(p, l_inf)[3].kind, PointKind::StableFocus | PointKind::UnstableFocus);
    let mut cls = Classification {
        verdict: Verdict::Undetermined,
        method: None,
        limit_point: None,
        terminal_distance: None,
        delta,
        constants: Constants::default(),
        decay: None,
        regions: region_history(orb, p),
        q_boundary,
        p4_focus,
        reason: None,
    };
    match orb.end {
        OrbitEnd::Completed => {}
        OrbitEnd::Diverged(t) => {
            cls.reason = Some(format!("orbit diverged at t = {t}"));
            return cls;
        }
        OrbitEnd::Truncated => {
            cls.reason = Some(String::from("profile reaches zero: not an entire solution"));
            return cls;
        }
    }
    if orb.samples.len() < 16 {
        cls.reason = Some(String::from("too few samples"));
        return cls;
    }
    let (_, t_end) = orb.t_range();
    if t_end < MIN_T_END {
        cls.reason = Some(format!("orbit ends at t = {t_end}; classification needs t >= {MIN_T_END}"));
        return cls;
    }
    let nn = n - 2.0 * k;
    let mut cands: Vec<(Verdict, (f64, f64))> = Vec::new();
    cands.push((Verdict::P2, (0.0, nn / k)));
    if delta > DELTA_EPS {
        cands.push((Verdict::P3PlusFast, (n + l_inf, 0.0)));
    } else if delta.abs() <= DELTA_EPS {
        cands.push((Verdict::P3PlusSlow, (nn, 0.0)));
    } else {
        let (x4, y4) = p4_coords(p, l_inf);
        if x4 > 0.0 && y4 > 0.0 {
            cands.push((Verdict::P4Plus, (x4, y4)));
        }
    }
    let trail = window(orb, 0.1);
    let last = orb.samples[orb.samples.len() - 1];
    let mut found = None;
    for &(v, c) in &cands {
        if max_dist(trail, c) < PROXIMITY_TOL {
            found = Some((v, c, Method::Proximity));
            break;
        }
    }
    if found.is_none() {
        for &(v, c) in &cands {
            if v != Verdict::P3PlusSlow && envelope_converges(orb, c) {
                found = Some((v, c, Method::Envelope));
                break;
            }
        }
    }
    if found.is_none() && delta.abs() <= DELTA_EPS {
        let target = k / (q - k);
        let ty = last.t * last.y;
        let offset = q * k / ((q - k) * last.t);
        let decreasing = window(orb, 0.4).windows(2).all(|w| w[1].y <= w[0].y);
        if (ty / target - 1.0).abs() < 0.1 && (last.x - nn).abs() <= 2.0 * offset && decreasing {
            found = Some((Verdict::P3PlusSlow, (nn, 0.0), Method::InverseT));
        }
    }
    let Some((verdict, c, method)) = found else {
        // name the nearest stationary point for diagnostics, gated or not
        let mut all = alloc::vec![(0.0, nn / k), (n + l_inf, 0.0)];
        all.push(p4_coords(p, l_inf));
        let d = all.iter().map(|&c| dist(&last, c)).fold(f64::INFINITY, f64::min);
        cls.reason = Some(format!(
            "no sustained approach to an admissible limit point (final point ({}, {}), nearest stationary point at distance {d}, delta = {delta})",
            last.x, last.y
        ));
        return cls;
    };
    cls.verdict = verdict;
    cls.method = Some(method);
    cls.limit_point = Some(c);
    cls.terminal_distance = Some(dist(&last, c));
    cls.constants = constants(orb, p, wt, verdict, delta);
    cls.decay = decay_fit(orb, p, wt, verdict, delta);
    cls
}

fn mean<I: Iterator<Item = f64>>(it: I) -> f64 {
    let (s, c) = it.fold((0.0, 0usize), |a, v| (a.0 + v, a.1 + 1));
    s / c as f64
}

fn constants(orb: &Orbit, p: &ProblemParams, wt: &WeightSpec, v: Verdict, delta: f64) -> Constants {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let nn = n - 2.0 * k;
    let cnk = c_nk(p.n, p.k).unwrap_or(f64::NAN);
    let scale = cnk / (p.lambda * wt.c_rho());
    let e = 1.0 / (q - k);
    let trail = window(orb, 0.1);
    let nu_p = n + wt.l_inf();
    match v {
        Verdict::P2 => {
            let Ok(gamma) = p2_rate(p, wt.l_inf()) else {
                return Constants::default();
            };
            let c1 = mean(trail.iter().map(|s| (gamma * s.t + s.x.ln()).exp()));
            let base = (scale * c1).powf(e);
            Constants {
                fitted: Some(c1),
                c1: None,
                c2: Some(-c1 * nn / (k * k * gamma + k * nn)),
                c3: Some(base * (nn / k).powf(k * e)),
                c4: Some(base * (nn / k).powf(q * e)),
            }
        }
        Verdict::P3PlusFast => {
            let c = mean(trail.iter().map(|s| (delta * s.t + s.y.ln()).exp()));
            Constants {
                fitted: Some(c),
                c1: Some((nu_p * scale * c.powf(k)).powf(e)),
                c2: Some((nu_p * scale * c.powf(q)).powf(e)),
                c3: None,
                c4: None,
            }
        }
        Verdict::P3PlusSlow => {
            let b = k / (q - k);
            Constants {
                c3: Some((scale * b.powf(k) * nn).powf(e)),
                c4: Some((scale * b.powf(q) * nn).powf(e)),
                ..Default::default()
            }
        }
        Verdict::P4Plus => {
            let (xt, yt) = p4_coords(p, wt.l_inf());
            Constants {
                c3: Some((scale * xt * yt.powf(k)).powf(e)),
                c4: Some((scale * xt * yt.powf(q)).powf(e)),
                ..Default::default()
            }
        }
        Verdict::Undetermined => Constants::default(),
    }
}

/// Decay window in r.
pub const DECAY_WINDOW: (f64, f64) = (1e2, 1e4);

fn decay_fit(orb: &Orbit, p: &ProblemParams, wt: &WeightSpec, v: Verdict, delta: f64) -> Option<DecayFit> {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let cnk = c_nk(p.n, p.k).ok()?;
    let (ta, tb) = (DECAY_WINDOW.0.ln(), DECAY_WINDOW.1.ln());
    let pts: Vec<&PhasePoint> =
        orb.samples.iter().filter(|s| s.t >= ta - 1e-9 && s.t <= tb + 1e-9 && s.x > 0.0 && s.y > 0.0).collect();
    if pts.len() < 5 || pts[pts.len() - 1].t - pts[0].t < 1.0 {
        return None;
    }
    let (quantity, variable, predicted) = match v {
        Verdict::P2 => (DecayQuantity::MinusW, DecayVariable::LnR, -(n - 2.0 * k) / k),
        Verdict::P3PlusFast => (DecayQuantity::WPrime, DecayVariable::LnR, -(delta + 1.0)),
        Verdict::P3PlusSlow => (DecayQuantity::MinusW, DecayVariable::LnLnR, -k / (q - k)),
        Verdict::P4Plus => (DecayQuantity::MinusW, DecayVariable::LnR, delta * k / (q - k)),
        Verdict::Undetermined => return None,
    };
    let mut xs = Vec::with_capacity(pts.len());
    let mut ys = Vec::with_capacity(pts.len());
    for s in &pts {
        let lw = ln_minus_w(s, p, wt, cnk);
        xs.push(match variable {
            DecayVariable::LnR => s.t,
            DecayVariable::LnLnR => s.t.ln(),
        });
        ys.push(match quantity {
            DecayQuantity::MinusW => lw,
            DecayQuantity::WPrime => lw + s.y.ln() - s.t,
        });
    }
    let (slope, _, rms) = linear_fit(&xs, &ys);
    Some(DecayFit {
        quantity,
        variable,
        exponent: slope,
        predicted,
        residual: rms,
        r_range: (pts[0].t.exp(), pts[pts.len() - 1].t.exp()),
    })
}

/// A fitted quantity against its predicted value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeCheck {
    pub label: &'static str,
    pub predicted: f64,
    pub fitted: f64,
    /// Relative deviation, or absolute when the prediction is zero.
    pub deviation: f64,
    pub samples: usize,
}

impl SlopeCheck {
    fn new(label: &'static str, predicted: f64, fitted: f64, samples: usize) -> Self {
        Self { label, predicted, fitted, deviation: deviation(fitted, predicted), samples }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeReport {
    pub slope: SlopeCheck,
    /// Refined representation of x(t) near a fast P3+ limit.
    pub refined: Option<SlopeCheck>,
}

/// Samples of the final approach whose distance to `c` lies in [lo, hi].
fn final_approach(orb: &Orbit, c: (f64, f64), lo: f64, hi: f64) -> Vec<PhasePoint> {
    let mut out: Vec<PhasePoint> =
        orb.samples.iter().rev().take_while(|s| dist(s, c) <= hi).filter(|s| dist(s, c) >= lo).copied().collect();
    out.reverse();
    out
}

const MIN_FIT_SAMPLES: usize = 8;

fn fit_slope(pts: &[PhasePoint], y_on_x: bool) -> Result<f64> {
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Numeric(format!("only {} samples near the limit point", pts.len())));
    }
    let xs: Vec<f64> = pts.iter().map(|s| s.x).collect();
    let ys: Vec<f64> = pts.iter().map(|s| s.y).collect();
    Ok(if y_on_x { linear_fit(&xs, &ys).0 } else { linear_fit(&ys, &xs).0 })
}

/// Slope of the invariant curve through the limit point against its prediction.
pub fn slope_checks(orb: &Orbit, cls: &Classification, p: &ProblemParams, wt: &WeightSpec) -> Result<SlopeReport> {
    let (n, k, q) = (p.nf(), p.kf(), p.q);
    let nn = n - 2.0 * k;
    let c = cls.limit_point.ok_or_else(|| Error::Domain(String::from("slope checks need a determined verdict")))?;
    match cls.verdict {
        Verdict::P2 => {
            let gamma = p2_rate(p, wt.l_inf())?;
            let pts = final_approach(orb, c, 1e-6, 1e-2);
            let fitted = fit_slope(&pts, true)?;
            Ok(SlopeReport {
                slope: SlopeCheck::new("dy/dx at P2", -nn / (k * k * gamma + k * nn), fitted, pts.len()),
                refined: None,
            })
        }
        Verdict::P3PlusSlow => {
            let pts = final_approach(orb, c, 1e-6, 0.1);
            let fitted = fit_slope(&pts, true)?;
            Ok(SlopeReport { slope: SlopeCheck::new("dy/dx at P3+", -1.0 / q, fitted, pts.len()), refined: None })
        }
        Verdict::P3PlusFast => {
            let rep = check_assumptions(wt, p);
            let delta = cls.delta;
            let nu_p = n + wt.l_inf();
            let trail = window(orb, 0.1);
            let pts = final_approach(orb, c, 1e-6, 1e-2);
            if rep.rho6_case1 {
                let kappa = rep.kappa.unwrap_or(0.0);
                let cy = cls.constants.fitted.ok_or_else(|| Error::Numeric(String::from("missing fitted constant")))?;
                let fitted = fit_slope(&pts, false)?;
                let refined = mean(trail.iter().map(|s| (nu_p - s.x) * (delta * s.t).exp()));
                Ok(SlopeReport {
                    slope: SlopeCheck::new("dx/dy at P3+", (kappa / cy - q) * nu_p / (nu_p - delta), fitted, pts.len()),
                    refined: Some(SlopeCheck::new(
                        "lim (nu+ - x) e^(delta t)",
                        (q * cy - kappa) * nu_p / (nu_p - delta),
                        refined,
                        trail.len(),
                    )),
                })
            } else if rep.rho6_case2 {
                let nu_hat = rep.nu_hat.ok_or_else(|| Error::Numeric(String::from("missing decay rate of R")))?;
                let field = LVField::new(*p, wt.clone());
                let fitted = fit_slope(&pts, true)?;
                let refined = mean(trail.iter().map(|s| (s.x - nu_p) / (field.nu(s.t) - nu_p)));
                Ok(SlopeReport {
                    slope: SlopeCheck::new("dy/dx at P3+", 0.0, fitted, pts.len()),
                    refined: Some(SlopeCheck::new("lim (x - nu+)/zeta", nu_p / (nu_p - nu_hat), refined, trail.len())),
                })
            } else {
                Err(Error::Assumption(String::from("rho6 fails: no slope prediction at P3+")))
            }
        }
        Verdict::P4Plus => Err(Error::Domain(String::from("no slope prediction at P4+"))),
        Verdict::Undetermined => Err(Error::Domain(String::from("slope checks need a determined verdict"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_ivp, solve_orbit, IntegratorConfig, Provenance};
    use alloc::vec;

    fn pp(n: u32, k: u32, q: f64) -> ProblemParams {
        ProblemParams::new(n, k, q, 1.0).unwrap()
    }

    fn synthetic(p: ProblemParams, pts: &[(f64, f64, f64)]) -> Orbit {
        Orbit {
            samples: pts.iter().map(|&(t, x, y)| PhasePoint { t, x, y }).collect(),
            provenance: Provenance::DirectLv,
            params: p,
            weight: WeightSpec::constant(1.0).unwrap(),
            end: OrbitEnd::Completed,
        }
    }

    #[test]
    fn region_values_examples() {
        let p = pp(3, 1, 3.0);
        let f = LVField::new(p, WeightSpec::constant(1.0).unwrap());
        assert!(region_values(0.0, 1.0, 0.5, &f).0.abs() < 1e-15);
        assert!(region_values(0.0, 0.0, 1.0, &f).0.abs() < 1e-15);
        let (_, w, s) = region_values(0.0, 1.0, 0.5, &f);
        assert!((w - (-1.0 + 1.0 + 0.5)).abs() < 1e-15);
        assert!((s - (3.0 - 1.0 - 1.5)).abs() < 1e-15);
        let p = pp(3, 1, 6.0);
        assert!(g_value(&p, 0.6, 0.4) < 0.0);
    }

    #[test]
    fn inward_invariance_cases() {
        let p = pp(3, 1, 6.0);
        let o = synthetic(p, &[(0.0, 0.6, 0.4), (1.0, 0.6, 0.4)]);
        assert!(check_inward_invariance(&o));
        // G(5, 1) = 5 and G(0, 0.5) = -1.75
        let o = synthetic(p, &[(0.0, 5.0, 1.0), (1.0, 0.0, 0.5), (2.0, 5.0, 1.0)]);
        assert!(!check_inward_invariance(&o));
        assert!(!never_in_g_minus(&o));
    }

    #[test]
    fn example1_is_p2() {
        let p = pp(3, 1, 3.0);
        let wt = WeightSpec::example1(3, 1).unwrap();
        let cfg = IntegratorConfig { rel_tol: 1e-13, abs_tol: 1e-15, ..Default::default() };
        let sol = solve_ivp(&p, &wt, -1.0, 20f64.exp(), &cfg).unwrap();
        let orb = sol.to_orbit().unwrap();
        let cls = classify_orbit(&orb, &p, &wt);
        assert_eq!(cls.verdict, Verdict::P2, "{:?}", cls.reason);
        let d = cls.decay.unwrap();
        assert!(d.rel_error() < 0.01, "{d:?}");
        assert!((cls.constants.c3.unwrap() - 1.0).abs() < 0.02, "{:?}", cls.constants);
        // forward shots drift off the P2 separatrix at rate (n-2k)/k, so only a bounded excursion is expected
        assert!(cls.regions.min_g > -1e-5, "{:?}", cls.regions);
        let sl = slope_checks(&orb, &cls, &p, &wt).unwrap();
        assert!((sl.slope.predicted + 1.0 / 3.0).abs() < 1e-14);
        assert!(sl.slope.deviation < 0.02, "{sl:?}");
    }

    #[test]
    fn short_or_diverged_orbits_are_undetermined() {
        let p = pp(3, 1, 6.0);
        let wt = WeightSpec::constant(1.0).unwrap();
        let f = LVField::new(p, wt.clone());
        let cfg = IntegratorConfig::default();
        let o = solve_orbit(&f, PhasePoint { t: 0.0, x: 0.6, y: 0.4 }, 10.0, &cfg).unwrap();
        let c = classify_orbit(&o, &p, &wt);
        assert_eq!(c.verdict, Verdict::Undetermined);
        assert!(c.reason.unwrap().contains("t >="));
        let o = solve_orbit(&f, PhasePoint { t: 0.0, x: 0.0, y: 2.0 }, 30.0, &cfg).unwrap();
        assert_eq!(classify_orbit(&o, &p, &wt).verdict, Verdict::Undetermined);
    }

    #[test]
    fn constant_p4_orbit() {
        let p = pp(3, 1, 6.0);
        let wt = WeightSpec::constant(1.0).unwrap();
        let f = LVField::new(p, wt.clone());
        let o = solve_orbit(&f, PhasePoint { t: 0.0, x: 0.6, y: 0.4 }, 30.0, &IntegratorConfig::default()).unwrap();
        let c = classify_orbit(&o, &p, &wt);
        assert_eq!(c.verdict, Verdict::P4Plus);
        assert!(c.p4_focus);
        assert!(check_inward_invariance(&o));
        let d = c.decay.unwrap();
        assert!((d.exponent + 0.4).abs() < 1e-8);
        assert!(slope_checks(&o, &c, &p, &wt).is_err());
    }

    #[test]
    fn delta_gating() {
        // a P3 approach under a weight with delta < 0 is never reported as P3+
        let p = pp(3, 1, 6.0);
        let wt = WeightSpec::constant(1.0).unwrap();
        let pts: Vec<(f64, f64, f64)> = (0..100).map(|i| (i as f64 * 0.3, 3.0, 1e-8)).collect();
        let c = classify_orbit(&synthetic(p, &pts), &p, &wt);
        assert_eq!(c.verdict, Verdict::Undetermined);
        let _ = vec![0];
    }
}
