//! Adaptive explicit Runge-Kutta integration with an embedded 9(8) pair.
//!
//! Steps are clamped so that every requested output time is hit exactly; the
//! step-size proposal is kept independent of the clamping.

mod verner98;

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use verner98::{A, B_HIGH, B_LOW, C, STAGES};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Upper bound on |h|.
    pub h_max: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_steps: 1_000_000, h_max: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed,
    /// The caller's stop predicate fired.
    Stopped,
    StepUnderflow,
    MaxSteps,
    NonFinite,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub t_last: f64,
    pub y_last: [f64; N],
    pub stats: Stats,
    pub termination: Termination,
}

fn err_norm<const N: usize>(y: &[f64; N], yh: &[f64; N], yl: &[f64; N], ctl: &StepControl) -> f64 {
    let mut e: f64 = 0.0;
    for i in 0..N {
        let sc = ctl.abs_tol + ctl.rel_tol * y[i].abs().max(yh[i].abs());
        e = e.max((yh[i] - yl[i]).abs() / sc);
    }
    e
}

/// Integrate `y' = f(t, y)` from `(t0, y0)` through the monotone list `outputs`
/// (all on one side of `t0`; an entry equal to `t0` records the initial state).
/// `stop` is consulted after every accepted step.
pub fn integrate<const N: usize, F, S>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    outputs: &[f64],
    ctl: &StepControl,
    mut stop: S,
) -> Trajectory<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N]) -> bool,
{
    let mut tr = Trajectory {
        t: Vec::with_capacity(outputs.len()),
        y: Vec::with_capacity(outputs.len()),
        t_last: t0,
        y_last: y0,
        stats: Stats::default(),
        termination: Termination::Completed,
    };
    let mut idx = 0;
    while idx < outputs.len() && outputs[idx] == t0 {
        tr.t.push(t0);
        tr.y.push(y0);
        idx += 1;
    }
    if idx == outputs.len() {
        return tr;
    }
    let dir = if outputs[outputs.len() - 1] >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    tr.stats.evaluations += 1;

    // initial step from the scales of y and f
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for i in 0..N {
        let sc = ctl.abs_tol + ctl.rel_tol * y[i].abs();
        d0 = d0.max(y[i].abs() / sc);
        d1 = d1.max(k1[i].abs() / sc);
    }
    let span = (outputs[outputs.len() - 1] - t0).abs();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span).min(ctl.h_max).max(1e-12 * span.max(1.0));

    let mut k = [[0.0; N]; STAGES];
    loop {
        if tr.stats.steps + tr.stats.rejected >= ctl.max_steps {
            tr.termination = Termination::MaxSteps;
            break;
        }
        let mut h_try = h.min(ctl.h_max);
        let mut hit = false;
        let target = outputs[idx];
        if (t + dir * h_try - target) * dir >= 0.0 {
            h_try = (target - t).abs();
            hit = true;
        }
        if h_try < 1e-14 * t.abs().max(1.0) && !hit {
            tr.termination = Termination::StepUnderflow;
            break;
        }
        let hs = dir * h_try;
        k[0] = k1;
        for s in 1..STAGES {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += hs * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * hs, &ys);
        }
        tr.stats.evaluations += STAGES - 1;
        let mut yh = y;
        let mut yl = y;
        for (s, ks) in k.iter().enumerate() {
            for i in 0..N {
                yh[i] += hs * B_HIGH[s] * ks[i];
                yl[i] += hs * B_LOW[s] * ks[i];
            }
        }
        let err = err_norm(&y, &yh, &yl, ctl);
        if !err.is_finite() || yh.iter().any(|v| !v.is_finite()) {
            tr.stats.rejected += 1;
            h = 0.2 * h_try;
            if h < 1e-14 * t.abs().max(1.0) {
                tr.termination = Termination::NonFinite;
                break;
            }
            continue;
        }
        if err > 1.0 {
            tr.stats.rejected += 1;
            h = h_try * (0.9 * err.powf(-1.0 / 9.0)).max(0.2);
            continue;
        }
        tr.stats.steps += 1;
        t = if hit { target } else { t + hs };
        y = yh;
        k1 = f(t, &y);
        tr.stats.evaluations += 1;
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-1.0 / 9.0)).clamp(0.2, 5.0) };
        h = if hit { h.max(h_try * fac) } else { h_try * fac };
        if hit {
            while idx < outputs.len() && (outputs[idx] - t) * dir <= 0.0 {
                tr.t.push(outputs[idx]);
                tr.y.push(y);
                idx += 1;
            }
        }
        if stop(t, &y) {
            tr.termination = Termination::Stopped;
            break;
        }
        if idx == outputs.len() {
            break;
        }
    }
    tr.t_last = t;
    tr.y_last = y;
    tr
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn tableau_is_consistent() {
        for s in 0..STAGES {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-13, "stage {s}");
            for a in &A[s][s..] {
                assert_eq!(*a, 0.0);
            }
        }
        assert!((B_HIGH.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!((B_LOW.iter().sum::<f64>() - 1.0).abs() < 1e-13);
    }

    fn fixed_step(b: &[f64; STAGES], n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let (mut t, mut y) = (0.0f64, 1.0f64);
        for _ in 0..n {
            let mut k = [0.0; STAGES];
            for s in 0..STAGES {
                let ys = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
                k[s] = ys * (t + C[s] * h).cos();
            }
            y += h * (0..STAGES).map(|s| b[s] * k[s]).sum::<f64>();
            t += h;
        }
        (y - 1f64.sin().exp()).abs()
    }

    #[test]
    fn empirical_orders() {
        let hi = (fixed_step(&B_HIGH, 2) / fixed_step(&B_HIGH, 4)).log2();
        let lo = (fixed_step(&B_LOW, 2) / fixed_step(&B_LOW, 4)).log2();
        assert!(hi > 8.8, "high order {hi}");
        assert!(lo > 7.8 && lo < 9.0, "low order {lo}");
    }

    #[test]
    fn harmonic_oscillator_hits_outputs() {
        let outs: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
        let ctl = StepControl { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
        let tr = integrate(|_t, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], &outs, &ctl, |_, _| false);
        assert_eq!(tr.termination, Termination::Completed);
        assert_eq!(tr.t, outs);
        for (t, y) in tr.t.iter().zip(&tr.y) {
            assert!((y[0] - t.sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn backward_and_stop() {
        let outs = vec![0.0, -1.0, -2.0];
        let tr = integrate(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], &outs, &StepControl::default(), |_, _| false);
        assert!((tr.y[2][0] - (-2f64).exp()).abs() < 1e-10);
        let outs = vec![10.0];
        let tr =
            integrate(|_t, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], &outs, &StepControl::default(), |_, y| y[0] > 1e6);
        assert_eq!(tr.termination, Termination::Stopped);
        assert!(tr.t_last < 1.0);
    }
}
