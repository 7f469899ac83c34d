//! Quadrature: adaptive Gauss-Kronrod (7/15) and a Clenshaw-Curtis
//! cumulative-integration matrix on [0, 1].

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One Kronrod panel: (K15 estimate, |K15 - G7|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive bisection on Kronrod panels until the error estimate meets
/// `max(abs_tol, rel_tol*|I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut stack: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    stack.push((a, b, v, e));
    let mut total = v;
    let mut err = e;
    let mut evals = 1usize;
    while err > abs_tol.max(rel_tol * total.abs()) {
        // split the worst panel
        let (idx, _) = stack.iter().enumerate().fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, pv, pe) = stack.swap_remove(idx);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&mut f, pa, m);
        let (v2, e2) = gk15(&mut f, m, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        stack.push((pa, m, v1, e1));
        stack.push((m, pb, v2, e2));
        evals += 2;
        if !total.is_finite() {
            return Err(Error::numeric("non-finite integrand in quadrature"));
        }
        if evals > 4000 || (m - pa).abs() <= 1e-15 * m.abs().max(1e-300) {
            // recompute to remove drift before judging
            let (s, es) = stack.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.2, acc.1 + p.3));
            if es <= abs_tol.max(rel_tol * s.abs()) {
                return Ok(s);
            }
            return Err(Error::numeric("adaptive quadrature did not converge"));
        }
    }
    Ok(stack.iter().map(|p| p.2).sum())
}

/// Clenshaw-Curtis nodes on [0,1] (clustered at both ends) together with the
/// matrix `Q` such that `(Q f)_i ≈ ∫_0^{r_i} f` for the polynomial interpolant of `f`.
#[derive(Debug, Clone)]
pub struct CumulativeRule {
    pub nodes: Vec<f64>,
    q: Vec<f64>,
}

impl CumulativeRule {
    pub fn new(intervals: usize) -> Self {
        let n = intervals;
        let np = n + 1;
        let nodes: Vec<f64> = (0..np).map(|i| 0.5 * (1.0 - (PI * i as f64 / n as f64).cos())).collect();
        // node i sits at x = cos(π (n-i)/n) on [-1,1]
        let cosm = |m: usize, j: usize| (PI * ((m * j) % (2 * n)) as f64 / n as f64).cos();
        // values -> Chebyshev coefficients (on the x-ordering j = n - i)
        let mut to_coef = vec![0.0; np * np];
        for m in 0..np {
            for i in 0..np {
                let j = n - i;
                let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                let mut c = 2.0 / n as f64 * w * cosm(m, j);
                if m == 0 || m == n {
                    c *= 0.5;
                }
                to_coef[m * np + i] = c;
            }
        }
        // coefficients -> antiderivative coefficients (degree n+1), F(-1) = 0
        let nd = n + 2;
        let mut integ = vec![0.0; nd * np];
        for m in 1..nd {
            let cm1 = m - 1;
            if m == 1 {
                integ[np] += 1.0; // d_1 += c_0
                if 2 < np {
                    integ[np + 2] -= 0.5;
                }
            } else {
                let f = 1.0 / (2.0 * m as f64);
                if cm1 < np {
                    integ[m * np + cm1] += f;
                }
                if m + 1 < np {
                    integ[m * np + m + 1] -= f;
                }
            }
        }
        for c in 0..np {
            let mut s = 0.0;
            for m in 1..nd {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * integ[m * np + c];
            }
            integ[c] = -s;
        }
        // evaluate the antiderivative at the nodes: T_m(cos θ) = cos(mθ)
        let mut ed = vec![0.0; np * np];
        for i in 0..np {
            let theta = PI * (n - i) as f64 / n as f64;
            for m in 0..nd {
                let t = (m as f64 * theta).cos();
                let row = &integ[m * np..(m + 1) * np];
                for (c, rv) in row.iter().enumerate() {
                    ed[i * np + c] += rv * t;
                }
            }
        }
        // compose with values -> coefficients; the 1/2 maps [-1,1] to [0,1]
        let mut qq = vec![0.0; np * np];
        for i in 0..np {
            for c in 0..np {
                let e = ed[i * np + c];
                if e == 0.0 {
                    continue;
                }
                let src = &to_coef[c * np..(c + 1) * np];
                let dst = &mut qq[i * np..(i + 1) * np];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += 0.5 * e * s;
                }
            }
        }
        Self { nodes, q: qq }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Cumulative integrals `∫_0^{r_i} f` from values at the nodes.
    pub fn cumulative(&self, f: &[f64], out: &mut [f64]) {
        let np = self.nodes.len();
        for (o, row) in out.iter_mut().zip(self.q.chunks_exact(np)) {
            *o = row.iter().zip(f).map(|(a, b)| a * b).sum();
        }
    }
}
