//! Quadrature rules shared by the solvers.
//!
//! Adaptive Gauss–Kronrod (7/15) for smooth integrals with reliable error
//! estimates, Gauss–Legendre panels for the spectral grids, grid weights for
//! sampled densities, and linear Filon weights for integrals against `e^{iωt}`.

use num_complex::Complex64;

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed estimate
/// drops below `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = kronrod15(&f, lo, hi);
    let mut panels = vec![(lo, hi, v, e)];
    let mut total = v;
    let mut err = e;
    for _ in 0..2000 {
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Integral { value: sign * total, error: err });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (pa, pb, pv, pe) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        let (lv, le) = kronrod15(&f, pa, mid);
        let (rv, re) = kronrod15(&f, mid, pb);
        total += lv + rv - pv;
        err += le + re - pe;
        panels.push((pa, mid, lv, le));
        panels.push((mid, pb, rv, re));
    }
    // Summing the estimates again avoids drift from the incremental updates.
    let err: f64 = panels.iter().map(|p| p.3).sum();
    if err <= abs_tol.max(rel_tol * total.abs()) {
        return Ok(Integral { value: sign * total, error: err });
    }
    Err(Error::Quadrature { a, b, estimate: err, tol: abs_tol.max(rel_tol * total.abs()) })
}

/// Integral of `f` over `[a, ∞)` through the substitution `t = a + s/(1-s)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral> {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - s;
        let t = a + s / one_minus;
        let v = f(t) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, rel_tol, abs_tol)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels of `order` nodes.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Quadrature weights for samples on an increasing grid.
///
/// Uniform grids with an odd number of points get composite Simpson weights;
/// everything else gets trapezoid weights.
pub fn grid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let uniform = grid.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
    if uniform && n % 2 == 1 && n >= 3 {
        let mut w = vec![0.0; n];
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = if i == 0 || i == n - 1 {
                h / 3.0
            } else if i % 2 == 1 {
                4.0 * h / 3.0
            } else {
                2.0 * h / 3.0
            };
        }
        return w;
    }
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let d = 0.5 * (grid[i + 1] - grid[i]);
        w[i] += d;
        w[i + 1] += d;
    }
    w
}

/// Uniform grid of `n` points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + i as f64 * h }).collect()
}

/// Weights `(w0, w1)` with `∫_0^h e^{iωs} f(s) ds ≈ h (w0 f(0) + w1 f(h))` for linear `f`.
pub fn filon_linear(omega: f64, h: f64) -> (Complex64, Complex64) {
    let theta = omega * h;
    let i = Complex64::i();
    if theta.abs() < 1e-3 {
        let t2 = theta * theta;
        let e_int = Complex64::new(1.0 - t2 / 6.0, theta / 2.0 - theta * t2 / 24.0);
        let w1 = Complex64::new(0.5 - t2 / 8.0, theta / 3.0 - theta * t2 / 30.0);
        return (e_int - w1, w1);
    }
    let e = Complex64::new(theta.cos(), theta.sin());
    let e_int = (e - 1.0) / (i * theta);
    let w1 = e / (i * theta) + (e - 1.0) / (theta * theta);
    (e_int - w1, w1)
}
