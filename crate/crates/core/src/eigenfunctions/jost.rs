//! Jost solutions of `v'' + (λ² - q) v = 0` by Neumann iteration.
//!
//! The solution is written as `v = a(x) e^{iλx} + b(x) e^{-iλx}` (variation of
//! parameters), so that `m(x, λ) = a + b e^{-2iλx}` solves
//!
//! ```text
//! m(x) = 1 + ∫_x^∞ (e^{2iλ(t-x)} - 1)/(2iλ) q(t) m(t) dt.
//! ```
//!
//! The kernel is separable, so each Neumann sweep is two cumulative integrals
//! against `1` and `e^{±2iλt}`, done with linear Filon weights. Where the
//! operator-norm bound of a stretch exceeds 1/2 the half-line is cut into
//! chunks and the iteration restarts from the data at each chunk's right end.
//! Steps in `A` are crossed with their transfer matrices.

use num_complex::Complex64;

use crate::coefficients::{CoefficientModel, Interface};
use crate::quadrature::{filon_linear, integrate_to_infinity};
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 400;
const CHUNK_BOUND: f64 = 0.5;
/// Relative panel width in the graded grid.
const GRADING: f64 = 0.005;

#[derive(Debug, Clone)]
pub struct JostSolution {
    pub lambda: f64,
    /// Increasing sample points; a step location appears twice (left, then right limit).
    pub grid: Vec<f64>,
    pub m_values: Vec<Complex64>,
    /// `max |m - 1|` over the grid.
    pub sup_deviation: f64,
    /// Operator-norm bound `T = tail_bv(x0)/|λ|` of the Volterra map on `[x0, ∞)`.
    pub operator_bound: f64,
    /// Total Neumann sweeps summed over all chunks.
    pub iterations: usize,
    /// Largest final increment of the Neumann iteration (the discrete residual).
    pub residual: f64,
    /// Truncation point beyond which `m` is taken as its tail value.
    pub truncation: f64,
    q: Vec<f64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl JostSolution {
    fn locate(&self, x: f64) -> usize {
        let idx = self.grid.partition_point(|&g| g <= x);
        idx.saturating_sub(1).min(self.grid.len() - 2)
    }

    /// Amplitudes at `x`: one Filon panel from the node to the right of `x`, so the
    /// oscillating part of `b` is resolved between nodes.
    fn coefficients_at(&self, x: f64) -> (Complex64, Complex64) {
        if x >= self.truncation {
            let n = self.grid.len() - 1;
            return (self.a[n], self.b[n]);
        }
        let i = self.locate(x);
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let s = if x1 > x0 { ((x - x0) / (x1 - x0)).clamp(0.0, 1.0) } else { 1.0 };
        if self.lambda == 0.0 || s == 1.0 {
            return (self.a[i] * (1.0 - s) + self.a[i + 1] * s, self.b[i] * (1.0 - s) + self.b[i + 1] * s);
        }
        let lambda = self.lambda;
        let x = x0 + s * (x1 - x0);
        let h = x1 - x;
        let lerp = |u: Complex64, w: Complex64| u * (1.0 - s) + w * s;
        let fa0 = lerp(self.q[i] * self.a[i], self.q[i + 1] * self.a[i + 1]);
        let fb0 = lerp(self.q[i] * self.b[i], self.q[i + 1] * self.b[i + 1]);
        let (fa1, fb1) = (self.q[i + 1] * self.a[i + 1], self.q[i + 1] * self.b[i + 1]);
        let (wm0, wm1) = filon_linear(-2.0 * lambda, h);
        let (wp0, wp1) = filon_linear(2.0 * lambda, h);
        let em = Complex64::from_polar(1.0, -2.0 * lambda * x);
        let ep = Complex64::from_polar(1.0, 2.0 * lambda * x);
        let ia = 0.5 * h * (fa0 + fa1) + em * h * (wm0 * fb0 + wm1 * fb1);
        let ib = ep * h * (wp0 * fa0 + wp1 * fa1) + 0.5 * h * (fb0 + fb1);
        let il2 = Complex64::new(0.0, 2.0 * lambda);
        (self.a[i + 1] - ia / il2, self.b[i + 1] + ib / il2)
    }

    /// `m(x, λ)` by linear interpolation of the slowly varying amplitudes.
    pub fn m_at(&self, x: f64) -> Complex64 {
        let (a, b) = self.coefficients_at(x);
        if self.lambda == 0.0 {
            return a;
        }
        a + b * Complex64::from_polar(1.0, -2.0 * self.lambda * x)
    }

    /// `(v, v')` of the Jost solution `v ~ e^{iλx}`.
    pub fn v_at(&self, x: f64) -> (Complex64, Complex64) {
        let (a, b) = self.coefficients_at(x);
        if self.lambda == 0.0 {
            return (a, b);
        }
        let e = Complex64::from_polar(1.0, self.lambda * x);
        let il = Complex64::new(0.0, self.lambda);
        (a * e + b / e, il * (a * e - b / e))
    }

    /// `u = A^{-1/2} v`, the Jost solution of the original equation.
    pub fn u_at(&self, model: &CoefficientModel, x: f64) -> Complex64 {
        self.v_at(x).0 / model.a_unchecked(x).sqrt()
    }
}

/// Solves the Jost problem on `[x0, ∞)` to Volterra tolerance `tol`.
pub fn solve_jost(model: &CoefficientModel, lambda: f64, x0: f64, tol: f64) -> Result<JostSolution> {
    model.validate()?;
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    if !(x0 >= model.domain_floor) {
        return Err(Error::Domain { x: x0, floor: model.domain_floor });
    }
    let tail0 = model.tail_bv(x0)?;
    let truncation = truncation_point(model, x0, tol)?;
    let grid = build_grid(model, lambda, x0, truncation);
    let operator_bound = if lambda == 0.0 { f64::INFINITY } else { tail0 / lambda.abs() };
    let mut sol = if lambda == 0.0 {
        sweep_degenerate(model, &grid, tol, truncation)?
    } else {
        sweep(model, lambda, &grid, tol, truncation)?
    };
    sol.operator_bound = operator_bound;
    Ok(sol)
}

/// Smallest doubling point `X ≥ max(x0, last step)` with `tail_bv(X) < tol/10`.
fn truncation_point(model: &CoefficientModel, x0: f64, tol: f64) -> Result<f64> {
    let last = model.steps.iter().map(|s| s.location).fold(x0, f64::max);
    let mut x = (last * 1.5).max(last + 1.0);
    for _ in 0..80 {
        let t = model.tail_bv(x)?;
        if t < tol / 10.0 {
            return Ok(x);
        }
        x *= 2.0;
    }
    Err(Error::NeumannDivergence { lambda: f64::NAN, iterations: 0, residual: model.tail_bv(x)? })
}

/// Graded grid on `[x0, X]`: relative spacing `GRADING`, capped so that every
/// panel carries at most a quarter of a unit of `|q| h / |λ|`. Step locations are doubled.
fn build_grid(model: &CoefficientModel, lambda: f64, x0: f64, x_end: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    let lam = lambda.abs();
    // a piece after the first starts at a step already pushed as the previous end: the node doubles
    for (lo, hi) in model.pieces(x0, x_end) {
        grid.push(lo);
        let mut x = lo;
        while x < hi {
            let mut h = GRADING * x.max(0.05);
            let q = model.potential(x).abs().max(model.potential_left((x + h).min(hi)).abs());
            if lam > 0.0 && q > 0.0 {
                h = h.min(0.25 * lam / q);
            } else if q > 0.0 {
                h = h.min((0.25 / q).sqrt());
            }
            h = h.max(1e-12 * x.max(1.0));
            x = if x + h >= hi - 1e-12 * hi { hi } else { x + h };
            grid.push(x);
        }
    }
    grid
}

struct Chunk {
    lo: usize,
    hi: usize,
}

/// Splits `[start, end]` (grid indices) into chunks with `Σ |q| h · scale ≤ CHUNK_BOUND`.
fn chunks(q: &[f64], grid: &[f64], start: usize, end: usize, scale: impl Fn(f64) -> f64) -> Vec<Chunk> {
    let mut out = Vec::new();
    let mut hi = end;
    let mut acc = 0.0;
    let mut i = end;
    while i > start {
        let h = grid[i] - grid[i - 1];
        let w = 0.5 * (q[i].abs() + q[i - 1].abs()) * scale(h);
        if acc + w > CHUNK_BOUND && i < hi {
            out.push(Chunk { lo: i, hi });
            hi = i;
            acc = 0.0;
        }
        acc += w;
        i -= 1;
    }
    out.push(Chunk { lo: start, hi });
    out
}

fn sweep(model: &CoefficientModel, lambda: f64, grid: &[f64], tol: f64, truncation: f64) -> Result<JostSolution> {
    let n = grid.len();
    let il2 = Complex64::new(0.0, 2.0 * lambda);
    // potential on each node, taking the left value at the first copy of a doubled node
    let q: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n && grid[i + 1] == grid[i] { model.potential_left(grid[i]) } else { model.potential(grid[i]) })
        .collect();
    let interfaces = model.interfaces();

    let mut a = vec![Complex64::new(1.0, 0.0); n];
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    // tail beyond the truncation point: non-oscillatory part of ∫ q a
    let q_tail = integrate_to_infinity(|t| model.potential(t), truncation, 1e-10, 1e-16).map(|r| r.value)?;
    a[n - 1] = Complex64::new(1.0, 0.0) - q_tail / il2;

    // pieces between doubled nodes, processed right to left
    let mut bounds = vec![0usize];
    for i in 1..n {
        if grid[i] == grid[i - 1] {
            bounds.push(i);
        }
    }
    bounds.push(n);
    let mut iterations = 0;
    let mut residual: f64 = 0.0;
    for p in (0..bounds.len() - 1).rev() {
        let (start, stop) = (bounds[p], bounds[p + 1] - 1);
        if stop < n - 1 {
            // cross the step at grid[stop + 1] == grid[stop + 2]... data sits at stop+1 (right limit)
            let right = stop + 1;
            let x = grid[right];
            let iface = interfaces.iter().find(|i| i.location == x).copied();
            let (ar, br) = (a[right], b[right]);
            let (al, bl) = cross_left(iface, lambda, x, ar, br);
            a[stop] = al;
            b[stop] = bl;
        }
        let scale = |_h: f64| 1.0 / lambda.abs();
        for ch in chunks(&q, grid, start, stop, scale) {
            let (it, res) = neumann_chunk(lambda, grid, &q, &mut a, &mut b, ch.lo, ch.hi, tol)?;
            iterations += it;
            residual = residual.max(res);
        }
    }
    let m_values: Vec<Complex64> =
        (0..n).map(|i| a[i] + b[i] * Complex64::from_polar(1.0, -2.0 * lambda * grid[i])).collect();
    let sup_deviation = m_values.iter().map(|m| (m - 1.0).norm()).fold(0.0, f64::max);
    Ok(JostSolution {
        lambda,
        grid: grid.to_vec(),
        m_values,
        sup_deviation,
        operator_bound: 0.0,
        iterations,
        residual,
        truncation,
        q,
        a,
        b,
    })
}

fn cross_left(iface: Option<Interface>, lambda: f64, x: f64, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let e = Complex64::from_polar(1.0, lambda * x);
    let il = Complex64::new(0.0, lambda);
    let v = a * e + b / e;
    let dv = il * (a * e - b / e);
    let (v, dv) = match iface {
        Some(i) => {
            let m = i.inverse();
            (v * m[0][0] + dv * m[0][1], v * m[1][0] + dv * m[1][1])
        }
        None => (v, dv),
    };
    let al = 0.5 * (v + dv / il) / e;
    let bl = 0.5 * (v - dv / il) * e;
    (al, bl)
}

/// Neumann iteration on grid indices `[lo, hi]` with data fixed at `hi`.
#[allow(clippy::too_many_arguments)]
fn neumann_chunk(
    lambda: f64,
    grid: &[f64],
    q: &[f64],
    a: &mut [Complex64],
    b: &mut [Complex64],
    lo: usize,
    hi: usize,
    tol: f64,
) -> Result<(usize, f64)> {
    let il2 = Complex64::new(0.0, 2.0 * lambda);
    let (ar, br) = (a[hi], b[hi]);
    for i in lo..hi {
        a[i] = ar;
        b[i] = br;
    }
    let mut t_bound = 0.0;
    for i in lo..hi {
        t_bound += 0.5 * (q[i].abs() + q[i + 1].abs()) * (grid[i + 1] - grid[i]) / lambda.abs();
    }
    let stop = tol * (1.0 - t_bound.min(0.99));
    let mut last = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        // cumulative integrals from the right end of the chunk
        let mut ia = Complex64::new(0.0, 0.0);
        let mut ib = Complex64::new(0.0, 0.0);
        let mut change: f64 = 0.0;
        let mut new_a = vec![Complex64::new(0.0, 0.0); hi - lo];
        let mut new_b = vec![Complex64::new(0.0, 0.0); hi - lo];
        for i in (lo..hi).rev() {
            let (t0, t1) = (grid[i], grid[i + 1]);
            let h = t1 - t0;
            if h > 0.0 {
                // ∫ q (a + b e^{-2iλt}) and ∫ q (a e^{2iλt} + b) over [t0, t1]
                let fa0 = q[i] * a[i];
                let fa1 = q[i + 1] * a[i + 1];
                let fb0 = q[i] * b[i];
                let fb1 = q[i + 1] * b[i + 1];
                let plain_a = 0.5 * h * (fa0 + fa1);
                let plain_b = 0.5 * h * (fb0 + fb1);
                let (wm0, wm1) = filon_linear(-2.0 * lambda, h);
                let (wp0, wp1) = filon_linear(2.0 * lambda, h);
                let em = Complex64::from_polar(1.0, -2.0 * lambda * t0);
                let ep = Complex64::from_polar(1.0, 2.0 * lambda * t0);
                let osc_b = em * h * (wm0 * fb0 + wm1 * fb1);
                let osc_a = ep * h * (wp0 * fa0 + wp1 * fa1);
                ia += plain_a + osc_b;
                ib += osc_a + plain_b;
            }
            let na = ar - ia / il2;
            let nb = br + ib / il2;
            change = change.max((na - a[i]).norm()).max((nb - b[i]).norm());
            new_a[i - lo] = na;
            new_b[i - lo] = nb;
        }
        a[lo..hi].copy_from_slice(&new_a);
        b[lo..hi].copy_from_slice(&new_b);
        if change <= stop {
            return Ok((it, change));
        }
        if !change.is_finite() || (it > 50 && change > last) {
            return Err(Error::NeumannDivergence { lambda, iterations: it, residual: change });
        }
        last = change;
    }
    Err(Error::NeumannDivergence { lambda, iterations: MAX_ITERATIONS, residual: last })
}

/// `λ = 0`: kernel `(t - x)`, written as `v = a + b (x - x_R)` with `a` the value and `b` the slope.
fn sweep_degenerate(model: &CoefficientModel, grid: &[f64], tol: f64, truncation: f64) -> Result<JostSolution> {
    let n = grid.len();
    let q: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n && grid[i + 1] == grid[i] { model.potential_left(grid[i]) } else { model.potential(grid[i]) })
        .collect();
    let interfaces = model.interfaces();
    // value v and slope v'
    let mut v = vec![1.0; n];
    let mut dv = vec![0.0; n];
    let mut bounds = vec![0usize];
    for i in 1..n {
        if grid[i] == grid[i - 1] {
            bounds.push(i);
        }
    }
    bounds.push(n);
    let mut iterations = 0;
    let mut residual: f64 = 0.0;
    for p in (0..bounds.len() - 1).rev() {
        let (start, stop) = (bounds[p], bounds[p + 1] - 1);
        if stop < n - 1 {
            let right = stop + 1;
            let x = grid[right];
            if let Some(i) = interfaces.iter().find(|i| i.location == x) {
                let m = i.inverse();
                let (vr, dr) = (v[right], dv[right]);
                v[stop] = m[0][0] * vr + m[0][1] * dr;
                dv[stop] = m[1][0] * vr + m[1][1] * dr;
            } else {
                v[stop] = v[right];
                dv[stop] = dv[right];
            }
        }
        let span = grid[stop] - grid[start];
        for ch in chunks(&q, grid, start, stop, |_h| span.max(1e-300)) {
            let (lo, hi) = (ch.lo, ch.hi);
            let (vr, dr, xr) = (v[hi], dv[hi], grid[hi]);
            let stop_tol = tol * 0.5;
            let mut done = false;
            for it in 1..=MAX_ITERATIONS {
                let mut i0 = 0.0;
                let mut i1 = 0.0;
                let mut change: f64 = 0.0;
                let mut nv = vec![0.0; hi - lo];
                let mut nd = vec![0.0; hi - lo];
                for i in (lo..hi).rev() {
                    let h = grid[i + 1] - grid[i];
                    let f0 = q[i] * v[i];
                    let f1 = q[i + 1] * v[i + 1];
                    i0 += 0.5 * h * (f0 + f1);
                    i1 += 0.5 * h * (grid[i] * f0 + grid[i + 1] * f1);
                    let x = grid[i];
                    let val = vr + dr * (x - xr) + i1 - x * i0;
                    let slope = dr - i0;
                    change = change.max((val - v[i]).abs());
                    nv[i - lo] = val;
                    nd[i - lo] = slope;
                }
                v[lo..hi].copy_from_slice(&nv);
                dv[lo..hi].copy_from_slice(&nd);
                iterations += 1;
                if change <= stop_tol {
                    residual = residual.max(change);
                    done = true;
                    break;
                }
                if !change.is_finite() {
                    return Err(Error::NeumannDivergence { lambda: 0.0, iterations: it, residual: change });
                }
            }
            if !done {
                return Err(Error::NeumannDivergence { lambda: 0.0, iterations: MAX_ITERATIONS, residual: f64::NAN });
            }
        }
    }
    let m_values: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let sup_deviation = v.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    Ok(JostSolution {
        lambda: 0.0,
        grid: grid.to_vec(),
        m_values,
        sup_deviation,
        operator_bound: f64::INFINITY,
        iterations,
        residual,
        truncation,
        q,
        a: v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        b: dv.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
    })
}
