//! Normalized characters `φ_λ` with `φ_λ(0+) = 1`.

use num_complex::Complex64;

use super::jost::{solve_jost, JostSolution};
use crate::coefficients::{CoefficientModel, Family};
use crate::special::{jacobi_series, normalized_bessel, normalized_bessel_dx};
use crate::{Error, Result};

/// Volterra tolerance used for Jost-assembled characters.
pub const JOST_TOL: f64 = 1e-10;

/// Jacobi characters switch from the ODE sweep to the Jost representation here.
const JACOBI_MATCHING: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CharacterSource {
    ClosedForm,
    OdeIntegrated,
    JostAssembled,
}

#[derive(Debug, Clone)]
enum Kind {
    Constant,
    Bessel { alpha: f64 },
    Jacobi { alpha: f64, beta: f64, tail: Option<(Complex64, Box<JostSolution>)> },
    Assembled { alpha: f64, matching: f64, amplitude: Complex64, jost: Box<JostSolution> },
}

/// The character `φ_λ` of one model at one spectral parameter.
#[derive(Debug, Clone)]
pub struct Character {
    pub lambda: f64,
    pub source: CharacterSource,
    model: CoefficientModel,
    kind: Kind,
}

impl Character {
    pub fn new(model: &CoefficientModel, lambda: f64) -> Result<Self> {
        model.validate()?;
        let lambda = lambda.abs();
        if !lambda.is_finite() {
            return Err(Error::Invalid(format!("lambda = {lambda} is not finite")));
        }
        let (source, kind) = match model.family {
            Family::Bessel { .. } | Family::PerturbedBessel { .. } if lambda == 0.0 => {
                (CharacterSource::ClosedForm, Kind::Constant)
            }
            Family::Bessel { alpha } => (CharacterSource::ClosedForm, Kind::Bessel { alpha }),
            Family::PerturbedBessel { alpha } if model.steps.is_empty() => {
                (CharacterSource::ClosedForm, Kind::Bessel { alpha })
            }
            Family::PerturbedBessel { alpha } => {
                let first = model.steps[0].location;
                let matching = (0.75 * first).max(model.domain_floor);
                let jost = solve_jost(model, lambda, matching, JOST_TOL)?;
                let phi = normalized_bessel(alpha, lambda * matching);
                let dphi = normalized_bessel_dx(alpha, lambda, matching);
                let amplitude = matching_amplitude(model, matching, phi, dphi, &jost);
                (CharacterSource::JostAssembled, Kind::Assembled { alpha, matching, amplitude, jost: Box::new(jost) })
            }
            Family::Jacobi { alpha, beta } => {
                let tail = if lambda > 0.0 {
                    let (phi, dphi) = jacobi_values(alpha, beta, lambda, &[JACOBI_MATCHING])[0];
                    let jost = solve_jost(model, lambda, JACOBI_MATCHING, JOST_TOL)?;
                    let amplitude = matching_amplitude(model, JACOBI_MATCHING, phi, dphi, &jost);
                    Some((amplitude, Box::new(jost)))
                } else {
                    None
                };
                (CharacterSource::OdeIntegrated, Kind::Jacobi { alpha, beta, tail })
            }
        };
        Ok(Self { lambda, source, model: model.clone(), kind })
    }

    /// `φ_λ(x)`; `x = 0` gives the normalization value.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_many(&[x])[0]
    }

    /// `φ_λ` at many points (any order). Jacobi characters integrate one ODE sweep.
    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        let l = self.lambda;
        match &self.kind {
            Kind::Constant => vec![1.0; xs.len()],
            Kind::Bessel { alpha } => xs.iter().map(|&x| normalized_bessel(*alpha, l * x)).collect(),
            Kind::Jacobi { alpha, beta, tail } => {
                let near: Vec<f64> = xs.iter().map(|&x| x.abs()).filter(|&x| tail.is_none() || x <= JACOBI_MATCHING).collect();
                let mut near_values = jacobi_values(*alpha, *beta, l, &near).into_iter().map(|(v, _)| v);
                xs.iter()
                    .map(|&x| match tail {
                        Some((amplitude, jost)) if x.abs() > JACOBI_MATCHING => {
                            2.0 * (amplitude * jost.v_at(x.abs()).0).re / self.model.a_unchecked(x.abs()).sqrt()
                        }
                        _ => near_values.next().unwrap_or(f64::NAN),
                    })
                    .collect()
            }
            Kind::Assembled { alpha, matching, amplitude, jost } => xs
                .iter()
                .map(|&x| {
                    if x < *matching {
                        normalized_bessel(*alpha, l * x)
                    } else {
                        let v = jost.v_at(x).0;
                        2.0 * (amplitude * v).re / self.model.a_unchecked(x).sqrt()
                    }
                })
                .collect(),
        }
    }

    /// Amplitude `c(λ)` with `√A φ_λ ≈ c e^{iλx} + c̄ e^{-iλx}` at infinity.
    pub fn amplitude(&self) -> Option<Complex64> {
        match &self.kind {
            Kind::Assembled { amplitude, .. } => Some(*amplitude),
            Kind::Jacobi { tail: Some((amplitude, _)), .. } => Some(*amplitude),
            Kind::Bessel { alpha } if self.lambda > 0.0 => {
                // j_α(z) ~ Γ(α+1) 2^α z^{-α-1/2} √(2/π) cos(z - απ/2 - π/4)
                let a = *alpha;
                let mag = statrs::function::gamma::gamma(a + 1.0) * 2f64.powf(a) * (2.0 / std::f64::consts::PI).sqrt()
                    * self.lambda.powf(-a - 0.5)
                    / 2.0;
                let phase = -(0.5 * a + 0.25) * std::f64::consts::PI;
                Some(Complex64::from_polar(mag, phase))
            }
            _ => None,
        }
    }

    pub fn jost(&self) -> Option<&JostSolution> {
        match &self.kind {
            Kind::Assembled { jost, .. } | Kind::Jacobi { tail: Some((_, jost)), .. } => Some(jost),
            _ => None,
        }
    }
}

/// `c = W(v, v̄₊) / W(v₊, v̄₊)` at the matching point, with `v = √A φ`.
fn matching_amplitude(model: &CoefficientModel, x: f64, phi: f64, dphi: f64, jost: &JostSolution) -> Complex64 {
    let sqrt_a = model.a_left(x).sqrt();
    let (g, _) = model.log_derivatives(x);
    let v = sqrt_a * phi;
    let dv = g * sqrt_a * phi + sqrt_a * dphi;
    let (vp, dvp) = jost.v_at(x);
    let (vm, dvm) = (vp.conj(), dvp.conj());
    let w_num = v * dvm - dv * vm;
    let w_den = vp * dvm - dvp * vm;
    w_num / w_den
}

/// Jacobi function values and derivatives: hypergeometric series near the origin, RK4 outward.
fn jacobi_values(alpha: f64, beta: f64, lambda: f64, xs: &[f64]) -> Vec<(f64, f64)> {
    let rho = alpha + beta + 1.0;
    let k2 = lambda * lambda + rho * rho;
    let start = 0.5f64.min(1.0 / lambda.max(1e-300));
    let series = |x: f64| {
        let s = x.sinh();
        let (f, df) = jacobi_series(alpha, beta, lambda, -s * s);
        (f, -2.0 * s * x.cosh() * df)
    };
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut out = vec![(0.0, 0.0); xs.len()];
    let (mut x, (mut u, mut du)) = (start, series(start));
    let h_max = 0.005f64.min(0.01 / lambda.max(1.0));
    let rhs = |x: f64, u: f64, du: f64| {
        let t = x.tanh();
        let ratio = (2.0 * alpha + 1.0) / t + (2.0 * beta + 1.0) * t;
        (du, -ratio * du - k2 * u)
    };
    for &i in &order {
        let target = xs[i].abs();
        if target <= start {
            out[i] = series(target);
            continue;
        }
        while x < target {
            let h = h_max.min(target - x);
            let (k1u, k1d) = rhs(x, u, du);
            let (k2u, k2d) = rhs(x + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1d);
            let (k3u, k3d) = rhs(x + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2d);
            let (k4u, k4d) = rhs(x + h, u + h * k3u, du + h * k3d);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            x += h;
        }
        out[i] = (u, du);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_tail_agrees_with_the_full_sweep() {
        for (alpha, beta) in [(0.0, 1.5), (1.0, 0.0), (-0.25, 0.5)] {
            let model = CoefficientModel::jacobi(alpha, beta);
            for lambda in [0.3, 2.0, 9.0] {
                let chi = Character::new(&model, lambda).unwrap();
                let xs = [1.99, 2.01, 3.0, 5.5, 8.0];
                let swept = jacobi_values(alpha, beta, lambda, &xs);
                for (v, (x, (reference, _))) in chi.eval_many(&xs).iter().zip(xs.iter().zip(swept)) {
                    let envelope = 2.0 * chi.amplitude().unwrap().norm() / model.a_unchecked(*x).sqrt();
                    let scale = reference.abs().max(envelope);
                    assert!((v - reference).abs() < 1e-5 * scale, "({alpha},{beta}) λ={lambda} x={x}: {v} vs {reference}");
                }
            }
        }
    }
}
