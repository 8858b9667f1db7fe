//! Sturm–Liouville coefficients `A` for the catalog families, their Liouville
//! normal form and the tail-variation functional controlling the Jost solver.
//!
//! The operator is `L f = -(A f')'/A`. With `u = A^{-1/2} v` the eigenvalue
//! equation becomes `v'' + (λ² - q) v = 0` where `q = (√A)''/√A` minus the
//! bottom of the continuous spectrum (`ρ²` for Jacobi, `0` otherwise).
//! Step perturbations make `A` jump; there `u` and the flux `A u'` are
//! continuous, which in `v` coordinates is a unimodular transfer matrix.

use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate, integrate_to_infinity};
use crate::{Error, Result};

pub const DEFAULT_DOMAIN_FLOOR: f64 = 1e-3;
const QUAD_REL_TOL: f64 = 1e-10;

/// Base formula selecting the coefficient family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `A(x) = x^{2α+1}`.
    Bessel { alpha: f64 },
    /// `A(x) = sinh(x)^{2α+1} cosh(x)^{2β+1}`.
    Jacobi { alpha: f64, beta: f64 },
    /// `A(x) = x^{2α+1} + Σ c_k 1_{[a_k, ∞)}(x)`.
    PerturbedBessel { alpha: f64 },
}

/// A step `c · 1_{[a, ∞)}` added to the base coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub location: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientModel {
    pub family: Family,
    #[serde(default)]
    pub steps: Vec<Step>,
    #[serde(default = "default_floor")]
    pub domain_floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_DOMAIN_FLOOR
}

/// Distributional derivative `A'`: an absolutely continuous density plus atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct BvDerivative {
    pub grid: Vec<f64>,
    pub ac_density: Vec<f64>,
    pub atoms: Vec<(f64, f64)>,
}

/// Transfer matrix acting on `(v, v')` across a step, from the left side to the right side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub location: f64,
    pub matrix: [[f64; 2]; 2],
}

impl Interface {
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.matrix;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Inverse map, from the right side to the left side.
    pub fn inverse(&self) -> [[f64; 2]; 2] {
        let m = &self.matrix;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
    }

    /// Deviation from the identity in the max-row-sum norm; the atom's share of the tail variation.
    pub fn strength(&self) -> f64 {
        let m = &self.matrix;
        let r0 = (m[0][0] - 1.0).abs() + m[0][1].abs();
        let r1 = m[1][0].abs() + (m[1][1] - 1.0).abs();
        r0.max(r1)
    }
}

impl CoefficientModel {
    pub fn bessel(alpha: f64) -> Self {
        Self { family: Family::Bessel { alpha }, steps: Vec::new(), domain_floor: DEFAULT_DOMAIN_FLOOR }
    }

    pub fn jacobi(alpha: f64, beta: f64) -> Self {
        Self { family: Family::Jacobi { alpha, beta }, steps: Vec::new(), domain_floor: DEFAULT_DOMAIN_FLOOR }
    }

    pub fn perturbed_bessel(alpha: f64, steps: Vec<Step>) -> Self {
        Self { family: Family::PerturbedBessel { alpha }, steps, domain_floor: DEFAULT_DOMAIN_FLOOR }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.domain_floor = floor;
        self
    }

    /// Checks family constraints: `α, β > -1/2`, sorted positive step locations,
    /// nonnegative heights (so `A` stays nondecreasing) and a positive floor.
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v.is_finite() && v > -0.5 {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} = {v} must exceed -1/2")))
            }
        };
        match self.family {
            Family::Bessel { alpha } | Family::PerturbedBessel { alpha } => check("alpha", alpha)?,
            Family::Jacobi { alpha, beta } => {
                check("alpha", alpha)?;
                check("beta", beta)?;
            }
        }
        if !(self.domain_floor.is_finite() && self.domain_floor > 0.0) {
            return Err(Error::InvalidModel(format!("domain floor {} must be positive", self.domain_floor)));
        }
        if !self.steps.is_empty() && !matches!(self.family, Family::PerturbedBessel { .. }) {
            return Err(Error::InvalidModel("steps are only allowed for the perturbed-bessel family".into()));
        }
        let mut prev = 0.0;
        for s in &self.steps {
            if !(s.location > prev) {
                return Err(Error::InvalidModel(format!(
                    "step locations must be positive and strictly increasing (got {} after {prev})",
                    s.location
                )));
            }
            if !(s.height.is_finite() && s.height >= 0.0) {
                return Err(Error::InvalidModel(format!("step height {} must be finite and nonnegative", s.height)));
            }
            prev = s.location;
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        match self.family {
            Family::Bessel { alpha } | Family::PerturbedBessel { alpha } | Family::Jacobi { alpha, .. } => alpha,
        }
    }

    /// Bottom of the continuous spectrum: `ρ²` with `ρ = α+β+1` for Jacobi, else `0`.
    ///
    /// Characters are parametrized so that `L φ_λ = (λ² + shift) φ_λ`.
    pub fn spectral_shift(&self) -> f64 {
        match self.family {
            Family::Jacobi { alpha, beta } => (alpha + beta + 1.0).powi(2),
            _ => 0.0,
        }
    }

    fn step_sum(&self, x: f64) -> f64 {
        self.steps.iter().filter(|s| s.location <= x).map(|s| s.height).sum()
    }

    fn step_sum_left(&self, x: f64) -> f64 {
        self.steps.iter().filter(|s| s.location < x).map(|s| s.height).sum()
    }

    /// `A(x)` without the domain check; right-continuous at steps.
    pub fn a_unchecked(&self, x: f64) -> f64 {
        match self.family {
            Family::Bessel { alpha } => x.powf(2.0 * alpha + 1.0),
            Family::Jacobi { alpha, beta } => x.sinh().powf(2.0 * alpha + 1.0) * x.cosh().powf(2.0 * beta + 1.0),
            Family::PerturbedBessel { alpha } => x.powf(2.0 * alpha + 1.0) + self.step_sum(x),
        }
    }

    /// `A(x)`, right-continuous at step locations.
    pub fn eval_a(&self, x: f64) -> Result<f64> {
        if !(x >= self.domain_floor) {
            return Err(Error::Domain { x, floor: self.domain_floor });
        }
        Ok(self.a_unchecked(x))
    }

    /// Left limit `A(x-)`.
    pub fn a_left(&self, x: f64) -> f64 {
        match self.family {
            Family::PerturbedBessel { alpha } => x.powf(2.0 * alpha + 1.0) + self.step_sum_left(x),
            _ => self.a_unchecked(x),
        }
    }

    /// `(g, g')` for `g = (√A)'/√A = A'/(2A)` on the smooth piece containing `x`
    /// (right piece at a step location).
    pub fn log_derivatives(&self, x: f64) -> (f64, f64) {
        self.log_derivatives_with(x, self.step_sum(x))
    }

    fn log_derivatives_with(&self, x: f64, offset: f64) -> (f64, f64) {
        match self.family {
            Family::Bessel { alpha } => {
                let a = alpha + 0.5;
                (a / x, -a / (x * x))
            }
            Family::Jacobi { alpha, beta } => {
                let a = alpha + 0.5;
                let b = beta + 0.5;
                let (s, c) = (x.sinh(), x.cosh());
                (a * c / s + b * s / c, -a / (s * s) + b / (c * c))
            }
            Family::PerturbedBessel { alpha } => {
                let a = alpha + 0.5;
                let p = x.powf(2.0 * a);
                let big_a = p + offset;
                let d1 = 2.0 * a * p / x;
                let d2 = 2.0 * a * (2.0 * a - 1.0) * p / (x * x);
                (d1 / (2.0 * big_a), d2 / (2.0 * big_a) - d1 * d1 / (2.0 * big_a * big_a))
            }
        }
    }

    /// Smooth part of the effective Liouville potential `q(x) = g' + g² - shift`.
    pub fn potential(&self, x: f64) -> f64 {
        if let Family::Bessel { alpha } = self.family {
            return (alpha * alpha - 0.25) / (x * x);
        }
        let (g, dg) = self.log_derivatives(x);
        let raw = dg + g * g - self.spectral_shift();
        if let Family::Jacobi { alpha, beta } = self.family {
            // For large x, a coth + b tanh -> ρ and the difference cancels; use the exact tail form.
            if x > 5.0 {
                let a = alpha + 0.5;
                let b = beta + 0.5;
                let rho = a + b;
                let (s, c) = (x.sinh(), x.cosh());
                let dcoth = 1.0 / (s * s);
                let dtanh = 1.0 / (c * c);
                // g = ρ + a (coth - 1) - b (1 - tanh)
                let coth_m1 = 2.0 / ((2.0 * x).exp() - 1.0);
                let one_m_tanh = 2.0 / ((2.0 * x).exp() + 1.0);
                let delta = a * coth_m1 - b * one_m_tanh;
                return -a * dcoth + b * dtanh + 2.0 * rho * delta + delta * delta;
            }
        }
        raw
    }

    /// Transfer matrices in `(v, v')` for every step, ordered by location.
    pub fn interfaces(&self) -> Vec<Interface> {
        self.steps
            .iter()
            .map(|s| {
                let a_minus = self.a_left(s.location);
                let a_plus = self.a_unchecked(s.location);
                let g_minus = self.log_derivatives_with(s.location, self.step_sum_left(s.location)).0;
                let g_plus = self.log_derivatives(s.location).0;
                let r = (a_plus / a_minus).sqrt();
                // v+ = r v-,  v'+ = g+ v+ + (v'- - g- v-)/r
                Interface { location: s.location, matrix: [[r, 0.0], [r * g_plus - g_minus / r, 1.0 / r]] }
            })
            .collect()
    }

    /// Sampled `A'`: absolutely continuous part on `grid` plus the step atoms.
    pub fn bv_derivative(&self, grid: &[f64]) -> BvDerivative {
        let ac_density = grid
            .iter()
            .map(|&x| {
                let (g, _) = self.log_derivatives(x);
                2.0 * g * self.a_unchecked(x)
            })
            .collect();
        BvDerivative {
            grid: grid.to_vec(),
            ac_density,
            atoms: self.steps.iter().map(|s| (s.location, s.height)).collect(),
        }
    }

    /// Smooth pieces of `[lo, hi]` separated by step locations.
    pub(crate) fn pieces(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let mut cuts = vec![lo];
        cuts.extend(self.steps.iter().map(|s| s.location).filter(|&a| a > lo && a < hi));
        cuts.push(hi);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// `Φ(x) = ∫_{x0}^{x} A(t)^{-1/2} dt` with `x0` the domain floor.
    pub fn phase(&self, x: f64) -> Result<f64> {
        let x0 = self.domain_floor;
        if !(x >= x0) {
            return Err(Error::Domain { x, floor: x0 });
        }
        let mut total = 0.0;
        for (a, b) in self.pieces(x0, x) {
            let r = integrate(|t| 1.0 / self.a_left(t).sqrt(), a, b, QUAD_REL_TOL, 1e-300)?;
            total += r.value;
        }
        Ok(total)
    }

    /// Total variation of the effective potential measure on `[x0, ∞)`:
    /// `∫ |q| dt` plus the strength of every step interface at or beyond `x0`.
    ///
    /// Returns `f64::INFINITY` when the tail integral does not converge.
    pub fn tail_bv(&self, x0: f64) -> Result<f64> {
        if !(x0 >= self.domain_floor) {
            return Err(Error::Domain { x: x0, floor: self.domain_floor });
        }
        let last = self.steps.iter().map(|s| s.location).fold(x0, f64::max);
        let mut total = 0.0;
        for (a, b) in self.pieces(x0, last) {
            match integrate(|t| self.potential_left(t).abs(), a, b, QUAD_REL_TOL, 1e-15) {
                Ok(r) => total += r.value,
                Err(_) => return Ok(f64::INFINITY),
            }
        }
        match integrate_to_infinity(|t| self.potential(t).abs(), last, QUAD_REL_TOL, 1e-15) {
            Ok(r) => total += r.value,
            Err(_) => return Ok(f64::INFINITY),
        }
        total += self.interfaces().iter().filter(|i| i.location >= x0).map(Interface::strength).sum::<f64>();
        Ok(total)
    }

    /// Potential on the piece to the left of `x` (differs from [`Self::potential`] only at step locations).
    pub(crate) fn potential_left(&self, x: f64) -> f64 {
        if self.steps.iter().any(|s| s.location == x) {
            let (g, dg) = self.log_derivatives_with(x, self.step_sum_left(x));
            return dg + g * g - self.spectral_shift();
        }
        self.potential(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bessel_half_at_two_is_four() {
        assert_eq!(CoefficientModel::bessel(0.5).eval_a(2.0).unwrap(), 4.0);
    }

    #[test]
    fn jacobi_half_half_at_one() {
        // (sinh 1 cosh 1)² = (sinh 2 / 2)², evaluated independently
        let expected = (0.5 * 2f64.sinh()).powi(2);
        let v = CoefficientModel::jacobi(0.5, 0.5).eval_a(1.0).unwrap();
        assert!((v - expected).abs() < 1e-14);
        assert!((v - 3.288_5).abs() < 1e-4);
    }

    #[test]
    fn step_jump_is_exact() {
        let m = CoefficientModel::perturbed_bessel(0.5, vec![Step { location: 2.0, height: 3.0 }]);
        assert!((m.eval_a(2.0 - 1e-9).unwrap() - 4.0).abs() < 1e-8);
        assert_eq!(m.eval_a(2.0).unwrap(), 7.0);
        assert_eq!(m.a_left(2.0), 4.0);
    }

    #[test]
    fn domain_error_below_floor() {
        let m = CoefficientModel::bessel(0.0);
        assert!(matches!(m.eval_a(1e-4), Err(Error::Domain { .. })));
        assert!(matches!(m.phase(1e-4), Err(Error::Domain { .. })));
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(CoefficientModel::bessel(-0.7).validate().is_err());
        assert!(CoefficientModel::jacobi(0.5, -0.6).validate().is_err());
        let bad = CoefficientModel::perturbed_bessel(0.5, vec![Step { location: 2.0, height: -1.0 }]);
        assert!(bad.validate().is_err());
        let unsorted = CoefficientModel::perturbed_bessel(
            0.5,
            vec![Step { location: 2.0, height: 1.0 }, Step { location: 1.0, height: 1.0 }],
        );
        assert!(unsorted.validate().is_err());
        assert!(CoefficientModel::perturbed_bessel(0.5, vec![Step { location: 2.0, height: 3.0 }]).validate().is_ok());
    }

    #[test]
    fn phase_examples() {
        let m = CoefficientModel::bessel(0.5).with_floor(1.0);
        assert!((m.phase(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-10);
        let m = CoefficientModel::bessel(0.0).with_floor(1.0);
        assert!((m.phase(4.0).unwrap() - 2.0).abs() < 1e-10);
        assert_eq!(m.phase(1.0).unwrap(), 0.0);
    }

    #[test]
    fn tail_bv_examples() {
        let m = CoefficientModel::bessel(0.5);
        for x0 in [0.01, 1.0, 10.0] {
            assert_eq!(m.tail_bv(x0).unwrap(), 0.0);
        }
        // q = -1/(4x²): ∫_10^∞ = 1/40
        let m = CoefficientModel::bessel(0.0);
        assert!((m.tail_bv(10.0).unwrap() - 0.025).abs() < 1e-10);
    }

    #[test]
    fn tail_bv_excludes_atoms_left_of_x0() {
        let m = CoefficientModel::perturbed_bessel(0.5, vec![Step { location: 2.0, height: 3.0 }]);
        // Beyond the step A = x² + 3 and q = 3/(x²+3)², a closed form the integral must reproduce.
        let closed = |x0: f64| {
            let s = 3f64.sqrt();
            // ∫ 3/(x²+3)² dx = x/(2(x²+3)) + atan(x/√3)/(2√3)
            let f = |x: f64| x / (2.0 * (x * x + 3.0)) + (x / s).atan() / (2.0 * s);
            std::f64::consts::FRAC_PI_2 / (2.0 * s) - f(x0)
        };
        let v3 = m.tail_bv(3.0).unwrap();
        assert!((v3 - closed(3.0)).abs() < 1e-9, "{v3} vs {}", closed(3.0));
        let v19 = m.tail_bv(1.9).unwrap();
        let strength = m.interfaces()[0].strength();
        assert!(strength > 0.0);
        assert!(v19 > v3 + strength);
    }

    #[test]
    fn interface_is_unimodular() {
        let m = CoefficientModel::perturbed_bessel(0.0, vec![Step { location: 1.5, height: 0.7 }]);
        let i = m.interfaces()[0];
        let d = i.matrix[0][0] * i.matrix[1][1] - i.matrix[0][1] * i.matrix[1][0];
        assert!((d - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_potential_tail_form_is_continuous() {
        let m = CoefficientModel::jacobi(0.5, 1.0);
        let (g, dg) = m.log_derivatives(5.0);
        let raw = dg + g * g - m.spectral_shift();
        let below = m.potential(5.0 - 1e-12);
        let above = m.potential(5.0 + 1e-12);
        assert!((below - raw).abs() < 1e-9);
        assert!((above - below).abs() < 1e-9);
        assert!(m.potential(40.0).abs() < 1e-20);
    }

    fn catalog() -> Vec<CoefficientModel> {
        vec![
            CoefficientModel::bessel(0.0),
            CoefficientModel::bessel(0.5),
            CoefficientModel::bessel(1.0),
            CoefficientModel::jacobi(0.5, 0.5),
            CoefficientModel::jacobi(0.0, 1.5),
            CoefficientModel::perturbed_bessel(0.5, vec![Step { location: 2.0, height: 3.0 }]),
        ]
    }

    #[test]
    fn tail_bv_is_nonincreasing_and_vanishes() {
        for m in catalog() {
            let xs = [0.05, 0.5, 1.0, 1.99, 2.0, 3.0, 10.0, 50.0, 400.0];
            let vals: Vec<f64> = xs.iter().map(|&x| m.tail_bv(x).unwrap()).collect();
            for w in vals.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{:?}: {vals:?}", m.family);
            }
            assert!(vals.last().unwrap() < &1e-2, "{:?}: {vals:?}", m.family);
        }
    }

    proptest! {
        #[test]
        fn a_is_positive_and_nondecreasing(i in 0usize..6, x1 in 1e-3f64..100.0, dx in 0.0f64..50.0) {
            let m = &catalog()[i];
            let x2 = (x1 + dx).min(100.0);
            let a1 = m.eval_a(x1).unwrap();
            let a2 = m.eval_a(x2).unwrap();
            prop_assert!(a1 > 0.0);
            prop_assert!(a1 <= a2);
        }

        #[test]
        fn phase_is_increasing(i in 0usize..6, x1 in 1e-3f64..20.0, dx in 1e-3f64..20.0) {
            let m = &catalog()[i];
            let (p1, p2) = (m.phase(x1).unwrap(), m.phase(x1 + dx).unwrap());
            if matches!(m.family, Family::Jacobi { .. }) {
                prop_assert!(p1 <= p2 + 1e-9 * p2.abs(), "{p1} {p2}");
            } else {
                prop_assert!(p1 < p2);
            }
        }

        #[test]
        fn jumps_are_recovered(a in 0.5f64..5.0, c in 0.0f64..10.0) {
            let m = CoefficientModel::perturbed_bessel(1.0, vec![Step { location: a, height: c }]);
            let jump = m.eval_a(a).unwrap() - m.a_left(a);
            prop_assert!((jump - c).abs() <= 1e-12 * (1.0 + a.powi(3)));
        }
    }
}
