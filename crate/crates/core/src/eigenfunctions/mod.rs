//! Jost solutions and hypergroup characters.
//!
//! Characters of the Bessel family are closed-form normalized Bessel functions;
//! Jacobi characters are integrated outward from the hypergeometric series at the
//! origin; characters of step-perturbed models are assembled from the Jost
//! solution of the perturbed equation, matched to the unperturbed closed form
//! left of the first step.

mod character;
mod jost;

pub use character::{Character, CharacterSource, JOST_TOL};
pub use jost::{solve_jost, JostSolution};

use crate::coefficients::CoefficientModel;
use crate::Result;

/// Character `φ_λ` of `model`.
pub fn character(model: &CoefficientModel, lambda: f64) -> Result<Character> {
    Character::new(model, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Step;
    use num_complex::Complex64;

    /// `m(x) = Σ i^k a_k(0) / x^k` from the Hankel expansion of `H₀⁽¹⁾`, summed to the smallest term.
    fn hankel_m_oracle(x: f64) -> Complex64 {
        let mut sum = Complex64::new(1.0, 0.0);
        let mut a = 1.0;
        let mut ik = Complex64::new(1.0, 0.0);
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            let next = a * (0.0 - odd * odd) / (k as f64 * 8.0 * x);
            if next.abs() > a.abs() {
                break;
            }
            a = next;
            ik *= Complex64::i();
            sum += ik * a;
        }
        sum
    }

    #[test]
    fn zero_potential_gives_identity_correction() {
        let m = CoefficientModel::bessel(0.5);
        for lambda in [0.3, 1.0, 7.5] {
            let sol = solve_jost(&m, lambda, 0.01, 1e-10).unwrap();
            assert!(sol.sup_deviation <= 1e-10, "lambda {lambda}: {}", sol.sup_deviation);
        }
        let sol = solve_jost(&m, 0.0, 0.01, 1e-10).unwrap();
        assert!(sol.sup_deviation <= 1e-10);
    }

    #[test]
    fn bessel_zero_jost_matches_hankel_asymptotics() {
        let model = CoefficientModel::bessel(0.0);
        let sol = solve_jost(&model, 1.0, 1.0, 1e-8).unwrap();
        for i in 0..=20 {
            let x = 20.0 + i as f64;
            let m = sol.m_at(x);
            let first_order = Complex64::new(1.0, -1.0 / (8.0 * x));
            assert!((m - first_order).norm() / first_order.norm() < 5e-3, "x = {x}: {m}");
            let exact = hankel_m_oracle(x);
            assert!((m - exact).norm() < 2e-6, "x = {x}: {m} vs {exact}");
        }
        // the conjugate branch λ = -1 carries the opposite sign of the first-order term
        let sol = solve_jost(&model, -1.0, 1.0, 1e-8).unwrap();
        for x in [20.0, 30.0, 40.0] {
            let m = sol.m_at(x);
            let first_order = Complex64::new(1.0, 1.0 / (8.0 * x));
            assert!((m - first_order).norm() / first_order.norm() < 5e-3);
        }
    }

    #[test]
    fn neumann_bound_holds() {
        let models = [
            CoefficientModel::bessel(0.0),
            CoefficientModel::bessel(1.0),
            CoefficientModel::jacobi(0.5, 0.5),
            CoefficientModel::jacobi(0.0, 1.5),
            CoefficientModel::perturbed_bessel(0.5, vec![Step { location: 2.0, height: 3.0 }]),
        ];
        for model in &models {
            for lambda in [1.0, 3.0] {
                for x0 in [2.5, 4.0] {
                    let sol = solve_jost(model, lambda, x0, 1e-10).unwrap();
                    let t = sol.operator_bound;
                    let tail = model.tail_bv(x0).unwrap();
                    assert!(t < 0.5, "{:?} λ={lambda} x0={x0}: T={t}", model.family);
                    assert!(sol.sup_deviation <= t / (1.0 - t) + 1e-9);
                    assert!(sol.sup_deviation <= 2.0 / lambda * tail + 1e-9);
                }
            }
        }
    }

    #[test]
    fn interval_splitting_handles_large_operator_norm() {
        let model = CoefficientModel::bessel(0.0);
        let sol = solve_jost(&model, 0.5, 0.01, 1e-8).unwrap();
        assert!(sol.operator_bound > 1.0);
        // exact Jost solution of v'' + (λ² + 1/(4x²)) v = 0 is √(πλx/2) e^{iπ/4} H₀⁽¹⁾(λx)
        let m = sol.m_at(60.0);
        assert!((m - hankel_m_oracle(30.0)).norm() < 1e-5);
    }

    /// Fine RK4 of `v'' = (q - λ²) v` from the Jost data at `x1` to `x2`.
    fn integrate_normal_form(model: &CoefficientModel, lambda: f64, x1: f64, x2: f64, v: Complex64, dv: Complex64) -> Complex64 {
        let n = 20000;
        let h = (x2 - x1) / n as f64;
        let f = |x: f64, v: Complex64| (model.potential(x) - lambda * lambda) * v;
        let (mut x, mut v, mut dv) = (x1, v, dv);
        for _ in 0..n {
            let k1 = (dv, f(x, v));
            let k2 = (dv + 0.5 * h * k1.1, f(x + 0.5 * h, v + 0.5 * h * k1.0));
            let k3 = (dv + 0.5 * h * k2.1, f(x + 0.5 * h, v + 0.5 * h * k2.0));
            let k4 = (dv + h * k3.1, f(x + h, v + h * k3.0));
            v += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            dv += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            x += h;
        }
        v
    }

    #[test]
    fn jost_solution_satisfies_the_normal_form() {
        let tol = 1e-9;
        for model in [CoefficientModel::bessel(1.0), CoefficientModel::jacobi(0.5, 1.0), CoefficientModel::bessel(0.0)] {
            for lambda in [0.7, 2.0] {
                let sol = solve_jost(&model, lambda, 0.5, tol).unwrap();
                let (v1, dv1) = sol.v_at(3.0);
                let v2 = integrate_normal_form(&model, lambda, 3.0, 6.0, v1, dv1);
                let (v2_jost, _) = sol.v_at(6.0);
                assert!((v2 - v2_jost).norm() < 1e-4, "{:?} λ={lambda}: {v2} vs {v2_jost}", model.family);
                assert!(sol.residual <= tol);
            }
        }
    }

    /// Poisson integral `j_α(z) = Γ(α+1)/(√π Γ(α+½)) ∫_{-1}^{1} (1-t²)^{α-½} cos(zt) dt`.
    fn bessel_poisson_oracle(alpha: f64, z: f64) -> f64 {
        use statrs::function::gamma::gamma;
        let c = gamma(alpha + 1.0) / (std::f64::consts::PI.sqrt() * gamma(alpha + 0.5));
        // t = sin θ removes the endpoint behaviour: (1-t²)^{α-½} dt = cos^{2α} θ dθ
        let f = |th: f64| th.cos().powf(2.0 * alpha) * (z * th.sin()).cos();
        let r = crate::quadrature::integrate(f, -std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, 1e-13, 1e-15)
            .unwrap();
        c * r.value
    }

    #[test]
    fn bessel_characters_match_the_poisson_oracle() {
        for alpha in [0.0, 0.5, 1.0, 2.5] {
            let model = CoefficientModel::bessel(alpha);
            for k in 0..=200 {
                let z = 0.1 + k as f64 * (50.0 - 0.1) / 200.0;
                let chi = character(&model, z).unwrap();
                let v = chi.eval(1.0);
                let reference = bessel_poisson_oracle(alpha, z);
                let envelope = statrs::function::gamma::gamma(alpha + 1.0)
                    * (2.0 / z).powf(alpha)
                    * (2.0 / (std::f64::consts::PI * z)).sqrt();
                let scale = reference.abs().max(envelope.min(1.0));
                assert!((v - reference).abs() <= 1e-6 * scale, "α={alpha} z={z}: {v} vs {reference}");
            }
        }
    }

    #[test]
    fn character_examples() {
        let half = CoefficientModel::bessel(0.5);
        let chi = character(&half, 3.0).unwrap();
        for x in [0.0f64, 0.2, 1.0, 5.0] {
            let expected = if x == 0.0 { 1.0 } else { (3.0 * x).sin() / (3.0 * x) };
            assert!((chi.eval(x) - expected).abs() < 1e-13);
        }
        let chi = character(&CoefficientModel::bessel(0.0), 1.0).unwrap();
        assert!((chi.eval(2.0) - 0.223_89).abs() < 1e-5);
        for model in [half, CoefficientModel::perturbed_bessel(0.5, vec![Step { location: 2.0, height: 3.0 }])] {
            let chi = character(&model, 0.0).unwrap();
            assert!(chi.eval_many(&[0.0, 1.0, 2.0, 50.0]).iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn jacobi_characters_match_closed_form() {
        let model = CoefficientModel::jacobi(0.5, 0.5);
        for lambda in [0.0, 0.4, 2.0, 13.0, 45.0] {
            let chi = character(&model, lambda).unwrap();
            let xs = [9.0, 0.001, 0.3, 1.0, 2.5, 6.0];
            let vals = chi.eval_many(&xs);
            for (&x, &v) in xs.iter().zip(&vals) {
                let expected = if lambda == 0.0 {
                    2.0 * x / (2.0 * x).sinh()
                } else {
                    2.0 * (lambda * x).sin() / (lambda * (2.0 * x).sinh())
                };
                assert!((v - expected).abs() < 1e-7, "λ={lambda} x={x}: {v} vs {expected}");
            }
            assert!((chi.eval(0.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_series_and_ode_agree_where_both_apply() {
        let model = CoefficientModel::jacobi(0.0, 1.5);
        let chi = character(&model, 1.3).unwrap();
        for x in [0.55, 0.7, 0.8] {
            let s = f64::sinh(x);
            let (series, _) = crate::special::jacobi_series(0.0, 1.5, 1.3, -s * s);
            let got = chi.eval(x);
            assert!((got - series).abs() < 1e-9, "{got} vs {series}");
        }
    }

    /// RK4 on `(u, A u')` from the closed form at 0.5 with flux continuity across steps.
    fn perturbed_oracle(model: &CoefficientModel, alpha: f64, lambda: f64, x_end: f64) -> f64 {
        let x_start = 0.5;
        let mut u = crate::special::normalized_bessel(alpha, lambda * x_start);
        let mut flux = model.a_unchecked(x_start) * crate::special::normalized_bessel_dx(alpha, lambda, x_start);
        let mut x = x_start;
        let mut stops: Vec<f64> = model.steps.iter().map(|s| s.location).filter(|&a| a < x_end).collect();
        stops.push(x_end);
        for stop in stops {
            let n = ((stop - x) / 1e-4).ceil() as usize;
            let h = (stop - x) / n as f64;
            let start = x;
            let a_piece = |t: f64| if t > start { model.a_left(t) } else { model.a_unchecked(t) };
            let f = |t: f64, u: f64, w: f64| (w / a_piece(t), -lambda * lambda * a_piece(t) * u);
            for _ in 0..n {
                let k1 = f(x, u, flux);
                let k2 = f(x + 0.5 * h, u + 0.5 * h * k1.0, flux + 0.5 * h * k1.1);
                let k3 = f(x + 0.5 * h, u + 0.5 * h * k2.0, flux + 0.5 * h * k2.1);
                let k4 = f(x + h, u + h * k3.0, flux + h * k3.1);
                u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                flux += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
                x += h;
            }
            x = stop;
        }
        u
    }

    #[test]
    fn perturbed_character_matches_flux_continuous_integration() {
        let model = CoefficientModel::perturbed_bessel(
            0.5,
            vec![Step { location: 2.0, height: 3.0 }, Step { location: 3.5, height: 1.0 }],
        );
        for lambda in [0.5, 2.0, 6.0] {
            let chi = character(&model, lambda).unwrap();
            assert_eq!(chi.source, CharacterSource::JostAssembled);
            for x in [1.0, 1.9, 2.7, 3.4, 4.5, 8.0] {
                let expected = perturbed_oracle(&model, 0.5, lambda, x);
                let got = chi.eval(x);
                assert!((got - expected).abs() < 2e-5, "λ={lambda} x={x}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn perturbed_character_is_flux_continuous_at_steps() {
        let model = CoefficientModel::perturbed_bessel(0.5, vec![Step { location: 2.0, height: 3.0 }]);
        let chi = character(&model, 1.7).unwrap();
        let h = 1e-5;
        let (ul, ur) = (chi.eval(2.0 - h), chi.eval(2.0 + h));
        assert!((ul - ur).abs() < 1e-4);
        let dl = (chi.eval(2.0 - h) - chi.eval(2.0 - 3.0 * h)) / (2.0 * h);
        let dr = (chi.eval(2.0 + 3.0 * h) - chi.eval(2.0 + h)) / (2.0 * h);
        let (al, ar) = (model.a_left(2.0), model.eval_a(2.0).unwrap());
        assert!((al * dl - ar * dr).abs() < 1e-3, "{} vs {}", al * dl, ar * dr);
        assert!((dl - dr).abs() > 0.1 * dl.abs());
    }

    #[test]
    fn zero_height_step_reproduces_bessel() {
        let model = CoefficientModel::perturbed_bessel(1.0, vec![Step { location: 2.0, height: 0.0 }]);
        let bessel = CoefficientModel::bessel(1.0);
        let chi = character(&model, 2.3).unwrap();
        let reference = character(&bessel, 2.3).unwrap();
        for x in [0.5, 2.0, 5.0, 30.0] {
            assert!((chi.eval(x) - reference.eval(x)).abs() < 1e-7);
        }
        let (c1, c2) = (chi.amplitude().unwrap(), reference.amplitude().unwrap());
        assert!((c1 - c2).norm() < 2e-6 * c2.norm(), "{c1} vs {c2}");
    }
}
