//! Special functions: normalized Bessel functions, the complex Gamma function,
//! the Harish-Chandra c-function of the Jacobi family and the hypergeometric
//! series used to start Jacobi characters near the origin.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

/// `J_α(z)` for real `α > -1` and `z ≥ 0`.
pub fn bessel_j(alpha: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if alpha == 0.0 { 1.0 } else { 0.0 };
    }
    if z <= series_switch(alpha) {
        let log_pref = alpha * (0.5 * z).ln() - ln_gamma(alpha + 1.0);
        log_pref.exp() * normalized_series(alpha, z)
    } else {
        hankel_asymptotic(alpha, z)
    }
}

/// The normalized Bessel function `j_α(z) = Γ(α+1) (2/z)^α J_α(z)`, with `j_α(0) = 1`.
///
/// This is the Bessel–Kingman character `φ_λ(x) = j_α(λx)`.
pub fn normalized_bessel(alpha: f64, z: f64) -> f64 {
    let z = z.abs();
    if z <= series_switch(alpha) {
        normalized_series(alpha, z)
    } else {
        let log_pref = ln_gamma(alpha + 1.0) - alpha * (0.5 * z).ln();
        log_pref.exp() * hankel_asymptotic(alpha, z)
    }
}

/// Derivative in `x` of `x ↦ j_α(λx)`.
pub fn normalized_bessel_dx(alpha: f64, lambda: f64, x: f64) -> f64 {
    -lambda * lambda * x / (2.0 * (alpha + 1.0)) * normalized_bessel(alpha + 1.0, lambda * x)
}

fn series_switch(alpha: f64) -> f64 {
    12.0 + alpha * alpha
}

fn normalized_series(alpha: f64, z: f64) -> f64 {
    let q = -0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        let k = k as f64;
        term *= q / (k * (alpha + k));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 0.5 * z {
            break;
        }
    }
    sum
}

fn hankel_asymptotic(alpha: f64, z: f64) -> f64 {
    let mu = 4.0 * alpha * alpha;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (kf * 8.0 * z);
        if a.abs() > last {
            break;
        }
        last = a.abs();
        // a_k / z^k with the sign pattern of the P and Q series
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let omega = z - 0.5 * alpha * PI - 0.25 * PI;
    (2.0 / (PI * z)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// Complex Gamma function (Lanczos, g = 7).
pub fn gamma_complex(z: Complex64) -> Complex64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if z.re < 0.5 {
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI, 0.0) / (s * gamma_complex(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(COEF[0], 0.0);
    for (i, c) in COEF.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// Harish-Chandra c-function of the Jacobi family,
/// `c(λ) = 2^{ρ-iλ} Γ(α+1) Γ(iλ) / (Γ((iλ+ρ)/2) Γ((iλ+α-β+1)/2))`, `ρ = α+β+1`.
pub fn jacobi_c_function(alpha: f64, beta: f64, lambda: f64) -> Complex64 {
    let rho = alpha + beta + 1.0;
    let il = Complex64::new(0.0, lambda);
    let two_pow = Complex64::new(2.0, 0.0).powc(Complex64::new(rho, -lambda));
    let num = two_pow * statrs::function::gamma::gamma(alpha + 1.0) * gamma_complex(il);
    let den = gamma_complex((il + rho) * 0.5) * gamma_complex((il + alpha - beta + 1.0) * 0.5);
    num / den
}

/// `iλ c(λ)`: the c-function with its pole at `λ = 0` removed. Continuous and nowhere zero on ℝ.
pub fn jacobi_regular_c(alpha: f64, beta: f64, lambda: f64) -> Complex64 {
    let rho = alpha + beta + 1.0;
    let il = Complex64::new(0.0, lambda);
    let two_pow = Complex64::new(2.0, 0.0).powc(Complex64::new(rho, -lambda));
    let num = two_pow * statrs::function::gamma::gamma(alpha + 1.0) * gamma_complex(il + 1.0);
    let den = gamma_complex((il + rho) * 0.5) * gamma_complex((il + alpha - beta + 1.0) * 0.5);
    num / den
}

/// `|c(λ)|^{-2}` for the Jacobi family, finite at `λ = 0` (where it vanishes).
pub fn jacobi_inverse_c_squared(alpha: f64, beta: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let c = jacobi_c_function(alpha, beta, lambda);
    1.0 / c.norm_sqr()
}

/// The Jacobi function series `₂F₁((ρ+iλ)/2, (ρ-iλ)/2; α+1; z)` and its `z`-derivative.
///
/// The coefficients are real because the two upper parameters are conjugate.
/// Converges for `|z| < 1`; callers use it for `z = -sinh²x` with small `x`.
pub fn jacobi_series(alpha: f64, beta: f64, lambda: f64, z: f64) -> (f64, f64) {
    let rho = alpha + beta + 1.0;
    let c = alpha + 1.0;
    // coef * z^(n-1), so that the value term is coef_pow * z and the derivative term n * coef_pow
    let mut coef_pow = 1.0;
    let mut sum = 1.0;
    let mut dsum = 0.0;
    for n in 0..4000 {
        let nf = n as f64;
        let ab = ((rho + 2.0 * nf).powi(2) + lambda * lambda) / 4.0;
        coef_pow *= ab / ((c + nf) * (nf + 1.0));
        if n > 0 {
            coef_pow *= z;
        }
        let dterm = (nf + 1.0) * coef_pow;
        let term = coef_pow * z;
        sum += term;
        dsum += dterm;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && dterm.abs() < 1e-17 * dsum.abs().max(1e-300) {
            break;
        }
    }
    (sum, dsum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_half_order_closed_form() {
        for &z in &[0.1, 1.0, 5.0, 11.9, 12.5, 30.0, 77.0] {
            let expected = f64::sin(z) / z;
            assert!((normalized_bessel(0.5, z) - expected).abs() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn bessel_j0_reference_values() {
        // J0(2), J0(20), J1(1) from standard tables
        assert!((bessel_j(0.0, 2.0) - 0.223_890_779_141_235_7).abs() < 1e-13);
        assert!((bessel_j(0.0, 20.0) - 0.167_024_664_340_583_2).abs() < 1e-12);
        assert!((bessel_j(1.0, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-13);
    }

    #[test]
    fn gamma_complex_matches_real_gamma() {
        for &x in &[0.3, 1.0, 2.5, 7.2] {
            let g = gamma_complex(Complex64::new(x, 0.0));
            assert!((g.re - statrs::function::gamma::gamma(x)).abs() < 1e-11 * g.re.abs());
        }
        // |Γ(iy)|² = π / (y sinh πy)
        let y: f64 = 0.7;
        let g = gamma_complex(Complex64::new(0.0, y));
        assert!((g.norm_sqr() - PI / (y * (PI * y).sinh())).abs() < 1e-12);
    }

    #[test]
    fn regular_c_removes_the_pole() {
        for l in [0.0, 0.4, 3.0, 25.0] {
            assert!((jacobi_regular_c(0.5, 0.5, l) - Complex64::new(2.0, 0.0)).norm() < 1e-10);
        }
        let l = 1.3;
        let direct = Complex64::new(0.0, l) * jacobi_c_function(1.0, 0.5, l);
        assert!((jacobi_regular_c(1.0, 0.5, l) - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn c_function_half_half_is_two_over_i_lambda() {
        for &l in &[0.3, 1.0, 4.0, 25.0] {
            let c = jacobi_c_function(0.5, 0.5, l);
            let expected = Complex64::new(0.0, -2.0 / l);
            assert!((c - expected).norm() < 1e-10 * expected.norm(), "lambda {l}");
        }
    }

    #[test]
    fn jacobi_series_half_half_closed_form() {
        // φ_λ(x) = 2 sin(λx) / (λ sinh 2x) for α = β = 1/2
        for &(l, x) in &[(1.0, 0.3), (3.0, 0.5), (0.2, 0.8)] {
            let z = -f64::sinh(x).powi(2);
            let (f, df) = jacobi_series(0.5, 0.5, l, z);
            let expected = 2.0 * f64::sin(l * x) / (l * f64::sinh(2.0 * x));
            assert!((f - expected).abs() < 1e-12);
            let h = 1e-6;
            let fp = jacobi_series(0.5, 0.5, l, z + h).0;
            let fm = jacobi_series(0.5, 0.5, l, z - h).0;
            assert!((df - (fp - fm) / (2.0 * h)).abs() < 1e-6);
        }
    }
}
