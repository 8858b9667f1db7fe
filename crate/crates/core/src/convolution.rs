//! Product-formula measures `μ_{x,y}` and convolution of radial measures.
//!
//! Both are computed spectrally: the symbol (`φ_λ(x) φ_λ(y)` or `μ̂ ρ̂`) is tapered
//! and inverted on a lattice window that covers the support plus the taper's
//! smoothing radius. Outputs are therefore smoothed versions of the exact measures.

use crate::coefficients::CoefficientModel;
use crate::measure::{Coordinate, RadialMeasure};
use crate::spectral::{forward_transform, PlancherelSpec, SymbolSource};
use crate::{Error, Result};

fn check_point(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be finite and non-negative, got {v}")))
    }
}

fn check_spec(model: &CoefficientModel, spec: &PlancherelSpec) -> Result<()> {
    if &spec.model != model {
        return Err(Error::Invalid("Plancherel spec was calibrated for a different model".into()));
    }
    spec.ensure_usable()
}

/// `μ_{x,y}`, the measure with `φ_λ(x) φ_λ(y) = ∫ φ_λ dμ_{x,y}`.
pub fn product_measure(model: &CoefficientModel, x: f64, y: f64, spec: &PlancherelSpec) -> Result<RadialMeasure> {
    Ok(product_measures(model, &[(x, y)], spec)?.remove(0))
}

/// Several product measures sharing one pass over the λ grid.
pub fn product_measures(model: &CoefficientModel, pairs: &[(f64, f64)], spec: &PlancherelSpec) -> Result<Vec<RadialMeasure>> {
    check_spec(model, spec)?;
    for &(x, y) in pairs {
        check_point("x", x)?;
        check_point("y", y)?;
    }
    let pad = spec.options.smoothing_radius();
    let mut requests = Vec::new();
    for &(x, y) in pairs {
        if x > 0.0 && y > 0.0 {
            requests.push((SymbolSource::CharacterProduct { x, y }, ((x - y).abs() - pad).max(0.0), x + y + pad));
        }
    }
    let mut smooth = spec.invert_on_windows(&requests)?.into_iter();
    let mut out = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        if x == 0.0 || y == 0.0 {
            out.push(RadialMeasure::dirac(x + y, Coordinate::Hypergroup));
        } else {
            out.push(smooth.next().expect("one window per non-trivial pair"));
        }
    }
    Ok(out)
}

fn is_identity(mu: &RadialMeasure) -> bool {
    mu.density.iter().all(|&d| d == 0.0)
        && mu.atoms.len() == 1
        && mu.atoms[0].location == 0.0
        && mu.atoms[0].mass == 1.0
}

/// `μ * ρ` in the hypergroup coordinate.
pub fn convolve(mu: &RadialMeasure, rho: &RadialMeasure, model: &CoefficientModel, spec: &PlancherelSpec) -> Result<RadialMeasure> {
    mu.expect(Coordinate::Hypergroup)?;
    rho.expect(Coordinate::Hypergroup)?;
    if is_identity(mu) {
        return Ok(rho.clone());
    }
    if is_identity(rho) {
        return Ok(mu.clone());
    }
    check_spec(model, spec)?;
    let symbol = forward_transform(mu, model, &spec.lambda_grid)?.multiply(&forward_transform(rho, model, &spec.lambda_grid)?)?;
    let (a_lo, a_hi) = mu.support();
    let (b_lo, b_hi) = rho.support();
    let gap = (a_lo - b_hi).max(b_lo - a_hi).max(0.0);
    let pad = spec.options.smoothing_radius();
    let source = SymbolSource::Samples { values: &symbol.values, band_limited: false };
    Ok(spec.invert_on_windows(&[(source, (gap - pad).max(0.0), a_hi + b_hi + pad)])?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{calibrate_plancherel, SpectralOptions};

    fn spec(model: &CoefficientModel, taper_scale: f64, extent: f64) -> PlancherelSpec {
        calibrate_plancherel(model, SpectralOptions { taper_scale, extent, unitarity_tol: 1e-3, ..Default::default() }).unwrap()
    }

    #[test]
    fn zero_argument_gives_a_dirac() {
        let model = CoefficientModel::bessel(0.5);
        let s = spec(&model, 20.0, 8.0);
        let m = product_measures(&model, &[(0.0, 1.5), (2.0, 0.0)], &s).unwrap();
        assert_eq!(m[0], RadialMeasure::dirac(1.5, Coordinate::Hypergroup));
        assert_eq!(m[1], RadialMeasure::dirac(2.0, Coordinate::Hypergroup));
    }

    #[test]
    fn half_integer_product_is_the_linear_density() {
        // α = ½: μ_{x,y} has density t/(2xy) on [|x−y|, x+y].
        let model = CoefficientModel::bessel(0.5);
        let s = spec(&model, 200.0, 4.0);
        let mu = product_measure(&model, 1.0, 2.0, &s).unwrap();
        let exact = RadialMeasure::from_fn(mu.grid.clone(), Coordinate::Hypergroup, |t| {
            if (1.0..=3.0).contains(&t) {
                t / 4.0
            } else {
                0.0
            }
        })
        .unwrap();
        let d = mu.l1_distance(&exact).unwrap();
        assert!(d <= 1e-2, "{d}");
        assert!((mu.total_mass() - 1.0).abs() < 1e-6, "{}", mu.total_mass());
    }

    #[test]
    fn product_is_symmetric_and_a_probability() {
        for model in [CoefficientModel::bessel(0.0), CoefficientModel::jacobi(0.5, 0.5)] {
            let s = spec(&model, 30.0, 6.0);
            let m = product_measures(&model, &[(0.7, 1.6), (1.6, 0.7)], &s).unwrap();
            assert!(m[0].l1_distance(&m[1]).unwrap() < 1e-9);
            assert!((m[0].total_mass() - 1.0).abs() < 1e-5, "{:?}: {}", model.family, m[0].total_mass());
            let slack = s.options.smoothing_radius() + 2.0 * s.options.spatial_step();
            let (lo, hi) = m[0].support();
            assert!(lo >= 0.9 - slack && hi <= 2.3 + slack);
            let w = m[0].weights();
            let outside: f64 = m[0]
                .grid
                .iter()
                .zip(&m[0].density)
                .zip(&w)
                .filter(|((&t, _), _)| !(0.9..=2.3).contains(&t))
                .map(|((_, d), w)| d.abs() * w)
                .sum();
            // Jumps at the endpoints leak O(1/Λw) mass past them; for α = 0 the
            // inverse square-root endpoint singularities leak O(Λw^{-1/2}).
            let leak = if model.alpha() == 0.0 { s.options.taper_scale.powf(-0.5) } else { 3.0 / s.options.taper_scale };
            assert!(outside < leak, "{:?}: {outside}", model.family);
        }
    }

    #[test]
    fn convolution_with_the_identity_is_exact() {
        let model = CoefficientModel::bessel(0.5);
        let s = spec(&model, 20.0, 8.0);
        let mu = product_measure(&model, 1.0, 1.5, &s).unwrap();
        let e = RadialMeasure::dirac(0.0, Coordinate::Hypergroup);
        assert_eq!(convolve(&e, &mu, &model, &s).unwrap(), mu);
        assert_eq!(convolve(&mu, &e, &model, &s).unwrap(), mu);
    }

    #[test]
    fn convolution_of_diracs_matches_the_product_measure() {
        let model = CoefficientModel::bessel(0.5);
        let s = spec(&model, 30.0, 6.0);
        let a = RadialMeasure::dirac(1.0, Coordinate::Hypergroup);
        let b = RadialMeasure::dirac(2.0, Coordinate::Hypergroup);
        let c = convolve(&a, &b, &model, &s).unwrap();
        let d = convolve(&b, &a, &model, &s).unwrap();
        let p = product_measure(&model, 1.0, 2.0, &s).unwrap();
        assert!(c.l1_distance(&p).unwrap() < 1e-8);
        assert!(c.l1_distance(&d).unwrap() < 1e-9);
    }

    #[test]
    fn convolution_is_commutative_and_total_variation_is_submultiplicative() {
        for model in [CoefficientModel::bessel(0.5), CoefficientModel::bessel(0.0)] {
            let s = spec(&model, 30.0, 12.0);
            let m = product_measures(&model, &[(0.6, 1.1), (1.3, 0.9)], &s).unwrap();
            let ab = convolve(&m[0], &m[1], &model, &s).unwrap();
            let ba = convolve(&m[1], &m[0], &model, &s).unwrap();
            assert!(ab.l1_distance(&ba).unwrap() <= 1e-3);
            let bound = m[0].total_variation() * m[1].total_variation() + 1e-3;
            assert!(ab.total_variation() <= bound, "{:?}: {} > {bound}", model.family, ab.total_variation());
            assert!((ab.total_mass() - 1.0).abs() < 1e-5, "{}", ab.total_mass());
        }
    }

    #[test]
    fn coordinate_and_model_mismatches_are_refused() {
        let model = CoefficientModel::bessel(0.5);
        let s = spec(&model, 20.0, 4.0);
        let r = RadialMeasure::dirac(1.0, Coordinate::Recentered);
        assert!(matches!(convolve(&r, &r, &model, &s), Err(Error::Coordinate { .. })));
        assert!(product_measure(&CoefficientModel::bessel(1.0), 1.0, 1.0, &s).is_err());
        assert!(product_measure(&model, -1.0, 1.0, &s).is_err());
    }
}
