//! The character transform `f̂(λ) = ∫ f φ_λ A dx`, its inverse against a calibrated
//! Plancherel density, and the ordinary Fourier transform used for recentred measures.
//!
//! The spectral parameter is discretized by composite Gauss–Legendre panels on
//! `[0, Λ_max]`. Panel widths are chosen so that characters are resolved up to a
//! spatial extent `t_max`; asking for points beyond it is a resolution error.
//! Symbols that are not band-limited are multiplied by a taper `W(λ)` before
//! inversion, so an inverted measure is the exact one smoothed at scale `1/Λ_w`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientModel, Family};
use crate::eigenfunctions::Character;
use crate::measure::{Coordinate, RadialMeasure};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre};
use crate::special::jacobi_inverse_c_squared;
use crate::{Error, Result};

const PANEL_ORDER: usize = 16;
/// Panel width times the spatial extent.
const PANEL_SPAN: f64 = 8.0;
/// `W(Λ_max) = 10^-16`.
const TAPER_FLOOR: f64 = 1e-16;
/// λ nodes per parallel block; blocks are summed in a fixed order.
const BLOCK: usize = 32;
const GAUSSIAN_WIDTHS: [f64; 3] = [0.4, 0.6, 0.8];

/// Shape of the taper `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Taper {
    /// `exp(-(λ/Λ_w)^8)`: flat near the origin; its kernel has small signed side lobes.
    #[default]
    SuperGaussian,
    /// `exp(-(λ/Λ_w)^2)`: the heat kernel, which maps positive measures to positive measures.
    Gaussian,
}

impl Taper {
    fn order(self) -> i32 {
        match self {
            Taper::SuperGaussian => 8,
            Taper::Gaussian => 2,
        }
    }

    /// `W(λ)` at scale `Λ_w`.
    pub fn weight(self, lambda: f64, scale: f64) -> f64 {
        (-(lambda / scale).powi(self.order())).exp()
    }

    /// Kernel tail mass beyond `factor / Λ_w` is about `10^-8`.
    fn radius_factor(self) -> f64 {
        match self {
            Taper::SuperGaussian => 60.0,
            Taper::Gaussian => 9.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralOptions {
    /// `Λ_w`, the taper scale.
    pub taper_scale: f64,
    /// Largest spatial point the λ grid must resolve.
    pub extent: f64,
    /// Tolerance on the calibration round trip.
    pub unitarity_tol: f64,
    pub taper: Taper,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { taper_scale: 40.0, extent: 12.0, unitarity_tol: 1e-3, taper: Taper::SuperGaussian }
    }
}

impl SpectralOptions {
    pub fn lambda_max(&self) -> f64 {
        self.taper_scale * (-TAPER_FLOOR.ln()).powf(1.0 / self.taper.order() as f64)
    }

    /// Spacing of the spatial lattice used for inverted densities.
    pub fn spatial_step(&self) -> f64 {
        0.25 / self.lambda_max()
    }

    /// Spread of the taper kernel: the mass of its tail beyond this distance is about `10^-8`.
    pub fn smoothing_radius(&self) -> f64 {
        self.taper.radius_factor() / self.taper_scale
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.taper_scale > 0.0 && self.extent > 0.0 && self.unitarity_tol > 0.0)
            || !(self.taper_scale.is_finite() && self.extent.is_finite())
        {
            return Err(Error::Invalid(format!("spectral options must be positive and finite: {self:?}")));
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[0, Λ_max]` resolving characters up to `opts.extent`.
pub fn lambda_nodes(opts: &SpectralOptions) -> (Vec<f64>, Vec<f64>) {
    let lmax = opts.lambda_max();
    let width = (PANEL_SPAN / opts.extent).min(1.0);
    let panels = (lmax / width).ceil() as usize;
    composite_gauss_legendre(0.0, lmax, panels.max(1), PANEL_ORDER)
}

/// Plancherel density up to the calibrated constant: `1/(2π|c(λ)|²)` in the
/// normalization where `√A φ_λ ~ c e^{iλx} + c̄ e^{-iλx}`.
pub fn plancherel_shape(model: &CoefficientModel, lambda: f64) -> Result<f64> {
    let l = lambda.abs();
    match model.family {
        Family::Bessel { alpha } => {
            let g = statrs::function::gamma::ln_gamma(alpha + 1.0);
            Ok(((2.0 * alpha + 1.0) * l.ln() - 2.0 * alpha * 2f64.ln() - 2.0 * g).exp())
        }
        Family::Jacobi { alpha, beta } => {
            let rho = alpha + beta + 1.0;
            Ok(4f64.powf(rho) * jacobi_inverse_c_squared(alpha, beta, l) / (2.0 * std::f64::consts::PI))
        }
        Family::PerturbedBessel { .. } => {
            if l == 0.0 {
                return Ok(0.0);
            }
            let chi = Character::new(model, l)?;
            let c = chi.amplitude().ok_or(Error::Character { lambda: l, x: f64::NAN, reason: "no amplitude".into() })?;
            Ok(1.0 / (2.0 * std::f64::consts::PI * c.norm_sqr()))
        }
    }
}

/// Calibrated Plancherel measure on a λ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlancherelSpec {
    pub model: CoefficientModel,
    pub options: SpectralOptions,
    pub lambda_grid: Vec<f64>,
    /// Quadrature weights of the λ grid.
    pub weights: Vec<f64>,
    /// Calibrated density `dν/dλ` on the grid.
    pub density: Vec<f64>,
    /// Constant multiplying the shape.
    pub constant: f64,
    /// Largest relative defect of the Plancherel identity and the round trip on the battery.
    pub calibration_error: f64,
}

impl PlancherelSpec {
    pub fn is_usable(&self) -> bool {
        self.calibration_error <= self.options.unitarity_tol && self.density.iter().all(|d| *d >= 0.0)
    }

    pub fn ensure_usable(&self) -> Result<()> {
        if self.is_usable() {
            Ok(())
        } else {
            Err(Error::Calibration { error: self.calibration_error, tol: self.options.unitarity_tol })
        }
    }

    /// `ν([0, Λ_max])`.
    pub fn window_mass(&self) -> f64 {
        self.weights.iter().zip(&self.density).map(|(w, d)| w * d).sum()
    }

    pub fn taper_at(&self, j: usize) -> f64 {
        self.options.taper.weight(self.lambda_grid[j], self.options.taper_scale)
    }

    fn check_extent(&self, t: f64) -> Result<()> {
        if t.abs() > self.options.extent * (1.0 + 1e-12) {
            return Err(Error::Resolution { extent: t.abs(), limit: self.options.extent });
        }
        Ok(())
    }

    /// Lebesgue density `A(x) ∫ s(λ) W(λ) φ_λ(x) dν` on each job's slice of `points`.
    ///
    /// Characters are built once per λ and evaluated once at every point.
    pub(crate) fn synthesize(&self, points: &[f64], jobs: &[SynthesisJob<'_>]) -> Result<Vec<Vec<f64>>> {
        self.ensure_usable()?;
        let mut all: Vec<f64> = points.to_vec();
        let aux_start = all.len();
        for job in jobs {
            if let SymbolSource::CharacterProduct { x, y } = job.source {
                all.push(x);
                all.push(y);
            }
        }
        for &t in &all {
            self.check_extent(t)?;
        }
        let n = self.lambda_grid.len();
        let blocks: Vec<(usize, usize)> = (0..n).step_by(BLOCK).map(|s| (s, (s + BLOCK).min(n))).collect();
        let zero = || -> Vec<Vec<f64>> { jobs.iter().map(|j| vec![0.0; j.range.len()]).collect() };
        let partials: Vec<Result<Vec<Vec<f64>>>> = blocks
            .par_iter()
            .map(|&(lo, hi)| {
                let mut acc = zero();
                for j in lo..hi {
                    let chi = Character::new(&self.model, self.lambda_grid[j])?;
                    let phi = chi.eval_many(&all);
                    let base = self.weights[j] * self.density[j];
                    let mut aux = aux_start;
                    for (k, job) in jobs.iter().enumerate() {
                        let s = match job.source {
                            SymbolSource::Samples { values, band_limited } => {
                                let w = if band_limited { 1.0 } else { self.taper_at(j) };
                                values[j].re * w
                            }
                            SymbolSource::CharacterProduct { .. } => {
                                let v = phi[aux] * phi[aux + 1] * self.taper_at(j);
                                aux += 2;
                                v
                            }
                        };
                        let c = base * s;
                        if c == 0.0 {
                            continue;
                        }
                        for (a, p) in acc[k].iter_mut().zip(&phi[job.range.clone()]) {
                            *a += c * p;
                        }
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut total = zero();
        for part in partials {
            for (t, p) in total.iter_mut().zip(part?) {
                for (a, b) in t.iter_mut().zip(p) {
                    *a += b;
                }
            }
        }
        for (job, values) in jobs.iter().zip(total.iter_mut()) {
            for (v, &t) in values.iter_mut().zip(&points[job.range.clone()]) {
                *v *= self.model.a_unchecked(t.abs());
            }
        }
        Ok(total)
    }

    /// Inverts each source onto a lattice window `[lo, hi]` (spacing [`SpectralOptions::spatial_step`]),
    /// sharing character evaluations where windows overlap.
    pub(crate) fn invert_on_windows(&self, requests: &[(SymbolSource<'_>, f64, f64)]) -> Result<Vec<RadialMeasure>> {
        let h = self.options.spatial_step();
        let windows: Vec<(i64, i64)> = requests
            .iter()
            .map(|&(_, lo, hi)| {
                let k_lo = (lo / h).floor() as i64;
                let mut k_hi = (hi / h).ceil() as i64;
                if (k_hi - k_lo) % 2 == 1 {
                    k_hi += 1;
                }
                (k_lo, k_hi.max(k_lo + 2))
            })
            .collect();
        let mut ks: Vec<i64> = windows.iter().flat_map(|&(a, b)| a..=b).collect();
        ks.sort_unstable();
        ks.dedup();
        let points: Vec<f64> = ks.iter().map(|&k| k as f64 * h).collect();
        let jobs: Vec<SynthesisJob<'_>> = requests
            .iter()
            .zip(&windows)
            .map(|(&(source, _, _), &(a, b))| {
                let start = ks.binary_search(&a).unwrap_or(0);
                let end = ks.binary_search(&b).map(|i| i + 1).unwrap_or(ks.len());
                SynthesisJob { source, range: start..end }
            })
            .collect();
        let densities = self.synthesize(&points, &jobs)?;
        jobs.iter()
            .zip(densities)
            .map(|(job, d)| RadialMeasure::from_density(points[job.range.clone()].to_vec(), d, Coordinate::Hypergroup))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum SymbolSource<'a> {
    /// Samples on the spec's λ grid.
    Samples { values: &'a [Complex64], band_limited: bool },
    /// `φ_λ(x) φ_λ(y)`, always tapered.
    CharacterProduct { x: f64, y: f64 },
}

#[derive(Debug, Clone)]
pub(crate) struct SynthesisJob<'a> {
    pub source: SymbolSource<'a>,
    pub range: std::ops::Range<usize>,
}

/// Which transform produced a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// `∫ φ_λ dμ` on the hypergroup.
    Hypergroup,
    /// `∫ e^{iλs} dμ(s)` on the line.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    TransformOfMeasure,
    Injected,
}

/// Samples of a spectral symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSymbol {
    pub lambda_grid: Vec<f64>,
    pub values: Vec<Complex64>,
    pub provenance: Provenance,
    pub transform: Transform,
    /// True when no taper is needed before inversion.
    pub band_limited: bool,
    pub label: String,
}

impl SpectralSymbol {
    /// A closed-form symbol sampled on `grid`.
    pub fn injected(label: impl Into<String>, grid: &[f64], transform: Transform, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            lambda_grid: grid.to_vec(),
            values: grid.iter().map(|&l| f(l)).collect(),
            provenance: Provenance::Injected,
            transform,
            band_limited: false,
            label: label.into(),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    /// Pointwise product; grids and transforms must agree.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.lambda_grid != other.lambda_grid || self.transform != other.transform {
            return Err(Error::Invalid("symbols live on different grids or transforms".into()));
        }
        Ok(Self {
            lambda_grid: self.lambda_grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            provenance: if self.provenance == Provenance::Injected || other.provenance == Provenance::Injected {
                Provenance::Injected
            } else {
                Provenance::TransformOfMeasure
            },
            transform: self.transform,
            band_limited: self.band_limited || other.band_limited,
            label: format!("{}*{}", self.label, other.label),
        })
    }
}

/// `μ̂(λ) = ∫ φ_λ dμ` (hypergroup coordinate) or `∫ e^{iλs} dμ(s)` (recentred coordinate).
pub fn forward_transform(measure: &RadialMeasure, model: &CoefficientModel, grid: &[f64]) -> Result<SpectralSymbol> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty λ grid".into()));
    }
    let weights = measure.weights();
    let values: Result<Vec<Complex64>> = match measure.coordinate {
        Coordinate::Hypergroup => grid
            .par_iter()
            .map(|&lambda| {
                let chi = Character::new(model, lambda)?;
                let phi = chi.eval_many(&measure.grid);
                let mut s: f64 = phi.iter().zip(&weights).zip(&measure.density).map(|((p, w), d)| p * w * d).sum();
                let atom_points: Vec<f64> = measure.atoms.iter().map(|a| a.location).collect();
                let phi_atoms = chi.eval_many(&atom_points);
                s += phi_atoms.iter().zip(&measure.atoms).map(|(p, a)| p * a.mass).sum::<f64>();
                Ok(Complex64::new(s, 0.0))
            })
            .collect(),
        Coordinate::Recentered => Ok(grid.par_iter().map(|&lambda| line_transform_at(measure, &weights, lambda)).collect()),
    };
    Ok(SpectralSymbol {
        lambda_grid: grid.to_vec(),
        values: values?,
        provenance: Provenance::TransformOfMeasure,
        transform: match measure.coordinate {
            Coordinate::Hypergroup => Transform::Hypergroup,
            Coordinate::Recentered => Transform::Line,
        },
        band_limited: false,
        label: "transform".into(),
    })
}

fn line_transform_at(measure: &RadialMeasure, weights: &[f64], lambda: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for ((&t, w), d) in measure.grid.iter().zip(weights).zip(&measure.density) {
        s += Complex64::from_polar(w * d, lambda * t);
    }
    for a in &measure.atoms {
        s += Complex64::from_polar(a.mass, lambda * a.location);
    }
    s
}

/// Density on `x_grid` of the measure whose hypergroup symbol is `symbol`.
pub fn inverse_transform(symbol: &SpectralSymbol, spec: &PlancherelSpec, x_grid: &[f64]) -> Result<RadialMeasure> {
    if symbol.transform != Transform::Hypergroup {
        return Err(Error::Coordinate { expected: "hypergroup", found: "recentered" });
    }
    if symbol.lambda_grid != spec.lambda_grid {
        return Err(Error::Invalid("symbol and Plancherel spec use different λ grids".into()));
    }
    let job = SynthesisJob {
        source: SymbolSource::Samples { values: &symbol.values, band_limited: symbol.band_limited },
        range: 0..x_grid.len(),
    };
    let density = spec.synthesize(x_grid, &[job])?.pop().unwrap_or_default();
    RadialMeasure::from_density(x_grid.to_vec(), density, Coordinate::Hypergroup)
}

/// Smoothed inverse Fourier transform `(1/π) ∫_0^∞ W(λ) Re(ŝ(λ) e^{-iλs}) dλ` of the symbol of
/// a real measure on the line, sampled on `s_grid`.
///
/// Only the taper fields of `opts` are used; the λ grid resolves `s_grid`.
pub fn line_inverse(symbol: impl Fn(f64) -> Complex64 + Sync, opts: &SpectralOptions, s_grid: &[f64]) -> Vec<f64> {
    let extent = s_grid.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    let opts = SpectralOptions { extent, ..*opts };
    let (nodes, weights) = lambda_nodes(&opts);
    let samples: Vec<Complex64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&l, &w)| symbol(l) * (w * opts.taper.weight(l, opts.taper_scale)))
        .collect();
    s_grid
        .par_iter()
        .map(|&s| {
            let mut acc = 0.0;
            for (&l, v) in nodes.iter().zip(&samples) {
                acc += (v * Complex64::from_polar(1.0, -l * s)).re;
            }
            acc / std::f64::consts::PI
        })
        .collect()
}

/// Calibrates the Plancherel constant on a Gaussian battery and records the achieved defect.
pub fn calibrate_plancherel(model: &CoefficientModel, opts: SpectralOptions) -> Result<PlancherelSpec> {
    model.validate()?;
    opts.validate()?;
    let (grid, weights) = lambda_nodes(&opts);
    let shape: Vec<f64> = grid.par_iter().map(|&l| plancherel_shape(model, l)).collect::<Result<_>>()?;
    if shape.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::Calibration { error: f64::INFINITY, tol: opts.unitarity_tol });
    }

    // spatial Gauss–Legendre nodes on [0, 4.5 σ_max], broken at steps
    let x_end = 4.5 * GAUSSIAN_WIDTHS[GAUSSIAN_WIDTHS.len() - 1];
    let (xs, xw) = spatial_nodes(model, x_end, opts.lambda_max());
    let a: Vec<f64> = xs.iter().map(|&x| model.a_unchecked(x)).collect();
    let battery: Vec<Vec<f64>> =
        GAUSSIAN_WIDTHS.iter().map(|s| xs.iter().map(|x| (-(x / s).powi(2)).exp()).collect()).collect();

    // character table on the spatial nodes
    let table: Vec<Vec<f64>> =
        grid.par_iter().map(|&l| Ok(Character::new(model, l)?.eval_many(&xs))).collect::<Result<_>>()?;
    let hats: Vec<Vec<f64>> = battery
        .iter()
        .map(|f| table.iter().map(|phi| phi.iter().zip(f).zip(&xw).zip(&a).map(|(((p, f), w), a)| p * f * w * a).sum()).collect())
        .collect();
    let norms: Vec<f64> = battery.iter().map(|f| f.iter().zip(&xw).zip(&a).map(|((f, w), a)| f * f * w * a).sum()).collect();
    let spectral_norms: Vec<f64> = hats
        .iter()
        .map(|h| h.iter().zip(&weights).zip(&shape).map(|((h, w), d)| h * h * w * d).sum())
        .collect();
    let constant = norms.iter().sum::<f64>() / spectral_norms.iter().sum::<f64>();

    let mut error: f64 = 0.0;
    for k in 0..battery.len() {
        error = error.max((constant * spectral_norms[k] / norms[k] - 1.0).abs());
        let mut sq = 0.0;
        for (i, &fx) in battery[k].iter().enumerate() {
            let rec: f64 = (0..grid.len()).map(|j| weights[j] * constant * shape[j] * hats[k][j] * table[j][i]).sum();
            sq += (rec - fx).powi(2) * xw[i] * a[i];
        }
        error = error.max((sq / norms[k]).sqrt());
    }
    Ok(PlancherelSpec {
        model: model.clone(),
        options: opts,
        lambda_grid: grid,
        weights,
        density: shape.iter().map(|d| d * constant).collect(),
        constant,
        calibration_error: error,
    })
}

/// Gauss–Legendre nodes on `[0, end]`, panels no wider than `4/Λ` and broken at steps.
fn spatial_nodes(model: &CoefficientModel, end: f64, lambda_max: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(PANEL_ORDER);
    let width = 4.0 / lambda_max;
    let mut cuts = vec![0.0];
    cuts.extend(model.steps.iter().map(|s| s.location).filter(|&a| a > 0.0 && a < end));
    cuts.push(end);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for piece in cuts.windows(2) {
        let panels = ((piece[1] - piece[0]) / width).ceil().max(1.0) as usize;
        let h = (piece[1] - piece[0]) / panels as f64;
        for p in 0..panels {
            let c = piece[0] + (p as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(c + 0.5 * h * xi);
                weights.push(0.5 * h * wi);
            }
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Step;
    use crate::quadrature::linspace;
    use std::f64::consts::PI;

    fn small_opts() -> SpectralOptions {
        SpectralOptions { taper_scale: 40.0, extent: 6.0, unitarity_tol: 1e-3, ..Default::default() }
    }

    #[test]
    fn bessel_half_density_is_two_lambda_squared_over_pi() {
        let m = CoefficientModel::bessel(0.5);
        for l in [0.5, 3.0, 20.0] {
            assert!((plancherel_shape(&m, l).unwrap() - 2.0 * l * l / PI).abs() < 1e-12 * l * l);
        }
        // Jacobi (1/2, 1/2): c = 2/(iλ) and A = sinh²(2x)/4 give the same density
        let j = CoefficientModel::jacobi(0.5, 0.5);
        assert!((plancherel_shape(&j, 3.0).unwrap() - 18.0 / PI).abs() < 1e-9);
        // α = 0: density λ
        assert!((plancherel_shape(&CoefficientModel::bessel(0.0), 2.5).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn calibration_reproduces_the_analytic_constant() {
        for model in [CoefficientModel::bessel(0.5), CoefficientModel::bessel(0.0), CoefficientModel::jacobi(0.5, 0.5)] {
            let spec = calibrate_plancherel(&model, small_opts()).unwrap();
            assert!(spec.is_usable(), "{:?}: {}", model.family, spec.calibration_error);
            assert!((spec.constant - 1.0).abs() < 1e-3, "{:?}: K = {}", model.family, spec.constant);
            assert!(spec.density.iter().all(|d| *d > 0.0));
        }
    }

    #[test]
    fn perturbed_density_averages_to_the_unperturbed_one_at_high_energy() {
        let m = CoefficientModel::perturbed_bessel(0.5, vec![Step { location: 2.0, height: 3.0 }]);
        // the ratio oscillates with the phase of the step reflection; its average over a window is 1
        let window = linspace(20.0, 20.0 + PI, 201);
        let ratios: Vec<f64> = window.iter().map(|&l| plancherel_shape(&m, l).unwrap() / (2.0 * l * l / PI)).collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let hmean = ratios.len() as f64 / ratios.iter().map(|r| 1.0 / r).sum::<f64>();
        assert!((hmean - 1.0).abs() < 0.1 || (mean - 1.0).abs() < 0.1, "mean {mean}, harmonic {hmean}");
        assert!(ratios.iter().all(|r| *r > 0.3 && *r < 3.0));
    }

    #[test]
    fn unusable_spec_is_refused() {
        let mut spec = calibrate_plancherel(&CoefficientModel::bessel(0.5), small_opts()).unwrap();
        spec.calibration_error = 1.0;
        let sym = SpectralSymbol::injected("one", &spec.lambda_grid, Transform::Hypergroup, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(inverse_transform(&sym, &spec, &[1.0, 2.0]), Err(Error::Calibration { .. })));
    }

    #[test]
    fn points_beyond_the_extent_are_a_resolution_error() {
        let spec = calibrate_plancherel(&CoefficientModel::bessel(0.5), small_opts()).unwrap();
        let sym = SpectralSymbol::injected("one", &spec.lambda_grid, Transform::Hypergroup, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(inverse_transform(&sym, &spec, &[1.0, 7.0]), Err(Error::Resolution { .. })));
    }

    #[test]
    fn constant_symbol_inverts_to_an_approximate_identity() {
        let spec = calibrate_plancherel(&CoefficientModel::bessel(0.5), small_opts()).unwrap();
        let sym = SpectralSymbol::injected("one", &spec.lambda_grid, Transform::Hypergroup, |_| Complex64::new(1.0, 0.0));
        let grid = linspace(0.0, 2.0, 2001);
        let mu = inverse_transform(&sym, &spec, &grid).unwrap();
        let near: f64 = mu.grid.iter().zip(mu.weights()).zip(&mu.density).filter(|((t, _), _)| **t <= 0.3).map(|((_, w), d)| w * d).sum();
        assert!(near >= 0.9, "mass near 0: {near}");
        assert!((mu.total_mass() - 1.0).abs() < 1e-6, "{}", mu.total_mass());
    }

    #[test]
    fn dirac_at_zero_has_unit_symbol_and_line_uniform_is_sinc() {
        let model = CoefficientModel::bessel(1.0);
        let grid = linspace(0.0, 10.0, 11);
        let s = forward_transform(&RadialMeasure::dirac(0.0, Coordinate::Hypergroup), &model, &grid).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0).norm() < 1e-15));
        let u = RadialMeasure::from_fn(linspace(-1.0, 1.0, 2001), Coordinate::Recentered, |_| 0.5).unwrap();
        let s = forward_transform(&u, &model, &grid).unwrap();
        assert_eq!(s.transform, Transform::Line);
        for (l, v) in grid.iter().zip(&s.values) {
            let expected = if *l == 0.0 { 1.0 } else { l.sin() / l };
            assert!((v - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn product_measure_transform_is_the_product_of_characters() {
        // μ_{1,2} for α = 1/2: density t/4 on [1, 3]
        let model = CoefficientModel::bessel(0.5);
        let mu = RadialMeasure::from_fn(linspace(1.0, 3.0, 2001), Coordinate::Hypergroup, |t| t / 4.0).unwrap();
        let grid = linspace(0.1, 10.0, 50);
        let s = forward_transform(&mu, &model, &grid).unwrap();
        for (l, v) in grid.iter().zip(&s.values) {
            let expected = l.sin() * (2.0 * l).sin() / (2.0 * l * l);
            assert!((v.re - expected).abs() < 1e-9 && v.im == 0.0);
            assert!(v.norm() <= mu.total_variation() + 1e-12);
        }
    }

    #[test]
    fn gaussian_round_trip() {
        for model in [CoefficientModel::bessel(0.5), CoefficientModel::bessel(0.0), CoefficientModel::jacobi(0.5, 0.5)] {
            let spec = calibrate_plancherel(&model, small_opts()).unwrap();
            let xs = linspace(0.0, 3.5, 701);
            let f = |x: f64| (-x * x).exp();
            let haar = RadialMeasure::from_fn(xs.clone(), Coordinate::Hypergroup, |x| f(x) * model.a_unchecked(x)).unwrap();
            let mut hat = forward_transform(&haar, &model, &spec.lambda_grid).unwrap();
            hat.band_limited = true;
            let back = inverse_transform(&hat, &spec, &xs).unwrap();
            let w = haar.weights();
            let (mut num, mut den) = (0.0, 0.0);
            for i in 1..xs.len() {
                let a = model.a_unchecked(xs[i]);
                let g = back.density[i] / a;
                num += w[i] * a * (g - f(xs[i])).powi(2);
                den += w[i] * a * f(xs[i]).powi(2);
            }
            let err = (num / den).sqrt();
            assert!(err <= 1e-3, "{:?}: {err}", model.family);
        }
    }

    #[test]
    fn line_inverse_smooths_the_uniform_density() {
        let s = linspace(-2.0, 2.0, 801);
        let d = line_inverse(|l| Complex64::new(if l == 0.0 { 1.0 } else { l.sin() / l }, 0.0), &SpectralOptions::default(), &s);
        let mu = RadialMeasure::from_density(s.clone(), d, Coordinate::Recentered).unwrap();
        assert!((mu.total_mass() - 1.0).abs() < 1e-6);
        assert!((mu.density_at(0.0) - 0.5).abs() < 1e-5, "{}", mu.density_at(0.0));
        assert!(mu.density_at(1.95).abs() < 1e-5);
    }
}
