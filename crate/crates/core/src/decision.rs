//! Decision procedures on spectral symbols, Beurling weights and centres.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{asymptotic_measure, limit_measure, ConvergenceReport, Verdict};
use crate::coefficients::{CoefficientModel, Family};
use crate::convolution::product_measures;
use crate::eigenfunctions::Character;
use crate::measure::RadialMeasure;
use crate::special::jacobi_regular_c;
use crate::spectral::{forward_transform, PlancherelSpec, Provenance, SpectralSymbol, Transform};
use crate::{Error, Result};

/// Relative size of the default ε (against `sup |symbol|`) and δ (against the window's Plancherel mass).
pub const DEFAULT_RELATIVE_THRESHOLD: f64 = 1e-3;

/// A weight `ω ≥ 1` evaluated at `|t|`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightSpec {
    #[default]
    Constant,
    /// `(1 + |t|)^s`.
    Polynomial { s: f64 },
    /// `e^{a |t|}`.
    Exponential { a: f64 },
}

impl WeightSpec {
    pub fn evaluate(&self, t: f64) -> f64 {
        match *self {
            WeightSpec::Constant => 1.0,
            WeightSpec::Polynomial { s } => (1.0 + t.abs()).powf(s),
            WeightSpec::Exponential { a } => (a * t.abs()).exp(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Polynomial { s } if !(s.is_finite() && s >= 0.0) => Err(Error::Invalid(format!("polynomial weight needs s ≥ 0, got {s}"))),
            WeightSpec::Exponential { a } if !(a.is_finite() && a > 0.0) => Err(Error::Invalid(format!("exponential weight needs a > 0, got {a}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IrregularityVerdict {
    StronglyIrregular,
    NotStronglyIrregular,
    Inconclusive,
    AsymptoticFamilyExcluded,
}

/// Thresholds for the zero-set scan; `None` selects the relative defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DecisionPolicy {
    pub eps: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub verdict: IrregularityVerdict,
    pub symbol_label: String,
    pub provenance: Provenance,
    pub transform: Transform,
    pub min_abs: f64,
    pub sup_abs: f64,
    pub eps: f64,
    pub delta: f64,
    /// Maximal λ intervals on which `|symbol| < ε`.
    pub near_zero_intervals: Vec<[f64; 2]>,
    /// Plancherel measure of the union of `near_zero_intervals`.
    pub near_zero_mass: f64,
    pub window_mass: f64,
    pub upstream: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_weighted_norm: Option<f64>,
    pub notes: Vec<String>,
}

/// Sub-interval of `[0, 1]` where `|a + (b − a)τ| < eps`.
fn below_on_segment(a: Complex64, b: Complex64, eps: f64) -> Option<(f64, f64)> {
    let d = b - a;
    let qa = d.norm_sqr();
    let qb = 2.0 * (a.re * d.re + a.im * d.im);
    let qc = a.norm_sqr() - eps * eps;
    if qa == 0.0 {
        return (qc < 0.0).then_some((0.0, 1.0));
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt();
    let lo = ((-qb - r) / (2.0 * qa)).max(0.0);
    let hi = ((-qb + r) / (2.0 * qa)).min(1.0);
    (lo < hi).then_some((lo, hi))
}

/// Near-zero intervals of the piecewise-linear interpolant, with their Plancherel mass.
fn near_zero_set(symbol: &SpectralSymbol, spec: &PlancherelSpec, eps: f64) -> (Vec<[f64; 2]>, f64) {
    let g = &symbol.lambda_grid;
    let v = &symbol.values;
    let dens = &spec.density;
    let mut intervals: Vec<[f64; 2]> = Vec::new();
    let mut mass = 0.0;
    let mut push = |lo: f64, hi: f64, d_lo: f64, d_hi: f64| {
        mass += 0.5 * (hi - lo) * (d_lo + d_hi);
        match intervals.last_mut() {
            Some(last) if (last[1] - lo).abs() <= 1e-14 * hi.max(1.0) => last[1] = hi,
            _ => intervals.push([lo, hi]),
        }
    };
    if v[0].norm() < eps {
        push(0.0, g[0], dens[0], dens[0]);
    }
    for j in 1..g.len() {
        if let Some((a, b)) = below_on_segment(v[j - 1], v[j], eps) {
            let (l0, l1) = (g[j - 1], g[j]);
            let at = |tau: f64| dens[j - 1] + (dens[j] - dens[j - 1]) * tau;
            push(l0 + a * (l1 - l0), l0 + b * (l1 - l0), at(a), at(b));
        }
    }
    (intervals, mass)
}

fn bessel_like(model: &CoefficientModel) -> bool {
    matches!(model.family, Family::Bessel { .. } | Family::PerturbedBessel { .. })
}

/// Zero-set criterion on a symbol sampled on the spec's λ grid.
pub fn decide_irregularity(symbol: &SpectralSymbol, spec: &PlancherelSpec, policy: &DecisionPolicy, upstream: &[Verdict]) -> Result<DecisionReport> {
    if symbol.lambda_grid != spec.lambda_grid {
        return Err(Error::Invalid("symbol is not sampled on the spec's λ grid".into()));
    }
    let sup_abs = symbol.sup_abs();
    let min_abs = symbol.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let window_mass = spec.window_mass();
    let eps = policy.eps.unwrap_or(DEFAULT_RELATIVE_THRESHOLD * sup_abs);
    let delta = policy.delta.unwrap_or(DEFAULT_RELATIVE_THRESHOLD * window_mass);
    if !(eps > 0.0 && eps.is_finite() && delta > 0.0 && delta.is_finite()) {
        return Err(Error::Invalid(format!("thresholds must be positive, got ε = {eps}, δ = {delta}")));
    }
    let (near_zero_intervals, near_zero_mass) = near_zero_set(symbol, spec, eps);
    let all_converged = upstream.iter().all(Verdict::is_converged);
    let verdict = if !all_converged {
        IrregularityVerdict::Inconclusive
    } else if near_zero_intervals.is_empty() && min_abs >= eps {
        IrregularityVerdict::StronglyIrregular
    } else if near_zero_mass > delta {
        IrregularityVerdict::NotStronglyIrregular
    } else {
        IrregularityVerdict::Inconclusive
    };
    let mut notes = Vec::new();
    if !all_converged {
        notes.push("an upstream limit did not converge; no verdict is asserted".to_string());
    }
    if bessel_like(&spec.model) && !near_zero_intervals.is_empty() {
        notes.push("isolated zeros are counted through their ε-neighbourhoods; the near-zero mass depends on ε".to_string());
    }
    Ok(DecisionReport {
        verdict,
        symbol_label: symbol.label.clone(),
        provenance: symbol.provenance,
        transform: symbol.transform,
        min_abs,
        sup_abs,
        eps,
        delta,
        near_zero_intervals,
        near_zero_mass,
        window_mass,
        upstream: upstream.to_vec(),
        weight: None,
        sup_weighted_norm: None,
        notes,
    })
}

/// Every verdict in a report tree, outer scan first.
pub fn collect_verdicts(report: &ConvergenceReport) -> Vec<Verdict> {
    let mut out = vec![report.verdict];
    for inner in &report.inner {
        out.extend(collect_verdicts(inner));
    }
    out
}

/// Runs the `ν_∞` scan and decides on the line transform of the result.
///
/// When the scan does not converge the last `ν_x` supplies the symbol and the
/// verdict is forced to `Inconclusive`.
pub fn decide_limit(
    model: &CoefficientModel,
    spec: &PlancherelSpec,
    x_schedule: &[f64],
    y_schedule: &[f64],
    tol: f64,
    policy: &DecisionPolicy,
) -> Result<(DecisionReport, ConvergenceReport)> {
    let outcome = limit_measure(model, spec, x_schedule, y_schedule, tol)?;
    let measure = outcome.limit.as_ref().unwrap_or(&outcome.last_iterate);
    let mut symbol = forward_transform(measure, model, &spec.lambda_grid)?;
    symbol.label = if outcome.limit.is_some() { "nu-infinity".into() } else { "nu-x(last, not converged)".into() };
    let decision = decide_irregularity(&symbol, spec, policy, &collect_verdicts(&outcome.report))?;
    Ok((decision, outcome.report))
}

/// `iλ c(λ)` for the Jacobi family, normalized to 1 at `λ = 0`.
pub fn jacobi_c_symbol(alpha: f64, beta: f64, grid: &[f64]) -> SpectralSymbol {
    let at_zero = jacobi_regular_c(alpha, beta, 0.0);
    SpectralSymbol::injected(format!("jacobi-c(alpha={alpha}, beta={beta})"), grid, Transform::Hypergroup, |l| {
        jacobi_regular_c(alpha, beta, l) / at_zero
    })
}

/// `λ ↦ φ_λ(x)` for the given model.
pub fn character_symbol(model: &CoefficientModel, x: f64, grid: &[f64]) -> Result<SpectralSymbol> {
    let values = grid
        .iter()
        .map(|&l| Ok(Complex64::new(Character::new(model, l)?.eval(x), 0.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralSymbol {
        lambda_grid: grid.to_vec(),
        values,
        provenance: Provenance::Injected,
        transform: Transform::Hypergroup,
        band_limited: false,
        label: format!("character(x={x})"),
    })
}

/// The constant symbol `1`.
pub fn constant_symbol(grid: &[f64]) -> SpectralSymbol {
    SpectralSymbol::injected("constant", grid, Transform::Hypergroup, |_| Complex64::new(1.0, 0.0))
}

/// A pair whose weighted mass exceeds the cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeurlingViolation {
    pub x: f64,
    pub y: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeurlingReport {
    pub weight: WeightSpec,
    /// `max ∫ω dμ_{x,y} / (ω(x) ω(y))` over the sampled pairs.
    pub c_estimate: f64,
    pub cap: f64,
    pub violations: Vec<BeurlingViolation>,
}

/// Estimates the Beurling constant of `w` over `pairs`.
pub fn check_beurling(model: &CoefficientModel, spec: &PlancherelSpec, w: &WeightSpec, pairs: &[(f64, f64)], cap: f64) -> Result<BeurlingReport> {
    w.validate()?;
    if pairs.is_empty() {
        return Err(Error::Invalid("Beurling check needs at least one pair".into()));
    }
    let measures = product_measures(model, pairs, spec)?;
    let mut c_estimate: f64 = 0.0;
    let mut violations = Vec::new();
    for (&(x, y), mu) in pairs.iter().zip(&measures) {
        let ratio = mu.weighted_mass(w) / (w.evaluate(x) * w.evaluate(y));
        c_estimate = c_estimate.max(ratio);
        if ratio > cap {
            violations.push(BeurlingViolation { x, y, ratio });
        }
    }
    Ok(BeurlingReport { weight: *w, c_estimate, cap, violations })
}

/// Growth exponent beyond which weighted norms of `ν_x` count as divergent.
pub const DEFAULT_DIVERGENCE_EXPONENT: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedAdmissibility {
    pub weight: WeightSpec,
    pub x_values: Vec<f64>,
    /// `‖ν_x‖_{1,ω}` for each x.
    pub weighted_norms: Vec<f64>,
    pub sup_weighted_norm: f64,
    /// `log(N_{k+1}/N_k) / log(x_{k+1}/x_k)` between consecutive x values.
    pub growth_exponents: Vec<f64>,
    pub divergence_exponent: f64,
    pub admissible: bool,
    pub excluded: bool,
    /// Set when some `ν_x` did not converge; no admissibility claim is then made.
    pub inconclusive: bool,
    pub reports: Vec<ConvergenceReport>,
}

/// Weighted norms of `ν_x` over `x_values`.
///
/// The family is excluded when the growth exponents increase over the last three
/// steps and the final one exceeds `divergence_exponent`.
pub fn weighted_admissibility(
    model: &CoefficientModel,
    spec: &PlancherelSpec,
    w: &WeightSpec,
    x_values: &[f64],
    y_schedule: &[f64],
    tol: f64,
    divergence_exponent: f64,
) -> Result<WeightedAdmissibility> {
    w.validate()?;
    if x_values.is_empty() || x_values.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Invalid("admissibility needs positive x values".into()));
    }
    let mut weighted_norms = Vec::with_capacity(x_values.len());
    let mut reports = Vec::with_capacity(x_values.len());
    for &x in x_values {
        let (nu, report) = asymptotic_measure(model, spec, x, y_schedule, tol)?;
        weighted_norms.push(nu.weighted_norm(w));
        reports.push(report);
    }
    let growth_exponents: Vec<f64> = x_values
        .windows(2)
        .zip(weighted_norms.windows(2))
        .map(|(x, n)| (n[1] / n[0]).ln() / (x[1] / x[0]).ln())
        .collect();
    let tail = &growth_exponents[growth_exponents.len().saturating_sub(3)..];
    let accelerating = tail.len() >= 2 && tail.windows(2).all(|e| e[1] > e[0]);
    let inconclusive = reports.iter().any(|r| !r.all_converged());
    let excluded = !inconclusive && accelerating && tail.last().is_some_and(|&e| e > divergence_exponent);
    let sup_weighted_norm = weighted_norms.iter().copied().fold(0.0, f64::max);
    Ok(WeightedAdmissibility {
        weight: *w,
        x_values: x_values.to_vec(),
        weighted_norms,
        sup_weighted_norm,
        growth_exponents,
        divergence_exponent,
        admissible: !inconclusive && !excluded && sup_weighted_norm.is_finite(),
        excluded,
        inconclusive,
        reports,
    })
}

/// Evidence that `ν_∞` lies in the weighted algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum Admissibility {
    /// Assumed without measurement (symbol-injection mode).
    Granted,
    Measured(WeightedAdmissibility),
}

/// Weighted variant of [`decide_irregularity`].
pub fn decide_weighted(
    symbol: &SpectralSymbol,
    spec: &PlancherelSpec,
    w: &WeightSpec,
    admissibility: &Admissibility,
    policy: &DecisionPolicy,
    upstream: &[Verdict],
) -> Result<DecisionReport> {
    w.validate()?;
    if *w == WeightSpec::Constant {
        return decide_irregularity(symbol, spec, policy, upstream);
    }
    let mut report = decide_irregularity(symbol, spec, policy, upstream)?;
    report.weight = Some(*w);
    match admissibility {
        Admissibility::Granted => report.notes.push("weighted admissibility granted, not measured".to_string()),
        Admissibility::Measured(a) => {
            report.sup_weighted_norm = Some(a.sup_weighted_norm);
            if a.excluded {
                report.verdict = IrregularityVerdict::AsymptoticFamilyExcluded;
                report.notes.push("weighted norms of the asymptotic family diverge".to_string());
            } else if a.inconclusive {
                report.verdict = IrregularityVerdict::Inconclusive;
                report.notes.push("weighted admissibility could not be established".to_string());
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CentreVerdict {
    Equal,
    Different,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentreComparison {
    pub verdict: CentreVerdict,
    pub x_values: Vec<f64>,
    /// `sup_λ |ν̂^{(L)}_x − ν̂^{(R)}_x|` for each x.
    pub discrepancies: Vec<f64>,
    pub max_discrepancy: f64,
    /// `sup_λ |Im ν̂^{(L)}_x|` over all x.
    pub symmetry_defect: f64,
    pub tolerance: f64,
    pub check_grid: Vec<f64>,
    pub upstream: Vec<Verdict>,
}

/// Compares line-transform symbols of `(left, right)` measure pairs on `check_grid`.
pub fn compare_symbols(
    model: &CoefficientModel,
    x_values: &[f64],
    pairs: &[(RadialMeasure, RadialMeasure)],
    upstream: &[Verdict],
    check_grid: &[f64],
    tol: f64,
) -> Result<CentreComparison> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let mut discrepancies = Vec::with_capacity(pairs.len());
    let mut symmetry_defect: f64 = 0.0;
    for (left, right) in pairs {
        let l = forward_transform(left, model, check_grid)?;
        let r = forward_transform(right, model, check_grid)?;
        if l.transform != Transform::Line || r.transform != Transform::Line {
            return Err(Error::Coordinate { expected: "recentered", found: "hypergroup" });
        }
        discrepancies.push(l.values.iter().zip(&r.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        symmetry_defect = symmetry_defect.max(l.max_imaginary()).max(r.max_imaginary());
    }
    let max_discrepancy = discrepancies.iter().copied().fold(0.0, f64::max);
    let verdict = if !upstream.iter().all(Verdict::is_converged) {
        CentreVerdict::Inconclusive
    } else if max_discrepancy <= tol {
        CentreVerdict::Equal
    } else if max_discrepancy > 10.0 * tol {
        CentreVerdict::Different
    } else {
        CentreVerdict::Inconclusive
    };
    Ok(CentreComparison {
        verdict,
        x_values: x_values.to_vec(),
        discrepancies,
        max_discrepancy,
        symmetry_defect,
        tolerance: tol,
        check_grid: check_grid.to_vec(),
        upstream: upstream.to_vec(),
    })
}

/// Compares `ν^{(L)}_x` with `ν^{(R)}_x` for each x through their line transforms.
pub fn compare_centres(
    model: &CoefficientModel,
    spec: &PlancherelSpec,
    x_values: &[f64],
    y_schedule: &[f64],
    cauchy_tol: f64,
    check_grid: &[f64],
    tol: f64,
) -> Result<CentreComparison> {
    let mut pairs = Vec::with_capacity(x_values.len());
    let mut upstream = Vec::with_capacity(x_values.len());
    for &x in x_values {
        let (left, report) = asymptotic_measure(model, spec, x, y_schedule, cauchy_tol)?;
        let right = left.reflect()?;
        pairs.push((left, right));
        upstream.push(report.verdict);
    }
    compare_symbols(model, x_values, &pairs, &upstream, check_grid, tol)
}
