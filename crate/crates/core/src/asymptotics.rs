//! Recentred families `ν_{x,y} = τ_{-y} μ_{x,y}` and their L¹ limits.

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientModel;
use crate::convolution::product_measures;
use crate::measure::{Coordinate, RadialMeasure};
use crate::spectral::PlancherelSpec;
use crate::{Error, Result};

/// Outcome of a Cauchy scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    /// `rate` is the fitted exponent `p` in `d ~ t^{-p}`, absent when distances vanish.
    Converged { rate: Option<f64> },
    NotConverged,
}

impl Verdict {
    pub fn is_converged(&self) -> bool {
        matches!(self, Verdict::Converged { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleParameter {
    Y,
    X,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub parameter: ScheduleParameter,
    pub schedule: Vec<f64>,
    /// `‖ν_k − ν_{k+1}‖₁` for consecutive schedule entries.
    pub pairwise_distances: Vec<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Smallest radius with combined `|ν|` mass outside `[−R, R]` below `tolerance / 3`.
    pub truncation_radius: f64,
    pub tail_mass: f64,
    /// Reports of the inner `y` scans feeding an `x` scan.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inner: Vec<ConvergenceReport>,
}

impl ConvergenceReport {
    /// True when this scan and every inner scan converged.
    pub fn all_converged(&self) -> bool {
        self.verdict.is_converged() && self.inner.iter().all(ConvergenceReport::all_converged)
    }
}

/// `ν^{(L)}_{x,y} = τ_{-y} μ_{x,y}`.
pub fn nu_left(model: &CoefficientModel, spec: &PlancherelSpec, x: f64, y: f64) -> Result<RadialMeasure> {
    Ok(nu_left_batch(model, spec, &[(x, y)])?.remove(0))
}

/// `ν^{(R)}_{x,y}`, the reflection of `ν^{(L)}_{x,y}`.
pub fn nu_right(model: &CoefficientModel, spec: &PlancherelSpec, x: f64, y: f64) -> Result<RadialMeasure> {
    nu_left(model, spec, x, y)?.reflect()
}

pub(crate) fn nu_left_batch(model: &CoefficientModel, spec: &PlancherelSpec, pairs: &[(f64, f64)]) -> Result<Vec<RadialMeasure>> {
    for &(x, y) in pairs {
        if !(x >= 0.0 && y > x && y.is_finite()) {
            return Err(Error::Invalid(format!("recentred family needs y > x ≥ 0, got x = {x}, y = {y}")));
        }
    }
    let nontrivial: Vec<(f64, f64)> = pairs.iter().copied().filter(|&(x, _)| x > 0.0).collect();
    let mut products = product_measures(model, &nontrivial, spec)?.into_iter();
    pairs
        .iter()
        .map(|&(x, y)| {
            if x == 0.0 {
                Ok(RadialMeasure::dirac(0.0, Coordinate::Recentered))
            } else {
                products.next().expect("one product per pair").recentre(y)
            }
        })
        .collect()
}

fn tail_mass(mu: &RadialMeasure, r: f64) -> f64 {
    let w = mu.weights();
    let dens: f64 = mu.grid.iter().zip(&mu.density).zip(&w).filter(|((t, _), _)| t.abs() > r).map(|((_, d), w)| d.abs() * w).sum();
    dens + mu.atoms.iter().filter(|a| a.location.abs() > r).map(|a| a.mass.abs()).sum::<f64>()
}

fn truncation(iterates: &[RadialMeasure], budget: f64) -> (f64, f64) {
    let combined = |r: f64| iterates.iter().map(|m| tail_mass(m, r)).sum::<f64>();
    let mut hi = iterates
        .iter()
        .map(|m| {
            let (a, b) = m.support();
            a.abs().max(b.abs())
        })
        .fold(0.0, f64::max);
    let mut lo = 0.0;
    if combined(lo) < budget {
        return (0.0, combined(0.0));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if combined(mid) < budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, combined(hi))
}

fn cauchy(schedule: &[f64], distances: &[f64], tol: f64) -> Verdict {
    let Some(&last) = distances.last() else {
        return Verdict::NotConverged;
    };
    let tail = &distances[distances.len().saturating_sub(3)..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    if !(last < tol && monotone) {
        return Verdict::NotConverged;
    }
    let n = distances.len();
    let rate = if n >= 2 && distances[n - 1] > 0.0 && distances[n - 2] > 0.0 {
        let (t0, t1, t2) = (schedule[n - 2], schedule[n - 1], schedule[n]);
        let grow = ((t2 - t1) / (t1 - t0)).ln();
        let mid = ((t1 + t2) / (t0 + t1)).ln();
        (mid > 0.0).then(|| ((distances[n - 2] / distances[n - 1]).ln() + grow) / mid - 1.0).filter(|p| p.is_finite())
    } else {
        None
    };
    Verdict::Converged { rate }
}

fn scan(parameter: ScheduleParameter, schedule: &[f64], iterates: &[RadialMeasure], tol: f64) -> Result<ConvergenceReport> {
    let pairwise_distances = iterates.windows(2).map(|w| w[0].l1_distance(&w[1])).collect::<Result<Vec<f64>>>()?;
    let verdict = cauchy(schedule, &pairwise_distances, tol);
    let (truncation_radius, tail_mass) = truncation(iterates, tol / 3.0);
    Ok(ConvergenceReport {
        parameter,
        schedule: schedule.to_vec(),
        pairwise_distances,
        tolerance: tol,
        verdict,
        truncation_radius,
        tail_mass,
        inner: Vec::new(),
    })
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("Cauchy tolerance must be positive, got {tol}")))
    }
}

fn check_y_schedule(x: f64, schedule: &[f64]) -> Result<()> {
    if schedule.len() < 4 {
        return Err(Error::Invalid(format!("y schedule needs at least 4 points, got {}", schedule.len())));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] <= x {
        return Err(Error::Invalid("y schedule must be strictly increasing and exceed x".into()));
    }
    Ok(())
}

/// Richardson extrapolation of the last two iterates with the fitted rate; the last
/// iterate itself when the scan did not converge or no rate is available.
fn extrapolate(schedule: &[f64], iterates: &[RadialMeasure], verdict: Verdict) -> Result<RadialMeasure> {
    let n = iterates.len();
    let last = &iterates[n - 1];
    match verdict {
        Verdict::Converged { rate: Some(p) } if p > 0.0 && n >= 2 => {
            let k = 1.0 / ((schedule[n - 1] / schedule[n - 2]).powf(p) - 1.0);
            last.combine(1.0 + k, &iterates[n - 2], -k)
        }
        _ => Ok(last.clone()),
    }
}

/// `ν_x = lim_y ν_{x,y}` with its Cauchy report.
///
/// On convergence the last two iterates are extrapolated with the fitted rate.
pub fn asymptotic_measure(
    model: &CoefficientModel,
    spec: &PlancherelSpec,
    x: f64,
    schedule: &[f64],
    tol: f64,
) -> Result<(RadialMeasure, ConvergenceReport)> {
    check_tolerance(tol)?;
    check_y_schedule(x, schedule)?;
    let pairs: Vec<(f64, f64)> = schedule.iter().map(|&y| (x, y)).collect();
    let iterates = nu_left_batch(model, spec, &pairs)?;
    let report = scan(ScheduleParameter::Y, schedule, &iterates, tol)?;
    Ok((extrapolate(schedule, &iterates, report.verdict)?, report))
}

/// Outcome of the `x` scan towards `ν_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitMeasure {
    /// `ν_∞`, present only when every scan converged.
    pub limit: Option<RadialMeasure>,
    /// `ν_x` at the last scheduled x, whether or not the scan converged.
    pub last_iterate: RadialMeasure,
    pub report: ConvergenceReport,
}

/// `ν_∞ = lim_x ν_x` by a Cauchy scan over `x_schedule`.
pub fn limit_measure(
    model: &CoefficientModel,
    spec: &PlancherelSpec,
    x_schedule: &[f64],
    y_schedule: &[f64],
    tol: f64,
) -> Result<LimitMeasure> {
    check_tolerance(tol)?;
    if x_schedule.len() < 2 || x_schedule.windows(2).any(|w| w[1] < w[0]) || x_schedule[0] < 0.0 {
        return Err(Error::Invalid("x schedule needs at least 2 nondecreasing non-negative points".into()));
    }
    let mut distinct = x_schedule.to_vec();
    distinct.dedup();
    for &x in &distinct {
        check_y_schedule(x, y_schedule)?;
    }
    let pairs: Vec<(f64, f64)> = distinct.iter().flat_map(|&x| y_schedule.iter().map(move |&y| (x, y))).collect();
    let all = nu_left_batch(model, spec, &pairs)?;
    let mut limits = Vec::with_capacity(distinct.len());
    let mut inner = Vec::with_capacity(distinct.len());
    for family in all.chunks(y_schedule.len()) {
        let report = scan(ScheduleParameter::Y, y_schedule, family, tol)?;
        limits.push(extrapolate(y_schedule, family, report.verdict)?);
        inner.push(report);
    }
    let mut iterates: Vec<RadialMeasure> = x_schedule
        .iter()
        .map(|x| limits[distinct.iter().position(|d| d == x).expect("x is in its own schedule")].clone())
        .collect();
    let mut report = scan(ScheduleParameter::X, x_schedule, &iterates, tol)?;
    report.inner = inner;
    let last_iterate = iterates.pop().expect("nonempty schedule");
    let limit = report.all_converged().then(|| last_iterate.clone());
    Ok(LimitMeasure { limit, last_iterate, report })
}
