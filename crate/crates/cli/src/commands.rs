//! One function per subcommand. Each writes its artifacts through a [`Sink`].

use std::path::Path;

use anyhow::{bail, Context, Result};
use hypergroup::asymptotics::{asymptotic_measure, limit_measure, Verdict};
use hypergroup::coefficients::{CoefficientModel, Family};
use hypergroup::convolution::product_measure;
use hypergroup::decision::{
    character_symbol, check_beurling, collect_verdicts, compare_centres, constant_symbol, decide_weighted, jacobi_c_symbol, weighted_admissibility,
    Admissibility, DecisionPolicy, IrregularityVerdict, WeightSpec,
};
use hypergroup::eigenfunctions::Character;
use hypergroup::measure::RadialMeasure;
use hypergroup::quadrature::linspace;
use hypergroup::spectral::{calibrate_plancherel, forward_transform, PlancherelSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::json;

use crate::config::{Injection, RunConfig, Stage};
use crate::output::{sha256_hex, Sink};

pub const PLANCHEREL_FILE: &str = "plancherel.json";

/// Overrides given on the `decide` command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct DecideArgs {
    pub inject: Option<Injection>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub x_star: Option<f64>,
}

/// What a stage reports back to the driver.
#[derive(Debug, Clone, Copy, Default)]
pub struct Outcome {
    /// Some verdict fell back to inconclusive because a limit did not converge.
    pub nonconvergent: bool,
}

pub struct Session<'a> {
    pub config: &'a RunConfig,
    pub model: CoefficientModel,
    pub sink: Sink,
}

impl<'a> Session<'a> {
    pub fn new(config: &'a RunConfig, sink: Sink) -> Result<Self> {
        Ok(Self { config, model: config.model.build()?, sink })
    }

    /// Loads the calibration artifact and checks it matches the configuration.
    fn load_spec(&self) -> Result<(PlancherelSpec, String)> {
        let path = self.sink.path(PLANCHEREL_FILE);
        let bytes = std::fs::read(&path)
            .with_context(|| format!("missing calibration artifact {}; run `hypergroup calibrate` first", path.display()))?;
        let spec: PlancherelSpec = serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
        if spec.model != self.model {
            bail!("{} was calibrated for a different model; rerun `hypergroup calibrate`", path.display());
        }
        if spec.options != self.config.spectral_options() {
            bail!("{} was calibrated with different spectral options; rerun `hypergroup calibrate`", path.display());
        }
        spec.ensure_usable()?;
        Ok((spec, sha256_hex(&bytes)))
    }

    fn check_grid(&self) -> Vec<f64> {
        linspace(0.0, self.config.points.check_lambda_max, self.config.points.check_samples)
    }

    fn policy(&self) -> DecisionPolicy {
        DecisionPolicy { eps: self.config.tolerances.eps, delta: self.config.tolerances.delta }
    }
}

fn measure_summary(m: &RadialMeasure) -> serde_json::Value {
    let (lo, hi) = m.support();
    json!({
        "coordinate": m.coordinate,
        "total_mass": m.total_mass(),
        "total_variation": m.total_variation(),
        "min_density": m.min_density(),
        "support": [lo, hi],
        "grid_points": m.grid.len(),
        "atoms": m.atoms.len(),
    })
}

pub fn calibrate(ctx: &mut Session) -> Result<Outcome> {
    let spec = calibrate_plancherel(&ctx.model, ctx.config.spectral_options())?;
    let bytes = serde_json::to_vec(&spec)?;
    let digest = sha256_hex(&bytes);
    ctx.sink.write_bytes(PLANCHEREL_FILE, &bytes)?;
    let report = json!({
        "model": spec.model,
        "options": spec.options,
        "lambda_max": spec.options.lambda_max(),
        "spatial_step": spec.options.spatial_step(),
        "lambda_points": spec.lambda_grid.len(),
        "constant": spec.constant,
        "calibration_error": spec.calibration_error,
        "usable": spec.is_usable(),
        "window_mass": spec.window_mass(),
    });
    ctx.sink.write_envelope("calibrate", Some(&digest), &report)?;
    spec.ensure_usable()?;
    Ok(Outcome::default())
}

#[derive(Serialize)]
struct EigenRow {
    lambda: f64,
    source: hypergroup::eigenfunctions::CharacterSource,
    amplitude: Option<[f64; 2]>,
}

pub fn eigen(ctx: &mut Session) -> Result<Outcome> {
    let p = &ctx.config.points;
    let xs = linspace(0.0, p.eigen_x_max, p.eigen_samples);
    let mut csv = String::from("lambda,x,phi\n");
    let mut rows = Vec::with_capacity(p.lambdas.len());
    for &l in &p.lambdas {
        let chi = Character::new(&ctx.model, l)?;
        for (x, v) in xs.iter().zip(chi.eval_many(&xs)) {
            csv.push_str(&format!("{l:.12e},{x:.12e},{v:.12e}\n"));
        }
        rows.push(EigenRow { lambda: l, source: chi.source, amplitude: chi.amplitude().map(|c| [c.re, c.im]) });
    }
    ctx.sink.write_bytes("eigen.csv", csv.as_bytes())?;
    ctx.sink.write_envelope("eigen", None, &json!({ "model": ctx.model, "x_max": p.eigen_x_max, "characters": rows }))?;
    Ok(Outcome::default())
}

pub fn product(ctx: &mut Session) -> Result<Outcome> {
    let (spec, digest) = ctx.load_spec()?;
    let (x, y) = (ctx.config.points.x, ctx.config.points.y);
    let mu = product_measure(&ctx.model, x, y, &spec)?;
    ctx.sink.write_measure("product", &mu)?;
    ctx.sink.write_envelope("product", Some(&digest), &json!({ "x": x, "y": y, "measure": measure_summary(&mu) }))?;
    Ok(Outcome::default())
}

pub fn asym(ctx: &mut Session) -> Result<Outcome> {
    let (spec, digest) = ctx.load_spec()?;
    let x = ctx.config.points.x;
    let (nu, report) = asymptotic_measure(&ctx.model, &spec, x, &ctx.config.schedules.y, ctx.config.tolerances.cauchy)?;
    ctx.sink.write_measure("asym", &nu)?;
    let nonconvergent = !report.all_converged();
    ctx.sink.write_envelope("asym", Some(&digest), &json!({ "x": x, "convergence": report, "measure": measure_summary(&nu) }))?;
    Ok(Outcome { nonconvergent })
}

pub fn limit(ctx: &mut Session) -> Result<Outcome> {
    let (spec, digest) = ctx.load_spec()?;
    let s = &ctx.config.schedules;
    let outcome = limit_measure(&ctx.model, &spec, &s.x, &s.y, ctx.config.tolerances.cauchy)?;
    let measure = outcome.limit.as_ref().unwrap_or(&outcome.last_iterate);
    ctx.sink.write_measure("limit", measure)?;
    let report = json!({
        "converged": outcome.limit.is_some(),
        "convergence": outcome.report,
        "measure": measure_summary(measure),
    });
    ctx.sink.write_envelope("limit", Some(&digest), &report)?;
    Ok(Outcome { nonconvergent: outcome.limit.is_none() })
}

fn jacobi_parameters(model: &CoefficientModel, args: &DecideArgs) -> Result<(f64, f64)> {
    let (ma, mb) = match model.family {
        Family::Jacobi { alpha, beta } => (Some(alpha), Some(beta)),
        _ => (None, None),
    };
    match (args.alpha.or(ma), args.beta.or(mb)) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => bail!("--inject jacobi-c needs --alpha and --beta unless the model is a Jacobi model"),
    }
}

pub fn decide(ctx: &mut Session, args: &DecideArgs) -> Result<Outcome> {
    let (spec, digest) = ctx.load_spec()?;
    let config = ctx.config;
    let weight = config.weight;
    let grid = &spec.lambda_grid;
    let (symbol, admissibility, upstream, convergence) = match args.inject.or(config.decide.inject) {
        Some(kind) => {
            let symbol = match kind {
                Injection::JacobiC => {
                    let (a, b) = jacobi_parameters(&ctx.model, args)?;
                    jacobi_c_symbol(a, b, grid)
                }
                Injection::BesselCharacter => {
                    let x_star = args.x_star.unwrap_or(config.decide.x_star);
                    character_symbol(&CoefficientModel::bessel(ctx.model.alpha()), x_star, grid)?
                }
                Injection::Constant => constant_symbol(grid),
            };
            (symbol, Admissibility::Granted, Vec::new(), None)
        }
        None => {
            let s = &config.schedules;
            let tol = config.tolerances.cauchy;
            let outcome = limit_measure(&ctx.model, &spec, &s.x, &s.y, tol)?;
            let measure = outcome.limit.as_ref().unwrap_or(&outcome.last_iterate);
            let mut symbol = forward_transform(measure, &ctx.model, grid)?;
            symbol.label = if outcome.limit.is_some() { "nu-infinity".into() } else { "nu-x(last, not converged)".into() };
            let admissibility = if weight == WeightSpec::Constant {
                Admissibility::Granted
            } else {
                let a = weighted_admissibility(&ctx.model, &spec, &weight, &s.admissibility_x, &s.y, tol, config.tolerances.divergence_exponent)?;
                Admissibility::Measured(a)
            };
            let mut upstream = collect_verdicts(&outcome.report);
            if let Admissibility::Measured(a) = &admissibility {
                upstream.extend(a.reports.iter().flat_map(collect_verdicts));
            }
            (symbol, admissibility, upstream, Some(outcome.report))
        }
    };
    let decision = decide_weighted(&symbol, &spec, &weight, &admissibility, &ctx.policy(), &upstream)?;
    ctx.sink.write_symbol("decide_symbol", &symbol)?;
    let nonconvergent = decision.verdict == IrregularityVerdict::Inconclusive && upstream.contains(&Verdict::NotConverged);
    let admissibility = match admissibility {
        Admissibility::Granted => None,
        Admissibility::Measured(a) => Some(a),
    };
    let report = json!({ "decision": decision, "convergence": convergence, "admissibility": admissibility });
    ctx.sink.write_envelope("decide", Some(&digest), &report)?;
    Ok(Outcome { nonconvergent })
}

pub fn weights(ctx: &mut Session) -> Result<Outcome> {
    let (spec, digest) = ctx.load_spec()?;
    let config = ctx.config;
    let p = &config.points;
    let mut rng = StdRng::seed_from_u64(config.seed);
    let pairs: Vec<(f64, f64)> = (0..p.beurling_pairs)
        .map(|_| (rng.gen_range(0.0..=p.beurling_max), rng.gen_range(0.0..=p.beurling_max)))
        .collect();
    let beurling = check_beurling(&ctx.model, &spec, &config.weight, &pairs, config.tolerances.beurling_cap)?;
    let s = &config.schedules;
    let admissibility = weighted_admissibility(
        &ctx.model,
        &spec,
        &config.weight,
        &s.admissibility_x,
        &s.y,
        config.tolerances.cauchy,
        config.tolerances.divergence_exponent,
    )?;
    let nonconvergent = admissibility.inconclusive;
    ctx.sink.write_envelope("weights", Some(&digest), &json!({ "pairs": pairs, "beurling": beurling, "admissibility": admissibility }))?;
    Ok(Outcome { nonconvergent })
}

pub fn centres(ctx: &mut Session) -> Result<Outcome> {
    let (spec, digest) = ctx.load_spec()?;
    let c = ctx.config;
    let comparison = compare_centres(&ctx.model, &spec, &c.schedules.centres_x, &c.schedules.y, c.tolerances.cauchy, &ctx.check_grid(), c.tolerances.centre)?;
    let nonconvergent = comparison.upstream.contains(&Verdict::NotConverged);
    ctx.sink.write_envelope("centres", Some(&digest), &comparison)?;
    Ok(Outcome { nonconvergent })
}

pub fn stage(ctx: &mut Session, stage: Stage, decide_args: &DecideArgs) -> Result<Outcome> {
    match stage {
        Stage::Calibrate => calibrate(ctx),
        Stage::Eigen => eigen(ctx),
        Stage::Product => product(ctx),
        Stage::Asym => asym(ctx),
        Stage::Limit => limit(ctx),
        Stage::Decide => decide(ctx, decide_args),
        Stage::Weights => weights(ctx),
        Stage::Centres => centres(ctx),
    }
}

/// Runs the configured pipeline and writes `run.json` listing every artifact.
pub fn run(ctx: &mut Session, base: &Path) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let mut stages = Vec::new();
    for &s in &ctx.config.pipeline {
        let o = stage(ctx, s, &DecideArgs::default())?;
        outcome.nonconvergent |= o.nonconvergent;
        stages.push(json!({ "stage": s, "nonconvergent": o.nonconvergent }));
    }
    let files = crate::output::display_paths(ctx.sink.written(), base);
    ctx.sink.write_envelope("run", None, &json!({ "stages": stages, "files": files }))?;
    Ok(outcome)
}
