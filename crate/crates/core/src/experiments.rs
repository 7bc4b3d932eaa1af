//! Batch experiments driven by a [`RunConfig`](crate::config::RunConfig).
//!
//! Each runner returns in-memory results; the command line front end only
//! writes them out. Seeds are derived from the run seed by role, so outputs
//! are identical for identical configs regardless of the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{
    ConfigError, DecayConfig, DvConfig, GnzConfig, GnzTestKind, MgfConfig, PhaseScanConfig, SampleConfig,
};
use crate::dynamics::{sample_gibbs, sample_poisson, DynamicsError, GibbsBoundary, RngSeed};
use crate::entropy_gap::{
    analytic_report, dv_bound_from_values, ou_decay_empirical, BoundMode, DvBoundReport, EntropyGapError,
    Separation, separating_observable,
};
use crate::estimators::{gnz_residual, log_mgf_of_values, herbst_bound, EstimatorError, GnzTest};
use crate::geometry::{Point, PointConfiguration, Region, Window};
use crate::interactions::{AreaInteraction, Interaction, InteractionError, InteractionSpec};
use crate::observables::{
    beta_constant, space_average, GradientConstants, ObservableError, SpaceAverageSpec,
};
use crate::output::{ResultRow, SCHEMA_VERSION};
use crate::stats::mean_se;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    EntropyGap(#[from] EntropyGapError),
    #[error(transparent)]
    Interaction(#[from] InteractionError),
}

/// Configurations for the `sample` command.
pub fn run_sample(cfg: &SampleConfig, seed: RngSeed) -> Result<Vec<PointConfiguration>, ExperimentError> {
    let window = cfg.window.build()?;
    if matches!(cfg.interaction, InteractionSpec::Poisson) {
        return Ok((0..cfg.n_samples)
            .into_par_iter()
            .map(|i| sample_poisson(&window, cfg.intensity, 1.0, &mut seed.child(i as u64).rng()))
            .collect::<Result<_, _>>()?);
    }
    let interaction = cfg.interaction.build()?;
    let boundary = cfg.boundary.build(window.dim())?;
    Ok((0..cfg.n_samples)
        .into_par_iter()
        .map(|i| sample_gibbs(&window, &interaction, &boundary, cfg.burn_in, &mut seed.child(i as u64).rng()))
        .collect::<Result<_, _>>()?)
}

/// `F_n` on every sample.
pub fn space_average_values(spec: &SpaceAverageSpec, samples: &[PointConfiguration]) -> Result<Vec<f64>, ExperimentError> {
    Ok(samples
        .par_iter()
        .map(|c| space_average(spec, c))
        .collect::<Result<_, _>>()?)
}

/// Empirical centered log-MGF of `F_n` against the Herbst majorant; rows
/// `centered_log_mgf`, `herbst_bound`, `margin` (bound minus estimate) per λ,
/// and `overflow` for λ values that overflowed.
pub fn run_mgf_check(cfg: &MgfConfig, seed: RngSeed) -> Result<Vec<ResultRow>, ExperimentError> {
    let window = cfg.window.build()?;
    let sampler = cfg.sampler.build(window)?;
    let kernel = cfg.kernel.build(window.dim())?;
    let spacing = cfg.quad_spacing.unwrap_or(kernel.radius() / 16.0);
    let spec = SpaceAverageSpec::with_spacing(kernel.clone(), cfg.n, spacing)?;
    let samples = sampler.draw(cfg.n_samples, seed.child(0))?;
    let values = space_average_values(&spec, &samples)?;
    let mgf = log_mgf_of_values(&values, &cfg.lambda_grid, seed.child(1))?;
    let consts = GradientConstants::new(&kernel, cfg.n, spacing);
    let n = values.len();
    let mut rows = Vec::new();
    for (k, &lambda) in cfg.lambda_grid.iter().enumerate() {
        let bound = herbst_bound(cfg.c_nu, consts.alpha_sq_n, consts.beta, lambda);
        if mgf.overflow[k] {
            rows.push(ResultRow::new("overflow", lambda, 1.0, None, n, seed));
            rows.push(ResultRow::new("herbst_bound", lambda, bound, None, n, seed));
            continue;
        }
        let est = mgf.centered_log_mgf[k];
        let se = mgf.std_errors[k];
        rows.push(ResultRow::new("centered_log_mgf", lambda, est, Some(se), n, seed));
        rows.push(ResultRow::new("herbst_bound", lambda, bound, None, n, seed));
        rows.push(ResultRow::new("margin", lambda, bound - est, Some(se), n, seed));
    }
    Ok(rows)
}

/// Output of the `dv-bound` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DvBoundOutput {
    pub schema_version: u32,
    pub seed: String,
    pub separated: bool,
    pub separation: Separation,
    pub reports: Vec<DvBoundReport>,
}

pub fn run_dv_bound(cfg: &DvConfig, seed: RngSeed) -> Result<DvBoundOutput, ExperimentError> {
    let window = cfg.window.build()?;
    let mu_seed = seed.child(0);
    let nu_seed = seed.child(1);
    let mu = cfg.mu.build(window)?.draw(cfg.n_samples, mu_seed)?;
    let nu = cfg.nu.build(window)?.draw(cfg.n_samples, nu_seed)?;
    let separation = separating_observable(&mu, &nu, &cfg.kernels)?;
    let mut reports = Vec::new();
    if let Separation::Separated {
        index,
        sign,
        rho,
        std_error,
        ..
    } = &separation
    {
        let spec_k = &cfg.kernels[*index];
        let kernel = spec_k.build(window.dim())?.with_sign(*sign > 0);
        let r = kernel.radius();
        let spacing = r / 16.0;
        for mode in &cfg.modes {
            let mut report = match mode {
                BoundMode::Analytic => {
                    let c = cfg.c_nu.expect("validated");
                    analytic_report(spec_k, *rho, *std_error, beta_constant(&kernel, spacing), c, cfg.n, r)?
                }
                BoundMode::Empirical => {
                    let spec = SpaceAverageSpec::with_spacing(kernel.clone(), cfg.n, spacing)?;
                    let fmu = space_average_values(&spec, &mu)?;
                    let fnu = space_average_values(&spec, &nu)?;
                    let id = format!("{} sign={sign}", spec_k.id());
                    dv_bound_from_values(&fmu, &fnu, &spec, &id, &cfg.lambda_grid, seed.child(2))?
                }
            };
            report.mu_samples = mu.len();
            report.nu_samples = nu.len();
            report.mu_seed = Some(mu_seed.to_string());
            report.nu_seed = Some(nu_seed.to_string());
            reports.push(report);
        }
    }
    Ok(DvBoundOutput {
        schema_version: SCHEMA_VERSION,
        seed: seed.to_string(),
        separated: separation.is_separated(),
        separation,
        reports,
    })
}

/// Rows `density`, `analytic_density`, `rate`, `analytic_rate` and
/// `envelope` (`e^{-t} r(0)`) over the time grid.
pub fn run_decay(cfg: &DecayConfig, seed: RngSeed) -> Result<Vec<ResultRow>, ExperimentError> {
    let window = cfg.window.build()?;
    let table = ou_decay_empirical(cfg.a0, &window, &cfg.t_grid, cfg.replicas, seed)?;
    let (_, r0) = crate::entropy_gap::ou_decay_analytic(cfg.a0, 0.0)?;
    let n = cfg.replicas;
    let mut rows = Vec::new();
    for r in table {
        rows.push(ResultRow::new("density", r.t, r.density, Some(r.density_std_error), n, seed));
        rows.push(ResultRow::new("analytic_density", r.t, r.analytic_density, None, n, seed));
        rows.push(ResultRow::new("rate", r.t, r.rate, Some(r.rate_std_error), n, seed));
        rows.push(ResultRow::new("analytic_rate", r.t, r.analytic_rate, None, n, seed));
        rows.push(ResultRow::new("envelope", r.t, (-r.t).exp() * r0, None, n, seed));
    }
    Ok(rows)
}

/// Per-γ summary of a phase scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseScanPoint {
    pub gamma: f64,
    pub dense_mean: f64,
    pub dense_std_error: f64,
    pub empty_mean: f64,
    pub empty_std_error: f64,
    pub gap: f64,
    pub gap_std_error: f64,
}

impl PhaseScanPoint {
    pub fn gap_exceeds(&self, k: f64) -> bool {
        self.gap.abs() > k * self.gap_std_error
    }
}

/// Interior density of the area interaction at each γ, under a dense Poisson
/// boundary shell and under the empty boundary.
pub fn phase_scan(cfg: &PhaseScanConfig, seed: RngSeed) -> Result<(Vec<PhaseScanPoint>, Vec<ResultRow>), ExperimentError> {
    let window = Window::free(cfg.half_side, 2).map_err(DynamicsError::from)?;
    let interior = cfg.interior_half_side.unwrap_or(cfg.half_side / 2.0);
    let probe = Region::cube(2, -interior, interior);
    let probe_volume = probe.volume(2);
    let shell = Window::free(cfg.half_side + 2.0 * cfg.radius, 2).map_err(DynamicsError::from)?;
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for (gi, &gamma) in cfg.gammas.iter().enumerate() {
        let interaction = Interaction::Area(AreaInteraction::new(gamma, cfg.radius, cfg.quad_resolution)?);
        let mut means = [(0.0, 0.0); 2];
        for (bi, label) in ["dense", "empty"].into_iter().enumerate() {
            let densities: Vec<(f64, RngSeed)> = (0..cfg.replicas)
                .into_par_iter()
                .map(|r| {
                    let s = seed.child(gi as u64).child(bi as u64).child(r as u64);
                    let mut rng = s.rng();
                    let outer: Vec<Point> = if bi == 0 {
                        sample_poisson(&shell, cfg.dense_intensity, 1.0, &mut rng)?
                            .points()
                            .iter()
                            .filter(|p| !window.contains(p))
                            .copied()
                            .collect()
                    } else {
                        Vec::new()
                    };
                    let c = sample_gibbs(&window, &interaction, &GibbsBoundary::Fixed(outer), cfg.burn_in, &mut rng)?;
                    Ok((c.count_in(&probe) as f64 / probe_volume, s))
                })
                .collect::<Result<_, DynamicsError>>()?;
            for (d, s) in &densities {
                rows.push(ResultRow::new(format!("density_{label}"), gamma, *d, None, 1, s));
            }
            let values: Vec<f64> = densities.iter().map(|d| d.0).collect();
            means[bi] = mean_se(&values);
            rows.push(ResultRow::new(
                format!("mean_density_{label}"),
                gamma,
                means[bi].0,
                Some(means[bi].1),
                cfg.replicas,
                seed,
            ));
        }
        let point = PhaseScanPoint {
            gamma,
            dense_mean: means[0].0,
            dense_std_error: means[0].1,
            empty_mean: means[1].0,
            empty_std_error: means[1].1,
            gap: means[0].0 - means[1].0,
            gap_std_error: (means[0].1.powi(2) + means[1].1.powi(2)).sqrt(),
        };
        rows.push(ResultRow::new("density_gap", gamma, point.gap, Some(point.gap_std_error), cfg.replicas, seed));
        rows.push(ResultRow::new(
            "gap_exceeds_3se",
            gamma,
            f64::from(u8::from(point.gap_exceeds(3.0))),
            None,
            cfg.replicas,
            seed,
        ));
        points.push(point);
    }
    Ok((points, rows))
}

/// GNZ residual for the configured test function.
pub fn run_gnz_check(cfg: &GnzConfig, seed: RngSeed) -> Result<Vec<ResultRow>, ExperimentError> {
    let window = cfg.window.build()?;
    let sampler = cfg.sampler.build(window)?;
    let region = cfg.region.build(window.dim())?;
    let samples = sampler.draw(cfg.n_samples, seed.child(0))?;
    let interaction = cfg.sampler.interaction()?;
    // a Poisson(a) reference has constant birth rate a
    let activity = cfg.sampler.poisson_intensity().unwrap_or(1.0);
    let rate = |x: &Point, c: &PointConfiguration| activity * interaction.birth_rate(x, c);
    let u: Box<dyn Fn(&Point, &PointConfiguration) -> f64 + Sync> = match cfg.test {
        GnzTestKind::Zero => Box::new(|_, _| 0.0),
        GnzTestKind::Indicator => Box::new(move |x, c| f64::from(u8::from(region.contains(c.window(), x)))),
        GnzTestKind::IndicatorBoltzmann => Box::new(|x, c| {
            if region.contains(c.window(), x) {
                interaction.birth_rate(x, c)
            } else {
                0.0
            }
        }),
    };
    let test = GnzTest { u, support: region };
    let res = gnz_residual(&samples, rate, &test, cfg.mc_points, seed.child(1))?;
    Ok(vec![ResultRow::new(
        "gnz_residual",
        0.0,
        res.mean,
        Some(res.std_error),
        res.n_samples,
        seed,
    )])
}
