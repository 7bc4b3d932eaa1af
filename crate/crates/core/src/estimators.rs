//! Monte Carlo functionals over sample sets: means, centered log-MGFs,
//! entropies, Dirichlet forms, MLSI ratio probes and GNZ residuals.
//!
//! Every estimator takes a slice of configurations (normally the output of
//! [`Sampler::draw`](crate::dynamics::Sampler::draw)), so that several functionals can
//! share one sample set. Functional evaluation is parallel; reductions run in
//! sample order, which makes results deterministic given the seed.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::RngSeed;
use crate::geometry::{Point, PointConfiguration, Region};
use crate::interactions::Interaction;
use crate::stats::{bootstrap_se, log_mean_exp, mean_se};

/// Bootstrap resamples used for nonlinear functionals.
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// `λ·max|F - mean|` above which `e^{λ(F - mean)}` is treated as overflowing.
pub const OVERFLOW_EXPONENT: f64 = 700.0;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("at least {needed} samples are required, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("lambda grid must be nonempty, finite and strictly increasing")]
    Grid,
    #[error("functional must be positive, got {value} on sample {index}")]
    NonPositive { index: usize, value: f64 },
    #[error("invalid region: {0}")]
    Region(String),
    #[error("quadrature spacing must be positive, got {0}")]
    Spacing(f64),
}

fn require_samples(n: usize, needed: usize) -> Result<(), EstimatorError> {
    if n < needed {
        Err(EstimatorError::TooFewSamples { needed, got: n })
    } else {
        Ok(())
    }
}

/// `F` evaluated on every sample, in sample order.
pub fn evaluate<F>(samples: &[PointConfiguration], f: F) -> Vec<f64>
where
    F: Fn(&PointConfiguration) -> f64 + Sync,
{
    samples.par_iter().map(|c| f(c)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

pub fn estimate_mean<F>(samples: &[PointConfiguration], f: F) -> Result<MeanEstimate, EstimatorError>
where
    F: Fn(&PointConfiguration) -> f64 + Sync,
{
    mean_of_values(&evaluate(samples, f))
}

pub fn mean_of_values(values: &[f64]) -> Result<MeanEstimate, EstimatorError> {
    require_samples(values.len(), 2)?;
    let (mean, se) = mean_se(values);
    // a constant functional has exactly zero spread
    let se = if values.iter().all(|v| *v == values[0]) { 0.0 } else { se };
    Ok(MeanEstimate {
        mean,
        std_error: se,
        n_samples: values.len(),
    })
}

/// `0, 0.1, …, 2.0`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 10.0).collect()
}

pub fn check_grid(grid: &[f64]) -> Result<(), EstimatorError> {
    if grid.is_empty() || grid.iter().any(|l| !l.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EstimatorError::Grid);
    }
    Ok(())
}

/// Centered log-MGF `log ν̂[e^{λ(F - ν̂[F])}]` on a λ grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MgfEstimate {
    pub lambda_grid: Vec<f64>,
    pub centered_log_mgf: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Grid points where the exponent exceeded the overflow guard; their
    /// estimates are NaN.
    pub overflow: Vec<bool>,
    pub n_samples: usize,
}

fn centered_lme(values: &[f64], idx: Option<&[usize]>, lambda: f64) -> f64 {
    let pick = |i: usize| match idx {
        Some(ix) => values[ix[i]],
        None => values[i],
    };
    let n = idx.map_or(values.len(), |ix| ix.len());
    let mean = (0..n).map(pick).sum::<f64>() / n as f64;
    let shifted: Vec<f64> = (0..n).map(|i| lambda * (pick(i) - mean)).collect();
    log_mean_exp(&shifted)
}

pub fn estimate_log_mgf<F>(
    samples: &[PointConfiguration],
    f: F,
    lambda_grid: &[f64],
    seed: RngSeed,
) -> Result<MgfEstimate, EstimatorError>
where
    F: Fn(&PointConfiguration) -> f64 + Sync,
{
    log_mgf_of_values(&evaluate(samples, f), lambda_grid, seed)
}

pub fn log_mgf_of_values(values: &[f64], lambda_grid: &[f64], seed: RngSeed) -> Result<MgfEstimate, EstimatorError> {
    require_samples(values.len(), 2)?;
    check_grid(lambda_grid)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let spread = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let rows: Vec<(f64, f64, bool)> = lambda_grid
        .par_iter()
        .enumerate()
        .map(|(k, &lambda)| {
            if lambda == 0.0 {
                return (0.0, 0.0, false);
            }
            if lambda.abs() * spread > OVERFLOW_EXPONENT {
                return (f64::NAN, f64::NAN, true);
            }
            let est = centered_lme(values, None, lambda);
            let mut rng = seed.child(k as u64).rng();
            let se = bootstrap_se(values.len(), BOOTSTRAP_RESAMPLES, &mut rng, |ix| {
                centered_lme(values, Some(ix), lambda)
            });
            (est, se, false)
        })
        .collect();
    Ok(MgfEstimate {
        lambda_grid: lambda_grid.to_vec(),
        centered_log_mgf: rows.iter().map(|r| r.0).collect(),
        std_errors: rows.iter().map(|r| r.1).collect(),
        overflow: rows.iter().map(|r| r.2).collect(),
        n_samples: values.len(),
    })
}

/// Herbst majorant `c α² λ (e^{βλ} - 1) / β` of the centered log-MGF, with
/// the limit `c α² λ²` for `β < 1e-8`.
pub fn herbst_bound(c_nu: f64, alpha_sq: f64, beta: f64, lambda: f64) -> f64 {
    if beta < 1e-8 {
        c_nu * alpha_sq * lambda * lambda
    } else {
        c_nu * alpha_sq * lambda * (beta * lambda).exp_m1() / beta
    }
}

fn phi(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_positive(values: &[f64]) -> Result<(), EstimatorError> {
    match values.iter().position(|v| !(*v > 0.0)) {
        Some(index) => Err(EstimatorError::NonPositive {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

fn entropy_of(values: &[f64], idx: Option<&[usize]>) -> f64 {
    let n = idx.map_or(values.len(), |ix| ix.len());
    let pick = |i: usize| match idx {
        Some(ix) => values[ix[i]],
        None => values[i],
    };
    let first = pick(0);
    if (0..n).all(|i| pick(i) == first) {
        return 0.0;
    }
    let m = (0..n).map(pick).sum::<f64>() / n as f64;
    let mphi = (0..n).map(|i| phi(pick(i))).sum::<f64>() / n as f64;
    mphi - phi(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub entropy: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// `Ent[F] = E[F log F] - E[F] log E[F]` with a bootstrap standard error.
pub fn estimate_entropy<F>(samples: &[PointConfiguration], f: F, seed: RngSeed) -> Result<EntropyEstimate, EstimatorError>
where
    F: Fn(&PointConfiguration) -> f64 + Sync,
{
    entropy_of_values(&evaluate(samples, f), seed)
}

pub fn entropy_of_values(values: &[f64], seed: RngSeed) -> Result<EntropyEstimate, EstimatorError> {
    require_samples(values.len(), 2)?;
    check_positive(values)?;
    let entropy = entropy_of(values, None);
    let std_error = if entropy == 0.0 {
        0.0
    } else {
        bootstrap_se(values.len(), BOOTSTRAP_RESAMPLES, &mut seed.rng(), |ix| {
            entropy_of(values, Some(ix))
        })
    };
    Ok(EntropyEstimate {
        entropy,
        std_error,
        n_samples: values.len(),
    })
}

/// Jump rate weighting the Dirichlet form.
#[derive(Clone, Copy, Debug)]
pub enum DirichletRate<'a> {
    /// Rate one, the Poisson (MLSI-1) form.
    Unit,
    /// Papangelou birth rate `b(x, η)` of the interaction.
    Birth(&'a Interaction),
}

impl DirichletRate<'_> {
    fn at(&self, x: &Point, config: &PointConfiguration) -> f64 {
        match self {
            DirichletRate::Unit => 1.0,
            DirichletRate::Birth(i) => i.birth_rate(x, config),
        }
    }
}

/// Midpoint quadrature nodes over a box, spacing at most `spacing`.
fn box_nodes(region: &Region, dim: usize, spacing: f64) -> Result<(Vec<Point>, f64), EstimatorError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(EstimatorError::Spacing(spacing));
    }
    let (lower, upper) = match region {
        Region::Box { lower, upper } => (lower, upper),
        Region::Ball { .. } => return Err(EstimatorError::Region("quadrature support must be a box".into())),
    };
    region.validate(dim).map_err(|e| EstimatorError::Region(e.to_string()))?;
    let mut axes = Vec::with_capacity(dim);
    let mut cell = 1.0;
    for k in 0..dim {
        let len = upper.0[k] - lower.0[k];
        let m = ((len / spacing).ceil() as usize).max(1);
        let h = len / m as f64;
        cell *= h;
        axes.push((0..m).map(|i| lower.0[k] + (i as f64 + 0.5) * h).collect::<Vec<_>>());
    }
    let mut nodes = vec![Point::ORIGIN];
    for (k, axis) in axes.iter().enumerate() {
        nodes = nodes
            .iter()
            .flat_map(|p| {
                axis.iter().map(move |&c| {
                    let mut q = *p;
                    q.0[k] = c;
                    q
                })
            })
            .collect();
    }
    Ok((nodes, cell))
}

/// `∫_support rate(x, η) (D_x F)(η) (D_x log F)(η) dx` for one configuration.
fn dirichlet_integrand<F>(
    config: &PointConfiguration,
    f: &F,
    rate: DirichletRate<'_>,
    nodes: &[Point],
    cell: f64,
    index: usize,
) -> Result<f64, EstimatorError>
where
    F: Fn(&PointConfiguration) -> f64,
{
    let f0 = f(config);
    if !(f0 > 0.0) {
        return Err(EstimatorError::NonPositive { index, value: f0 });
    }
    let mut acc = 0.0;
    for x in nodes {
        let Ok(with) = config.with_point(*x) else { continue };
        let f1 = f(&with);
        if !(f1 > 0.0) {
            return Err(EstimatorError::NonPositive { index, value: f1 });
        }
        if f1 == f0 {
            continue;
        }
        acc += rate.at(x, config) * (f1 - f0) * (f1.ln() - f0.ln());
    }
    Ok(acc * cell)
}

fn dirichlet_values<F>(
    samples: &[PointConfiguration],
    rate: DirichletRate<'_>,
    f: &F,
    support: &Region,
    quad_spacing: f64,
) -> Result<Vec<f64>, EstimatorError>
where
    F: Fn(&PointConfiguration) -> f64 + Sync,
{
    let dim = samples.first().map_or(1, |c| c.window().dim());
    let (nodes, cell) = box_nodes(support, dim, quad_spacing)?;
    samples
        .par_iter()
        .enumerate()
        .map(|(i, c)| dirichlet_integrand(c, f, rate, &nodes, cell, i))
        .collect()
}

/// Dirichlet form `E[∫ rate(x, η) D_x F D_x log F dx]` with the x-integral
/// restricted to `support`, a box outside of which `D_x F` vanishes.
pub fn estimate_dirichlet<F>(
    samples: &[PointConfiguration],
    rate: DirichletRate<'_>,
    f: F,
    support: &Region,
    quad_spacing: f64,
) -> Result<MeanEstimate, EstimatorError>
where
    F: Fn(&PointConfiguration) -> f64 + Sync,
{
    mean_of_values(&dirichlet_values(samples, rate, &f, support, quad_spacing)?)
}

/// One member of a test-function family for [`mlsi_ratio_probe`].
pub struct ProbeFunction<'a> {
    pub label: String,
    pub f: Box<dyn Fn(&PointConfiguration) -> f64 + Sync + 'a>,
    pub support: Region,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub label: String,
    pub entropy: f64,
    pub entropy_std_error: f64,
    pub dirichlet: f64,
    pub dirichlet_std_error: f64,
    /// `Ent / E`; `None` for the undefined 0/0 case, `+∞` when only the
    /// Dirichlet form vanishes.
    pub ratio: Option<f64>,
    pub ratio_std_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlsiProbe {
    pub reports: Vec<EntropyReport>,
    /// Largest defined ratio: an empirical lower bound on the best constant.
    pub max_ratio: Option<f64>,
    pub max_ratio_std_error: Option<f64>,
    pub n_samples: usize,
    pub note: String,
}

pub const MLSI_PROBE_NOTE: &str = "a finite test family can only certify lower bounds on the optimal MLSI constant; \
it cannot verify the inequality for all bounded local F";

fn ratio_of(fv: &[f64], dv: &[f64], idx: &[usize]) -> f64 {
    let e = entropy_of(fv, Some(idx));
    let d = idx.iter().map(|&i| dv[i]).sum::<f64>() / idx.len() as f64;
    e / d
}

/// Entropy to Dirichlet-form ratios over a family of positive local functions.
pub fn mlsi_ratio_probe(
    samples: &[PointConfiguration],
    rate: DirichletRate<'_>,
    family: &[ProbeFunction<'_>],
    quad_spacing: f64,
    seed: RngSeed,
) -> Result<MlsiProbe, EstimatorError> {
    require_samples(samples.len(), 2)?;
    let mut reports = Vec::with_capacity(family.len());
    for (k, member) in family.iter().enumerate() {
        let fv = evaluate(samples, &member.f);
        check_positive(&fv)?;
        let dv = dirichlet_values(samples, rate, &member.f, &member.support, quad_spacing)?;
        let child = seed.child(k as u64);
        let ent = entropy_of_values(&fv, child.child(0))?;
        let dir = mean_of_values(&dv)?;
        let (ratio, ratio_se) = if dir.mean == 0.0 {
            if ent.entropy == 0.0 {
                (None, None)
            } else {
                (Some(f64::INFINITY), None)
            }
        } else {
            let se = bootstrap_se(fv.len(), BOOTSTRAP_RESAMPLES, &mut child.child(1).rng(), |ix| {
                ratio_of(&fv, &dv, ix)
            });
            (Some(ent.entropy / dir.mean), Some(se))
        };
        reports.push(EntropyReport {
            label: member.label.clone(),
            entropy: ent.entropy,
            entropy_std_error: ent.std_error,
            dirichlet: dir.mean,
            dirichlet_std_error: dir.std_error,
            ratio,
            ratio_std_error: ratio_se,
        });
    }
    let best = reports
        .iter()
        .filter(|r| r.ratio.is_some())
        .max_by(|a, b| a.ratio.unwrap().total_cmp(&b.ratio.unwrap()));
    Ok(MlsiProbe {
        max_ratio: best.and_then(|r| r.ratio),
        max_ratio_std_error: best.and_then(|r| r.ratio_std_error),
        reports,
        n_samples: samples.len(),
        note: MLSI_PROBE_NOTE.to_string(),
    })
}

/// Test function `u(x, η)` for [`gnz_residual`], nonzero only for `x` in `support`.
pub struct GnzTest<'a> {
    pub u: Box<dyn Fn(&Point, &PointConfiguration) -> f64 + Sync + 'a>,
    pub support: Region,
}

/// Monte Carlo points per sample for the `∫ b u dx` term.
pub const GNZ_MC_POINTS: usize = 64;

/// `E[Σ_{x∈η} u(x, η - δ_x)] - E[∫ b(x, η) u(x, η) dx]`, which vanishes when
/// the samples follow the Gibbs measure with Papangelou intensity `birth_rate`.
/// The integral is estimated with `mc_points` uniform points in the support box per sample.
pub fn gnz_residual<B>(
    samples: &[PointConfiguration],
    birth_rate: B,
    test: &GnzTest<'_>,
    mc_points: usize,
    seed: RngSeed,
) -> Result<MeanEstimate, EstimatorError>
where
    B: Fn(&Point, &PointConfiguration) -> f64 + Sync,
{
    require_samples(samples.len(), 2)?;
    let Region::Box { lower, upper } = test.support else {
        return Err(EstimatorError::Region("GNZ support must be a box".into()));
    };
    let dim = samples[0].window().dim();
    test.support
        .validate(dim)
        .map_err(|e| EstimatorError::Region(e.to_string()))?;
    let volume = test.support.volume(dim);
    let values: Vec<f64> = samples
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let w = c.window();
            let mut sum = 0.0;
            for (idx, p) in c.points().iter().enumerate() {
                if test.support.contains(w, p) {
                    sum += (test.u)(p, &c.without(idx));
                }
            }
            let mut rng = seed.child(i as u64).rng();
            let mut integral = 0.0;
            for _ in 0..mc_points {
                let mut y = Point::ORIGIN;
                for k in 0..dim {
                    y.0[k] = rng.random_range(lower.0[k]..upper.0[k]);
                }
                let u = (test.u)(&y, c);
                if u != 0.0 {
                    integral += birth_rate(&y, c) * u;
                }
            }
            sum - volume * integral / mc_points.max(1) as f64
        })
        .collect();
    mean_of_values(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{PoissonSampler, Sampler};
    use crate::geometry::Window;
    use crate::observables::{eval_f, Kernel};
    use std::f64::consts::E;

    fn poisson_samples(half: f64, intensity: f64, n: usize, seed: u64) -> Vec<PointConfiguration> {
        PoissonSampler::new(Window::periodic(half, 2).unwrap(), intensity)
            .draw(n, RngSeed::new(seed))
            .unwrap()
    }

    #[test]
    fn mean_examples() {
        let s = poisson_samples(2.0, 1.0, 4000, 1);
        let c = estimate_mean(&s, |_| 3.5).unwrap();
        assert_eq!((c.mean, c.std_error), (3.5, 0.0));
        let n = estimate_mean(&s, |c| c.len() as f64).unwrap();
        assert!((n.mean - 16.0).abs() < 3.0 * n.std_error, "{n:?}");
        assert!(estimate_mean(&s[..1], |_| 1.0).is_err());
    }

    #[test]
    fn mean_of_kernel_observable_matches_pgf() {
        let s = poisson_samples(2.0, 1.0, 20_000, 2);
        let k = Kernel::tent(1.0, 1.0, 1, 2).unwrap();
        let m = estimate_mean(&s, |c| eval_f(&k, c)).unwrap();
        // ∫(e^{-g} - 1) for the unit tent by radial quadrature
        let steps = 100_000;
        let h = 1.0 / steps as f64;
        let integral: f64 = (0..steps)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                2.0 * std::f64::consts::PI * r * ((-(1.0 - r)).exp() - 1.0) * h
            })
            .sum();
        let exact = integral.exp();
        assert!((m.mean - exact).abs() < 3.0 * m.std_error, "{} vs {exact}", m.mean);
    }

    #[test]
    fn log_mgf_examples() {
        let s = poisson_samples(2.0, 1.0, 20_000, 3);
        let a = Region::cube(2, 0.0, 1.0);
        let est = estimate_log_mgf(&s, |c| c.count_in(&a) as f64, &[0.0, 0.5, 1.0], RngSeed::new(4)).unwrap();
        assert_eq!(est.centered_log_mgf[0], 0.0);
        let v = est.centered_log_mgf[2];
        assert!((v - (E - 2.0)).abs() < 3.0 * est.std_errors[2], "{v} ± {}", est.std_errors[2]);
        assert!(estimate_log_mgf(&s, |_| 0.0, &[0.5, 0.1], RngSeed::new(1)).is_err());
    }

    #[test]
    fn log_mgf_is_convex_in_lambda() {
        let s = poisson_samples(2.0, 1.0, 4000, 5);
        let a = Region::cube(2, -1.0, 1.0);
        let grid = default_lambda_grid();
        let est = estimate_log_mgf(&s, |c| c.count_in(&a) as f64, &grid, RngSeed::new(6)).unwrap();
        for k in 1..grid.len() - 1 {
            let second = est.centered_log_mgf[k + 1] - 2.0 * est.centered_log_mgf[k] + est.centered_log_mgf[k - 1];
            assert!(second >= -est.std_errors[k], "λ = {}", grid[k]);
        }
    }

    #[test]
    fn overflow_is_flagged() {
        let values: Vec<f64> = (0..10).map(|i| i as f64 * 100.0).collect();
        let est = log_mgf_of_values(&values, &[0.0, 0.1, 2.0], RngSeed::new(1)).unwrap();
        assert_eq!(est.overflow, vec![false, false, true]);
        assert!(est.centered_log_mgf[2].is_nan());
    }

    #[test]
    fn herbst_examples() {
        assert_eq!(herbst_bound(1.0, 1.0, 1.0, 0.0), 0.0);
        assert!((herbst_bound(1.0, 1.0, 1.0, 1.0) - (E - 1.0)).abs() < 1e-15);
        let (c, a2, l) = (1.3, 2.0, 0.7);
        assert!((herbst_bound(c, a2, 1e-10, l) - c * a2 * l * l).abs() <= 1e-8);
        assert!((herbst_bound(c, a2, 2e-8, l) - c * a2 * l * l).abs() <= 1e-6);
    }

    #[test]
    fn entropy_examples() {
        let s = poisson_samples(1.0, 1.0, 40_000, 7);
        let c = estimate_entropy(&s, |_| 2.0, RngSeed::new(1)).unwrap();
        assert_eq!((c.entropy, c.std_error), (0.0, 0.0));
        // N ~ Poisson(4) on the whole window, F = e^{λN}
        let (m, l): (f64, f64) = (4.0, 0.5);
        let est = estimate_entropy(&s, |c| (l * c.len() as f64).exp(), RngSeed::new(2)).unwrap();
        let exact = (m * l.exp_m1()).exp() * (m * l * l.exp() - m * l.exp_m1());
        assert!((exact - 9.41079).abs() < 1e-4);
        assert!((est.entropy - exact).abs() < 3.0 * est.std_error, "{} ± {}", est.entropy, est.std_error);
        let err = estimate_entropy(&s, |c| c.len() as f64 - 1.0, RngSeed::new(1)).unwrap_err();
        assert!(matches!(err, EstimatorError::NonPositive { .. }));
    }

    #[test]
    fn dirichlet_examples() {
        let s = poisson_samples(2.0, 1.0, 20_000, 8);
        let a = Region::cube(2, 0.0, 1.0);
        let l: f64 = 0.5;
        let zero = estimate_dirichlet(&s, DirichletRate::Unit, |_| 1.0, &a, 1.0 / 16.0).unwrap();
        assert_eq!(zero.mean, 0.0);
        let f = |c: &PointConfiguration| (l * c.count_in(&a) as f64).exp();
        let est = estimate_dirichlet(&s, DirichletRate::Unit, f, &a, 1.0 / 16.0).unwrap();
        let exact = l * l.exp_m1() * l.exp_m1().exp();
        assert!((exact - 0.620532).abs() < 1e-6);
        assert!((est.mean - exact).abs() < 3.0 * est.std_error, "{} ± {}", est.mean, est.std_error);
        let poisson = Interaction::Poisson;
        let b = estimate_dirichlet(&s[..500], DirichletRate::Birth(&poisson), f, &a, 1.0 / 8.0).unwrap();
        let u = estimate_dirichlet(&s[..500], DirichletRate::Unit, f, &a, 1.0 / 8.0).unwrap();
        assert_eq!(b, u);
    }

    #[test]
    fn mlsi_probe_on_poisson() {
        let s = poisson_samples(2.0, 1.0, 10_000, 9);
        let a = Region::cube(2, 0.0, 1.0);
        let mut family: Vec<ProbeFunction> = [0.25, 0.5, 1.0]
            .into_iter()
            .map(|l: f64| ProbeFunction {
                label: format!("exp({l} N_A)"),
                f: Box::new(move |c: &PointConfiguration| (l * c.count_in(&a) as f64).exp()),
                support: a,
            })
            .collect();
        family.push(ProbeFunction {
            label: "const".into(),
            f: Box::new(|_| 1.0),
            support: a,
        });
        let probe = mlsi_ratio_probe(&s, DirichletRate::Unit, &family, 1.0 / 8.0, RngSeed::new(3)).unwrap();
        assert_eq!(probe.reports[3].ratio, None);
        let max = probe.max_ratio.unwrap();
        assert!(max <= 1.0 + 3.0 * probe.max_ratio_std_error.unwrap(), "{probe:?}");
        // analytic ratio (λe^λ - e^λ + 1) / (λ(e^λ - 1)) for λ = 1
        let exact = 1.0 / (E - 1.0);
        let r = &probe.reports[2];
        assert!((r.ratio.unwrap() - exact).abs() < 3.0 * r.ratio_std_error.unwrap() + 1e-3);
    }

    #[test]
    fn gnz_mecke_and_zero() {
        let s = poisson_samples(2.0, 1.0, 10_000, 10);
        let a = Region::cube(2, -1.0, 1.0);
        let zero = GnzTest {
            u: Box::new(|_, _| 0.0),
            support: a,
        };
        let r = gnz_residual(&s, |_, _| 1.0, &zero, 16, RngSeed::new(1)).unwrap();
        assert_eq!(r.mean, 0.0);
        let ind = GnzTest {
            u: Box::new(move |x, c| if a.contains(c.window(), x) { 1.0 } else { 0.0 }),
            support: a,
        };
        let r = gnz_residual(&s, |_, _| 1.0, &ind, 16, RngSeed::new(1)).unwrap();
        assert!(r.mean.abs() < 3.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn box_nodes_cover_the_box() {
        let (nodes, cell) = box_nodes(&Region::cube(2, 0.0, 1.0), 2, 0.3).unwrap();
        assert_eq!(nodes.len(), 16);
        assert!((nodes.len() as f64 * cell - 1.0).abs() < 1e-12);
        assert!(box_nodes(&Region::Ball { center: Point::ORIGIN, radius: 1.0 }, 2, 0.1).is_err());
    }
}
