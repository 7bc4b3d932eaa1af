//! Specific relative entropy lower bounds: separating a pair of laws with a
//! kernel observable, the Donsker–Varadhan bound (analytic and empirical),
//! and the entropy-decay experiment for free birth-death dynamics.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{sample_poisson, BirthDeathProcess, DynamicsError, RngSeed};
use crate::estimators::{check_grid, BOOTSTRAP_RESAMPLES, evaluate, log_mgf_of_values, mean_of_values, EstimatorError, MeanEstimate};
use crate::geometry::{PointConfiguration, Window};
use crate::interactions::Interaction;
use crate::observables::{beta_constant, eval_f, space_average, Kernel, KernelSpec, ObservableError, SpaceAverageSpec};
use crate::stats::{log_mean_exp, mean_se, variance};

#[derive(Debug, Error)]
pub enum EntropyGapError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("kernel family is empty")]
    EmptyFamily,
    #[error("time grid must be nonempty, nonnegative and strictly increasing")]
    TimeGrid,
    #[error("centered log-MGF overflowed at lambda = {0}")]
    Overflow(f64),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

fn positive(name: &'static str, value: f64) -> Result<f64, EntropyGapError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(EntropyGapError::NonPositive { name, value })
    }
}

/// Mean gap of one kernel observable between two sample sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelGap {
    pub kernel: String,
    pub mu: MeanEstimate,
    pub nu: MeanEstimate,
    /// `μ̂[f] - ν̂[f]` for the positive-sign kernel.
    pub rho: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Separation {
    Separated {
        /// Index into the family.
        index: usize,
        kernel: String,
        /// Sign making `ρ` positive.
        sign: i8,
        rho: f64,
        std_error: f64,
        candidates: Vec<KernelGap>,
    },
    /// No candidate gap exceeded three standard errors.
    NotSeparated { candidates: Vec<KernelGap> },
}

impl Separation {
    pub fn is_separated(&self) -> bool {
        matches!(self, Separation::Separated { .. })
    }
}

/// Picks the kernel and sign maximizing `ρ̂ / SE` over the family.
pub fn separating_observable(
    mu_samples: &[PointConfiguration],
    nu_samples: &[PointConfiguration],
    family: &[KernelSpec],
) -> Result<Separation, EntropyGapError> {
    if family.is_empty() {
        return Err(EntropyGapError::EmptyFamily);
    }
    let dim = mu_samples.first().map_or(2, |c| c.window().dim());
    let mut candidates = Vec::with_capacity(family.len());
    for spec in family {
        let k = spec.build(dim)?.with_sign(true);
        let mu = mean_of_values(&evaluate(mu_samples, |c| eval_f(&k, c)))?;
        let nu = mean_of_values(&evaluate(nu_samples, |c| eval_f(&k, c)))?;
        candidates.push(KernelGap {
            kernel: spec.id(),
            rho: mu.mean - nu.mean,
            std_error: (mu.std_error.powi(2) + nu.std_error.powi(2)).sqrt(),
            mu,
            nu,
        });
    }
    let score = |g: &KernelGap| {
        if g.std_error > 0.0 {
            g.rho.abs() / g.std_error
        } else if g.rho != 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    };
    let (index, best) = candidates
        .iter()
        .enumerate()
        .max_by(|a, b| score(a.1).total_cmp(&score(b.1)))
        .expect("family is nonempty");
    if score(best) <= 3.0 {
        return Ok(Separation::NotSeparated { candidates });
    }
    Ok(Separation::Separated {
        index,
        kernel: best.kernel.clone(),
        sign: if best.rho > 0.0 { 1 } else { -1 },
        rho: best.rho.abs(),
        std_error: best.std_error,
        candidates,
    })
}

/// `φ(λ) = ρλ - c β λ (e^{βλ} - 1)`, the per-volume DV objective under the Herbst majorant.
pub fn dv_objective(rho: f64, beta: f64, c_nu: f64, lambda: f64) -> f64 {
    rho * lambda - c_nu * beta * lambda * (beta * lambda).exp_m1()
}

/// `φ'(λ)`.
pub fn dv_objective_derivative(rho: f64, beta: f64, c_nu: f64, lambda: f64) -> f64 {
    let e = (beta * lambda).exp();
    rho - c_nu * beta * (e - 1.0 + beta * lambda * e)
}

/// Maximizer and maximum of `φ` over `λ > 0`.
pub fn dv_bound_analytic(rho: f64, beta: f64, c_nu: f64) -> Result<(f64, f64), EntropyGapError> {
    positive("rho", rho)?;
    positive("beta", beta)?;
    positive("c_nu", c_nu)?;
    // φ is strictly concave, so λ* is the root of the decreasing φ'
    let cap = 50.0 / beta;
    let (mut lo, mut hi) = (0.0, cap);
    if dv_objective_derivative(rho, beta, c_nu, hi) > 0.0 {
        return Ok((cap, dv_objective(rho, beta, c_nu, cap)));
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dv_objective_derivative(rho, beta, c_nu, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda_star = 0.5 * (lo + hi);
    Ok((lambda_star, dv_objective(rho, beta, c_nu, lambda_star)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Analytic,
    Empirical,
}

/// A specific relative entropy lower bound and its bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DvBoundReport {
    pub mode: BoundMode,
    pub kernel: String,
    pub rho: f64,
    pub rho_std_error: f64,
    pub beta: f64,
    pub c_nu: Option<f64>,
    pub lambda_star: f64,
    /// Lower bound per unit volume of `Λ_n`.
    pub bound_value: f64,
    pub bound_std_error: f64,
    /// Averaging half side; the bounded entropy lives on `Λ_{n+r}`.
    pub n: f64,
    pub n_plus_r: f64,
    /// `(λ, value)` pairs the bound was maximized over.
    pub profile: Vec<(f64, f64)>,
    pub mu_samples: usize,
    pub nu_samples: usize,
    pub mu_seed: Option<String>,
    pub nu_seed: Option<String>,
}

/// Report for [`dv_bound_analytic`] given a separating kernel with gap `rho`.
pub fn analytic_report(
    kernel: &KernelSpec,
    rho: f64,
    rho_std_error: f64,
    beta: f64,
    c_nu: f64,
    n: f64,
    radius: f64,
) -> Result<DvBoundReport, EntropyGapError> {
    let (lambda_star, bound_value) = dv_bound_analytic(rho, beta, c_nu)?;
    let profile = (0..=40)
        .map(|i| {
            let l = 2.0 * lambda_star * i as f64 / 40.0;
            (l, dv_objective(rho, beta, c_nu, l))
        })
        .collect();
    Ok(DvBoundReport {
        mode: BoundMode::Analytic,
        kernel: kernel.id(),
        rho,
        rho_std_error,
        beta,
        c_nu: Some(c_nu),
        lambda_star,
        bound_value,
        bound_std_error: 0.0,
        n,
        n_plus_r: n + radius,
        profile,
        mu_samples: 0,
        nu_samples: 0,
        mu_seed: None,
        nu_seed: None,
    })
}

fn dv_value(mu: &[f64], nu: &[f64], lambda: f64, volume: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let mu_mean = mu.iter().sum::<f64>() / mu.len() as f64;
    let nu_mean = nu.iter().sum::<f64>() / nu.len() as f64;
    let shifted: Vec<f64> = nu.iter().map(|v| lambda * (v - nu_mean)).collect();
    (lambda * (mu_mean - nu_mean) - log_mean_exp(&shifted)) / volume
}

/// Empirical DV bound `max_λ [λ(μ̂[F_n] - ν̂[F_n]) - log ν̂[e^{λ(F_n - ν̂[F_n])}]] / |Λ_n|`
/// with a bootstrap error at the maximizing λ.
pub fn dv_bound_empirical(
    mu_samples: &[PointConfiguration],
    nu_samples: &[PointConfiguration],
    spec: &SpaceAverageSpec,
    kernel_id: &str,
    lambda_grid: &[f64],
    seed: RngSeed,
) -> Result<DvBoundReport, EntropyGapError> {
    check_grid(lambda_grid)?;
    let fmu: Vec<f64> = mu_samples
        .par_iter()
        .map(|c| space_average(spec, c))
        .collect::<Result<_, _>>()?;
    let fnu: Vec<f64> = nu_samples
        .par_iter()
        .map(|c| space_average(spec, c))
        .collect::<Result<_, _>>()?;
    dv_bound_from_values(&fmu, &fnu, spec, kernel_id, lambda_grid, seed)
}

/// [`dv_bound_empirical`] on precomputed `F_n` values.
pub fn dv_bound_from_values(
    fmu: &[f64],
    fnu: &[f64],
    spec: &SpaceAverageSpec,
    kernel_id: &str,
    lambda_grid: &[f64],
    seed: RngSeed,
) -> Result<DvBoundReport, EntropyGapError> {
    let volume = spec.volume();
    let mgf = log_mgf_of_values(fnu, lambda_grid, seed.child(0))?;
    if let Some(k) = mgf.overflow.iter().position(|o| *o) {
        return Err(EntropyGapError::Overflow(lambda_grid[k]));
    }
    let mu = mean_of_values(fmu)?;
    let nu = mean_of_values(fnu)?;
    let profile: Vec<(f64, f64)> = lambda_grid.iter().map(|&l| (l, dv_value(fmu, fnu, l, volume))).collect();
    let (lambda_star, bound_value) = profile
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is nonempty");
    let (nm, nn) = (fmu.len(), fnu.len());
    let bound_std_error = if lambda_star == 0.0 {
        0.0
    } else {
        // the two sample sets are independent, so each is resampled separately
        let mut rng = seed.child(1).rng();
        let reps: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| {
                let a: Vec<f64> = (0..nm).map(|_| fmu[rng.random_range(0..nm)]).collect();
                let b: Vec<f64> = (0..nn).map(|_| fnu[rng.random_range(0..nn)]).collect();
                dv_value(&a, &b, lambda_star, volume)
            })
            .collect();
        variance(&reps).sqrt()
    };
    let beta = beta_constant(&spec.kernel, spec.kernel.radius() / 16.0);
    Ok(DvBoundReport {
        mode: BoundMode::Empirical,
        kernel: kernel_id.to_string(),
        rho: (mu.mean - nu.mean) / volume,
        rho_std_error: (mu.std_error.powi(2) + nu.std_error.powi(2)).sqrt() / volume,
        beta,
        c_nu: None,
        lambda_star,
        bound_value,
        bound_std_error,
        n: spec.n,
        n_plus_r: spec.n + spec.kernel.radius(),
        profile,
        mu_samples: nm,
        nu_samples: nn,
        mu_seed: None,
        nu_seed: None,
    })
}

/// Intensity `a(t) = 1 + (a0 - 1)e^{-t}` and specific entropy rate
/// `r(t) = a log a - a + 1` of the free birth-death flow started from Poisson(a0).
pub fn ou_decay_analytic(a0: f64, t: f64) -> Result<(f64, f64), EntropyGapError> {
    positive("a0", a0)?;
    let a = 1.0 + (a0 - 1.0) * (-t).exp();
    Ok((a, poisson_specific_entropy(a)))
}

/// `a log a - a + 1`, the specific entropy of Poisson(a) relative to Poisson(1).
pub fn poisson_specific_entropy(a: f64) -> f64 {
    if a == 0.0 {
        1.0
    } else {
        a * a.ln() - a + 1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub density: f64,
    pub density_std_error: f64,
    pub rate: f64,
    pub rate_std_error: f64,
    pub analytic_density: f64,
    pub analytic_rate: f64,
}

/// Free birth-death dynamics from Poisson(a0) replicas; the plug-in rate uses
/// the fact that the law stays Poisson with intensity `a(t)`.
pub fn ou_decay_empirical(
    a0: f64,
    window: &Window,
    t_grid: &[f64],
    n_replicas: usize,
    seed: RngSeed,
) -> Result<Vec<DecayRow>, EntropyGapError> {
    positive("a0", a0)?;
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[0] >= w[1]) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(EntropyGapError::TimeGrid);
    }
    if n_replicas < 2 {
        return Err(EstimatorError::TooFewSamples {
            needed: 2,
            got: n_replicas,
        }
        .into());
    }
    let interaction = Interaction::Poisson;
    let counts: Vec<Vec<usize>> = (0..n_replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            let start = sample_poisson(window, a0, 1.0, &mut rng)?;
            let mut process = BirthDeathProcess::new(start, &interaction)?;
            let mut out = Vec::with_capacity(t_grid.len());
            for &t in t_grid {
                process.advance_until(t, &mut rng, |_| {});
                out.push(process.state().len());
            }
            Ok(out)
        })
        .collect::<Result<_, DynamicsError>>()?;
    let volume = window.volume();
    t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let dens: Vec<f64> = counts.iter().map(|c| c[k] as f64 / volume).collect();
            let (density, se) = mean_se(&dens);
            let (analytic_density, analytic_rate) = ou_decay_analytic(a0, t)?;
            Ok(DecayRow {
                t,
                density,
                density_std_error: se,
                rate: poisson_specific_entropy(density),
                rate_std_error: density.ln().abs() * se,
                analytic_density,
                analytic_rate,
            })
        })
        .collect()
}

/// Tent kernel whose β equals `target` in two dimensions, for the reference pair experiments.
pub fn tent_radius_for_beta(amplitude: f64, target: f64) -> f64 {
    let a = amplitude;
    let i = (1.0 - (-a).exp()) / a - (1.0 - (-a).exp() * (1.0 + a)) / (a * a);
    (target / (2.0 * std::f64::consts::PI * (0.5 - i))).sqrt()
}

/// Convenience: the kernel with a given sign from a spec.
pub fn signed_kernel(spec: &KernelSpec, dim: usize, sign: i8) -> Result<Kernel, EntropyGapError> {
    Ok(spec.build(dim)?.with_sign(sign > 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{PoissonSampler, Sampler};
    use proptest::prelude::*;

    #[test]
    fn analytic_reference_values() {
        let beta = 1.0 - (-1f64).exp();
        let rho = (-beta).exp() - (-2.0 * beta).exp();
        assert!((rho - 0.2490100415360753).abs() < 1e-12);
        let (l, v) = dv_bound_analytic(rho, beta, 1.0).unwrap();
        assert!((l - 0.27330723).abs() < 1e-6, "{l}");
        assert!((v - 0.035475795).abs() < 1e-8, "{v}");
        assert!(v <= rho * l);
        assert!(v <= poisson_specific_entropy(2.0));
        assert!(dv_objective_derivative(rho, beta, 1.0, l).abs() < 1e-8);
        let h = 1e-4;
        let second = dv_objective(rho, beta, 1.0, l + h) - 2.0 * v + dv_objective(rho, beta, 1.0, l - h);
        assert!(second < 0.0);
    }

    #[test]
    fn analytic_rejects_nonpositive_and_vanishes_with_gap() {
        assert!(dv_bound_analytic(0.0, 0.6, 1.0).is_err());
        assert!(dv_bound_analytic(0.2, -0.6, 1.0).is_err());
        assert!(dv_bound_analytic(0.2, 0.6, 0.0).is_err());
        let (l, v) = dv_bound_analytic(1e-9, 0.632, 1.0).unwrap();
        assert!(l < 1e-8 && v > 0.0 && v < 1e-17);
    }

    proptest! {
        #[test]
        fn analytic_bound_is_positive_and_stationary(rho in 1e-4f64..5.0, beta in 1e-3f64..5.0, c in 0.1f64..10.0) {
            let (l, v) = dv_bound_analytic(rho, beta, c).unwrap();
            prop_assert!(v > 0.0);
            prop_assert!(v <= rho * l);
            let scale = rho.max(1.0);
            prop_assert!(dv_objective_derivative(rho, beta, c, l).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn tent_radius_reference() {
        let beta = 1.0 - (-1f64).exp();
        let r = tent_radius_for_beta(1.0, beta);
        assert!((r - 0.8726193).abs() < 1e-6);
        let k = Kernel::tent(1.0, r, 1, 2).unwrap();
        assert!((beta_constant(&k, r / 64.0) - beta).abs() < 1e-3);
    }

    #[test]
    fn decay_analytic_examples() {
        assert_eq!(ou_decay_analytic(1.0, 3.0).unwrap(), (1.0, 0.0));
        let (_, r0) = ou_decay_analytic(2.0, 0.0).unwrap();
        assert!((r0 - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        let (_, r1) = ou_decay_analytic(2.0, 1.0).unwrap();
        assert!((r1 - 0.060625).abs() < 1e-5);
        assert!(r1 <= (-1f64).exp() * r0);
        assert!(ou_decay_analytic(0.0, 1.0).is_err());
    }

    #[test]
    fn decay_empirical_stationary_start() {
        let w = Window::periodic(2.0, 2).unwrap();
        let rows = ou_decay_empirical(1.0, &w, &[0.5, 1.0, 2.0], 200, RngSeed::new(3)).unwrap();
        for r in rows {
            assert!((r.density - 1.0).abs() < 3.0 * r.density_std_error, "{r:?}");
        }
        assert!(ou_decay_empirical(1.0, &w, &[1.0, 0.5], 10, RngSeed::new(3)).is_err());
    }

    #[test]
    fn identical_samplers_do_not_separate() {
        let w = Window::periodic(2.0, 2).unwrap();
        let s = PoissonSampler::new(w, 1.0);
        let a = s.draw(2000, RngSeed::new(1)).unwrap();
        let b = s.draw(2000, RngSeed::new(2)).unwrap();
        let fam = crate::observables::default_tent_family(1.0);
        let sep = separating_observable(&a, &b, &fam[..1]).unwrap();
        // a single kernel: |ρ̂| ≤ 3 SE with high probability
        assert!(!sep.is_separated(), "{sep:?}");
        assert!(separating_observable(&a, &b, &[]).is_err());
    }

    #[test]
    fn poisson_pair_separates_with_negative_sign() {
        let w = Window::periodic(2.0, 2).unwrap();
        let mu = PoissonSampler::new(w, 2.0).draw(2000, RngSeed::new(1)).unwrap();
        let nu = PoissonSampler::new(w, 1.0).draw(2000, RngSeed::new(2)).unwrap();
        let fam = crate::observables::default_tent_family(1.0);
        match separating_observable(&mu, &nu, &fam).unwrap() {
            Separation::Separated { sign, rho, .. } => {
                assert_eq!(sign, -1);
                assert!(rho > 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empirical_bound_monotone_in_grid_refinement() {
        let w = Window::periodic(3.0, 2).unwrap();
        let mu = PoissonSampler::new(w, 2.0).draw(200, RngSeed::new(1)).unwrap();
        let nu = PoissonSampler::new(w, 1.0).draw(200, RngSeed::new(2)).unwrap();
        let spec = SpaceAverageSpec::new(Kernel::tent(1.0, 0.8726, -1, 2).unwrap(), 2.0).unwrap();
        let coarse = dv_bound_empirical(&mu, &nu, &spec, "k", &[0.0, 0.2, 0.4], RngSeed::new(3)).unwrap();
        let fine = dv_bound_empirical(&mu, &nu, &spec, "k", &[0.0, 0.1, 0.2, 0.3, 0.4], RngSeed::new(3)).unwrap();
        assert!(fine.bound_value >= coarse.bound_value);
        assert!(coarse.bound_value >= 0.0);
        assert_eq!(fine.n_plus_r, 2.0 + 0.8726);
    }
}
