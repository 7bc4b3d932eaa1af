//! Periodization, empirical-field density, density tails and temperedness.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimators::{mean_of_values, EstimatorError};
use crate::geometry::{Point, PointConfiguration, Region};

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("half side {n} must be positive and at most the window half side {half_side}")]
    HalfSide { n: f64, half_side: f64 },
    #[error("tail threshold must be positive, got {0}")]
    Threshold(f64),
    #[error("n_max must be at least 1 and the window must contain Λ_(n_max+1)")]
    Temperedness,
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

fn check_half(config: &PointConfiguration, n: f64) -> Result<(), FieldError> {
    let half_side = config.window().half_side();
    if !(n > 0.0 && n <= half_side) {
        return Err(FieldError::HalfSide { n, half_side });
    }
    Ok(())
}

/// The `Λ_n`-periodization of a configuration: the points in `[-n, n)^d`
/// repeated with period `2n` along every axis.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodizedField {
    base: Vec<Point>,
    n: f64,
    dim: usize,
}

pub fn periodize(config: &PointConfiguration, n: f64) -> Result<PeriodizedField, FieldError> {
    check_half(config, n)?;
    let dim = config.window().dim();
    let cube = Region::cube(dim, -n, n);
    let base = config
        .points()
        .iter()
        .filter(|p| cube.contains(config.window(), p))
        .copied()
        .collect();
    Ok(PeriodizedField { base, n, dim })
}

impl PeriodizedField {
    pub fn base(&self) -> &[Point] {
        &self.base
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        2.0 * self.n
    }

    /// Number of points of the periodic extension in the half-open box `[lower, upper)`.
    pub fn count_in_box(&self, lower: &Point, upper: &Point) -> usize {
        let l = self.period();
        self.base
            .iter()
            .map(|p| {
                (0..self.dim)
                    .map(|k| {
                        // integers j with lower ≤ p + j l < upper
                        let lo = ((lower.0[k] - p.0[k]) / l).ceil() as i64;
                        let hi = ((upper.0[k] - p.0[k]) / l).ceil() as i64;
                        (hi - lo).max(0) as usize
                    })
                    .product::<usize>()
            })
            .sum()
    }

    /// Materializes the extension inside `[-m, m)^d`.
    pub fn materialize(&self, m: f64) -> Vec<Point> {
        let l = self.period();
        let mut out = Vec::new();
        for p in &self.base {
            let ranges: Vec<(i64, i64)> = (0..self.dim)
                .map(|k| (((-m - p.0[k]) / l).ceil() as i64, ((m - p.0[k]) / l).ceil() as i64))
                .collect();
            if ranges.iter().any(|r| r.0 >= r.1) {
                continue;
            }
            let mut shift: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'odometer: loop {
                let mut q = *p;
                for k in 0..self.dim {
                    q.0[k] += shift[k] as f64 * l;
                }
                out.push(q);
                for k in 0..self.dim {
                    shift[k] += 1;
                    if shift[k] < ranges[k].1 {
                        continue 'odometer;
                    }
                    shift[k] = ranges[k].0;
                }
                break;
            }
        }
        out
    }
}

/// `R_{n,ω}[N_C]` for the unit cube `C`, in closed form: `N_{Λ_n}(ω) / |Λ_n|`.
pub fn empirical_field_density(field: &PeriodizedField) -> f64 {
    field.base.len() as f64 / field.period().powi(field.dim as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub threshold: f64,
    pub n: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub hits: usize,
    pub n_samples: usize,
    /// `log(estimate) / |Λ_n|`, absent when there are no hits.
    pub log_per_volume: Option<f64>,
    /// One-sided 95% upper bound on the hit probability, given only when there are no hits.
    pub hit_probability_upper: Option<f64>,
}

/// `E[(N_{Λ_n}/|Λ_n|) 1{N_{Λ_n} ≥ t|Λ_n|}]` over a sample set.
pub fn density_tail(samples: &[PointConfiguration], n: f64, t: f64) -> Result<TailEstimate, FieldError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(FieldError::Threshold(t));
    }
    for c in samples {
        check_half(c, n)?;
    }
    let dim = samples.first().map_or(1, |c| c.window().dim());
    let cube = Region::cube(dim, -n, n);
    let volume = (2.0 * n).powi(dim as i32);
    let values: Vec<f64> = samples
        .iter()
        .map(|c| {
            let count = c.count_in(&cube) as f64;
            if count >= t * volume {
                count / volume
            } else {
                0.0
            }
        })
        .collect();
    let hits = values.iter().filter(|v| **v > 0.0).count();
    let est = mean_of_values(&values)?;
    let m = samples.len() as f64;
    Ok(TailEstimate {
        threshold: t,
        n,
        estimate: est.mean,
        std_error: est.std_error,
        hits,
        n_samples: samples.len(),
        log_per_volume: (hits > 0).then(|| est.mean.ln() / volume),
        hit_probability_upper: (hits == 0).then(|| 1.0 - 0.05f64.powf(1.0 / m)),
    })
}

/// `max_{1 ≤ n ≤ n_max} |Λ_n|^{-1} Σ_{i ∈ Λ_n ∩ ℤ^d} N(i + [-1, 1)^d)²`.
pub fn temperedness_statistic(config: &PointConfiguration, n_max: usize) -> Result<f64, FieldError> {
    let w = config.window();
    if n_max == 0 || (n_max + 1) as f64 > w.half_side() {
        return Err(FieldError::Temperedness);
    }
    let dim = w.dim();
    let m = n_max as i64;
    let side = (2 * m + 1) as usize;
    // squared occupation of every lattice cube, indexed from -n_max
    let mut sq = vec![0.0; side.pow(dim as u32)];
    for (flat, slot) in sq.iter_mut().enumerate() {
        let mut lower = Point::ORIGIN;
        let mut upper = Point::ORIGIN;
        let mut rest = flat;
        for k in 0..dim {
            let i = (rest % side) as i64 - m;
            rest /= side;
            lower.0[k] = i as f64 - 1.0;
            upper.0[k] = i as f64 + 1.0;
        }
        let c = config.count_in(&Region::Box { lower, upper }) as f64;
        *slot = c * c;
    }
    let mut best: f64 = 0.0;
    for n in 1..=m {
        let mut total = 0.0;
        for (flat, v) in sq.iter().enumerate() {
            let mut rest = flat;
            let inside = (0..dim).all(|_| {
                let i = (rest % side) as i64 - m;
                rest /= side;
                i.abs() <= n
            });
            if inside {
                total += v;
            }
        }
        best = best.max(total / (2.0 * n as f64).powi(dim as i32));
    }
    Ok(best)
}
