//! Samplers and stochastic dynamics.
//!
//! * [`sample_poisson`]: the reference Poisson process;
//! * [`BirthDeathProcess`] / [`run_ctmc`]: exact continuous-time simulation of
//!   the birth-death generator by thinning against a global rate bound;
//! * [`MetropolisBirthDeath`] / [`run_mh`]: discrete-time reversible
//!   birth-death chain, usable when the birth rate is unbounded;
//! * [`sample_gibbs`] and the [`Sampler`] implementations used by the estimators.

mod ctmc;
mod metropolis;
mod rng;
mod sampler;
mod trajectory;

pub use ctmc::{run_ctmc, BirthDeathProcess};
pub use metropolis::{
    birth_acceptance, death_acceptance, detailed_balance_residual, mh_ratio, run_mh, MetropolisBirthDeath,
};
pub use rng::RngSeed;
pub use sampler::{sample_gibbs, GibbsBoundary, GibbsSampler, PoissonSampler, Sampler};
pub use trajectory::{EventKind, ReplayError, Trajectory, TrajectoryEvent};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::geometry::{GeometryError, PointConfiguration, Window};
use crate::interactions::InteractionError;

/// Default number of Metropolis steps discarded before sampling.
pub const DEFAULT_BURN_IN: u64 = 100_000;
/// Default number of Metropolis steps between retained samples.
pub const DEFAULT_SAMPLE_GAP: u64 = 1_000;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Interaction(#[from] InteractionError),
    #[error("intensity must be positive and finite, got {0}")]
    Intensity(f64),
    #[error("the birth rate has no finite upper bound; use the Metropolis sampler (run_mh) instead")]
    UnboundedBirthRate,
    #[error("boundary point {0:?} lies inside the sampling window")]
    BoundaryOverlap(crate::geometry::Point),
    #[error("{0}")]
    Setup(String),
}

/// Poisson process of the given intensity on `window`: a Poisson number of
/// i.i.d. uniform points.
pub fn sample_poisson<R: Rng + ?Sized>(
    window: &Window,
    intensity: f64,
    cell_size: f64,
    rng: &mut R,
) -> Result<PointConfiguration, DynamicsError> {
    if !(intensity.is_finite() && intensity > 0.0) {
        return Err(DynamicsError::Intensity(intensity));
    }
    let mut config = PointConfiguration::new(*window, cell_size)?;
    let n = Poisson::new(intensity * window.volume())
        .map_err(|e| DynamicsError::Setup(e.to_string()))?
        .sample(rng) as usize;
    while config.len() < n {
        match config.insert(window.sample_uniform(rng)) {
            Ok(_) | Err(GeometryError::Collision(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean_se, variance};

    #[test]
    fn poisson_rejects_bad_intensity() {
        let w = Window::periodic(1.0, 2).unwrap();
        let mut rng = RngSeed::new(1).rng();
        assert!(matches!(
            sample_poisson(&w, 0.0, 1.0, &mut rng),
            Err(DynamicsError::Intensity(_))
        ));
    }

    #[test]
    fn tiny_intensity_gives_empty_configurations() {
        let w = Window::periodic(1.0, 2).unwrap();
        let mut rng = RngSeed::new(2).rng();
        let empties = (0..1000)
            .filter(|_| sample_poisson(&w, 1e-9, 1.0, &mut rng).unwrap().is_empty())
            .count();
        assert_eq!(empties, 1000);
    }

    #[test]
    fn poisson_count_moments() {
        let w = Window::periodic(2.0, 2).unwrap();
        let mut rng = RngSeed::new(3).rng();
        let counts: Vec<f64> = (0..10_000)
            .map(|_| sample_poisson(&w, 1.0, 1.0, &mut rng).unwrap().len() as f64)
            .collect();
        let (mean, _) = mean_se(&counts);
        assert!((mean - 16.0).abs() < 3.0 * 4.0 / 100.0, "mean {mean}");
        let ratio = variance(&counts) / mean;
        assert!((0.94..=1.06).contains(&ratio), "dispersion {ratio}");
    }
}
