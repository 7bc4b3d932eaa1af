use rand::Rng;

use super::DynamicsError;
use crate::geometry::{GeometryError, Point, PointConfiguration};
use crate::interactions::Interaction;

/// Hastings ratio `|Λ| b(x, η) / (N + 1)` for adding `x` to a configuration with `n` points.
pub fn mh_ratio(volume: f64, birth_rate: f64, n: usize) -> f64 {
    volume * birth_rate / (n as f64 + 1.0)
}

/// Acceptance probability of the birth `η → η + δ_x`.
pub fn birth_acceptance(volume: f64, birth_rate: f64, n: usize) -> f64 {
    mh_ratio(volume, birth_rate, n).min(1.0)
}

/// Acceptance probability of the death `η + δ_x → η`, where `n` counts the
/// points left after the death and `birth_rate = b(x, η)`.
pub fn death_acceptance(volume: f64, birth_rate: f64, n: usize) -> f64 {
    let ratio = mh_ratio(volume, birth_rate, n);
    if ratio <= 0.0 {
        1.0
    } else {
        (1.0 / ratio).min(1.0)
    }
}

/// Discrete-time birth-death Metropolis–Hastings chain targeting the density
/// `exp(-H)` against the intensity-one Poisson process, optionally with a
/// fixed outer boundary configuration.
pub struct MetropolisBirthDeath<'a> {
    interaction: &'a Interaction,
    boundary: Option<&'a PointConfiguration>,
    state: PointConfiguration,
    volume: f64,
}

impl<'a> MetropolisBirthDeath<'a> {
    pub fn new(
        initial: PointConfiguration,
        interaction: &'a Interaction,
        boundary: Option<&'a PointConfiguration>,
    ) -> Result<Self, DynamicsError> {
        interaction.check_window(initial.window())?;
        Ok(Self {
            interaction,
            boundary,
            volume: initial.window().volume(),
            state: initial,
        })
    }

    pub fn state(&self) -> &PointConfiguration {
        &self.state
    }

    pub fn into_state(self) -> PointConfiguration {
        self.state
    }

    /// One proposal; returns whether it was accepted.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let n = self.state.len();
        if rng.random::<bool>() {
            let x = self.state.window().sample_uniform(rng);
            let b = self.interaction.birth_rate_with(&x, &self.state, self.boundary);
            let accept = birth_acceptance(self.volume, b, n);
            if rng.random::<f64>() < accept {
                return match self.state.insert(x) {
                    Ok(_) => true,
                    Err(GeometryError::Collision(_)) => false,
                    Err(e) => unreachable!("uniform draw left the window: {e}"),
                };
            }
            false
        } else {
            if n == 0 {
                return false;
            }
            let idx = rng.random_range(0..n);
            let b = self
                .interaction
                .member_conditional_energy(idx, &self.state, self.boundary)
                .boltzmann();
            let accept = death_acceptance(self.volume, b, n - 1);
            if rng.random::<f64>() < accept {
                self.state.remove(idx);
                return true;
            }
            false
        }
    }

    pub fn run<R: Rng + ?Sized>(&mut self, n_steps: u64, rng: &mut R) -> u64 {
        (0..n_steps).map(|_| self.step(rng) as u64).sum()
    }
}

/// Runs `n_steps` Metropolis birth-death proposals from `initial` and returns
/// the final configuration.
pub fn run_mh<R: Rng + ?Sized>(
    initial: PointConfiguration,
    interaction: &Interaction,
    n_steps: u64,
    rng: &mut R,
) -> Result<PointConfiguration, DynamicsError> {
    let mut chain = MetropolisBirthDeath::new(initial, interaction, None)?;
    chain.run(n_steps, rng);
    Ok(chain.into_state())
}

/// `b(x, η) e^{-H(η)} - e^{-H(η + δ_x)}`, which vanishes for a consistent
/// birth rate. Both terms are exactly zero when the insertion violates a hard core.
pub fn detailed_balance_residual(interaction: &Interaction, config: &PointConfiguration, x: &Point) -> f64 {
    let before = interaction.total_energy(config);
    let after = match config.with_point(*x) {
        Ok(c) => interaction.total_energy(&c),
        Err(_) => return 0.0,
    };
    let b = interaction.birth_rate(x, config);
    b * before.boltzmann() - after.boltzmann()
}
