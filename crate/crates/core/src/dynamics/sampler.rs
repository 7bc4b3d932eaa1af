use rand::Rng;
use rayon::prelude::*;

use super::{sample_poisson, DynamicsError, MetropolisBirthDeath, RngSeed};
use crate::geometry::{Point, PointConfiguration, Window};
use crate::interactions::Interaction;

/// Source of (approximately) independent configurations for Monte Carlo estimation.
pub trait Sampler: Sync {
    fn window(&self) -> Window;

    /// Minimum grid cell size of the produced configurations.
    fn cell_size(&self) -> f64;

    /// `n` draws. The output depends only on `seed`, never on thread scheduling.
    fn draw(&self, n: usize, seed: RngSeed) -> Result<Vec<PointConfiguration>, DynamicsError>;
}

/// Exact Poisson draws; draw `i` uses stream `seed.child(i)`.
#[derive(Clone, Debug)]
pub struct PoissonSampler {
    pub window: Window,
    pub intensity: f64,
    pub cell_size: f64,
}

impl PoissonSampler {
    pub fn new(window: Window, intensity: f64) -> Self {
        Self {
            window,
            intensity,
            cell_size: 1.0,
        }
    }

    pub fn with_cell_size(mut self, cell_size: f64) -> Self {
        self.cell_size = cell_size;
        self
    }
}

impl Sampler for PoissonSampler {
    fn window(&self) -> Window {
        self.window
    }

    fn cell_size(&self) -> f64 {
        self.cell_size
    }

    fn draw(&self, n: usize, seed: RngSeed) -> Result<Vec<PointConfiguration>, DynamicsError> {
        (0..n)
            .into_par_iter()
            .map(|i| sample_poisson(&self.window, self.intensity, self.cell_size, &mut seed.child(i as u64).rng()))
            .collect()
    }
}

/// Boundary condition for conditioned Gibbs sampling.
#[derive(Clone, Debug, PartialEq)]
pub enum GibbsBoundary {
    /// Torus; the window must be periodic.
    Periodic,
    /// Fixed outer configuration; the window must be free and every point must
    /// lie outside it. Points farther than the interaction range have no effect.
    Fixed(Vec<Point>),
}

fn boundary_configuration(
    window: &Window,
    interaction: &Interaction,
    boundary: &GibbsBoundary,
) -> Result<Option<PointConfiguration>, DynamicsError> {
    match boundary {
        GibbsBoundary::Periodic => {
            if !window.is_periodic() {
                return Err(DynamicsError::Setup(
                    "periodic boundary requested on a free window".into(),
                ));
            }
            Ok(None)
        }
        GibbsBoundary::Fixed(points) => {
            if window.is_periodic() {
                return Err(DynamicsError::Setup(
                    "a fixed boundary configuration needs a free window".into(),
                ));
            }
            let outer = Window::free(window.half_side() + interaction.range(), window.dim())?;
            let mut config = PointConfiguration::new(outer, interaction.cell_size())?;
            for p in points {
                if window.contains(p) {
                    return Err(DynamicsError::BoundaryOverlap(*p));
                }
                if outer.contains(p) {
                    config.insert(*p)?;
                }
            }
            Ok(Some(config))
        }
    }
}

/// Finite-volume Gibbs sample: `burn_in` Metropolis birth-death steps from
/// the empty configuration, with conditional energies evaluated against the
/// interior plus the boundary points.
pub fn sample_gibbs<R: Rng + ?Sized>(
    window: &Window,
    interaction: &Interaction,
    boundary: &GibbsBoundary,
    burn_in: u64,
    rng: &mut R,
) -> Result<PointConfiguration, DynamicsError> {
    let outer = boundary_configuration(window, interaction, boundary)?;
    let initial = PointConfiguration::new(*window, interaction.cell_size())?;
    let mut chain = MetropolisBirthDeath::new(initial, interaction, outer.as_ref())?;
    chain.run(burn_in, rng);
    Ok(chain.into_state())
}

/// Metropolis sampler run as `chains` independent chains; each chain burns in
/// and then emits a configuration every `gap` steps.
#[derive(Clone, Debug)]
pub struct GibbsSampler {
    pub window: Window,
    pub interaction: Interaction,
    pub boundary: GibbsBoundary,
    pub burn_in: u64,
    pub gap: u64,
    pub chains: usize,
}

impl GibbsSampler {
    pub fn periodic(window: Window, interaction: Interaction) -> Self {
        Self {
            window,
            interaction,
            boundary: GibbsBoundary::Periodic,
            burn_in: super::DEFAULT_BURN_IN,
            gap: super::DEFAULT_SAMPLE_GAP,
            chains: 8,
        }
    }

    pub fn with_schedule(mut self, burn_in: u64, gap: u64) -> Self {
        self.burn_in = burn_in;
        self.gap = gap;
        self
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.chains = chains.max(1);
        self
    }

    pub fn with_boundary(mut self, boundary: GibbsBoundary) -> Self {
        self.boundary = boundary;
        self
    }

    /// Draws grouped by chain, chain `c` running on stream `seed.child(c)`.
    pub fn draw_by_chain(&self, n: usize, seed: RngSeed) -> Result<Vec<Vec<PointConfiguration>>, DynamicsError> {
        let outer = boundary_configuration(&self.window, &self.interaction, &self.boundary)?;
        self.interaction.check_window(&self.window)?;
        let chains = self.chains.min(n.max(1));
        (0..chains)
            .into_par_iter()
            .map(|c| {
                let share = n / chains + usize::from(c < n % chains);
                let mut rng = seed.child(c as u64).rng();
                let initial = PointConfiguration::new(self.window, self.interaction.cell_size())?;
                let mut chain = MetropolisBirthDeath::new(initial, &self.interaction, outer.as_ref())?;
                chain.run(self.burn_in, &mut rng);
                let mut out = Vec::with_capacity(share);
                for _ in 0..share {
                    chain.run(self.gap, &mut rng);
                    out.push(chain.state().clone());
                }
                Ok(out)
            })
            .collect()
    }
}

impl Sampler for GibbsSampler {
    fn window(&self) -> Window {
        self.window
    }

    fn cell_size(&self) -> f64 {
        self.interaction.cell_size()
    }

    fn draw(&self, n: usize, seed: RngSeed) -> Result<Vec<PointConfiguration>, DynamicsError> {
        Ok(self.draw_by_chain(n, seed)?.into_iter().flatten().collect())
    }
}
