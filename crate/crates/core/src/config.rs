//! Run configuration for batch experiments.
//!
//! Configs are JSON. Unknown fields are rejected, and [`RunConfig::resolve`]
//! fills every default so the echoed config fully determines a rerun.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{GibbsBoundary, GibbsSampler, PoissonSampler, Sampler, DEFAULT_BURN_IN, DEFAULT_SAMPLE_GAP};
use crate::entropy_gap::BoundMode;
use crate::estimators::{check_grid, default_lambda_grid, GNZ_MC_POINTS};
use crate::geometry::{Boundary, Point, Region, Window};
use crate::interactions::{Interaction, InteractionSpec};
use crate::observables::{default_tent_family, KernelSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Sample(SampleConfig),
    MgfCheck(MgfConfig),
    DvBound(DvConfig),
    Decay(DecayConfig),
    PhaseScan(PhaseScanConfig),
    GnzCheck(GnzConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Sample(_) => "sample",
            Experiment::MgfCheck(_) => "mgf_check",
            Experiment::DvBound(_) => "dv_bound",
            Experiment::Decay(_) => "decay",
            Experiment::PhaseScan(_) => "phase_scan",
            Experiment::GnzCheck(_) => "gnz_check",
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str::<Self>(text)?.resolve()?)
    }

    /// Validates and materializes defaults that depend on other fields.
    pub fn resolve(mut self) -> Result<Self, ConfigError> {
        match &mut self.experiment {
            Experiment::Sample(c) => c.resolve()?,
            Experiment::MgfCheck(c) => c.resolve()?,
            Experiment::DvBound(c) => c.resolve()?,
            Experiment::Decay(c) => c.resolve()?,
            Experiment::PhaseScan(c) => c.resolve()?,
            Experiment::GnzCheck(c) => c.resolve()?,
        }
        Ok(self)
    }

    /// Replaces the sample or replica count of the experiment.
    pub fn set_replicas(&mut self, k: usize) {
        match &mut self.experiment {
            Experiment::Sample(c) => c.n_samples = k,
            Experiment::MgfCheck(c) => c.n_samples = k,
            Experiment::DvBound(c) => c.n_samples = k,
            Experiment::Decay(c) => c.replicas = k,
            Experiment::PhaseScan(c) => c.replicas = k,
            Experiment::GnzCheck(c) => c.n_samples = k,
        }
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn default_dim() -> usize {
    2
}

fn default_boundary() -> Boundary {
    Boundary::Periodic
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub half_side: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

impl WindowSpec {
    pub fn build(&self) -> Result<Window, ConfigError> {
        Window::new(self.half_side, self.dim, self.boundary).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

fn default_intensity() -> f64 {
    1.0
}
fn default_burn_in() -> u64 {
    DEFAULT_BURN_IN
}
fn default_gap() -> u64 {
    DEFAULT_SAMPLE_GAP
}
fn default_chains() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerSpec {
    Poisson {
        #[serde(default = "default_intensity")]
        intensity: f64,
    },
    Gibbs {
        interaction: InteractionSpec,
        #[serde(default = "default_burn_in")]
        burn_in: u64,
        #[serde(default = "default_gap")]
        gap: u64,
        #[serde(default = "default_chains")]
        chains: usize,
    },
}

impl SamplerSpec {
    pub fn build(&self, window: Window) -> Result<Box<dyn Sampler>, ConfigError> {
        match self {
            SamplerSpec::Poisson { intensity } => {
                if !(*intensity > 0.0 && intensity.is_finite()) {
                    return invalid(format!("poisson intensity {intensity}"));
                }
                Ok(Box::new(PoissonSampler::new(window, *intensity)))
            }
            SamplerSpec::Gibbs {
                interaction,
                burn_in,
                gap,
                chains,
            } => {
                let interaction = build_interaction(interaction, &window)?;
                if *chains == 0 || *gap == 0 {
                    return invalid("gibbs sampler needs at least one chain and a positive gap");
                }
                Ok(Box::new(
                    GibbsSampler::periodic(window, interaction)
                        .with_schedule(*burn_in, *gap)
                        .with_chains(*chains),
                ))
            }
        }
    }

    /// The interaction whose Gibbs measure the sampler targets.
    pub fn interaction(&self) -> Result<Interaction, ConfigError> {
        match self {
            SamplerSpec::Poisson { .. } => Ok(Interaction::Poisson),
            SamplerSpec::Gibbs { interaction, .. } => {
                interaction.build().map_err(|e| ConfigError::Invalid(e.to_string()))
            }
        }
    }

    /// Reference intensity; Gibbs samplers are relative to intensity one.
    pub fn poisson_intensity(&self) -> Option<f64> {
        match self {
            SamplerSpec::Poisson { intensity } => Some(*intensity),
            SamplerSpec::Gibbs { .. } => None,
        }
    }
}

fn build_interaction(spec: &InteractionSpec, window: &Window) -> Result<Interaction, ConfigError> {
    let i = spec.build().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    i.check_window(window).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(i)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxSpec {
    pub fn build(&self, dim: usize) -> Result<Region, ConfigError> {
        if self.lower.len() != dim || self.upper.len() != dim {
            return invalid(format!("box corners must have {dim} coordinates"));
        }
        let region = Region::Box {
            lower: Point::from_slice(&self.lower),
            upper: Point::from_slice(&self.upper),
        };
        region.validate(dim).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(region)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Periodic,
    /// Fixed outer points; needs a free window.
    Fixed { points: Vec<Vec<f64>> },
}

impl BoundarySpec {
    pub fn build(&self, dim: usize) -> Result<GibbsBoundary, ConfigError> {
        match self {
            BoundarySpec::Periodic => Ok(GibbsBoundary::Periodic),
            BoundarySpec::Fixed { points } => {
                if points.iter().any(|p| p.len() != dim) {
                    return invalid(format!("boundary points must have {dim} coordinates"));
                }
                Ok(GibbsBoundary::Fixed(points.iter().map(|p| Point::from_slice(p)).collect()))
            }
        }
    }
}

fn default_interaction() -> InteractionSpec {
    InteractionSpec::Poisson
}
fn default_boundary_spec() -> BoundarySpec {
    BoundarySpec::Periodic
}
fn default_snapshots() -> usize {
    10
}

/// Snapshots from the exact Poisson sampler (poisson interaction) or the
/// Metropolis sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub window: WindowSpec,
    #[serde(default = "default_interaction")]
    pub interaction: InteractionSpec,
    #[serde(default = "default_intensity")]
    pub intensity: f64,
    #[serde(default = "default_boundary_spec")]
    pub boundary: BoundarySpec,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
    #[serde(default = "default_snapshots")]
    pub n_samples: usize,
}

impl SampleConfig {
    fn resolve(&mut self) -> Result<(), ConfigError> {
        let w = self.window.build()?;
        build_interaction(&self.interaction, &w)?;
        let b = self.boundary.build(w.dim())?;
        if !matches!(self.interaction, InteractionSpec::Poisson) {
            match (&b, w.is_periodic()) {
                (GibbsBoundary::Periodic, false) => return invalid("periodic boundary needs a periodic window"),
                (GibbsBoundary::Fixed(_), true) => return invalid("fixed boundary points need a free window"),
                _ => {}
            }
        }
        if !(self.intensity > 0.0 && self.intensity.is_finite()) {
            return invalid(format!("intensity {}", self.intensity));
        }
        if self.n_samples == 0 {
            return invalid("n_samples must be positive");
        }
        Ok(())
    }
}

fn default_c_nu() -> f64 {
    1.0
}
fn default_n_samples() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MgfConfig {
    pub window: WindowSpec,
    pub sampler: SamplerSpec,
    pub kernel: KernelSpec,
    pub n: f64,
    /// Translation-quadrature spacing; defaults to radius / 16.
    #[serde(default)]
    pub quad_spacing: Option<f64>,
    #[serde(default = "default_c_nu")]
    pub c_nu: f64,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
}

fn kernel_radius(k: &KernelSpec) -> f64 {
    match k {
        KernelSpec::Tent { radius, .. } => *radius,
    }
}

impl MgfConfig {
    fn resolve(&mut self) -> Result<(), ConfigError> {
        let w = self.window.build()?;
        self.sampler.build(w)?;
        self.kernel.build(w.dim()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.quad_spacing.get_or_insert(kernel_radius(&self.kernel) / 16.0);
        check_grid(&self.lambda_grid).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.lambda_grid[0] < 0.0 {
            return invalid("lambda grid must be nonnegative");
        }
        if !(self.c_nu > 0.0) {
            return invalid("c_nu must be positive");
        }
        if self.n_samples < 2 {
            return invalid("n_samples must be at least 2");
        }
        Ok(())
    }
}

fn default_dv_kernels() -> Vec<KernelSpec> {
    default_tent_family(1.0)
}
fn default_modes() -> Vec<BoundMode> {
    vec![BoundMode::Empirical]
}
fn default_dv_samples() -> usize {
    4_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DvConfig {
    pub window: WindowSpec,
    pub mu: SamplerSpec,
    pub nu: SamplerSpec,
    #[serde(default = "default_dv_kernels")]
    pub kernels: Vec<KernelSpec>,
    pub n: f64,
    /// MLSI constant of `ν`; required for the analytic mode.
    #[serde(default)]
    pub c_nu: Option<f64>,
    #[serde(default = "default_modes")]
    pub modes: Vec<BoundMode>,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_dv_samples")]
    pub n_samples: usize,
}

impl DvConfig {
    fn resolve(&mut self) -> Result<(), ConfigError> {
        let w = self.window.build()?;
        self.mu.build(w)?;
        self.nu.build(w)?;
        if self.kernels.is_empty() {
            return invalid("kernel family is empty");
        }
        for k in &self.kernels {
            k.build(w.dim()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if self.n + kernel_radius(k) > w.half_side() {
                return invalid(format!("window half side must be at least n + r = {}", self.n + kernel_radius(k)));
            }
        }
        if self.modes.is_empty() {
            return invalid("at least one bound mode is required");
        }
        if self.modes.contains(&BoundMode::Analytic) {
            match self.c_nu {
                Some(c) if c > 0.0 => {}
                Some(c) => return invalid(format!("c_nu must be positive, got {c}")),
                None => return invalid("analytic mode requires c_nu"),
            }
        }
        check_grid(&self.lambda_grid).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.n_samples < 2 {
            return invalid("n_samples must be at least 2");
        }
        Ok(())
    }
}

fn default_t_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 1.0, 1.5, 2.0]
}
fn default_replicas() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub window: WindowSpec,
    pub a0: f64,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
}

impl DecayConfig {
    fn resolve(&mut self) -> Result<(), ConfigError> {
        self.window.build()?;
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return invalid(format!("a0 must be positive, got {}", self.a0));
        }
        let t = &self.t_grid;
        if t.is_empty() || t[0] < 0.0 || t.iter().any(|x| !x.is_finite()) || t.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("t_grid must be nonempty, nonnegative and strictly increasing");
        }
        if self.replicas < 2 {
            return invalid("replicas must be at least 2");
        }
        Ok(())
    }
}

fn default_scan_half_side() -> f64 {
    2.0
}
fn default_scan_radius() -> f64 {
    1.0
}
fn default_gammas() -> Vec<f64> {
    vec![0.1, 0.5, 1.0, 2.0]
}
fn default_dense_intensity() -> f64 {
    1.0
}
fn default_scan_burn_in() -> u64 {
    20_000
}
fn default_scan_resolution() -> usize {
    64
}
fn default_scan_replicas() -> usize {
    60
}

/// Area-interaction sweep over γ comparing a dense Poisson boundary shell with
/// an empty boundary on a free window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseScanConfig {
    #[serde(default = "default_scan_half_side")]
    pub half_side: f64,
    #[serde(default = "default_scan_radius")]
    pub radius: f64,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
    /// Intensity of the boundary shell out to `half_side + 2 radius`.
    #[serde(default = "default_dense_intensity")]
    pub dense_intensity: f64,
    /// Density is measured in `[-interior, interior)^2`; defaults to half_side / 2.
    #[serde(default)]
    pub interior_half_side: Option<f64>,
    #[serde(default = "default_scan_burn_in")]
    pub burn_in: u64,
    #[serde(default = "default_scan_resolution")]
    pub quad_resolution: usize,
    #[serde(default = "default_scan_replicas")]
    pub replicas: usize,
}

impl PhaseScanConfig {
    fn resolve(&mut self) -> Result<(), ConfigError> {
        Window::free(self.half_side, 2).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.radius > 0.0) {
            return invalid("radius must be positive");
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| *g == 0.0 || !g.is_finite()) {
            return invalid("gammas must be nonempty, finite and nonzero");
        }
        if !(self.dense_intensity > 0.0 && self.dense_intensity.is_finite()) {
            return invalid("the dense boundary has no points: dense_intensity must be positive");
        }
        let interior = *self.interior_half_side.get_or_insert(self.half_side / 2.0);
        if !(interior > 0.0 && interior <= self.half_side) {
            return invalid("interior_half_side must lie in (0, half_side]");
        }
        if self.quad_resolution == 0 || self.replicas < 2 {
            return invalid("quad_resolution must be positive and replicas at least 2");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GnzTestKind {
    /// `u ≡ 0`.
    Zero,
    /// `u(x, η) = 1_A(x)`.
    Indicator,
    /// `u(x, η) = 1_A(x) e^{-h(x, η)}`.
    IndicatorBoltzmann,
}

fn default_gnz_points() -> usize {
    GNZ_MC_POINTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnzConfig {
    pub window: WindowSpec,
    pub sampler: SamplerSpec,
    pub test: GnzTestKind,
    pub region: BoxSpec,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    #[serde(default = "default_gnz_points")]
    pub mc_points: usize,
}

impl GnzConfig {
    fn resolve(&mut self) -> Result<(), ConfigError> {
        let w = self.window.build()?;
        self.sampler.build(w)?;
        let region = self.region.build(w.dim())?;
        if !region.contained_in(&w) {
            return invalid("test region must lie inside the window");
        }
        if self.n_samples < 2 || self.mc_points == 0 {
            return invalid("n_samples must be at least 2 and mc_points positive");
        }
        Ok(())
    }
}

/// Line and column of a JSON error, for diagnostics.
pub fn json_error_position(e: &ConfigError) -> Option<(usize, usize)> {
    match e {
        ConfigError::Json(j) => Some((j.line(), j.column())),
        ConfigError::Invalid(_) => None,
    }
}
