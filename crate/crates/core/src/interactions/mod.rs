//! Energy functionals for finite configurations.
//!
//! Each interaction provides the total energy `H`, the conditional energy
//! `h(x, η) = H(η + δ_x) - H(η)` computed locally from the neighbors of `x`,
//! and the Papangelou birth rate `b(x, η) = exp(-h(x, η))`.

mod area;

pub use area::{lens_area, uncovered_disk_area};

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, PointConfiguration, Window};

#[derive(Debug, Error, PartialEq)]
pub enum InteractionError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("area interaction is only available in two dimensions, window has d = {0}")]
    AreaDimension(usize),
    #[error("interaction range {range} exceeds the periodic window half side {half_side}")]
    RangeExceedsWindow { range: f64, half_side: f64 },
}

/// An energy value; hard-core violations are `Infinite`, never a large float.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub const ZERO: Energy = Energy::Finite(0.0);

    pub fn is_finite(&self) -> bool {
        matches!(self, Energy::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Energy::Finite(v) => Some(*v),
            Energy::Infinite => None,
        }
    }

    /// `exp(-E)`, exactly zero for infinite energy.
    pub fn boltzmann(&self) -> f64 {
        match self {
            Energy::Finite(v) => (-v).exp(),
            Energy::Infinite => 0.0,
        }
    }

    /// `self - base` for finite `base`; `None` when `base` is infinite.
    pub fn minus(&self, base: Energy) -> Option<Energy> {
        match (self, base) {
            (_, Energy::Infinite) => None,
            (Energy::Infinite, _) => Some(Energy::Infinite),
            (Energy::Finite(a), Energy::Finite(b)) => Some(Energy::Finite(a - b)),
        }
    }
}

impl std::ops::Add for Energy {
    type Output = Energy;

    fn add(self, rhs: Energy) -> Energy {
        match (self, rhs) {
            (Energy::Finite(a), Energy::Finite(b)) => Energy::Finite(a + b),
            _ => Energy::Infinite,
        }
    }
}

/// A radial profile on `[start, end]`, evaluated at distances in that range.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    /// Piecewise-linear interpolation of equispaced samples over `[start, end]`.
    Table(Vec<f64>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Profile::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Profile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Profile {
    fn eval(&self, r: f64, start: f64, end: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Table(values) => {
                if values.len() == 1 || end <= start {
                    return values[0];
                }
                let pos = ((r - start) / (end - start)).clamp(0.0, 1.0) * (values.len() - 1) as f64;
                let k = (pos.floor() as usize).min(values.len() - 2);
                let frac = pos - k as f64;
                values[k] * (1.0 - frac) + values[k + 1] * frac
            }
            Profile::Custom(f) => f(r),
        }
    }

    /// `sup |profile|` when it can be read off the representation.
    fn sup_abs(&self) -> Option<f64> {
        match self {
            Profile::Constant(c) => Some(c.abs()),
            Profile::Table(values) => Some(values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))),
            Profile::Custom(_) => None,
        }
    }
}

/// Nonnegative finite-range pair potentials.
#[derive(Clone, Debug)]
pub enum PairPotential {
    /// `φ(r) = strength` for `r ≤ range`.
    Strauss { strength: f64, range: f64 },
    /// `φ(r) = profile(r)` for `r ≤ range`, with `profile ≥ 0`.
    SoftCore { profile: Profile, range: f64 },
}

impl PairPotential {
    pub fn strauss(strength: f64, range: f64) -> Result<Self, InteractionError> {
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(InteractionError::Parameter(format!("strauss strength {strength}")));
        }
        check_positive("range", range)?;
        Ok(PairPotential::Strauss { strength, range })
    }

    /// Soft core from samples of `φ` on an equispaced grid over `[0, range]`.
    pub fn soft_core_table(table: Vec<f64>, range: f64) -> Result<Self, InteractionError> {
        check_positive("range", range)?;
        if table.is_empty() || table.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(InteractionError::Parameter(
                "soft-core table must be nonempty, finite and nonnegative".into(),
            ));
        }
        Ok(PairPotential::SoftCore {
            profile: Profile::Table(table),
            range,
        })
    }

    /// Soft core from a closure; the caller guarantees `φ ≥ 0` on `[0, range]`.
    pub fn soft_core(phi: impl Fn(f64) -> f64 + Send + Sync + 'static, range: f64) -> Result<Self, InteractionError> {
        check_positive("range", range)?;
        Ok(PairPotential::SoftCore {
            profile: Profile::Custom(Arc::new(phi)),
            range,
        })
    }

    pub fn range(&self) -> f64 {
        match self {
            PairPotential::Strauss { range, .. } | PairPotential::SoftCore { range, .. } => *range,
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        match self {
            PairPotential::Strauss { strength, range } => {
                if r <= *range {
                    *strength
                } else {
                    0.0
                }
            }
            PairPotential::SoftCore { profile, range } => {
                if r <= *range {
                    profile.eval(r, 0.0, *range)
                } else {
                    0.0
                }
            }
        }
    }
}

/// `H(ω) = γ |⋃_{x ∈ ω} B_R(x)|` in two dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaInteraction {
    pub gamma: f64,
    pub radius: f64,
    /// Quadrature strips across the diameter of one disk.
    pub quad_resolution: usize,
}

pub const DEFAULT_QUAD_RESOLUTION: usize = 256;

impl AreaInteraction {
    pub fn new(gamma: f64, radius: f64, quad_resolution: usize) -> Result<Self, InteractionError> {
        if !(gamma.is_finite() && gamma != 0.0) {
            return Err(InteractionError::Parameter(format!("area gamma {gamma}")));
        }
        check_positive("radius", radius)?;
        if quad_resolution == 0 {
            return Err(InteractionError::Parameter("quad_resolution must be positive".into()));
        }
        Ok(Self {
            gamma,
            radius,
            quad_resolution,
        })
    }

    pub fn range(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Hard core at `hard_core` plus a bounded tail on `[hard_core, range]` that
/// may take negative values.
#[derive(Clone, Debug)]
pub struct SuperstablePair {
    pub hard_core: f64,
    pub range: f64,
    tail: Profile,
    tail_bound: f64,
}

impl SuperstablePair {
    /// Tail sampled on an equispaced grid over `[hard_core, range]`.
    pub fn with_table(hard_core: f64, range: f64, tail: Vec<f64>) -> Result<Self, InteractionError> {
        Self::validate(hard_core, range)?;
        if tail.is_empty() || tail.iter().any(|v| !v.is_finite()) {
            return Err(InteractionError::Parameter("tail table must be nonempty and finite".into()));
        }
        let tail = Profile::Table(tail);
        let tail_bound = tail.sup_abs().unwrap_or(0.0);
        Ok(Self {
            hard_core,
            range,
            tail,
            tail_bound,
        })
    }

    /// Tail from a closure with a declared bound `sup |tail| ≤ tail_bound`.
    pub fn with_closure(
        hard_core: f64,
        range: f64,
        tail: impl Fn(f64) -> f64 + Send + Sync + 'static,
        tail_bound: f64,
    ) -> Result<Self, InteractionError> {
        Self::validate(hard_core, range)?;
        if !(tail_bound.is_finite() && tail_bound >= 0.0) {
            return Err(InteractionError::Parameter(format!("tail bound {tail_bound}")));
        }
        Ok(Self {
            hard_core,
            range,
            tail: Profile::Custom(Arc::new(tail)),
            tail_bound,
        })
    }

    fn validate(hard_core: f64, range: f64) -> Result<(), InteractionError> {
        if !(hard_core.is_finite() && hard_core >= 0.0) {
            return Err(InteractionError::Parameter(format!("hard core {hard_core}")));
        }
        check_positive("range", range)?;
        if hard_core > range {
            return Err(InteractionError::Parameter("hard core exceeds range".into()));
        }
        Ok(())
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn phi(&self, r: f64) -> Energy {
        if r < self.hard_core {
            Energy::Infinite
        } else if r <= self.range {
            Energy::Finite(self.tail.eval(r, self.hard_core, self.range))
        } else {
            Energy::ZERO
        }
    }

    /// Largest number of points pairwise at least `hard_core` apart that fit
    /// within distance `range` of a point (disjoint-ball packing bound).
    pub fn packing_bound(&self, dim: usize) -> Option<f64> {
        if self.hard_core == 0.0 {
            return None;
        }
        Some((2.0 * self.range / self.hard_core + 1.0).powi(dim as i32).floor())
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), InteractionError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(InteractionError::Parameter(format!("{name} must be positive, got {v}")))
    }
}

/// An energy function together with everything the samplers need from it.
#[derive(Clone, Debug)]
pub enum Interaction {
    /// `H ≡ 0`: the intensity-one Poisson process, birth rate identically one.
    Poisson,
    Pair(PairPotential),
    Area(AreaInteraction),
    Superstable(SuperstablePair),
}

impl Interaction {
    /// Interaction range; zero for the Poisson case.
    pub fn range(&self) -> f64 {
        match self {
            Interaction::Poisson => 0.0,
            Interaction::Pair(p) => p.range(),
            Interaction::Area(a) => a.range(),
            Interaction::Superstable(s) => s.range,
        }
    }

    /// Grid cell size for configurations sampled under this interaction.
    pub fn cell_size(&self) -> f64 {
        let r = self.range();
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    /// Checks the interaction can run on `window`: the area family needs
    /// `d = 2`, and periodic windows need `range ≤ half_side` so that the
    /// minimum-image neighbor is unique.
    pub fn check_window(&self, window: &Window) -> Result<(), InteractionError> {
        if matches!(self, Interaction::Area(_)) && window.dim() != 2 {
            return Err(InteractionError::AreaDimension(window.dim()));
        }
        if window.is_periodic() && self.range() > window.half_side() {
            return Err(InteractionError::RangeExceedsWindow {
                range: self.range(),
                half_side: window.half_side(),
            });
        }
        Ok(())
    }

    /// Conditional energy of a point given the displacements `p - x` of the
    /// points within range of `x`.
    pub fn local_energy(&self, offsets: &[Point]) -> Energy {
        match self {
            Interaction::Poisson => Energy::ZERO,
            Interaction::Pair(p) => Energy::Finite(offsets.iter().map(|d| p.phi(d.norm())).sum()),
            Interaction::Area(a) => Energy::Finite(
                a.gamma * uncovered_disk_area(offsets, a.radius, a.quad_resolution),
            ),
            Interaction::Superstable(s) => offsets
                .iter()
                .fold(Energy::ZERO, |acc, d| acc + s.phi(d.norm())),
        }
    }

    /// `h(x, η)`, evaluated from the neighbors of `x` within range.
    pub fn conditional_energy(&self, x: &Point, config: &PointConfiguration) -> Energy {
        self.conditional_energy_with(x, config, None)
    }

    /// `h(x, η ∪ ω)` where `ω` is a fixed outer boundary configuration.
    pub fn conditional_energy_with(
        &self,
        x: &Point,
        config: &PointConfiguration,
        boundary: Option<&PointConfiguration>,
    ) -> Energy {
        if matches!(self, Interaction::Poisson) {
            return Energy::ZERO;
        }
        let r = self.range();
        let mut offsets = Vec::new();
        config.neighbor_offsets(x, r, &mut offsets);
        if let Some(b) = boundary {
            b.neighbor_offsets(x, r, &mut offsets);
        }
        self.local_energy(&offsets)
    }

    /// `h(p, η - δ_p)` for the member `p` at index `idx`.
    pub fn member_conditional_energy(
        &self,
        idx: usize,
        config: &PointConfiguration,
        boundary: Option<&PointConfiguration>,
    ) -> Energy {
        if matches!(self, Interaction::Poisson) {
            return Energy::ZERO;
        }
        let r = self.range();
        let x = config.points()[idx];
        let mut offsets = Vec::new();
        config.for_each_neighbor(&x, r, |j, d| {
            if j != idx {
                offsets.push(d);
            }
        });
        if let Some(b) = boundary {
            b.neighbor_offsets(&x, r, &mut offsets);
        }
        self.local_energy(&offsets)
    }

    /// `b(x, η) = exp(-h(x, η))`; zero on hard-core violations.
    pub fn birth_rate(&self, x: &Point, config: &PointConfiguration) -> f64 {
        self.conditional_energy(x, config).boltzmann()
    }

    pub fn birth_rate_with(
        &self,
        x: &Point,
        config: &PointConfiguration,
        boundary: Option<&PointConfiguration>,
    ) -> f64 {
        self.conditional_energy_with(x, config, boundary).boltzmann()
    }

    /// `H(η)`. Pair families sum over unordered pairs; the area family adds
    /// the uncovered part of each disk in index order.
    pub fn total_energy(&self, config: &PointConfiguration) -> Energy {
        if matches!(self, Interaction::Poisson) {
            return Energy::ZERO;
        }
        let r = self.range();
        let mut total = Energy::ZERO;
        let mut offsets = Vec::new();
        for (i, p) in config.points().iter().enumerate() {
            offsets.clear();
            config.for_each_neighbor(p, r, |j, d| {
                if j < i {
                    offsets.push(d);
                }
            });
            total = total + self.local_energy(&offsets);
            if !total.is_finite() {
                return Energy::Infinite;
            }
        }
        total
    }

    /// Upper bound on `b(x, η)` over all `x, η`; `f64::INFINITY` if none is known.
    pub fn birth_rate_upper_bound(&self, dim: usize) -> f64 {
        match self {
            Interaction::Poisson | Interaction::Pair(_) => 1.0,
            Interaction::Area(a) => {
                if a.gamma > 0.0 {
                    1.0
                } else {
                    (a.gamma.abs() * PI * a.radius * a.radius).exp()
                }
            }
            Interaction::Superstable(s) => match s.packing_bound(dim) {
                Some(k) => (s.tail_bound * k).exp(),
                None => f64::INFINITY,
            },
        }
    }
}

/// Serializable description of an interaction, as found in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionSpec {
    Poisson,
    Strauss {
        strength: f64,
        range: f64,
    },
    SoftCore {
        range: f64,
        table: Vec<f64>,
    },
    Area {
        gamma: f64,
        radius: f64,
        #[serde(default = "default_quad_resolution")]
        quad_resolution: usize,
    },
    Superstable {
        hard_core: f64,
        range: f64,
        tail: Vec<f64>,
    },
}

fn default_quad_resolution() -> usize {
    DEFAULT_QUAD_RESOLUTION
}

impl InteractionSpec {
    pub fn build(&self) -> Result<Interaction, InteractionError> {
        Ok(match self {
            InteractionSpec::Poisson => Interaction::Poisson,
            InteractionSpec::Strauss { strength, range } => {
                Interaction::Pair(PairPotential::strauss(*strength, *range)?)
            }
            InteractionSpec::SoftCore { range, table } => {
                Interaction::Pair(PairPotential::soft_core_table(table.clone(), *range)?)
            }
            InteractionSpec::Area {
                gamma,
                radius,
                quad_resolution,
            } => Interaction::Area(AreaInteraction::new(*gamma, *radius, *quad_resolution)?),
            InteractionSpec::Superstable {
                hard_core,
                range,
                tail,
            } => Interaction::Superstable(SuperstablePair::with_table(*hard_core, *range, tail.clone())?),
        })
    }
}

/// Uncovered area of `B_radius(x)` given the points of `config`.
pub fn delta_area(
    config: &PointConfiguration,
    x: &Point,
    radius: f64,
    quad_resolution: usize,
) -> Result<f64, InteractionError> {
    let dim = config.window().dim();
    if dim != 2 {
        return Err(InteractionError::AreaDimension(dim));
    }
    let mut offsets = Vec::new();
    config.neighbor_offsets(x, 2.0 * radius, &mut offsets);
    Ok(uncovered_disk_area(&offsets, radius, quad_resolution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config_of(window: Window, cell: f64, pts: &[Point]) -> PointConfiguration {
        PointConfiguration::from_points(window, cell, pts.iter().copied()).unwrap()
    }

    fn random_config(window: Window, cell: f64, n: usize, rng: &mut ChaCha8Rng) -> PointConfiguration {
        let mut c = PointConfiguration::new(window, cell).unwrap();
        while c.len() < n {
            let _ = c.insert(window.sample_uniform(rng));
        }
        c
    }

    fn strauss() -> Interaction {
        Interaction::Pair(PairPotential::strauss(0.5, 1.0).unwrap())
    }

    fn area(gamma: f64) -> Interaction {
        Interaction::Area(AreaInteraction::new(gamma, 1.0, 256).unwrap())
    }

    fn soft() -> Interaction {
        Interaction::Pair(PairPotential::soft_core(|r| (1.0 - r).max(0.0) * 2.0, 1.0).unwrap())
    }

    fn superstable() -> Interaction {
        Interaction::Superstable(SuperstablePair::with_table(0.3, 1.0, vec![0.8, -0.4, -0.2, 0.0]).unwrap())
    }

    #[test]
    fn empty_energy_is_zero() {
        let w = Window::periodic(3.0, 2).unwrap();
        let c = PointConfiguration::new(w, 2.0).unwrap();
        for i in [strauss(), area(1.0), superstable(), Interaction::Poisson] {
            assert_eq!(i.total_energy(&c), Energy::ZERO);
        }
    }

    #[test]
    fn strauss_examples() {
        let w = Window::periodic(3.0, 2).unwrap();
        let c = config_of(w, 1.0, &[Point::ORIGIN, Point::new2(0.8, 0.0)]);
        assert_eq!(strauss().total_energy(&c), Energy::Finite(0.5));

        let c = config_of(
            w,
            1.0,
            &[
                Point::new2(0.5, 0.0),
                Point::new2(0.0, -0.9),
                Point::new2(-0.3, 0.3),
                Point::new2(2.0, 2.0),
            ],
        );
        let h = strauss().conditional_energy(&Point::ORIGIN, &c);
        assert_eq!(h, Energy::Finite(1.5));
        let b = strauss().birth_rate(&Point::ORIGIN, &c);
        assert!((b - 0.22313016014842982).abs() < 1e-12);
    }

    #[test]
    fn area_examples() {
        let w = Window::periodic(3.0, 2).unwrap();
        let single = config_of(w, 2.0, &[Point::ORIGIN]);
        let e = area(1.0).total_energy(&single).finite().unwrap();
        assert!((e - PI).abs() < 1e-3);

        let empty = PointConfiguration::new(w, 2.0).unwrap();
        let h = area(1.0).conditional_energy(&Point::ORIGIN, &empty).finite().unwrap();
        assert!((h - PI).abs() < 1e-3);

        let one = config_of(w, 2.0, &[Point::new2(1.0, 0.0)]);
        let h = area(1.0).conditional_energy(&Point::ORIGIN, &one).finite().unwrap();
        let lens = PI - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0);
        assert!((h - lens).abs() < 1e-3);
    }

    #[test]
    fn delta_area_rejects_other_dimensions() {
        let w = Window::periodic(3.0, 3).unwrap();
        let c = PointConfiguration::new(w, 2.0).unwrap();
        assert_eq!(
            delta_area(&c, &Point::ORIGIN, 1.0, 64).unwrap_err(),
            InteractionError::AreaDimension(3)
        );
        let w = Window::periodic(3.0, 2).unwrap();
        let far = config_of(w, 2.0, &[Point::new2(2.0, 0.0)]);
        let a = delta_area(&far, &Point::ORIGIN, 1.0, 256).unwrap();
        assert!((a - PI).abs() < 1e-3);
    }

    #[test]
    fn birth_rate_bounds() {
        assert_eq!(strauss().birth_rate_upper_bound(2), 1.0);
        assert_eq!(area(2.0).birth_rate_upper_bound(2), 1.0);
        let b = area(-0.5).birth_rate_upper_bound(2);
        assert!((b - 4.810477380965351).abs() < 1e-9);
        let zero_core = Interaction::Superstable(SuperstablePair::with_table(0.0, 1.0, vec![-0.1]).unwrap());
        assert!(zero_core.birth_rate_upper_bound(2).is_infinite());
        // (2 / 0.3 + 1)^2 = 58.77..., floored
        let s = superstable().birth_rate_upper_bound(2);
        assert!((s - (0.8f64 * 58.0).exp()).abs() < 1e-6 * s);
    }

    #[test]
    fn hard_core_violation_is_infinite() {
        let w = Window::periodic(3.0, 2).unwrap();
        let c = config_of(w, 1.0, &[Point::new2(0.1, 0.0)]);
        let s = superstable();
        assert_eq!(s.conditional_energy(&Point::ORIGIN, &c), Energy::Infinite);
        assert_eq!(s.birth_rate(&Point::ORIGIN, &c), 0.0);
        let c2 = c.with_point(Point::ORIGIN).unwrap();
        assert_eq!(s.total_energy(&c2), Energy::Infinite);
    }

    #[test]
    fn strauss_conditional_energy_is_monotone_in_neighbors() {
        let w = Window::periodic(3.0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut c = PointConfiguration::new(w, 1.0).unwrap();
        let x = Point::new2(0.2, -0.1);
        let mut last = 0.0;
        for _ in 0..50 {
            let _ = c.insert(w.sample_uniform(&mut rng));
            let h = strauss().conditional_energy(&x, &c).finite().unwrap();
            assert!(h >= last);
            last = h;
        }
    }

    #[test]
    fn spec_round_trip() {
        let spec: InteractionSpec =
            serde_json::from_str(r#"{"kind":"area","gamma":1.5,"radius":0.5}"#).unwrap();
        assert_eq!(
            spec,
            InteractionSpec::Area {
                gamma: 1.5,
                radius: 0.5,
                quad_resolution: DEFAULT_QUAD_RESOLUTION
            }
        );
        assert!(spec.build().is_ok());
        let bad: InteractionSpec =
            serde_json::from_str(r#"{"kind":"strauss","strength":-1,"range":1}"#).unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn locality_matches_energy_difference_on_random_configs() {
        let w = Window::periodic(3.0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for (interaction, tol) in [(strauss(), 1e-9), (soft(), 1e-9), (superstable(), 1e-9), (area(0.7), 1e-3)] {
            let cases = if matches!(interaction, Interaction::Area(_)) { 100 } else { 500 };
            for _ in 0..cases {
                let n = rng.random_range(0..20);
                let c = random_config(w, interaction.cell_size(), n, &mut rng);
                let x = w.sample_uniform(&mut rng);
                let h = interaction.conditional_energy(&x, &c);
                let before = interaction.total_energy(&c);
                let after = interaction.total_energy(&c.with_point(x).unwrap());
                match (h, after.minus(before)) {
                    (_, None) => {}
                    (Energy::Infinite, Some(d)) => assert_eq!(d, Energy::Infinite),
                    (Energy::Finite(h), Some(Energy::Finite(d))) => {
                        assert!((h - d).abs() <= tol * (1.0 + d.abs()), "{h} vs {d}")
                    }
                    (h, d) => panic!("mismatch {h:?} vs {d:?}"),
                }
            }
        }
    }

    proptest! {
        #[test]
        fn cocycle_identity(seed in 0u64..500) {
            let w = Window::periodic(3.0, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (interaction, tol) in [(strauss(), 1e-9), (soft(), 1e-9), (area(1.0), 1e-3)] {
                let c = random_config(w, interaction.cell_size(), rng.random_range(0..15), &mut rng);
                let x = w.sample_uniform(&mut rng);
                let y = w.sample_uniform(&mut rng);
                let hx = interaction.conditional_energy(&x, &c).finite().unwrap();
                let hy_after_x = interaction.conditional_energy(&y, &c.with_point(x).unwrap()).finite().unwrap();
                let hy = interaction.conditional_energy(&y, &c).finite().unwrap();
                let hx_after_y = interaction.conditional_energy(&x, &c.with_point(y).unwrap()).finite().unwrap();
                prop_assert!((hx + hy_after_x - hy - hx_after_y).abs() <= tol * (1.0 + hx.abs() + hy.abs()));
            }
        }

        #[test]
        fn delta_area_stays_in_disk_range(seed in 0u64..500) {
            let w = Window::periodic(3.0, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = random_config(w, 2.0, rng.random_range(0..30), &mut rng);
            let x = w.sample_uniform(&mut rng);
            let a = delta_area(&c, &x, 1.0, 64).unwrap();
            prop_assert!(a >= 0.0 && a <= PI + 1e-12, "{a}");
        }
    }
}
