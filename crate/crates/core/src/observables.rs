//! Kernel observables `f(η) = ±exp(-Σ_{x∈η} g(x))`, their space averages
//! `F_n = ∫_{Λ_n} f(θ_x η) dx`, discrete gradients and the gradient constants.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point, PointConfiguration};

#[derive(Debug, Error, PartialEq)]
pub enum ObservableError {
    #[error("invalid kernel: {0}")]
    Kernel(String),
    #[error("quadrature spacing {spacing} must be positive and at most radius/8 = {max}")]
    Spacing { spacing: f64, max: f64 },
    #[error("averaging half side {0} must be at least the kernel radius")]
    AveragingWindow(f64),
    #[error("window half side {half_side} is smaller than n + r = {needed}")]
    WindowTooSmall { half_side: f64, needed: f64 },
}

#[derive(Clone)]
enum Shape {
    /// `amplitude * max(0, 1 - |x| / r)`
    Tent { amplitude: f64 },
    Custom(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

/// A nonnegative bounded kernel `g` supported in the cube `[-r, r]^d`, with
/// the sign of the resulting observable.
#[derive(Clone)]
pub struct Kernel {
    shape: Shape,
    radius: f64,
    sign: f64,
    dim: usize,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = f.debug_struct("Kernel");
        match &self.shape {
            Shape::Tent { amplitude } => s.field("tent_amplitude", amplitude),
            Shape::Custom(_) => s.field("shape", &"custom"),
        };
        s.field("radius", &self.radius)
            .field("sign", &self.sign)
            .field("dim", &self.dim)
            .finish()
    }
}

fn check_sign(sign: i8) -> Result<f64, ObservableError> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        s => Err(ObservableError::Kernel(format!("sign must be ±1, got {s}"))),
    }
}

impl Kernel {
    pub fn tent(amplitude: f64, radius: f64, sign: i8, dim: usize) -> Result<Self, ObservableError> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(ObservableError::Kernel(format!("amplitude {amplitude}")));
        }
        Self::validated(Shape::Tent { amplitude }, radius, sign, dim)
    }

    /// User kernel. `g` must be nonnegative and bounded; values outside the
    /// declared support cube are ignored.
    pub fn custom(
        g: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        radius: f64,
        sign: i8,
        dim: usize,
    ) -> Result<Self, ObservableError> {
        Self::validated(Shape::Custom(Arc::new(g)), radius, sign, dim)
    }

    fn validated(shape: Shape, radius: f64, sign: i8, dim: usize) -> Result<Self, ObservableError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(ObservableError::Kernel(format!("radius {radius}")));
        }
        if !(1..=3).contains(&dim) {
            return Err(ObservableError::Kernel(format!("dimension {dim}")));
        }
        Ok(Self {
            shape,
            radius,
            sign: check_sign(sign)?,
            dim,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    /// Same kernel with the opposite sign.
    pub fn flipped(&self) -> Self {
        Self {
            sign: -self.sign,
            ..self.clone()
        }
    }

    /// Same kernel with the given sign.
    pub fn with_sign(&self, positive: bool) -> Self {
        Self {
            sign: if positive { 1.0 } else { -1.0 },
            ..self.clone()
        }
    }

    /// `g(x)`, zero outside the support cube.
    pub fn g(&self, x: &Point) -> f64 {
        if x.norm_inf() > self.radius {
            return 0.0;
        }
        match &self.shape {
            Shape::Tent { amplitude } => amplitude * (1.0 - x.norm() / self.radius).max(0.0),
            Shape::Custom(g) => g(x),
        }
    }

    /// `ψ(x) = sup_ω |D_x f(ω)| = |1 - e^{-g(x)}|`, using `|f| ≤ 1`.
    pub fn psi(&self, x: &Point) -> f64 {
        (1.0 - (-self.g(x)).exp()).abs()
    }
}

/// `f(η) = sign · exp(-Σ_{p∈η} g(p))`.
pub fn eval_f(kernel: &Kernel, config: &PointConfiguration) -> f64 {
    let reach = kernel.radius * (kernel.dim as f64).sqrt();
    let mut s = 0.0;
    config.for_each_neighbor(&Point::ORIGIN, reach, |_, d| s += kernel.g(&d));
    kernel.sign * (-s).exp()
}

/// `D_x F(η) = F(η + δ_x) - F(η)`. A coordinate collision with an existing
/// point (a null event) yields zero.
pub fn discrete_gradient(
    f: impl Fn(&PointConfiguration) -> f64,
    x: &Point,
    config: &PointConfiguration,
) -> f64 {
    match config.with_point(*x) {
        Ok(with) => f(&with) - f(config),
        Err(_) => 0.0,
    }
}

/// `ψ(x)`, the envelope of the discrete gradient of `f`.
pub fn psi_envelope(kernel: &Kernel, x: &Point) -> f64 {
    kernel.psi(x)
}

/// Midpoint grid over the cube `[-half, half]^dim` with spacing at most `spacing`.
#[derive(Clone, Debug)]
pub struct CubeGrid {
    pub half: f64,
    pub dim: usize,
    pub per_axis: usize,
    pub step: f64,
}

impl CubeGrid {
    pub fn new(half: f64, dim: usize, spacing: f64) -> Self {
        let per_axis = ((2.0 * half / spacing).ceil() as usize).max(1);
        Self {
            half,
            dim,
            per_axis,
            step: 2.0 * half / per_axis as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.step.powi(self.dim as i32)
    }

    fn axis_center(&self, i: usize) -> f64 {
        -self.half + (i as f64 + 0.5) * self.step
    }

    pub fn center(&self, flat: usize) -> Point {
        let mut p = [0.0; 3];
        let mut rest = flat;
        for c in p[..self.dim].iter_mut() {
            *c = self.axis_center(rest % self.per_axis);
            rest /= self.per_axis;
        }
        Point(p)
    }

    pub fn centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|i| self.center(i))
    }

    /// Flat indices of cells whose centers lie within sup-distance `r` of `x`,
    /// with `x` given in the same frame as the grid.
    fn cells_near(&self, x: &Point, r: f64, mut visit: impl FnMut(usize)) {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for k in 0..self.dim {
            let a = ((x.0[k] - r + self.half) / self.step - 0.5).ceil();
            let b = ((x.0[k] + r + self.half) / self.step - 0.5).floor();
            if b < 0.0 || a > (self.per_axis - 1) as f64 || a > b {
                return;
            }
            lo[k] = a.max(0.0) as usize;
            hi[k] = (b as usize).min(self.per_axis - 1);
        }
        let m = self.per_axis;
        match self.dim {
            1 => (lo[0]..=hi[0]).for_each(visit),
            2 => {
                for j in lo[1]..=hi[1] {
                    for i in lo[0]..=hi[0] {
                        visit(j * m + i);
                    }
                }
            }
            _ => {
                for l in lo[2]..=hi[2] {
                    for j in lo[1]..=hi[1] {
                        for i in lo[0]..=hi[0] {
                            visit((l * m + j) * m + i);
                        }
                    }
                }
            }
        }
    }
}

/// `β = ∫ |1 - e^{-g(x)}| dx` by the midpoint rule over `[-r, r]^d`.
pub fn beta_constant(kernel: &Kernel, quad_spacing: f64) -> f64 {
    let grid = CubeGrid::new(kernel.radius, kernel.dim, quad_spacing);
    grid.centers().map(|x| kernel.psi(&x)).sum::<f64>() * grid.cell_volume()
}

/// The constants `β` and `α_n² = β² |Λ_n|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientConstants {
    pub beta: f64,
    pub alpha_sq_n: f64,
}

impl GradientConstants {
    pub fn new(kernel: &Kernel, n: f64, quad_spacing: f64) -> Self {
        let beta = beta_constant(kernel, quad_spacing);
        Self {
            beta,
            alpha_sq_n: alpha_sq_from_beta(beta, n, kernel.dim),
        }
    }
}

pub fn alpha_sq_from_beta(beta: f64, n: f64, dim: usize) -> f64 {
    beta * beta * (2.0 * n).powi(dim as i32)
}

/// `α_n² = β² (2n)^d`.
pub fn alpha_sq(kernel: &Kernel, n: f64, quad_spacing: f64) -> f64 {
    GradientConstants::new(kernel, n, quad_spacing).alpha_sq_n
}

/// Kernel, averaging half side `n` and translation-quadrature spacing.
#[derive(Clone, Debug)]
pub struct SpaceAverageSpec {
    pub kernel: Kernel,
    pub n: f64,
    pub quad_spacing: f64,
}

impl SpaceAverageSpec {
    /// Spacing defaults to `r / 16`.
    pub fn new(kernel: Kernel, n: f64) -> Result<Self, ObservableError> {
        let spacing = kernel.radius / 16.0;
        Self::with_spacing(kernel, n, spacing)
    }

    pub fn with_spacing(kernel: Kernel, n: f64, quad_spacing: f64) -> Result<Self, ObservableError> {
        let max = kernel.radius / 8.0;
        if !(quad_spacing > 0.0 && quad_spacing <= max * (1.0 + 1e-12)) {
            return Err(ObservableError::Spacing {
                spacing: quad_spacing,
                max,
            });
        }
        if !(n >= kernel.radius) {
            return Err(ObservableError::AveragingWindow(n));
        }
        Ok(Self {
            kernel,
            n,
            quad_spacing,
        })
    }

    pub fn grid(&self) -> CubeGrid {
        CubeGrid::new(self.n, self.kernel.dim, self.quad_spacing)
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.n).powi(self.kernel.dim as i32)
    }

    /// Values `f(θ_x η)` on the quadrature grid.
    pub fn field(&self, config: &PointConfiguration) -> Result<AveragedField, ObservableError> {
        let w = config.window();
        let needed = self.n + self.kernel.radius;
        if w.half_side() < needed * (1.0 - 1e-12) {
            return Err(ObservableError::WindowTooSmall {
                half_side: w.half_side(),
                needed,
            });
        }
        let grid = self.grid();
        let mut exponent = vec![0.0; grid.len()];
        let r = self.kernel.radius;
        for p in config.points() {
            // the point can reach cells on the far side of a periodic window
            let p = w.wrap(*p);
            grid.cells_near(&p, r, |cell| {
                let d = w.displacement(&grid.center(cell), &p);
                exponent[cell] += self.kernel.g(&d);
            });
            if w.is_periodic() {
                for image in periodic_images(&p, w.side(), grid.dim, self.n + r) {
                    grid.cells_near(&image, r, |cell| {
                        let d = w.displacement(&grid.center(cell), &p);
                        exponent[cell] += self.kernel.g(&d);
                    });
                }
            }
        }
        let values = exponent
            .into_iter()
            .map(|s| self.kernel.sign * (-s).exp())
            .collect();
        Ok(AveragedField {
            grid,
            values,
            kernel: self.kernel.clone(),
            window: *w,
        })
    }
}

/// Periodic images `p + side·k` (k ≠ 0, entries in {-1, 0, 1}) that fall within
/// sup-distance `reach` of the origin.
fn periodic_images(p: &Point, side: f64, dim: usize, reach: f64) -> Vec<Point> {
    let mut out = Vec::new();
    let shifts = [-1.0, 0.0, 1.0];
    let combos = 3usize.pow(dim as u32);
    for code in 0..combos {
        let mut q = *p;
        let mut rest = code;
        let mut any = false;
        let mut inside = true;
        for k in 0..dim {
            let s = shifts[rest % 3];
            rest /= 3;
            if s != 0.0 {
                any = true;
            }
            q.0[k] += s * side;
            if q.0[k].abs() > reach {
                inside = false;
            }
        }
        if any && inside {
            out.push(q);
        }
    }
    out
}

/// Integrand of `F_n` tabulated on the quadrature grid.
#[derive(Clone, Debug)]
pub struct AveragedField {
    grid: CubeGrid,
    values: Vec<f64>,
    kernel: Kernel,
    window: crate::geometry::Window,
}

impl AveragedField {
    pub fn grid(&self) -> &CubeGrid {
        &self.grid
    }

    /// `F_n(η)`.
    pub fn value(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// `D_z F_n(η) = ∫_{Λ_n} (e^{-g(z - x)} - 1) f(θ_x η) dx` on the same grid,
    /// which equals the difference of the two quadratures exactly.
    pub fn gradient(&self, z: &Point) -> f64 {
        let z = self.window.wrap(*z);
        let r = self.kernel.radius;
        let mut acc = 0.0;
        let mut add = |cell: usize| {
            let d = self.window.displacement(&self.grid.center(cell), &z);
            let g = self.kernel.g(&d);
            if g != 0.0 {
                acc += ((-g).exp() - 1.0) * self.values[cell];
            }
        };
        self.grid.cells_near(&z, r, &mut add);
        if self.window.is_periodic() {
            for image in periodic_images(&z, self.window.side(), self.grid.dim, self.grid.half + r) {
                self.grid.cells_near(&image, r, &mut add);
            }
        }
        acc * self.grid.cell_volume()
    }

    /// `∫ |D_z F_n|² dz` by the midpoint rule on a grid of spacing `spacing`
    /// over `Λ_{n+r}`, outside of which the gradient vanishes.
    pub fn gradient_l2_sq(&self, spacing: f64) -> f64 {
        let zgrid = CubeGrid::new(self.grid.half + self.kernel.radius, self.grid.dim, spacing);
        zgrid
            .centers()
            .map(|z| {
                let g = self.gradient(&z);
                g * g
            })
            .sum::<f64>()
            * zgrid.cell_volume()
    }
}

/// `F_n(η)` by midpoint quadrature of `x ↦ f(θ_x η)` over `Λ_n`.
pub fn space_average(spec: &SpaceAverageSpec, config: &PointConfiguration) -> Result<f64, ObservableError> {
    Ok(spec.field(config)?.value())
}

/// Kernel description in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Tent { amplitude: f64, radius: f64, sign: i8 },
}

impl KernelSpec {
    pub fn build(&self, dim: usize) -> Result<Kernel, ObservableError> {
        match self {
            KernelSpec::Tent {
                amplitude,
                radius,
                sign,
            } => Kernel::tent(*amplitude, *radius, *sign, dim),
        }
    }

    pub fn id(&self) -> String {
        match self {
            KernelSpec::Tent {
                amplitude,
                radius,
                sign,
            } => format!("tent(a={amplitude},r={radius},sign={sign})"),
        }
    }
}

/// The default separating family: tents with amplitudes 0.25, 0.5, 1 and 2.
pub fn default_tent_family(radius: f64) -> Vec<KernelSpec> {
    [0.25, 0.5, 1.0, 2.0]
        .into_iter()
        .map(|amplitude| KernelSpec::Tent {
            amplitude,
            radius,
            sign: 1,
        })
        .collect()
}
