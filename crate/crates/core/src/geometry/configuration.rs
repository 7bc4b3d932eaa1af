use super::grid::HashGrid;
use super::{GeometryError, Point, Region, Window};

/// A finite simple point configuration inside a window, indexed by a uniform
/// cell grid for fixed-radius queries.
///
/// Point indices are not stable across removals: `remove` moves the last
/// point into the freed slot.
#[derive(Clone, Debug)]
pub struct PointConfiguration {
    window: Window,
    points: Vec<Point>,
    grid: HashGrid,
    cell_size: f64,
}

impl PointConfiguration {
    /// Empty configuration whose grid cells are at least `cell_size` wide.
    /// `cell_size` is normally the interaction range.
    pub fn new(window: Window, cell_size: f64) -> Result<Self, GeometryError> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(GeometryError::CellSize(cell_size));
        }
        Ok(Self {
            grid: HashGrid::new(&window, cell_size),
            window,
            points: Vec::new(),
            cell_size,
        })
    }

    pub fn from_points(
        window: Window,
        cell_size: f64,
        points: impl IntoIterator<Item = Point>,
    ) -> Result<Self, GeometryError> {
        let mut config = Self::new(window, cell_size)?;
        for p in points {
            config.insert(p)?;
        }
        Ok(config)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Inserts a point and returns its index. Periodic windows wrap the point;
    /// free windows reject points outside. Exact coordinate collisions are
    /// rejected so callers can redraw.
    pub fn insert(&mut self, p: Point) -> Result<usize, GeometryError> {
        let p = self.window.wrap(p);
        if !self.window.contains(&p) {
            return Err(GeometryError::OutsideWindow(p));
        }
        let cell = self.grid.cell_of(&self.window, &p);
        if self
            .grid
            .bucket(cell)
            .iter()
            .any(|&i| self.points[i as usize] == p)
        {
            return Err(GeometryError::Collision(p));
        }
        self.grid.push(&self.window, &p);
        self.points.push(p);
        Ok(self.points.len() - 1)
    }

    /// Removes point `idx`; the last point takes its index.
    pub fn remove(&mut self, idx: usize) -> Point {
        self.grid.swap_remove(idx);
        self.points.swap_remove(idx)
    }

    /// Copy with one extra point.
    pub fn with_point(&self, p: Point) -> Result<Self, GeometryError> {
        let mut out = self.clone();
        out.insert(p)?;
        Ok(out)
    }

    /// Copy without point `idx`.
    pub fn without(&self, idx: usize) -> Self {
        let mut out = self.clone();
        out.remove(idx);
        out
    }

    /// Same points re-indexed on a grid with a different minimum cell size.
    pub fn regrid(&self, cell_size: f64) -> Result<Self, GeometryError> {
        Self::from_points(self.window, cell_size, self.points.iter().copied())
    }

    /// Calls `visit(index, displacement)` for every point within distance `r`
    /// of `x`, where `displacement` is `point - x` under the window metric.
    pub fn for_each_neighbor(&self, x: &Point, r: f64, mut visit: impl FnMut(usize, Point)) {
        let r_sq = r * r;
        let x = self.window.wrap(*x);
        self.grid.for_each_cell_near(&self.window, &x, r, |cell| {
            for &i in self.grid.bucket(cell) {
                let d = self.window.displacement(&x, &self.points[i as usize]);
                if d.norm_sq() <= r_sq {
                    visit(i as usize, d);
                }
            }
        });
    }

    /// Indices of points at distance at most `r` from `x` (torus metric on
    /// periodic windows).
    pub fn neighbors_within(&self, x: &Point, r: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_neighbor(x, r, |i, _| out.push(i));
        out
    }

    /// Displacements `p - x` of all points within distance `r` of `x`, appended to `out`.
    pub fn neighbor_offsets(&self, x: &Point, r: f64, out: &mut Vec<Point>) {
        self.for_each_neighbor(x, r, |_, d| out.push(d));
    }

    /// Number of points in `region`.
    pub fn count_in(&self, region: &Region) -> usize {
        match region {
            Region::Ball { center, radius } => {
                let mut n = 0;
                self.for_each_neighbor(center, *radius, |_, _| n += 1);
                n
            }
            Region::Box { lower, upper } => {
                let mut n = 0;
                self.grid
                    .for_each_cell_in_box(&self.window, lower, upper, |cell| {
                        n += self
                            .grid
                            .bucket(cell)
                            .iter()
                            .filter(|&&i| region.contains(&self.window, &self.points[i as usize]))
                            .count();
                    });
                n
            }
        }
    }

    /// The shifted configuration `{wrap(p - x)}`; only defined on periodic windows.
    pub fn translate(&self, x: &Point) -> Result<Self, GeometryError> {
        if !self.window.is_periodic() {
            return Err(GeometryError::FreeTranslation);
        }
        Self::from_points(
            self.window,
            self.cell_size,
            self.points.iter().map(|p| self.window.wrap(*p - *x)),
        )
    }

    /// Rebuild-free consistency check of the grid index.
    pub fn grid_is_consistent(&self) -> bool {
        self.grid.is_consistent(&self.window, &self.points)
    }
}
