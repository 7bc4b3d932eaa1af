use super::{Point, Window};

/// Uniform cell grid over a window. Each point index lives in exactly one
/// bucket; `slots` records where, so removal is O(1).
#[derive(Clone, Debug)]
pub(crate) struct HashGrid {
    cells_per_axis: usize,
    cell_len: f64,
    buckets: Vec<Vec<u32>>,
    slots: Vec<(u32, u32)>,
}

impl HashGrid {
    pub fn new(window: &Window, min_cell_size: f64) -> Self {
        let side = window.side();
        let cells_per_axis = ((side / min_cell_size).floor() as usize).clamp(1, 1 << 10);
        let cell_len = side / cells_per_axis as f64;
        let n_cells = cells_per_axis.pow(window.dim() as u32);
        Self {
            cells_per_axis,
            cell_len,
            buckets: vec![Vec::new(); n_cells],
            slots: Vec::new(),
        }
    }

    fn axis_cell(&self, window: &Window, c: f64) -> usize {
        let k = ((c + window.half_side()) / self.cell_len).floor();
        (k.max(0.0) as usize).min(self.cells_per_axis - 1)
    }

    pub fn cell_of(&self, window: &Window, p: &Point) -> usize {
        let mut id = 0;
        for k in (0..window.dim()).rev() {
            id = id * self.cells_per_axis + self.axis_cell(window, p.0[k]);
        }
        id
    }

    pub fn bucket(&self, cell: usize) -> &[u32] {
        &self.buckets[cell]
    }

    pub fn push(&mut self, window: &Window, p: &Point) {
        let cell = self.cell_of(window, p);
        let idx = self.slots.len() as u32;
        let pos = self.buckets[cell].len() as u32;
        self.buckets[cell].push(idx);
        self.slots.push((cell as u32, pos));
    }

    /// Mirrors `Vec::swap_remove` on the point list: index `idx` is dropped and
    /// the last index takes its place.
    pub fn swap_remove(&mut self, idx: usize) {
        let (cell, pos) = self.slots[idx];
        let bucket = &mut self.buckets[cell as usize];
        bucket.swap_remove(pos as usize);
        if let Some(&moved) = bucket.get(pos as usize) {
            self.slots[moved as usize].1 = pos;
        }
        let last = self.slots.len() - 1;
        if idx != last {
            let (lcell, lpos) = self.slots[last];
            self.buckets[lcell as usize][lpos as usize] = idx as u32;
            self.slots[idx] = (lcell, lpos);
        }
        self.slots.pop();
    }

    /// Axis-wise cell index ranges touching `[x - r, x + r]`, already wrapped
    /// and deduplicated on periodic windows.
    fn axis_range(&self, window: &Window, c: f64, r: f64) -> Vec<usize> {
        let m = self.cells_per_axis as i64;
        let lo = ((c - r + window.half_side()) / self.cell_len).floor() as i64;
        let hi = ((c + r + window.half_side()) / self.cell_len).floor() as i64;
        if window.is_periodic() {
            if hi - lo + 1 >= m {
                (0..m as usize).collect()
            } else {
                (lo..=hi).map(|k| k.rem_euclid(m) as usize).collect()
            }
        } else {
            let lo = lo.max(0);
            let hi = hi.min(m - 1);
            if lo > hi {
                Vec::new()
            } else {
                (lo as usize..=hi as usize).collect()
            }
        }
    }

    /// Calls `visit` with every cell id whose cube intersects the axis-aligned
    /// box around `x` of half-width `r`.
    pub fn for_each_cell_near(&self, window: &Window, x: &Point, r: f64, mut visit: impl FnMut(usize)) {
        let dim = window.dim();
        let ranges: Vec<Vec<usize>> = (0..dim).map(|k| self.axis_range(window, x.0[k], r)).collect();
        if ranges.iter().any(|v| v.is_empty()) {
            return;
        }
        let m = self.cells_per_axis;
        match dim {
            1 => ranges[0].iter().for_each(|&i| visit(i)),
            2 => {
                for &j in &ranges[1] {
                    for &i in &ranges[0] {
                        visit(j * m + i);
                    }
                }
            }
            _ => {
                for &l in &ranges[2] {
                    for &j in &ranges[1] {
                        for &i in &ranges[0] {
                            visit((l * m + j) * m + i);
                        }
                    }
                }
            }
        }
    }

    /// Cell ids intersecting the box `[lower, upper]`, clipped to the window.
    pub fn for_each_cell_in_box(
        &self,
        window: &Window,
        lower: &Point,
        upper: &Point,
        mut visit: impl FnMut(usize),
    ) {
        let dim = window.dim();
        let n = window.half_side();
        let mut ranges = Vec::with_capacity(dim);
        for k in 0..dim {
            let lo = lower.0[k].max(-n);
            let hi = upper.0[k].min(n);
            if lo > hi {
                return;
            }
            ranges.push(self.axis_cell(window, lo)..=self.axis_cell(window, hi));
        }
        let m = self.cells_per_axis;
        match dim {
            1 => ranges[0].clone().for_each(&mut visit),
            2 => {
                for j in ranges[1].clone() {
                    for i in ranges[0].clone() {
                        visit(j * m + i);
                    }
                }
            }
            _ => {
                for l in ranges[2].clone() {
                    for j in ranges[1].clone() {
                        for i in ranges[0].clone() {
                            visit((l * m + j) * m + i);
                        }
                    }
                }
            }
        }
    }

    /// True when buckets partition `0..n_points` and every point sits in its own cell.
    pub fn is_consistent(&self, window: &Window, points: &[Point]) -> bool {
        if self.slots.len() != points.len() {
            return false;
        }
        let mut seen = vec![false; points.len()];
        for (cell, bucket) in self.buckets.iter().enumerate() {
            for (pos, &idx) in bucket.iter().enumerate() {
                let idx = idx as usize;
                if idx >= points.len() || seen[idx] {
                    return false;
                }
                seen[idx] = true;
                if self.slots[idx] != (cell as u32, pos as u32)
                    || self.cell_of(window, &points[idx]) != cell
                {
                    return false;
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
