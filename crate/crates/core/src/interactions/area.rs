use crate::geometry::Point;

/// Area of the disk `B_radius(0)` not covered by the disks `B_radius(d)` for
/// `d` in `offsets`, in two dimensions.
///
/// The disk is cut into `rows` horizontal strips. Each strip contributes its
/// exact area times the uncovered fraction of the chord through the strip
/// midpoint, where the covered part is the exact union of the neighbor chords.
/// The result therefore always lies in `[0, πR²]` and is exact without neighbors.
pub fn uncovered_disk_area(offsets: &[Point], radius: f64, rows: usize) -> f64 {
    let r_sq = radius * radius;
    let reach_sq = 4.0 * r_sq;
    let relevant: Vec<(f64, f64)> = offsets
        .iter()
        .filter(|d| d.0[0] * d.0[0] + d.0[1] * d.0[1] < reach_sq)
        .map(|d| (d.0[0], d.0[1]))
        .collect();
    let h = 2.0 * radius / rows as f64;
    let mut chords: Vec<(f64, f64)> = Vec::with_capacity(relevant.len());
    let mut total = 0.0;
    for j in 0..rows {
        let y = -radius + (j as f64 + 0.5) * h;
        let half = (r_sq - y * y).max(0.0).sqrt();
        chords.clear();
        for &(dx, dy) in &relevant {
            let ry = y - dy;
            let rem = r_sq - ry * ry;
            if rem <= 0.0 {
                continue;
            }
            let hw = rem.sqrt();
            let lo = (dx - hw).max(-half);
            let hi = (dx + hw).min(half);
            if lo < hi {
                chords.push((lo, hi));
            }
        }
        let strip = disk_area_below(y + 0.5 * h, radius) - disk_area_below(y - 0.5 * h, radius);
        if half > 0.0 {
            let covered = union_length(&mut chords).min(2.0 * half);
            total += strip * (1.0 - covered / (2.0 * half));
        }
    }
    total
}

/// Area of the part of `B_R(0)` below height `y`.
fn disk_area_below(y: f64, radius: f64) -> f64 {
    let y = y.clamp(-radius, radius);
    let r_sq = radius * radius;
    y * (r_sq - y * y).max(0.0).sqrt() + r_sq * (y / radius).asin() + 0.5 * std::f64::consts::PI * r_sq
}

fn union_length(intervals: &mut [(f64, f64)]) -> f64 {
    if intervals.is_empty() {
        return 0.0;
    }
    intervals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let mut covered = 0.0;
    let (mut lo, mut hi) = intervals[0];
    for &(a, b) in &intervals[1..] {
        if a > hi {
            covered += hi - lo;
            lo = a;
            hi = b;
        } else if b > hi {
            hi = b;
        }
    }
    covered + hi - lo
}

/// Area of the lens `B_R(0) ∩ B_R(d)` for centers at distance `dist`.
pub fn lens_area(radius: f64, dist: f64) -> f64 {
    if dist >= 2.0 * radius {
        return 0.0;
    }
    let r = radius;
    2.0 * r * r * (dist / (2.0 * r)).acos() - 0.5 * dist * (4.0 * r * r - dist * dist).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Independent 2-d midpoint-grid quadrature over the bounding square.
    fn grid_oracle(offsets: &[Point], radius: f64, res: usize) -> f64 {
        let h = 2.0 * radius / res as f64;
        let mut hits = 0usize;
        for j in 0..res {
            let y = -radius + (j as f64 + 0.5) * h;
            for i in 0..res {
                let x = -radius + (i as f64 + 0.5) * h;
                if x * x + y * y > radius * radius {
                    continue;
                }
                let covered = offsets.iter().any(|d| {
                    let (ex, ey) = (x - d.0[0], y - d.0[1]);
                    ex * ex + ey * ey <= radius * radius
                });
                if !covered {
                    hits += 1;
                }
            }
        }
        hits as f64 * h * h
    }

    #[test]
    fn single_disk() {
        let a = uncovered_disk_area(&[], 1.0, 7);
        assert!((a - PI).abs() < 1e-12, "{a}");
    }

    #[test]
    fn distant_disk_does_not_overlap() {
        let a = uncovered_disk_area(&[Point::new2(2.0, 0.0)], 1.0, 256);
        assert!((a - uncovered_disk_area(&[], 1.0, 256)).abs() < 1e-15);
    }

    #[test]
    fn two_disk_lens_closed_form_and_grid_agree() {
        let exact = PI - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0);
        assert!((exact - (PI - lens_area(1.0, 1.0))).abs() < 1e-12);
        assert!((exact - 1.9132).abs() < 1e-4);
        let rows = uncovered_disk_area(&[Point::new2(1.0, 0.0)], 1.0, 256);
        assert!((rows - exact).abs() < 1e-3, "rows {rows}");
        let grid = grid_oracle(&[Point::new2(1.0, 0.0)], 1.0, 256);
        assert!((grid - exact).abs() < 1e-3, "grid {grid}");
    }

    #[test]
    fn rows_match_grid_oracle_on_clusters() {
        let offsets = [
            Point::new2(0.7, 0.3),
            Point::new2(-0.4, 1.1),
            Point::new2(-1.2, -0.9),
            Point::new2(0.2, -0.5),
        ];
        let rows = uncovered_disk_area(&offsets, 1.0, 512);
        let grid = grid_oracle(&offsets, 1.0, 512);
        assert!((rows - grid).abs() < 2e-3, "{rows} vs {grid}");
        assert!(rows >= 0.0 && rows <= PI);
    }

    #[test]
    fn error_shrinks_with_resolution() {
        let exact = PI - lens_area(1.0, 0.6);
        let coarse = (uncovered_disk_area(&[Point::new2(0.0, 0.6)], 1.0, 32) - exact).abs();
        let fine = (uncovered_disk_area(&[Point::new2(0.0, 0.6)], 1.0, 512) - exact).abs();
        assert!(fine < coarse);
        assert!(fine < 1e-4);
    }
}
