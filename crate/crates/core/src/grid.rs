//! Symmetric grid on [-X, X] and the node-sampled temperature fields.
//!
//! Node positions are computed as (j - n/2) * h from integer offsets, so a
//! node and its mirror image are exact floating-point negatives of each
//! other. Everything that relies on symmetry preservation (the scheme
//! itself, the symmetry diagnostics) leans on that.

use crate::error::{Error, Result};

/// Values a hair outside [0, 1] are tolerated: the implicit diffusion
/// solve can produce O(1e-16) excursions that are not worth clamping.
pub const FIELD_RANGE_SLACK: f64 = 1e-12;

/// Uniform grid of `n_cells` cells (n_cells + 1 nodes) on [-X, X].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n_cells: usize,
}

impl Grid {
    /// `n_cells` must be even and positive so that x = 0 is a node.
    pub fn new(half_width: f64, n_cells: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Validation(format!(
                "half-width {half_width} must be positive and finite"
            )));
        }
        if n_cells == 0 || n_cells % 2 != 0 {
            return Err(Error::Validation(format!(
                "n_cells = {n_cells} must be even and positive"
            )));
        }
        Ok(Grid { half_width, n_cells })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    /// Index of the node at x = 0.
    pub fn mid(&self) -> usize {
        self.n_cells / 2
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_cells as f64
    }

    /// Node position; `node(j)` and `node(n - j)` are exact negatives.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        (j as i64 - self.mid() as i64) as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|j| self.node(j)).collect()
    }
}

/// A temperature profile sampled at the grid nodes, tagged with its time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    time: f64,
    pub(crate) values: Vec<f64>,
}

impl Field {
    /// Wrap raw node values, enforcing length, finiteness and range.
    pub fn from_values(grid: Grid, time: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::Validation(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        for (j, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NumericalFault(format!("value at node {j} is {v}")));
            }
            if *v < -FIELD_RANGE_SLACK || *v > 1.0 + FIELD_RANGE_SLACK {
                return Err(Error::Validation(format!(
                    "value {v} at node {j} outside [0, 1]"
                )));
            }
        }
        Ok(Field { grid, time, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::from_values(grid, 0.0, vec![value; grid.n_nodes()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// T at x = 0.
    pub fn midpoint(&self) -> f64 {
        self.values[self.grid.mid()]
    }

    /// max_j T(x_j).
    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Discrete mass: cell-weighted sum with half-width cells at the two
    /// boundary nodes (so an indicator of half-width L has mass 2L exactly).
    pub fn mass(&self) -> f64 {
        let h = self.grid.spacing();
        let n = self.grid.n_cells();
        let mut sum = 0.5 * (self.values[0] + self.values[n]);
        for v in &self.values[1..n] {
            sum += v;
        }
        sum * h
    }

    /// Largest |x_j| whose value reaches `level`; 0 if no node does.
    pub fn radius_above(&self, level: f64) -> f64 {
        radius_above_values(self.grid, &self.values, level)
    }

    /// max_j |T(x_j) - T(-x_j)|: zero for a perfectly even profile.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.grid.n_cells();
        let mut worst = 0.0f64;
        for j in 0..=n / 2 {
            worst = worst.max((self.values[j] - self.values[n - j]).abs());
        }
        worst
    }

    /// Largest increase of T along increasing |x| (positive means the
    /// profile fails to be non-increasing away from the origin).
    pub fn radial_monotonicity_defect(&self) -> f64 {
        let n = self.grid.n_cells();
        let mid = self.grid.mid();
        let mut worst = f64::NEG_INFINITY;
        for j in mid..n {
            worst = worst.max(self.values[j + 1] - self.values[j]);
        }
        for j in 0..mid {
            worst = worst.max(self.values[j] - self.values[j + 1]);
        }
        worst
    }
}

/// [`Field::radius_above`] on a raw value slice (probe hot path).
pub(crate) fn radius_above_values(grid: Grid, values: &[f64], level: f64) -> f64 {
    let n = grid.n_cells();
    let mut left = None;
    let mut right = None;
    for j in 0..=n {
        if values[j] >= level {
            left = Some(j);
            break;
        }
    }
    for j in (0..=n).rev() {
        if values[j] >= level {
            right = Some(j);
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => grid.node(l).abs().max(grid.node(r).abs()),
        _ => 0.0,
    }
}

/// Indicator initial data: alpha on [-L, L], zero outside, with the cell
/// straddling each edge assigned alpha times its covered fraction. The
/// discrete mass is then exactly 2 L alpha, and each node value varies
/// continuously and monotonically in L — threshold bisection never stalls
/// on grid quantization.
pub fn indicator_ic(grid: Grid, half_support: f64, alpha: f64) -> Result<Field> {
    if !(half_support >= 0.0) || !half_support.is_finite() {
        return Err(Error::Domain(format!(
            "support half-width {half_support} must be >= 0"
        )));
    }
    if half_support > grid.half_width() {
        return Err(Error::Domain(format!(
            "support half-width {half_support} exceeds grid half-width {}",
            grid.half_width()
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} must lie in (0, 1]")));
    }
    let h = grid.spacing();
    let n = grid.n_cells();
    let l = half_support;
    let values = (0..=n)
        .map(|j| {
            let x = grid.node(j);
            // Interior nodes own [x - h/2, x + h/2]; the boundary nodes own
            // half-cells clipped at the domain edge.
            let cell_lo = if j == 0 { x } else { x - 0.5 * h };
            let cell_hi = if j == n { x } else { x + 0.5 * h };
            let covered = (l.min(cell_hi) - (-l).max(cell_lo)).max(0.0);
            alpha * covered / (cell_hi - cell_lo)
        })
        .collect();
    Field::from_values(grid, 0.0, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_exactly_mirrored() {
        let g = Grid::new(40.0, 1600).unwrap();
        for j in 0..=1600 {
            assert_eq!(g.node(j), -g.node(1600 - j), "node {j}");
        }
        assert_eq!(g.node(g.mid()), 0.0);
        assert!((g.spacing() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_odd_cell_counts() {
        assert!(Grid::new(40.0, 1601).is_err());
        assert!(Grid::new(40.0, 0).is_err());
        assert!(Grid::new(-1.0, 100).is_err());
    }

    #[test]
    fn indicator_interior_values_and_edges() {
        let g = Grid::new(40.0, 1600).unwrap();
        let f = indicator_ic(g, 1.0, 1.0).unwrap();
        for j in 0..=1600 {
            let x = g.node(j).abs();
            if x < 1.0 - 0.026 {
                assert_eq!(f.values()[j], 1.0, "inside node at {x}");
            } else if x > 1.0 + 0.026 {
                assert_eq!(f.values()[j], 0.0, "outside node at {x}");
            }
        }
        // The straddled cells at |x| = L carry the covered fraction.
        let edge = f.values()[g.mid() + 20];
        assert!((edge - 0.5).abs() < 1e-12, "edge value {edge}");
    }

    #[test]
    fn indicator_mass_is_exact() {
        let g = Grid::new(40.0, 1600).unwrap();
        for &l in &[0.013, 0.37, 1.0, 2.513, 12.0, 40.0] {
            let f = indicator_ic(g, l, 0.8).unwrap();
            assert!(
                (f.mass() - 2.0 * l * 0.8).abs() < 1e-10,
                "mass {} for L = {l}",
                f.mass()
            );
        }
    }

    #[test]
    fn indicator_full_support_is_all_ones() {
        let g = Grid::new(10.0, 200).unwrap();
        let f = indicator_ic(g, 10.0, 1.0).unwrap();
        for v in f.values() {
            assert!((v - 1.0).abs() <= 1e-12, "value {v}");
        }
    }

    #[test]
    fn indicator_zero_support_is_zero() {
        let g = Grid::new(10.0, 200).unwrap();
        let f = indicator_ic(g, 0.0, 1.0).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn indicator_is_monotone_and_continuous_in_l() {
        let g = Grid::new(10.0, 400).unwrap();
        let mut prev = indicator_ic(g, 0.0, 1.0).unwrap();
        let steps = 500;
        for k in 1..=steps {
            let l = 7.0 * k as f64 / steps as f64;
            let cur = indicator_ic(g, l, 1.0).unwrap();
            for (a, b) in prev.values().iter().zip(cur.values()) {
                assert!(b + 1e-14 >= *a, "node value decreased as L grew");
                // Continuity: a node's cell is at least h/2 wide (the
                // half-cells at the ends), so one step of dL = 0.014 moves
                // its covered fraction by at most dL / (h/2).
                assert!(b - a <= 2.0 * 0.014 / g.spacing() + 1e-12);
            }
            prev = cur;
        }
    }

    #[test]
    fn indicator_rejects_bad_arguments() {
        let g = Grid::new(10.0, 200).unwrap();
        assert!(indicator_ic(g, 11.0, 1.0).is_err());
        assert!(indicator_ic(g, -1.0, 1.0).is_err());
        assert!(indicator_ic(g, 1.0, 0.0).is_err());
        assert!(indicator_ic(g, 1.0, 1.5).is_err());
    }

    #[test]
    fn field_validation() {
        let g = Grid::new(1.0, 4).unwrap();
        assert!(Field::from_values(g, 0.0, vec![0.0; 4]).is_err());
        assert!(Field::from_values(g, 0.0, vec![0.0, 0.5, 2.0, 0.5, 0.0]).is_err());
        assert!(Field::from_values(g, 0.0, vec![0.0, f64::NAN, 0.0, 0.0, 0.0]).is_err());
        let f = Field::from_values(g, 0.0, vec![0.0, 0.5, 1.0, 0.5, 0.0]).unwrap();
        assert_eq!(f.midpoint(), 1.0);
        assert_eq!(f.sup(), 1.0);
        assert_eq!(f.radius_above(0.4), 0.5);
        assert_eq!(f.radius_above(2.0), 0.0);
        assert_eq!(f.symmetry_defect(), 0.0);
        // Strictly decreasing away from 0: the worst "increase" is negative.
        assert!(f.radial_monotonicity_defect() <= 0.0);
    }

    #[test]
    fn monotonicity_defect_flags_a_bump() {
        let g = Grid::new(1.0, 4).unwrap();
        let f = Field::from_values(g, 0.0, vec![0.0, 0.5, 0.2, 0.5, 0.0]).unwrap();
        assert!((f.radial_monotonicity_defect() - 0.3).abs() < 1e-15);
    }
}
