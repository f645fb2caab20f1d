//! Uniform 1-D cell grid and cell-averaged grid functions.

use crate::diagnostics;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::Parameter(format!(
                "grid requires finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_cells < 2 {
            return Err(Error::Parameter(format!("grid needs at least 2 cells, got {n_cells}")));
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            dx: (x_max - x_min) / n_cells as f64,
        })
    }

    /// Grid over `[x_min, x_max]` whose spacing is as close to `dx` as an
    /// integer cell count allows.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Parameter(format!("dx must be > 0, got {dx}")));
        }
        let n = ((x_max - x_min) / dx).round().max(2.0) as usize;
        Self::new(x_min, x_max, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.center(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Index of the cell containing `x`; the right domain edge belongs to the
    /// last cell.
    pub fn cell_containing(&self, x: f64) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let i = ((x - self.x_min) / self.dx).floor() as usize;
        Some(i.min(self.n_cells - 1))
    }

    /// `(cell, overlap length)` for every cell intersecting `[a, b]`.
    pub fn window_weights(&self, a: f64, b: f64) -> Result<Vec<(usize, f64)>> {
        if !(a <= b && self.contains(a) && self.contains(b)) {
            return Err(Error::WindowOutsideDomain {
                a,
                b,
                x_min: self.x_min,
                x_max: self.x_max,
            });
        }
        let first = self.cell_containing(a).unwrap_or(0);
        let last = self.cell_containing(b).unwrap_or(self.n_cells - 1);
        Ok((first..=last)
            .filter_map(|i| {
                let lo = self.x_min + i as f64 * self.dx;
                let hi = lo + self.dx;
                let overlap = hi.min(b) - lo.max(a);
                (overlap > 0.0).then_some((i, overlap))
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite value in cell {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Point samples of `f` at the cell centers.
    pub fn from_fn(grid: Grid, f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = grid.centers().map(f).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.n_cells()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        diagnostics::mass(self)
    }

    pub fn total_variation(&self) -> f64 {
        diagnostics::tv(self)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Value of the cell containing `x`.
    pub fn probe(&self, x: f64) -> Option<f64> {
        self.grid.cell_containing(x).map(|i| self.values[i])
    }
}
