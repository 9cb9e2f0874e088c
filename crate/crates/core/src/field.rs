//! Real scalar fields sampled on a `GridSpec`.
//!
//! Quadrature is the plain rectangle rule h^3 * sum, which is spectrally
//! accurate for the smooth, decaying fields the solvers produce.

use crate::error::{CoreError, Result};
use crate::grid::GridSpec;

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: GridSpec,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    /// Sample an analytic profile at the grid nodes.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut data = Vec::with_capacity(grid.len());
        for ix in 0..n {
            let x = grid.coord(ix);
            for iy in 0..n {
                let y = grid.coord(iy);
                for iz in 0..n {
                    data.push(f(x, y, grid.coord(iz)));
                }
            }
        }
        ScalarField { grid, data }
    }

    pub fn from_vec(grid: GridSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(CoreError::InvalidParameter(format!(
                "field data length {} does not match grid ({} nodes)",
                data.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, data })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn map_inplace(&mut self, f: impl Fn(f64) -> f64) {
        for v in &mut self.data {
            *v = f(*v);
        }
    }

    /// Pointwise product, checked for grid agreement.
    pub fn mul(&self, other: &ScalarField) -> Result<ScalarField> {
        self.grid.same_grid(&other.grid)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b)
            .collect();
        Ok(ScalarField {
            grid: self.grid,
            data,
        })
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    /// self += a * x
    pub fn axpy(&mut self, a: f64, x: &ScalarField) -> Result<()> {
        self.grid.same_grid(&x.grid)?;
        for (v, &w) in self.data.iter_mut().zip(&x.data) {
            *v += a * w;
        }
        Ok(())
    }

    /// h^3 * sum of values: the rectangle-rule integral.
    pub fn integrate(&self) -> f64 {
        self.grid.cell_volume() * self.data.iter().sum::<f64>()
    }

    /// L2 pairing <u, v> = h^3 * sum u v.
    pub fn inner(&self, other: &ScalarField) -> Result<f64> {
        self.grid.same_grid(&other.grid)?;
        let s: f64 = self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).sum();
        Ok(self.grid.cell_volume() * s)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.cell_volume() * self.data.iter().map(|&v| v * v).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// L^p norm by quadrature: (h^3 sum |u|^p)^(1/p).
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.data.iter().map(|&v| v.abs().powf(p)).sum();
        (self.grid.cell_volume() * s).powf(1.0 / p)
    }

    pub fn linf_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Node indices of the largest value; first occurrence wins, which
    /// makes the choice lexicographically smallest on ties.
    pub fn argmax(&self) -> (usize, usize, usize) {
        let mut best = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for (i, &v) in self.data.iter().enumerate() {
            if v > best_v {
                best_v = v;
                best = i;
            }
        }
        let n = self.grid.n();
        (best / (n * n), (best / n) % n, best % n)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Cyclic shift by whole nodes (exact; no interpolation).
    pub fn roll(&self, sx: i64, sy: i64, sz: i64) -> ScalarField {
        let n = self.grid.n() as i64;
        let m = |a: i64| (a % n + n) % n;
        let mut out = ScalarField::zeros(self.grid);
        let nn = self.grid.n();
        for ix in 0..nn {
            let jx = m(ix as i64 - sx) as usize;
            for iy in 0..nn {
                let jy = m(iy as i64 - sy) as usize;
                let src_row = (jx * nn + jy) * nn;
                let dst_row = (ix * nn + iy) * nn;
                for iz in 0..nn {
                    let jz = m(iz as i64 - sz) as usize;
                    out.data[dst_row + iz] = self.data[src_row + jz];
                }
            }
        }
        out
    }
}
