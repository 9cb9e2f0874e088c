//! Uniform periodic grid on the cube [-L, L)^3.
//!
//! Nodes are x_j = -L + j h with h = 2L/n, stored row-major with the z
//! index fastest. All spectral operations assume this layout.

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    half_length: f64,
}

impl GridSpec {
    /// n must be a power of two (n >= 8) so the padded transforms stay
    /// radix-2 friendly; half_length is the L in [-L, L)^3.
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(CoreError::GridSizeNotPowerOfTwo(n));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(CoreError::NonPositiveHalfLength(half_length));
        }
        Ok(GridSpec { n, half_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// Node spacing h = 2L/n.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    /// Volume element h^3 used by all quadrature sums.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node index j along one axis.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_length + self.spacing() * j as f64
    }

    /// Integer frequency for FFT bin j, wrapped to [-n/2, n/2).
    pub fn wrapped_index(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Physical frequency of bin j on the unpadded grid: k/(2L).
    pub fn freq(&self, j: usize) -> f64 {
        self.wrapped_index(j) as f64 / (2.0 * self.half_length)
    }

    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    /// Node index of the box centre x = 0 (per axis).
    pub fn center(&self) -> usize {
        self.n / 2
    }

    pub fn same_grid(&self, other: &GridSpec) -> Result<()> {
        if self.n != other.n || self.half_length != other.half_length {
            return Err(CoreError::GridMismatch(self.n, other.n));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridSpec::new(24, 8.0).is_err());
        assert!(GridSpec::new(4, 8.0).is_err());
        assert!(GridSpec::new(16, 0.0).is_err());
        assert!(GridSpec::new(16, -1.0).is_err());
        assert!(GridSpec::new(16, 8.0).is_ok());
    }

    #[test]
    fn node_layout() {
        let g = GridSpec::new(16, 8.0).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.coord(0), -8.0);
        assert_eq!(g.coord(8), 0.0);
        assert_eq!(g.coord(15), 7.0);
        assert_eq!(g.center(), 8);
        assert_eq!(g.index(1, 2, 3), (16 + 2) * 16 + 3);
    }

    #[test]
    fn wrapped_frequencies() {
        let g = GridSpec::new(8, 2.0).unwrap();
        let w: Vec<i64> = (0..8).map(|j| g.wrapped_index(j)).collect();
        assert_eq!(w, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(g.freq(1), 0.25);
    }
}
