//! Multi-well external potentials
//!
//! The semiclassical problem uses a bounded potential with a flat
//! background and finitely many strictly disjoint spherical wells. Each
//! well carves a C^2 polynomial bump out of the background:
//!
//!   V(x) = b - sum_i (b - m_i) (1 - |x - c_i|^2 / r_i^2)_+^3,
//!
//! so V = b outside every well, V(c_i) = m_i at the centers, and the
//! global minimum of V is the smallest well depth. Concentration
//! analysis revolves around which wells attain that minimum.

use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::{CoreError, Result};

/// One spherical well: the potential dips from the background to
/// `depth` at `center`, returning to the background at distance
/// `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Well {
    pub center: [f64; 3],
    pub radius: f64,
    pub depth: f64,
}

/// Background level plus strictly disjoint wells.
#[derive(Debug, Clone)]
pub struct MultiWell {
    background: f64,
    wells: Vec<Well>,
}

impl MultiWell {
    pub fn new(background: f64, wells: Vec<Well>) -> Result<Self> {
        if !(background > 0.0) || !background.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "background level must be positive, got {background}"
            )));
        }
        if wells.is_empty() {
            return Err(CoreError::InvalidParameter(
                "at least one well is required".into(),
            ));
        }
        for (i, w) in wells.iter().enumerate() {
            if !(w.radius > 0.0) || !w.radius.is_finite() {
                return Err(CoreError::InvalidParameter(format!(
                    "well {i}: radius must be positive, got {}",
                    w.radius
                )));
            }
            if !w.depth.is_finite() || !(w.depth > 0.0) || w.depth >= background {
                return Err(CoreError::InvalidParameter(format!(
                    "well {i}: depth must satisfy 0 < depth < background, got {}",
                    w.depth
                )));
            }
            if !w.center.iter().all(|c| c.is_finite()) {
                return Err(CoreError::InvalidParameter(format!(
                    "well {i}: center must be finite"
                )));
            }
        }
        for i in 0..wells.len() {
            for j in (i + 1)..wells.len() {
                let d = dist(wells[i].center, wells[j].center);
                if d <= wells[i].radius + wells[j].radius {
                    return Err(CoreError::InvalidParameter(format!(
                        "wells {i} and {j} overlap: centers {d:.4} apart, radii sum {:.4}",
                        wells[i].radius + wells[j].radius
                    )));
                }
            }
        }
        Ok(Self { background, wells })
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn wells(&self) -> &[Well] {
        &self.wells
    }

    /// Pointwise potential value.
    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let mut v = self.background;
        for w in &self.wells {
            let dx = x - w.center[0];
            let dy = y - w.center[1];
            let dz = z - w.center[2];
            let rho2 = (dx * dx + dy * dy + dz * dz) / (w.radius * w.radius);
            if rho2 < 1.0 {
                let t = 1.0 - rho2;
                v -= (self.background - w.depth) * t * t * t;
            }
        }
        v
    }

    /// Sample the potential on a grid.
    pub fn sample(&self, grid: GridSpec) -> ScalarField {
        ScalarField::from_fn(grid, |x, y, z| self.eval(x, y, z))
    }

    /// Global minimum of the potential (smallest well depth).
    pub fn min_value(&self) -> f64 {
        self.wells
            .iter()
            .map(|w| w.depth)
            .fold(f64::INFINITY, f64::min)
    }

    /// Indices of the wells whose depth matches the global minimum to
    /// within a relative tolerance.
    pub fn deepest_wells(&self, rel_tol: f64) -> Vec<usize> {
        let m = self.min_value();
        self.wells
            .iter()
            .enumerate()
            .filter(|(_, w)| w.depth <= m * (1.0 + rel_tol))
            .map(|(i, _)| i)
            .collect()
    }

    /// Index of the well whose center is closest to `p`, with the
    /// distance to that center.
    pub fn nearest_well(&self, p: [f64; 3]) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (i, w) in self.wells.iter().enumerate() {
            let d = dist(p, w.center);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// True if `p` lies strictly inside some well ball.
    pub fn inside_well(&self, p: [f64; 3]) -> bool {
        self.wells
            .iter()
            .any(|w| dist(p, w.center) < w.radius)
    }

    /// Length scale separating the wells from each other and from the
    /// background: a tenth of the smallest well radius or inter-well
    /// gap, whichever is smaller. Cutoffs and penalization margins are
    /// sized against this.
    pub fn separation_scale(&self) -> f64 {
        let mut s = self
            .wells
            .iter()
            .map(|w| w.radius)
            .fold(f64::INFINITY, f64::min);
        for i in 0..self.wells.len() {
            for j in (i + 1)..self.wells.len() {
                let gap = dist(self.wells[i].center, self.wells[j].center)
                    - self.wells[i].radius
                    - self.wells[j].radius;
                s = s.min(gap);
            }
        }
        s / 10.0
    }

    /// Check that every well, plus a separation margin, fits inside the
    /// box [-L, L)^3.
    pub fn check_fits(&self, grid: GridSpec) -> Result<()> {
        let margin = self.separation_scale();
        let needed = self
            .wells
            .iter()
            .map(|w| {
                w.center
                    .iter()
                    .map(|c| c.abs())
                    .fold(0.0f64, f64::max)
                    + w.radius
                    + margin
            })
            .fold(0.0f64, f64::max);
        if needed >= grid.half_length() {
            return Err(CoreError::BoxTooSmall {
                needed,
                have: grid.half_length(),
            });
        }
        Ok(())
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_wells() -> MultiWell {
        MultiWell::new(
            2.0,
            vec![
                Well {
                    center: [-4.5, 0.0, 0.0],
                    radius: 3.0,
                    depth: 1.0,
                },
                Well {
                    center: [4.5, 0.0, 0.0],
                    radius: 3.0,
                    depth: 1.2,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn values_at_centers_edges_and_background() {
        let v = two_wells();
        assert_relative_eq!(v.eval(-4.5, 0.0, 0.0), 1.0, epsilon = 1e-14);
        assert_relative_eq!(v.eval(4.5, 0.0, 0.0), 1.2, epsilon = 1e-14);
        assert_relative_eq!(v.eval(-1.5, 0.0, 0.0), 2.0, epsilon = 1e-14);
        assert_relative_eq!(v.eval(0.0, 9.0, -3.0), 2.0, epsilon = 1e-14);
        assert_eq!(v.min_value(), 1.0);
        assert_eq!(v.deepest_wells(1e-9), vec![0]);
    }

    #[test]
    fn smooth_join_at_the_well_boundary() {
        let v = two_wells();
        // Value, slope, and curvature all vanish at the well edge from
        // the inside, matching the flat background outside.
        let h = 1e-4;
        let at = |x: f64| v.eval(x, 0.0, 0.0);
        let edge = -1.5f64;
        let d1 = (at(edge + h) - at(edge - h)) / (2.0 * h);
        let d2 = (at(edge + h) - 2.0 * at(edge) + at(edge - h)) / (h * h);
        assert!(d1.abs() < 1e-7, "first derivative {d1:.3e}");
        assert!(d2.abs() < 1e-3, "second derivative {d2:.3e}");
    }

    #[test]
    fn rejects_bad_configurations() {
        let w = |c: f64, r: f64, d: f64| Well {
            center: [c, 0.0, 0.0],
            radius: r,
            depth: d,
        };
        assert!(MultiWell::new(-1.0, vec![w(0.0, 1.0, 0.5)]).is_err());
        assert!(MultiWell::new(2.0, vec![]).is_err());
        assert!(MultiWell::new(2.0, vec![w(0.0, -1.0, 0.5)]).is_err());
        assert!(MultiWell::new(2.0, vec![w(0.0, 1.0, 2.0)]).is_err()); // depth = background
        assert!(MultiWell::new(2.0, vec![w(0.0, 1.0, 0.0)]).is_err());
        // Touching wells are rejected; strictly separated pass.
        assert!(MultiWell::new(2.0, vec![w(-1.0, 1.0, 0.5), w(1.0, 1.0, 0.5)]).is_err());
        assert!(MultiWell::new(2.0, vec![w(-1.1, 1.0, 0.5), w(1.1, 1.0, 0.5)]).is_ok());
    }

    #[test]
    fn separation_scale_and_box_fit() {
        let v = two_wells();
        // Gap = 9 - 6 = 3, min radius 3, so the scale is 0.3.
        assert_relative_eq!(v.separation_scale(), 0.3, epsilon = 1e-14);
        let grid = GridSpec::new(16, 10.0).unwrap();
        v.check_fits(grid).unwrap();
        let tight = GridSpec::new(16, 7.0).unwrap();
        assert!(matches!(
            v.check_fits(tight),
            Err(CoreError::BoxTooSmall { .. })
        ));
    }

    #[test]
    fn nearest_well_and_membership() {
        let v = two_wells();
        let (i, d) = v.nearest_well([4.0, 0.5, 0.0]);
        assert_eq!(i, 1);
        assert!(d < 1.0);
        assert!(v.inside_well([4.0, 0.5, 0.0]));
        assert!(!v.inside_well([0.0, 0.0, 0.0]));
    }

    proptest! {
        #[test]
        fn potential_stays_between_min_depth_and_background(
            x in -12.0f64..12.0,
            y in -12.0f64..12.0,
            z in -12.0f64..12.0,
        ) {
            let v = two_wells();
            let val = v.eval(x, y, z);
            prop_assert!(val >= v.min_value() - 1e-12);
            prop_assert!(val <= v.background() + 1e-12);
        }
    }
}
