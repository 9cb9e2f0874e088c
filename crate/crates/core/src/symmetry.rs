//! Octahedral symmetry and radial monotonicity checks
//!
//! Ground states recentered at their maximum should be radially
//! symmetric and radially decreasing. On the periodic grid every
//! octahedral isometry (axis permutation composed with coordinate sign
//! flips) maps nodes to nodes exactly, so symmetry defects are measured
//! without interpolation.

use crate::field::ScalarField;

/// Symmetry defect summary for a field centered at the middle node.
#[derive(Debug, Clone, Copy)]
pub struct SymmetryReport {
    /// max over the 48 octahedral isometries g and all nodes x of
    /// |u(gx) - u(x)| / max|u|.
    pub max_deviation: f64,
    /// Number of steps along the six axis rays from the center where
    /// the value increases with distance.
    pub monotonicity_violations: usize,
}

/// Measure octahedral symmetry deviation and radial monotonicity.
///
/// The field is compared against itself under all 48 exact node
/// permutations; call this after recentering the maximum at the middle
/// node, otherwise the deviation reflects the offset rather than the
/// shape.
pub fn symmetry_report(u: &ScalarField) -> SymmetryReport {
    let grid = u.grid();
    let n = grid.n();
    let linf = u.linf_norm();
    if linf == 0.0 {
        return SymmetryReport {
            max_deviation: 0.0,
            monotonicity_violations: 0,
        };
    }
    let neg = |j: usize| (n - j) % n;
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut max_dev = 0.0f64;
    for perm in perms {
        for flips in 0u8..8 {
            if perm == [0, 1, 2] && flips == 0 {
                continue;
            }
            for ix in 0..n {
                for iy in 0..n {
                    for iz in 0..n {
                        let idx = [ix, iy, iz];
                        let mut m = [idx[perm[0]], idx[perm[1]], idx[perm[2]]];
                        for (axis, mj) in m.iter_mut().enumerate() {
                            if flips & (1 << axis) != 0 {
                                *mj = neg(*mj);
                            }
                        }
                        let a = u.data()[grid.index(ix, iy, iz)];
                        let b = u.data()[grid.index(m[0], m[1], m[2])];
                        let d = (a - b).abs();
                        if d > max_dev {
                            max_dev = d;
                        }
                    }
                }
            }
        }
    }
    let c = n / 2;
    let tol = 1e-12 * linf;
    let mut violations = 0;
    let value = |i: usize, j: usize, k: usize| u.data()[grid.index(i, j, k)];
    for step in 1..n / 2 {
        let pairs = [
            (value(c + step - 1, c, c), value(c + step, c, c)),
            (value(c - step + 1, c, c), value(c - step, c, c)),
            (value(c, c + step - 1, c), value(c, c + step, c)),
            (value(c, c - step + 1, c), value(c, c - step, c)),
            (value(c, c, c + step - 1), value(c, c, c + step)),
            (value(c, c, c - step + 1), value(c, c, c - step)),
        ];
        for (near, far) in pairs {
            if far > near + tol {
                violations += 1;
            }
        }
    }
    SymmetryReport {
        max_deviation: max_dev / linf,
        monotonicity_violations: violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn radial_field_has_negligible_deviation() {
        let grid = GridSpec::new(32, 10.0).unwrap();
        let u = ScalarField::from_fn(grid, |x, y, z| {
            (-(x * x + y * y + z * z) / 3.0).exp()
        });
        let rep = symmetry_report(&u);
        assert!(rep.max_deviation <= 1e-6, "deviation {}", rep.max_deviation);
        assert_eq!(rep.monotonicity_violations, 0);
    }

    #[test]
    fn off_center_bump_is_detected() {
        let grid = GridSpec::new(32, 10.0).unwrap();
        let u = ScalarField::from_fn(grid, |x, y, z| {
            let r2 = x * x + y * y + z * z;
            let s2 = (x - 4.0).powi(2) + y * y + z * z;
            (-r2 / 3.0).exp() + 0.5 * (-s2 / 1.5).exp()
        });
        let rep = symmetry_report(&u);
        assert!(rep.max_deviation > 0.1, "deviation {}", rep.max_deviation);
        assert!(rep.monotonicity_violations > 0);
    }

    #[test]
    fn anisotropic_but_even_field_shows_permutation_defect() {
        let grid = GridSpec::new(32, 10.0).unwrap();
        let u = ScalarField::from_fn(grid, |x, y, z| {
            (-(x * x / 4.0 + y * y + z * z)).exp()
        });
        let rep = symmetry_report(&u);
        // Even in each coordinate, so sign flips are exact, but the
        // x <-> y permutation is not.
        assert!(rep.max_deviation > 0.1);
        assert_eq!(rep.monotonicity_violations, 0);
    }

    #[test]
    fn ring_profile_counts_monotonicity_violations() {
        let grid = GridSpec::new(32, 10.0).unwrap();
        let u = ScalarField::from_fn(grid, |x, y, z| {
            let r = (x * x + y * y + z * z).sqrt();
            (-(r - 3.0).powi(2)).exp()
        });
        let rep = symmetry_report(&u);
        assert!(rep.max_deviation <= 1e-6);
        assert!(rep.monotonicity_violations >= 6);
    }

    #[test]
    fn zero_field_reports_cleanly() {
        let grid = GridSpec::new(16, 8.0).unwrap();
        let rep = symmetry_report(&ScalarField::zeros(grid));
        assert_eq!(rep.max_deviation, 0.0);
        assert_eq!(rep.monotonicity_violations, 0);
    }

    #[test]
    fn computed_ground_state_is_nearly_radial() {
        let state = &*crate::limit::tests::REFERENCE;
        let rep = symmetry_report(&state.field);
        assert!(rep.max_deviation <= 1e-2, "deviation {}", rep.max_deviation);
        assert_eq!(rep.monotonicity_violations, 0);
    }
}
