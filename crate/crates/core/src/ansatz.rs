//! Multi-bump ansatz for the semiclassical problem
//!
//! In rescaled coordinates y = x / eps the approximate solution is a
//! sum of cutoff copies of per-well limit states,
//!
//!   guess(y) = sum_i phi(eps y - x_i) U_i(y - x_i / eps),
//!
//! where U_i solves the limit problem at coupling m_i (the depth of
//! well i), x_i is an anchor near the bottom of well i, and phi is a
//! radial C^2 cutoff equal to 1 on |x| <= beta and 0 on |x| >= 2 beta.
//! The margin delta is a tenth of the smallest well radius or
//! inter-well gap; any beta in (0, delta) keeps each bump supported
//! strictly inside its own well, so the escape penalty vanishes on the
//! ansatz and the bumps never overlap.

use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::limit::GroundState;
use crate::ops::sample;
use crate::potential::MultiWell;
use crate::{CoreError, Result};

/// Radial cutoff profile: 1 on [0, beta], 0 on [2 beta, inf), a
/// quintic ramp in between with matching value, slope, and curvature
/// at both ends.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    beta: f64,
}

impl Cutoff {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "cutoff radius beta must be positive, got {beta}"
            )));
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Profile value at radius r.
    pub fn eval(&self, r: f64) -> f64 {
        let s = (r.abs() - self.beta) / self.beta;
        if s <= 0.0 {
            1.0
        } else if s >= 1.0 {
            0.0
        } else {
            1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
        }
    }
}

/// One well's contribution to the ansatz: which well, where the bump
/// is anchored in physical coordinates, and the limit state it copies.
pub struct BumpSpec {
    pub well: usize,
    pub anchor: [f64; 3],
    pub state: GroundState,
}

/// Geometry and ingredients of the multi-bump approximate solution.
pub struct AnsatzSpec {
    potential: MultiWell,
    delta: f64,
    cutoff: Cutoff,
    bumps: Vec<BumpSpec>,
}

impl AnsatzSpec {
    /// Assembles the ansatz from per-well limit states. `states` pairs
    /// a well index with the ground state at that well's depth; the
    /// anchors default to the well centers. `beta` defaults to
    /// 0.9 delta and must stay below delta.
    pub fn new(
        potential: MultiWell,
        states: Vec<(usize, GroundState)>,
        beta: Option<f64>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(CoreError::InvalidParameter(
                "ansatz needs at least one well state".into(),
            ));
        }
        let delta = potential.separation_scale();
        let beta = beta.unwrap_or(0.9 * delta);
        if !(beta > 0.0 && beta < delta) {
            return Err(CoreError::InvalidParameter(format!(
                "cutoff radius must satisfy 0 < beta < delta = {delta:.6}, got {beta}"
            )));
        }
        let mut bumps = Vec::with_capacity(states.len());
        for (well, state) in states {
            let Some(w) = potential.wells().get(well) else {
                return Err(CoreError::InvalidParameter(format!(
                    "well index {well} out of range ({} wells)",
                    potential.wells().len()
                )));
            };
            if bumps.iter().any(|b: &BumpSpec| b.well == well) {
                return Err(CoreError::InvalidParameter(format!(
                    "well {well} listed twice"
                )));
            }
            if (state.a - w.depth).abs() > 1e-9 * w.depth {
                return Err(CoreError::InvalidParameter(format!(
                    "state coupling {} does not match well {well} depth {}",
                    state.a, w.depth
                )));
            }
            bumps.push(BumpSpec {
                well,
                anchor: w.center,
                state,
            });
        }
        Ok(Self {
            potential,
            delta,
            cutoff: Cutoff::new(beta)?,
            bumps,
        })
    }

    pub fn potential(&self) -> &MultiWell {
        &self.potential
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta(&self) -> f64 {
        self.cutoff.beta()
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    pub fn bumps(&self) -> &[BumpSpec] {
        &self.bumps
    }

    /// Moves one bump's anchor. The anchor must stay within beta of
    /// the bottom of its well so the support keeps clear of the well
    /// boundary.
    pub fn set_anchor(&mut self, bump: usize, anchor: [f64; 3]) -> Result<()> {
        let Some(b) = self.bumps.get_mut(bump) else {
            return Err(CoreError::InvalidParameter(format!(
                "bump index {bump} out of range"
            )));
        };
        let c = self.potential.wells()[b.well].center;
        let d2 = (0..3).map(|k| (anchor[k] - c[k]).powi(2)).sum::<f64>();
        let beta = self.cutoff.beta();
        if d2.sqrt() > beta {
            return Err(CoreError::InvalidParameter(format!(
                "anchor sits {:.4} from the well bottom, over the allowed {beta}",
                d2.sqrt()
            )));
        }
        b.anchor = anchor;
        Ok(())
    }

    /// Box half-length consumed by the rescaled supports at this eps:
    /// the farthest anchor coordinate plus the cutoff support radius,
    /// both divided by eps.
    pub fn required_half_length(&self, eps: f64) -> f64 {
        let reach = self
            .bumps
            .iter()
            .map(|b| b.anchor.iter().fold(0.0f64, |m, c| m.max(c.abs())))
            .fold(0.0f64, f64::max);
        (reach + 2.0 * self.cutoff.beta()) / eps
    }

    /// The dilated bump of well `bump` on the rescaled grid:
    /// phi(eps z) U_i(z / t) with z the offset from the rescaled
    /// anchor. t = 1 gives the plain initial-guess bump; varying t
    /// traces the dilation path the min-max level is estimated on.
    pub fn bump_field(
        &self,
        grid: GridSpec,
        eps: f64,
        bump: usize,
        t: f64,
    ) -> Result<ScalarField> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "dilation factor must be positive, got {t}"
            )));
        }
        let Some(b) = self.bumps.get(bump) else {
            return Err(CoreError::InvalidParameter(format!(
                "bump index {bump} out of range"
            )));
        };
        let half = grid.half_length();
        let h = grid.spacing();
        let needed = self.required_half_length(eps) + h;
        if needed > half {
            return Err(CoreError::BoxTooSmall { needed, have: half });
        }
        let radius = 2.0 * self.cutoff.beta() / eps;
        if radius < h {
            return Err(CoreError::InvalidParameter(format!(
                "cutoff support radius {radius:.4} is under one grid cell {h:.4}; \
                 refine the grid or raise beta"
            )));
        }

        let mut out = ScalarField::zeros(grid);
        let n = grid.n();
        let range = |q: f64| -> (usize, usize) {
            let lo = ((q - radius + half) / h).ceil().max(0.0) as usize;
            let hi = (((q + radius + half) / h).floor() as usize).min(n - 1);
            (lo, hi)
        };
        let q = [
            b.anchor[0] / eps,
            b.anchor[1] / eps,
            b.anchor[2] / eps,
        ];
        let (x0, x1) = range(q[0]);
        let (y0, y1) = range(q[1]);
        let (z0, z1) = range(q[2]);
        let data = out.data_mut();
        for ix in x0..=x1 {
            let zx = grid.coord(ix) - q[0];
            for iy in y0..=y1 {
                let zy = grid.coord(iy) - q[1];
                for iz in z0..=z1 {
                    let zz = grid.coord(iz) - q[2];
                    let r = (zx * zx + zy * zy + zz * zz).sqrt();
                    if r >= radius {
                        continue;
                    }
                    let phi = self.cutoff.eval(eps * r);
                    let v = sample(&b.state.field, [zx / t, zy / t, zz / t]);
                    data[grid.index(ix, iy, iz)] = phi * v;
                }
            }
        }
        Ok(out)
    }

    /// The full initial guess at this eps: the sum of all bumps at
    /// t = 1. Supports are pairwise disjoint by construction, so the
    /// sum is an exact superposition.
    pub fn initial_guess(&self, grid: GridSpec, eps: f64) -> Result<ScalarField> {
        let mut out = ScalarField::zeros(grid);
        for i in 0..self.bumps.len() {
            let bump = self.bump_field(grid, eps, i, 1.0)?;
            out.axpy(1.0, &bump)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyBreakdown;
    use crate::limit::SolveMethod;
    use crate::penalize::Penalization;
    use crate::potential::Well;
    use approx::assert_relative_eq;

    fn synthetic_state(grid: GridSpec, a: f64, amp: f64) -> GroundState {
        let rate = a.sqrt();
        let field = ScalarField::from_fn(grid, |x, y, z| {
            amp * (-rate * (x * x + y * y + z * z).sqrt()).exp()
        });
        GroundState {
            a,
            field,
            energy: EnergyBreakdown::assemble(0.0, 0.0, 0.0, 0.0),
            pohozaev_resid: 0.0,
            grad_resid: 0.0,
            method: SolveMethod::SourceIteration,
            iterations: 0,
        }
    }

    fn double_well() -> MultiWell {
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
    fn cutoff_has_plateau_ramp_and_compact_support() {
        let phi = Cutoff::new(0.3).unwrap();
        assert_eq!(phi.eval(0.0), 1.0);
        assert_eq!(phi.eval(0.3), 1.0);
        assert_eq!(phi.eval(0.6), 0.0);
        assert_eq!(phi.eval(5.0), 0.0);
        assert_relative_eq!(phi.eval(0.45), 0.5, epsilon = 1e-12);

        // C^2 joins: the ramp meets the plateaus with zero slope and
        // curvature, and the slope never exceeds 1.875 / beta.
        let h = 1e-5;
        for edge in [0.3, 0.6] {
            let d1 = (phi.eval(edge + h) - phi.eval(edge - h)) / (2.0 * h);
            let d2 = (phi.eval(edge + h) - 2.0 * phi.eval(edge) + phi.eval(edge - h)) / (h * h);
            assert!(d1.abs() < 1e-8, "slope {d1:.3e} at {edge}");
            assert!(d2.abs() < 1e-3, "curvature {d2:.3e} at {edge}");
        }
        let mut steepest = 0.0f64;
        let mut prev = phi.eval(0.3);
        for k in 1..=300 {
            let r = 0.3 + 0.001 * k as f64;
            let v = phi.eval(r);
            assert!(v <= prev + 1e-15, "not monotone at r = {r}");
            steepest = steepest.max((prev - v) / 0.001);
            prev = v;
        }
        assert!(steepest <= 1.876 / 0.3, "steepest slope {steepest:.4}");
    }

    #[test]
    fn wide_cutoff_reproduces_the_single_state() {
        let grid = GridSpec::new(32, 24.0).unwrap();
        let pot = MultiWell::new(
            2.0,
            vec![Well {
                center: [0.0, 0.0, 0.0],
                radius: 110.0,
                depth: 1.0,
            }],
        )
        .unwrap();
        let state = synthetic_state(grid, 1.0, 1.0);
        let reference = state.field.clone();
        let spec = AnsatzSpec::new(pot, vec![(0, state)], Some(10.0)).unwrap();
        assert_relative_eq!(spec.delta(), 11.0, epsilon = 1e-12);

        let guess = spec.initial_guess(grid, 1.0).unwrap();
        let mut diff = guess.clone();
        diff.axpy(-1.0, &reference).unwrap();
        let rel = diff.l2_norm() / reference.l2_norm();
        assert!(rel <= 1e-3, "relative deviation {rel:.3e}");
    }

    #[test]
    fn two_bumps_superpose_exactly_and_escape_nothing() {
        let state_grid = GridSpec::new(32, 12.0).unwrap();
        let pot = double_well();
        let states = vec![
            (0, synthetic_state(state_grid, 1.0, 4.0)),
            (1, synthetic_state(state_grid, 1.2, 4.0)),
        ];
        let spec = AnsatzSpec::new(pot.clone(), states, Some(0.27)).unwrap();
        assert_relative_eq!(spec.delta(), 0.3, epsilon = 1e-12);

        let grid = GridSpec::new(64, 23.0).unwrap();
        let eps = 0.5;
        let b0 = spec.bump_field(grid, eps, 0, 1.0).unwrap();
        let b1 = spec.bump_field(grid, eps, 1, 1.0).unwrap();
        let guess = spec.initial_guess(grid, eps).unwrap();

        let overlap = b0.mul(&b1).unwrap().integrate();
        assert_eq!(overlap, 0.0);
        assert_relative_eq!(
            guess.l2_norm_sq(),
            b0.l2_norm_sq() + b1.l2_norm_sq(),
            max_relative = 1e-12
        );

        let pen = Penalization::new(&pot, grid, eps, 2.0).unwrap();
        assert_eq!(pen.q(&guess).unwrap(), 0.0);
        assert_eq!(pen.weighted_mass(&guess).unwrap(), 0.0);
    }

    #[test]
    fn dilation_parameter_rescales_the_bump() {
        let state_grid = GridSpec::new(64, 12.0).unwrap();
        let pot = MultiWell::new(
            2.0,
            vec![Well {
                center: [0.0, 0.0, 0.0],
                radius: 30.0,
                depth: 1.0,
            }],
        )
        .unwrap();
        let spec = AnsatzSpec::new(
            pot,
            vec![(0, synthetic_state(state_grid, 1.0, 1.0))],
            Some(2.5),
        )
        .unwrap();
        let grid = GridSpec::new(64, 12.0).unwrap();

        // W_t(z) = phi(|z|) e^(-|z| / t): check against the closed form
        // at off-node radii. Tricubic sampling is the only error source.
        for t in [0.6, 1.0, 1.7] {
            let w = spec.bump_field(grid, 1.0, 0, t).unwrap();
            let ix = 40;
            let iy = 33;
            let iz = 32;
            let (x, y, z) = (grid.coord(ix), grid.coord(iy), grid.coord(iz));
            let r = (x * x + y * y + z * z).sqrt();
            let expect = spec.cutoff().eval(r) * (-r / t).exp();
            let got = w.data()[grid.index(ix, iy, iz)];
            assert_relative_eq!(got, expect, max_relative = 2e-2);
        }

        // The mass shrinks roughly like t^3 for t < 1.
        let w_half = spec.bump_field(grid, 1.0, 0, 0.5).unwrap();
        let w_unit = spec.bump_field(grid, 1.0, 0, 1.0).unwrap();
        let ratio = w_half.l2_norm_sq() / w_unit.l2_norm_sq();
        assert!(
            (ratio - 0.125).abs() < 0.03,
            "mass ratio {ratio:.4} far from the t^3 law"
        );
    }

    #[test]
    fn rejects_bad_geometry_and_mismatched_couplings() {
        let state_grid = GridSpec::new(32, 12.0).unwrap();
        let pot = double_well();
        let good = || {
            vec![
                (0, synthetic_state(state_grid, 1.0, 1.0)),
                (1, synthetic_state(state_grid, 1.2, 1.0)),
            ]
        };

        assert!(AnsatzSpec::new(pot.clone(), vec![], Some(0.2)).is_err());
        assert!(AnsatzSpec::new(pot.clone(), good(), Some(0.3)).is_err());
        assert!(AnsatzSpec::new(pot.clone(), good(), Some(-0.1)).is_err());
        let wrong = vec![(0, synthetic_state(state_grid, 1.1, 1.0))];
        assert!(AnsatzSpec::new(pot.clone(), wrong, Some(0.2)).is_err());
        let dup = vec![
            (0, synthetic_state(state_grid, 1.0, 1.0)),
            (0, synthetic_state(state_grid, 1.0, 1.0)),
        ];
        assert!(AnsatzSpec::new(pot.clone(), dup, Some(0.2)).is_err());
        let oob = vec![(7, synthetic_state(state_grid, 1.0, 1.0))];
        assert!(AnsatzSpec::new(pot.clone(), oob, Some(0.2)).is_err());

        let mut spec = AnsatzSpec::new(pot, good(), Some(0.27)).unwrap();
        assert!(spec.set_anchor(0, [-4.4, 0.1, 0.0]).is_ok());
        assert!(spec.set_anchor(0, [-4.0, 0.0, 0.0]).is_err());
        assert!(spec.set_anchor(5, [0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn small_boxes_are_rejected_with_the_needed_size() {
        let state_grid = GridSpec::new(32, 12.0).unwrap();
        let pot = double_well();
        let states = vec![
            (0, synthetic_state(state_grid, 1.0, 1.0)),
            (1, synthetic_state(state_grid, 1.2, 1.0)),
        ];
        let spec = AnsatzSpec::new(pot, states, Some(0.27)).unwrap();
        assert_relative_eq!(spec.required_half_length(0.25), (4.5 + 0.54) / 0.25);

        let grid = GridSpec::new(64, 16.0).unwrap();
        match spec.initial_guess(grid, 0.25) {
            Err(CoreError::BoxTooSmall { needed, have }) => {
                assert!(needed > 20.0 && have == 16.0);
            }
            Err(e) => panic!("expected BoxTooSmall, got {e}"),
            Ok(_) => panic!("expected BoxTooSmall, got a field"),
        }
    }
}
