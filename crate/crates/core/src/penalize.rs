//! Penalization of mass escaping the wells
//!
//! The semiclassical solver works in rescaled coordinates y = x / eps,
//! where the equation reads -Delta u + V(eps y) u = (I_alpha * F(u)) f(u).
//! To keep minimizing sequences from sliding off to the flat background,
//! the functional gains a penalty that activates once the weighted mass
//! outside the wells exceeds one:
//!
//!   chi(y) = 0 inside a well ball, eps^(-mu) outside,
//!   Q(u) = ( int chi u^2 - 1 )_+^2.
//!
//! A concentrated state has exponentially small tails outside the
//! wells, so for it int chi u^2 << 1 and the penalty vanishes
//! identically, meaning the penalized solution solves the original
//! equation. A reported solution should always be checked for Q = 0.

use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::potential::MultiWell;
use crate::{CoreError, Result};

/// Penalty weight and bookkeeping on a rescaled grid.
pub struct Penalization {
    epsilon: f64,
    mu: f64,
    chi: ScalarField,
}

impl Penalization {
    /// Sample chi on the rescaled grid: node y belongs to a well if the
    /// physical point eps * y does.
    pub fn new(potential: &MultiWell, grid: GridSpec, epsilon: f64, mu: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "penalization exponent mu must be positive, got {mu}"
            )));
        }
        let weight = epsilon.powf(-mu);
        let chi = ScalarField::from_fn(grid, |y0, y1, y2| {
            if potential.inside_well([epsilon * y0, epsilon * y1, epsilon * y2]) {
                0.0
            } else {
                weight
            }
        });
        Ok(Self { epsilon, mu, chi })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn chi(&self) -> &ScalarField {
        &self.chi
    }

    /// int chi u^2.
    pub fn weighted_mass(&self, u: &ScalarField) -> Result<f64> {
        let uu = u.mul(u)?;
        self.chi.inner(&uu)
    }

    /// ( int chi u^2 - 1 )_+ , the active part of the penalty.
    pub fn excess(&self, u: &ScalarField) -> Result<f64> {
        Ok((self.weighted_mass(u)? - 1.0).max(0.0))
    }

    /// Penalty value Q(u).
    pub fn q(&self, u: &ScalarField) -> Result<f64> {
        let e = self.excess(u)?;
        Ok(e * e)
    }
}
