//! Nonlinear couplings F, f = F', and f'
//!
//! The nonlocal term in both problems is (I_alpha * F(u)) f(u), so a
//! coupling must provide the primitive F, its derivative f, and f' for
//! Jacobian-vector products. All couplings here follow the
//! positive-part convention: they vanish for s <= 0, which matches the
//! sign structure of ground states and keeps negative overshoots during
//! iteration from feeding back into the nonlocal term.

use crate::{CoreError, Result};

pub trait Nonlinearity {
    /// Coupling density f(s) = F'(s).
    fn f(&self, s: f64) -> f64;
    /// Primitive F(s) with F(0) = 0.
    fn big_f(&self, s: f64) -> f64;
    /// Derivative f'(s), used in Jacobian-vector products.
    fn f_prime(&self, s: f64) -> f64;
    fn name(&self) -> &'static str;
}

/// Pure power coupling F(s) = s_+^p / p.
#[derive(Debug, Clone, Copy)]
pub struct Power {
    p: f64,
}

impl Power {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "power exponent must exceed 1, got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }
}

impl Nonlinearity for Power {
    fn f(&self, s: f64) -> f64 {
        if s > 0.0 {
            s.powf(self.p - 1.0)
        } else {
            0.0
        }
    }

    fn big_f(&self, s: f64) -> f64 {
        if s > 0.0 {
            s.powf(self.p) / self.p
        } else {
            0.0
        }
    }

    fn f_prime(&self, s: f64) -> f64 {
        if s > 0.0 {
            (self.p - 1.0) * s.powf(self.p - 2.0)
        } else {
            0.0
        }
    }

    fn name(&self) -> &'static str {
        "power"
    }
}

/// Saturating demonstration coupling f(s) = s_+^3 / (1 + s_+^2).
///
/// Grows cubically near zero but only linearly at infinity, so it
/// exercises the solver away from the pure-power structure while still
/// passing the growth checks below for any alpha in (0, 3).
#[derive(Debug, Clone, Copy, Default)]
pub struct Saturating;

impl Nonlinearity for Saturating {
    fn f(&self, s: f64) -> f64 {
        if s > 0.0 {
            s * s * s / (1.0 + s * s)
        } else {
            0.0
        }
    }

    fn big_f(&self, s: f64) -> f64 {
        if s > 0.0 {
            0.5 * (s * s - (1.0 + s * s).ln())
        } else {
            0.0
        }
    }

    fn f_prime(&self, s: f64) -> f64 {
        if s > 0.0 {
            let q = 1.0 + s * s;
            (3.0 * s * s + s.powi(4)) / (q * q)
        } else {
            0.0
        }
    }

    fn name(&self) -> &'static str {
        "saturating"
    }
}

/// Numerically verify the growth structure a coupling needs for the
/// variational machinery to apply with Riesz order `alpha` in three
/// dimensions:
///
/// 1. F(s) / s^((3+alpha)/3) -> 0 as s -> 0+, so the nonlocal term is
///    subcritical near zero;
/// 2. F(s) / s^(3+alpha) -> 0 as s -> infinity, subcritical at
///    infinity;
/// 3. F(s0) != 0 for some s0 > 0, so the coupling is nontrivial.
///
/// Probes each limit on a geometric ladder and requires clear decay,
/// not just boundedness, so borderline-critical couplings fail.
pub fn verify_growth(nl: &dyn Nonlinearity, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 3.0) {
        return Err(CoreError::InvalidParameter(format!(
            "alpha must lie in (0, 3), got {alpha}"
        )));
    }
    let lower_exp = (3.0 + alpha) / 3.0;
    let lower: Vec<f64> = [1e-2, 1e-4, 1e-6]
        .iter()
        .map(|&s: &f64| nl.big_f(s) / s.powf(lower_exp))
        .collect();
    if !lower.iter().all(|r| r.is_finite()) || lower[2] > 0.5 * lower[0] + 1e-300 {
        return Err(CoreError::InvalidParameter(format!(
            "coupling '{}' is not subcritical at zero for alpha = {alpha}: \
             F(s)/s^{lower_exp:.4} ratios {lower:?}",
            nl.name()
        )));
    }
    let upper_exp = 3.0 + alpha;
    let upper: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&s: &f64| nl.big_f(s) / s.powf(upper_exp))
        .collect();
    if !upper.iter().all(|r| r.is_finite()) || upper[2] > 0.5 * upper[0] + 1e-300 {
        return Err(CoreError::InvalidParameter(format!(
            "coupling '{}' is not subcritical at infinity for alpha = {alpha}: \
             F(s)/s^{upper_exp:.4} ratios {upper:?}",
            nl.name()
        )));
    }
    let mut s = 1e-3;
    while s <= 100.0 {
        if nl.big_f(s) != 0.0 {
            return Ok(());
        }
        s *= 10.0;
    }
    Err(CoreError::InvalidParameter(format!(
        "coupling '{}' vanishes on (0, 100]",
        nl.name()
    )))
}

/// A value s0 > 0 with F(s0) > 0, used to size solver seeds so they
/// start inside the cone where the nonlocal term is positive. Prefers
/// order-one values.
pub fn positive_witness(nl: &dyn Nonlinearity) -> Result<f64> {
    for &s in &[1.0, 2.0, 5.0, 10.0, 0.5, 0.1, 30.0, 100.0, 1e-2, 1e-3] {
        if nl.big_f(s) > 0.0 {
            return Ok(s);
        }
    }
    Err(CoreError::InvalidParameter(format!(
        "coupling '{}' has no positive value on (0, 100]; cannot seed a solver",
        nl.name()
    )))
}
