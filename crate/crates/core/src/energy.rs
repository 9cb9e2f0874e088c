//! Energy functionals, gradients, and virial-type integrals
//!
//! Both problems share the shape
//!
//!   J(u) = 1/2 int |grad u|^2 + 1/2 int W u^2
//!          - 1/2 int (I_alpha * F(u)) F(u) + Q(u),
//!
//! with W a constant `a` for the limiting autonomous problem and the
//! rescaled external potential for the penalized one (Q = 0 in the
//! limit case). The evaluation routines here compute the breakdown, the
//! L^2 gradient
//!
//!   J'(u) = -Delta u + W u + 4 (int chi u^2 - 1)_+ chi u
//!           - (I_alpha * F(u)) f(u),
//!
//! and hand back the convolution I_alpha * F(u) so solvers can reuse it
//! without paying for a second padded transform.

use crate::field::ScalarField;
use crate::nonlinearity::Nonlinearity;
use crate::ops::{h1_seminorm_sq, laplacian};
use crate::penalize::Penalization;
use crate::riesz::RieszOperator;
use crate::{CoreError, Result};

/// Quadratic and nonlocal integrals making up the energy. `kinetic`,
/// `mass`, and `nonlocal` are the raw integrals (no factors of 1/2):
/// int |grad u|^2, int W u^2, and int (I_alpha * F(u)) F(u).
#[derive(Debug, Clone, Copy)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub mass: f64,
    pub nonlocal: f64,
    pub penalty: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    /// Combine the pieces; the total is
    /// (kinetic + mass - nonlocal) / 2 + penalty.
    pub fn assemble(kinetic: f64, mass: f64, nonlocal: f64, penalty: f64) -> Self {
        Self {
            kinetic,
            mass,
            nonlocal,
            penalty,
            total: 0.5 * (kinetic + mass - nonlocal) + penalty,
        }
    }
}

/// Result of one functional evaluation: energy pieces, the L^2
/// gradient, and the reusable convolution I_alpha * F(u).
pub struct Evaluation {
    pub energy: EnergyBreakdown,
    pub gradient: ScalarField,
    pub conv_big_f: ScalarField,
}

/// Evaluate the limiting autonomous functional with frequency `a`.
pub fn eval_limit(
    op: &mut RieszOperator,
    nl: &dyn Nonlinearity,
    a: f64,
    u: &ScalarField,
) -> Result<Evaluation> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "frequency a must be positive, got {a}"
        )));
    }
    u.grid().same_grid(&op.grid())?;
    let big_f = u.map(|s| nl.big_f(s));
    let conv = op.convolve(&big_f)?;
    let kinetic = h1_seminorm_sq(u);
    let mass = a * u.l2_norm_sq();
    let nonlocal = conv.inner(&big_f)?;

    let mut gradient = laplacian(u);
    gradient.scale(-1.0);
    let f_u = u.map(|s| nl.f(s));
    let nl_term = conv.mul(&f_u)?;
    for ((g, &uu), &t) in gradient
        .data_mut()
        .iter_mut()
        .zip(u.data())
        .zip(nl_term.data())
    {
        *g += a * uu - t;
    }
    if !gradient.all_finite() {
        return Err(CoreError::NonFinite("limit gradient"));
    }
    Ok(Evaluation {
        energy: EnergyBreakdown::assemble(kinetic, mass, nonlocal, 0.0),
        gradient,
        conv_big_f: conv,
    })
}

/// Evaluate the penalized semiclassical functional. `v_eps` is the
/// rescaled potential V(eps y) sampled on the same grid as `u`.
pub fn eval_penalized(
    op: &mut RieszOperator,
    nl: &dyn Nonlinearity,
    v_eps: &ScalarField,
    pen: &Penalization,
    u: &ScalarField,
) -> Result<Evaluation> {
    u.grid().same_grid(&op.grid())?;
    u.grid().same_grid(&v_eps.grid())?;
    u.grid().same_grid(&pen.chi().grid())?;
    let big_f = u.map(|s| nl.big_f(s));
    let conv = op.convolve(&big_f)?;
    let kinetic = h1_seminorm_sq(u);
    let uu = u.mul(u)?;
    let mass = v_eps.inner(&uu)?;
    let nonlocal = conv.inner(&big_f)?;
    let excess = (pen.chi().inner(&uu)? - 1.0).max(0.0);
    let penalty = excess * excess;

    let mut gradient = laplacian(u);
    gradient.scale(-1.0);
    let f_u = u.map(|s| nl.f(s));
    let nl_term = conv.mul(&f_u)?;
    let chi = pen.chi().data();
    for (i, g) in gradient.data_mut().iter_mut().enumerate() {
        let uu = u.data()[i];
        *g += (v_eps.data()[i] + 4.0 * excess * chi[i]) * uu - nl_term.data()[i];
    }
    if !gradient.all_finite() {
        return Err(CoreError::NonFinite("penalized gradient"));
    }
    Ok(Evaluation {
        energy: EnergyBreakdown::assemble(kinetic, mass, nonlocal, penalty),
        gradient,
        conv_big_f: conv,
    })
}

/// The three scale-covariant integrals behind the virial identity:
/// A = int |grad u|^2, B = int u^2, C = int (I_alpha * F(u)) F(u).
/// Under dilation u_t(x) = u(x/t) they scale as t A, t^3 B, t^(3+alpha) C.
pub fn virial_terms(
    op: &mut RieszOperator,
    nl: &dyn Nonlinearity,
    u: &ScalarField,
) -> Result<(f64, f64, f64)> {
    u.grid().same_grid(&op.grid())?;
    let big_f = u.map(|s| nl.big_f(s));
    let conv = op.convolve(&big_f)?;
    Ok((h1_seminorm_sq(u), u.l2_norm_sq(), conv.inner(&big_f)?))
}

/// Virial (Pohozaev-type) value for the limit problem in three
/// dimensions: P = A/2 + (3a/2) B - ((3+alpha)/2) C. Every finite-energy
/// solution of the limit equation satisfies P = 0.
pub fn virial_value(a: f64, alpha: f64, terms: (f64, f64, f64)) -> f64 {
    let (kin, l2, nonlocal) = terms;
    0.5 * kin + 1.5 * a * l2 - 0.5 * (3.0 + alpha) * nonlocal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::nonlinearity::Power;
    use crate::potential::{MultiWell, Well};
    use crate::riesz::ZeroModeRule;
    use approx::assert_relative_eq;

    fn bump(grid: GridSpec, scale: f64, center: [f64; 3]) -> ScalarField {
        ScalarField::from_fn(grid, |x, y, z| {
            let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2) + (z - center[2]).powi(2);
            scale * (-0.5 * r2).exp()
        })
    }

    #[test]
    fn limit_gradient_is_the_functional_derivative() {
        // Directional-derivative check: (J(u + t v) - J(u - t v)) / 2t
        // must match <J'(u), v> through the quadratic and nonlocal
        // parts alike.
        let grid = GridSpec::new(32, 10.0).unwrap();
        let nl = Power::new(3.0).unwrap();
        let mut op = RieszOperator::new(grid, 2.0, ZeroModeRule::LatticeCorrected).unwrap();
        let u = bump(grid, 1.3, [0.0; 3]);
        let v = bump(grid, 0.7, [1.0, -0.5, 0.3]);
        let eval = eval_limit(&mut op, &nl, 1.0, &u).unwrap();
        let lhs = eval.gradient.inner(&v).unwrap();
        let t = 1e-5;
        let mut up = u.clone();
        up.axpy(t, &v).unwrap();
        let mut dn = u.clone();
        dn.axpy(-t, &v).unwrap();
        let ep = eval_limit(&mut op, &nl, 1.0, &up).unwrap().energy.total;
        let en = eval_limit(&mut op, &nl, 1.0, &dn).unwrap().energy.total;
        assert_relative_eq!((ep - en) / (2.0 * t), lhs, max_relative = 1e-7);
    }

    #[test]
    fn penalized_gradient_is_the_functional_derivative() {
        let grid = GridSpec::new(32, 10.0).unwrap();
        let nl = Power::new(3.0).unwrap();
        let mut op = RieszOperator::new(grid, 2.0, ZeroModeRule::LatticeCorrected).unwrap();
        let pot = MultiWell::new(
            2.0,
            vec![Well {
                center: [0.5, 0.0, 0.0],
                radius: 1.0,
                depth: 1.0,
            }],
        )
        .unwrap();
        let eps = 0.5;
        let v_eps = ScalarField::from_fn(grid, |x, y, z| pot.eval(eps * x, eps * y, eps * z));
        let pen = Penalization::new(&pot, grid, eps, 2.0).unwrap();
        // Big enough to activate the penalty so its gradient term is
        // exercised too.
        let u = bump(grid, 2.0, [4.0, 0.0, 0.0]);
        let dir = bump(grid, 0.5, [2.0, 1.0, 0.0]);
        let eval = eval_penalized(&mut op, &nl, &v_eps, &pen, &u).unwrap();
        assert!(eval.energy.penalty > 0.0, "test needs an active penalty");
        let lhs = eval.gradient.inner(&dir).unwrap();
        let t = 1e-5;
        let mut up = u.clone();
        up.axpy(t, &dir).unwrap();
        let mut dn = u.clone();
        dn.axpy(-t, &dir).unwrap();
        let ep = eval_penalized(&mut op, &nl, &v_eps, &pen, &up)
            .unwrap()
            .energy
            .total;
        let en = eval_penalized(&mut op, &nl, &v_eps, &pen, &dn)
            .unwrap()
            .energy
            .total;
        assert_relative_eq!((ep - en) / (2.0 * t), lhs, max_relative = 1e-6);
    }

    #[test]
    fn penalized_reduces_to_limit_for_flat_potential_inside_well() {
        // With a state fully inside a well of depth a and no penalty
        // active, the penalized energy equals the limit energy at
        // frequency a.
        let grid = GridSpec::new(32, 10.0).unwrap();
        let nl = Power::new(3.0).unwrap();
        let mut op = RieszOperator::new(grid, 2.0, ZeroModeRule::LatticeCorrected).unwrap();
        let pot = MultiWell::new(
            2.0,
            vec![Well {
                center: [0.0, 0.0, 0.0],
                radius: 4.0,
                depth: 1.0,
            }],
        )
        .unwrap();
        // eps small: the rescaled well covers the whole box, and the
        // rescaled potential is within O((eps r)^2) of its center value.
        let eps = 1e-4;
        let v_eps = ScalarField::from_fn(grid, |x, y, z| pot.eval(eps * x, eps * y, eps * z));
        let pen = Penalization::new(&pot, grid, eps, 2.0).unwrap();
        let u = bump(grid, 1.0, [0.0; 3]);
        let a = eval_penalized(&mut op, &nl, &v_eps, &pen, &u).unwrap();
        let b = eval_limit(&mut op, &nl, 1.0, &u).unwrap();
        assert_eq!(a.energy.penalty, 0.0);
        assert_relative_eq!(a.energy.total, b.energy.total, max_relative = 1e-6);
        let diff = a
            .gradient
            .data()
            .iter()
            .zip(b.gradient.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(diff < 1e-6, "gradient difference {diff:.3e}");
    }

    #[test]
    fn virial_terms_scale_correctly_under_dilation() {
        // u_t(x) = u(x/t) has A(u_t) = t A(u), B(u_t) = t^3 B(u), and
        // C(u_t) = t^(3+alpha) C(u). The bump must stay well resolved
        // even after cubing (u^3 is sqrt(3) narrower), since tricubic
        // resampling smooths under-resolved profiles.
        use crate::ops::dilate;
        let grid = GridSpec::new(64, 10.0).unwrap();
        let nl = Power::new(3.0).unwrap();
        let mut op = RieszOperator::new(grid, 2.0, ZeroModeRule::LatticeCorrected).unwrap();
        let s = 1.6;
        let u = ScalarField::from_fn(grid, |x, y, z| {
            (-(x * x + y * y + z * z) / (2.0 * s * s)).exp()
        });
        let (a1, b1, c1) = virial_terms(&mut op, &nl, &u).unwrap();
        let t = 1.3;
        let ut = dilate(&u, t).unwrap();
        let (a2, b2, c2) = virial_terms(&mut op, &nl, &ut).unwrap();
        assert_relative_eq!(a2, t * a1, max_relative = 2e-3);
        assert_relative_eq!(b2, t.powi(3) * b1, max_relative = 2e-3);
        assert_relative_eq!(c2, t.powf(5.0) * c1, max_relative = 2e-3);
    }

    #[test]
    fn virial_value_zeroes_where_it_should() {
        // With A = 6, B = 2, C = 2, a = 1, alpha = 2:
        // P = 3 + 3 - 5 = 1; and P = 0 when C = (A + 3aB)/(3+alpha).
        assert_relative_eq!(virial_value(1.0, 2.0, (6.0, 2.0, 2.0)), 1.0);
        let c = (6.0 + 3.0 * 2.0) / 5.0;
        assert_relative_eq!(virial_value(1.0, 2.0, (6.0, 2.0, c)), 0.0, epsilon = 1e-14);
    }
}
