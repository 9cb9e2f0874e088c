//! Critical-point search for the penalized functional
//!
//! The concentrating solution is a saddle point of the penalized
//! energy, but a plain zero of its gradient, so the solver is a damped
//! inexact Newton method on the residual map u -> Gamma'(u):
//! matrix-free directional linearization, GMRES inner solves
//! preconditioned by (-Delta + c)^-1 with c the deepest well level,
//! and a Sobolev-gradient descent step whenever the Newton direction
//! fails to cut the residual norm. Since the coupling vanishes on
//! (-inf, 0], negative values carry no nonlinear feedback and the
//! converged field is nonnegative up to spectral ripple, which is
//! zeroed on return.

use crate::decay::{decay_fit, DecayFit};
use crate::energy::{eval_penalized, EnergyBreakdown, Evaluation};
use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::nonlinearity::Nonlinearity;
use crate::ops::{helmholtz_inverse, laplacian};
use crate::penalize::Penalization;
use crate::potential::MultiWell;
use crate::riesz::RieszOperator;
use crate::{CoreError, Result};

/// Knobs for the penalized solve.
#[derive(Clone)]
pub struct SaddleOptions {
    /// Stop when ||Gamma'(u)||_2 / ||u||_2 falls below this.
    pub grad_tol: f64,
    pub max_newton: usize,
    /// Krylov directions per Newton step.
    pub max_krylov: usize,
    /// Relative tolerance of the inner linear solve.
    pub forcing: f64,
    /// Annulus (around the peaks, in rescaled coordinates) for the
    /// decay fit of the returned solution.
    pub decay_window: (f64, f64),
}

impl Default for SaddleOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-5,
            max_newton: 40,
            max_krylov: 20,
            forcing: 0.1,
            decay_window: (3.0, 8.0),
        }
    }
}

/// One local maximum of the solution, reported in both coordinate
/// systems.
#[derive(Debug, Clone)]
pub struct PeakReport {
    pub well: usize,
    /// Node location in rescaled coordinates y.
    pub grid_location: [f64; 3],
    /// Physical location x = eps * y.
    pub location: [f64; 3],
    pub value: f64,
    /// Distance from `location` to the bottom of the well.
    pub dist_to_bottom: f64,
}

/// A converged critical point of the penalized functional.
pub struct SemiclassicalSolution {
    pub epsilon: f64,
    pub field: ScalarField,
    pub gamma: EnergyBreakdown,
    pub q_value: f64,
    pub grad_resid: f64,
    /// Largest local maximum per well, at most one entry per well;
    /// fewer entries than wells means the solve lost a bump and the
    /// result needs scrutiny.
    pub peaks: Vec<PeakReport>,
    pub decay: Option<DecayFit>,
    pub newton_steps: usize,
}

/// The multi-well potential read through the coordinate rescaling,
/// V(eps y), sampled on the grid.
pub fn rescaled_potential(pot: &MultiWell, grid: GridSpec, eps: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x, y, z| pot.eval(eps * x, eps * y, eps * z))
}

struct Frozen {
    f_u: ScalarField,
    fp_u: ScalarField,
    conv_big_f: ScalarField,
    chi_u: ScalarField,
    excess: f64,
}

impl Frozen {
    fn at(nl: &dyn Nonlinearity, pen: &Penalization, u: &ScalarField, ev: &Evaluation) -> Result<Self> {
        Ok(Self {
            f_u: u.map(|s| nl.f(s)),
            fp_u: u.map(|s| nl.f_prime(s)),
            conv_big_f: ev.conv_big_f.clone(),
            chi_u: pen.chi().mul(u)?,
            excess: pen.excess(u)?,
        })
    }

    /// Directional derivative of the gradient map at the frozen state:
    /// the Helmholtz part, the two nonlocal branches, and (when the
    /// penalty is active) its rank-one term.
    fn jvp(
        &self,
        op: &mut RieszOperator,
        v_eps: &ScalarField,
        pen: &Penalization,
        v: &ScalarField,
    ) -> Result<ScalarField> {
        let mut out = laplacian(v);
        out.scale(-1.0);
        let fv = self.f_u.mul(v)?;
        let conv_fv = op.convolve(&fv)?;
        let chi = pen.chi().data();
        let pair = if self.excess > 0.0 {
            2.0 * self.chi_u.inner(v)?
        } else {
            0.0
        };
        let o = out.data_mut();
        for i in 0..o.len() {
            o[i] += v_eps.data()[i] * v.data()[i]
                - conv_fv.data()[i] * self.f_u.data()[i]
                - self.conv_big_f.data()[i] * self.fp_u.data()[i] * v.data()[i];
            if self.excess > 0.0 {
                o[i] += 4.0 * self.excess * chi[i] * v.data()[i]
                    + 4.0 * pair * self.chi_u.data()[i];
            }
        }
        if !out.all_finite() {
            return Err(CoreError::NonFinite("linearized gradient"));
        }
        Ok(out)
    }
}

/// Matrix-free GMRES without restarts: builds up to `m` Krylov
/// directions of `apply` and returns the least-squares solution of
/// apply(d) = b, stopping early once the relative residual drops
/// below `tol`.
pub fn gmres(
    mut apply: impl FnMut(&ScalarField) -> Result<ScalarField>,
    b: &ScalarField,
    m: usize,
    tol: f64,
) -> Result<ScalarField> {
    let beta = b.l2_norm();
    if beta == 0.0 || m == 0 {
        return Ok(ScalarField::zeros(b.grid()));
    }
    let mut basis: Vec<ScalarField> = Vec::with_capacity(m + 1);
    let mut first = b.clone();
    first.scale(1.0 / beta);
    basis.push(first);

    let mut h = vec![vec![0.0f64; m]; m + 1];
    let mut cs = vec![0.0f64; m];
    let mut sn = vec![0.0f64; m];
    let mut g = vec![0.0f64; m + 1];
    g[0] = beta;
    let mut cols = 0;

    for j in 0..m {
        let mut w = apply(&basis[j])?;
        for i in 0..=j {
            h[i][j] = w.inner(&basis[i])?;
            w.axpy(-h[i][j], &basis[i])?;
        }
        h[j + 1][j] = w.l2_norm();

        for i in 0..j {
            let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
            h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
            h[i][j] = t;
        }
        let r = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
        if r == 0.0 {
            cols = j;
            break;
        }
        cs[j] = h[j][j] / r;
        sn[j] = h[j + 1][j] / r;
        h[j][j] = r;
        g[j + 1] = -sn[j] * g[j];
        g[j] *= cs[j];
        cols = j + 1;

        if h[j + 1][j] < 1e-14 * beta || g[j + 1].abs() <= tol * beta {
            break;
        }
        if j + 1 < m {
            let mut next = w;
            next.scale(1.0 / h[j + 1][j]);
            basis.push(next);
        }
    }

    let mut y = vec![0.0f64; cols];
    for i in (0..cols).rev() {
        let mut s = g[i];
        for (k, yk) in y.iter().enumerate().skip(i + 1) {
            s -= h[i][k] * yk;
        }
        y[i] = s / h[i][i];
    }
    let mut d = ScalarField::zeros(b.grid());
    for (yk, vk) in y.iter().zip(&basis) {
        d.axpy(*yk, vk)?;
    }
    Ok(d)
}

/// Find a critical point of the penalized functional near `guess`.
///
/// Aborts with a trajectory log if the energy climbs past twice the
/// level of the initial guess, which for an ansatz guess estimates the
/// min-max level from above.
pub fn solve_penalized(
    op: &mut RieszOperator,
    nl: &dyn Nonlinearity,
    pot: &MultiWell,
    pen: &Penalization,
    guess: &ScalarField,
    opts: &SaddleOptions,
) -> Result<SemiclassicalSolution> {
    let grid = op.grid();
    guess.grid().same_grid(&grid)?;
    let eps = pen.epsilon();
    let v_eps = rescaled_potential(pot, grid, eps);
    let precond_level = pot.min_value();

    let mut u = guess.clone();
    let mut ev = eval_penalized(op, nl, &v_eps, pen, &u)?;
    let estimate = ev.energy.total;
    let guard = 2.0 * estimate.abs().max(1.0);
    let mut trajectory = vec![estimate];
    let mut resid_norm = ev.gradient.l2_norm();
    let mut steps = 0;

    for newton in 0..opts.max_newton {
        let rel = resid_norm / u.l2_norm().max(f64::MIN_POSITIVE);
        if rel <= opts.grad_tol {
            break;
        }
        if ev.energy.total > guard {
            return Err(CoreError::Divergence {
                energy: ev.energy.total,
                estimate,
                trajectory,
            });
        }
        steps = newton + 1;

        let frozen = Frozen::at(nl, pen, &u, &ev)?;
        let mut rhs = helmholtz_inverse(&ev.gradient, precond_level)?;
        rhs.scale(-1.0);
        let direction = gmres(
            |v| {
                let jv = frozen.jvp(op, &v_eps, pen, v)?;
                helmholtz_inverse(&jv, precond_level)
            },
            &rhs,
            opts.max_krylov,
            opts.forcing,
        )?;

        let mut advanced = false;
        let mut lambda = 1.0;
        for _ in 0..7 {
            let mut cand = u.clone();
            cand.axpy(lambda, &direction)?;
            let cev = eval_penalized(op, nl, &v_eps, pen, &cand)?;
            let cnorm = cev.gradient.l2_norm();
            if cnorm <= (1.0 - 0.2 * lambda) * resid_norm {
                u = cand;
                ev = cev;
                resid_norm = cnorm;
                advanced = true;
                break;
            }
            lambda *= 0.5;
        }
        if !advanced {
            let descent = helmholtz_inverse(&ev.gradient, precond_level)?;
            let mut tau = 0.5;
            loop {
                let mut cand = u.clone();
                cand.axpy(-tau, &descent)?;
                let cev = eval_penalized(op, nl, &v_eps, pen, &cand)?;
                let slack = 1e-12 * ev.energy.total.abs().max(1.0);
                if cev.energy.total <= ev.energy.total + slack || tau < 1e-3 {
                    u = cand;
                    resid_norm = cev.gradient.l2_norm();
                    ev = cev;
                    break;
                }
                tau *= 0.5;
            }
        }
        trajectory.push(ev.energy.total);
    }

    let rel = resid_norm / u.l2_norm().max(f64::MIN_POSITIVE);
    if rel > opts.grad_tol {
        let tail = trajectory.len().saturating_sub(12);
        return Err(CoreError::NoConvergence {
            iters: opts.max_newton,
            resid: rel,
            target: opts.grad_tol,
            history: trajectory.split_off(tail),
        });
    }

    u.map_inplace(|s| s.max(0.0));
    let ev = eval_penalized(op, nl, &v_eps, pen, &u)?;
    let grad_resid = ev.gradient.l2_norm() / u.l2_norm().max(f64::MIN_POSITIVE);
    let q_value = pen.q(&u)?;
    let peaks = extract_peaks(&u, pot, eps);
    let centers: Vec<[f64; 3]> = peaks.iter().map(|p| p.grid_location).collect();
    let decay = if centers.is_empty() {
        None
    } else {
        decay_fit(&u, &centers, Some(opts.decay_window)).ok()
    };

    Ok(SemiclassicalSolution {
        epsilon: eps,
        field: u,
        gamma: ev.energy,
        q_value,
        grad_resid,
        peaks,
        decay,
        newton_steps: steps,
    })
}

/// Strict 26-neighbor local maxima above a hundredth of the global
/// maximum, reduced to the strongest one inside each well's rescaled
/// region. Ties go to the smallest node index.
pub fn extract_peaks(u: &ScalarField, pot: &MultiWell, eps: f64) -> Vec<PeakReport> {
    let grid = u.grid();
    let n = grid.n() as i64;
    let data = u.data();
    let floor = 0.01 * u.max_value();
    let mut best: Vec<Option<PeakReport>> = vec![None; pot.wells().len()];

    let idx = |ix: i64, iy: i64, iz: i64| -> usize {
        let w = |j: i64| (j.rem_euclid(n)) as usize;
        grid.index(w(ix), w(iy), w(iz))
    };
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let v = data[idx(ix, iy, iz)];
                if v <= floor {
                    continue;
                }
                let mut is_peak = true;
                'scan: for dx in -1..=1i64 {
                    for dy in -1..=1i64 {
                        for dz in -1..=1i64 {
                            if dx == 0 && dy == 0 && dz == 0 {
                                continue;
                            }
                            if data[idx(ix + dx, iy + dy, iz + dz)] >= v {
                                is_peak = false;
                                break 'scan;
                            }
                        }
                    }
                }
                if !is_peak {
                    continue;
                }
                let y = [
                    grid.coord(ix as usize),
                    grid.coord(iy as usize),
                    grid.coord(iz as usize),
                ];
                let x = [eps * y[0], eps * y[1], eps * y[2]];
                let (well, dist) = pot.nearest_well(x);
                let report = PeakReport {
                    well,
                    grid_location: y,
                    location: x,
                    value: v,
                    dist_to_bottom: dist,
                };
                match &best[well] {
                    Some(b) if b.value >= v => {}
                    _ => best[well] = Some(report),
                }
            }
        }
    }
    best.into_iter().flatten().collect()
}
