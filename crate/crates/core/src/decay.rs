//! Exponential decay-rate estimation
//!
//! Ground states decay like C e^(-c d) in the distance d to the nearest
//! concentration center. `decay_fit` least-squares fits log u against d
//! over an annulus chosen away from both the core (where the profile is
//! not yet asymptotic) and the box boundary (where periodic images
//! contaminate the tail).

use crate::field::ScalarField;
use crate::{CoreError, Result};

/// Result of a log-linear tail fit u ~ prefactor * exp(-rate * d).
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub rate: f64,
    pub prefactor: f64,
    /// The (inner, outer) radii actually used.
    pub window: (f64, f64),
    /// Root-mean-square residual of log u over the fit nodes.
    pub residual: f64,
    pub nodes: usize,
}

/// Fit the decay rate of `u` over the annulus `window = (r1, r2)` around
/// the nearest of `centers`. Pass `None` to default to (L/4, L/2).
///
/// Nodes with nonpositive values are excluded; fewer than 50 usable
/// nodes is an error rather than a noisy estimate.
pub fn decay_fit(
    u: &ScalarField,
    centers: &[[f64; 3]],
    window: Option<(f64, f64)>,
) -> Result<DecayFit> {
    let grid = u.grid();
    let half = grid.half_length();
    let (r1, r2) = window.unwrap_or((0.25 * half, 0.5 * half));
    if !(r1 > 0.0) || !(r2 > r1) {
        return Err(CoreError::InvalidParameter(format!(
            "annulus radii must satisfy 0 < r1 < r2, got ({r1}, {r2})"
        )));
    }
    if r2 > 0.5 * half + 1e-12 {
        return Err(CoreError::InvalidParameter(format!(
            "outer radius {r2} exceeds half the box half-length {half}; \
             the tail there is dominated by periodic images"
        )));
    }
    if centers.is_empty() {
        return Err(CoreError::InvalidParameter(
            "decay fit needs at least one center".into(),
        ));
    }
    let n = grid.n();
    let mut ds: Vec<f64> = Vec::new();
    let mut logs: Vec<f64> = Vec::new();
    for ix in 0..n {
        let x = grid.coord(ix);
        for iy in 0..n {
            let y = grid.coord(iy);
            for iz in 0..n {
                let z = grid.coord(iz);
                let d = centers
                    .iter()
                    .map(|c| {
                        ((x - c[0]).powi(2) + (y - c[1]).powi(2) + (z - c[2]).powi(2)).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min);
                if d < r1 || d > r2 {
                    continue;
                }
                let v = u.data()[grid.index(ix, iy, iz)];
                if v <= 0.0 {
                    continue;
                }
                ds.push(d);
                logs.push(v.ln());
            }
        }
    }
    let m = ds.len();
    if m < 50 {
        return Err(CoreError::AnnulusTooThin { count: m, need: 50 });
    }
    // Least squares for log u = b - rate * d.
    let mf = m as f64;
    let sd: f64 = ds.iter().sum();
    let sl: f64 = logs.iter().sum();
    let sdd: f64 = ds.iter().map(|d| d * d).sum();
    let sdl: f64 = ds.iter().zip(&logs).map(|(d, l)| d * l).sum();
    let det = mf * sdd - sd * sd;
    if det.abs() < 1e-12 * mf * sdd.max(1.0) {
        return Err(CoreError::InvalidParameter(
            "degenerate annulus: all fit nodes at one radius".into(),
        ));
    }
    let slope = (mf * sdl - sd * sl) / det;
    let intercept = (sl - slope * sd) / mf;
    let mut ss = 0.0;
    for (d, l) in ds.iter().zip(&logs) {
        let r = l - (intercept + slope * d);
        ss += r * r;
    }
    Ok(DecayFit {
        rate: -slope,
        prefactor: intercept.exp(),
        window: (r1, r2),
        residual: (ss / mf).sqrt(),
        nodes: m,
    })
}
