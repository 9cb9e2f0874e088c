//! Free-space Riesz convolution on a periodic grid
//!
//! `RieszOperator` evaluates g -> I_alpha * g for fields supported well
//! inside the computational box. The field is zero-padded onto a grid
//! of twice the side length, multiplied in Fourier space by the kernel
//! symbol (2 pi |xi|)^(-alpha), and transformed back; the padding keeps
//! periodic images of the support from overlapping, so within the
//! original box the result agrees with the free-space convolution up to
//! the choice of the symbol's zero mode.
//!
//! The zero mode is where periodization bites: the continuum symbol
//! diverges at xi = 0, and any finite substitute shifts the output by a
//! constant times the integral of g. `ZeroModeRule` selects that
//! substitute. The default `LatticeCorrected` rule cancels the
//! periodization offset exactly at the box center and leaves only a
//! quadratic-in-|x| residual, which is what makes pointwise far-field
//! checks and virial-type integral identities come out clean.

use crate::fft::fft3_with_scratch;
use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::special::{cube_kernel_integral, kernel_normalization, lattice_constant};
use crate::{CoreError, Result};
use rustfft::num_complex::Complex;

/// Replacement for the singular zero frequency of the kernel symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroModeRule {
    /// Cancel the periodization offset using the lattice constant of
    /// the padded box: m(0) = -(4L)^alpha W(alpha). Default.
    LatticeCorrected,
    /// Integral of the kernel truncated to the padded period cell:
    /// m(0) = A(alpha) (4L)^alpha J(alpha). Simple, but leaves a net
    /// constant bias in the output.
    TruncatedKernelIntegral,
    /// Screened kernel (|2 pi xi|^2 + kappa^2)^(-alpha/2); regular at
    /// zero, but modifies every low mode, not just the zero mode.
    Screened { kappa: f64 },
}

/// Spectral convolution with the Riesz kernel over a zero-padded box.
pub struct RieszOperator {
    grid: GridSpec,
    alpha: f64,
    rule: ZeroModeRule,
    multiplier: Vec<f64>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl RieszOperator {
    pub fn new(grid: GridSpec, alpha: f64, rule: ZeroModeRule) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 3.0) || !alpha.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "alpha must lie in (0, 3), got {alpha}"
            )));
        }
        if let ZeroModeRule::Screened { kappa } = rule {
            if !(kappa > 0.0) || !kappa.is_finite() {
                return Err(CoreError::InvalidParameter(format!(
                    "screening kappa must be positive, got {kappa}"
                )));
            }
        }
        let multiplier = build_multiplier(grid, alpha, rule);
        let m = 2 * grid.n();
        Ok(Self {
            grid,
            alpha,
            rule,
            multiplier,
            buf: vec![Complex::default(); m * m * m],
            scratch: vec![Complex::default(); m * m * m],
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rule(&self) -> ZeroModeRule {
        self.rule
    }

    /// Free-space convolution I_alpha * g via the padded grid.
    pub fn convolve(&mut self, g: &ScalarField) -> Result<ScalarField> {
        g.grid().same_grid(&self.grid)?;
        let n = self.grid.n();
        let m = 2 * n;
        self.buf.fill(Complex::default());
        let data = g.data();
        for ix in 0..n {
            for iy in 0..n {
                let src = (ix * n + iy) * n;
                let dst = (ix * m + iy) * m;
                for iz in 0..n {
                    self.buf[dst + iz] = Complex::new(data[src + iz], 0.0);
                }
            }
        }
        fft3_with_scratch(&mut self.buf, &mut self.scratch, m, true);
        for (b, &w) in self.buf.iter_mut().zip(&self.multiplier) {
            *b *= w;
        }
        fft3_with_scratch(&mut self.buf, &mut self.scratch, m, false);
        let norm = 1.0 / (m * m * m) as f64;
        let mut out = ScalarField::zeros(self.grid);
        let out_data = out.data_mut();
        for ix in 0..n {
            for iy in 0..n {
                let dst = (ix * n + iy) * n;
                let src = (ix * m + iy) * m;
                for iz in 0..n {
                    out_data[dst + iz] = self.buf[src + iz].re * norm;
                }
            }
        }
        if !out.all_finite() {
            return Err(CoreError::NonFinite("riesz convolution output"));
        }
        Ok(out)
    }
}

fn build_multiplier(grid: GridSpec, alpha: f64, rule: ZeroModeRule) -> Vec<f64> {
    let n = grid.n();
    let m = 2 * n;
    let period = 4.0 * grid.half_length(); // padded box side
    let zero_mode = match rule {
        ZeroModeRule::LatticeCorrected => -period.powf(alpha) * lattice_constant(alpha),
        ZeroModeRule::TruncatedKernelIntegral => {
            kernel_normalization(alpha) * period.powf(alpha) * cube_kernel_integral(alpha)
        }
        ZeroModeRule::Screened { kappa } => kappa.powf(-alpha),
    };
    // |2 pi xi|^2 = (pi / (2L))^2 * |k|^2 with integer wrapped index k.
    let base = std::f64::consts::PI / (2.0 * grid.half_length());
    let mut wrapped_sq = vec![0.0f64; m];
    for (j, w) in wrapped_sq.iter_mut().enumerate() {
        let k = if j < m / 2 { j as f64 } else { j as f64 - m as f64 };
        *w = k * k;
    }
    let mut mult = vec![0.0f64; m * m * m];
    for ix in 0..m {
        for iy in 0..m {
            let row = (ix * m + iy) * m;
            let pre = wrapped_sq[ix] + wrapped_sq[iy];
            for iz in 0..m {
                let k2 = pre + wrapped_sq[iz];
                mult[row + iz] = if k2 == 0.0 {
                    zero_mode
                } else {
                    match rule {
                        ZeroModeRule::Screened { kappa } => {
                            (base * base * k2 + kappa * kappa).powf(-alpha / 2.0)
                        }
                        _ => (base * base * k2).powf(-alpha / 2.0),
                    }
                };
            }
        }
    }
    mult
}
