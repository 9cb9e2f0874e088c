//! Spectral differential operators and grid motions.
//!
//! Derivatives act in Fourier space with the symbol |2 pi xi|^2,
//! xi = k/(2L) for wrapped integer k. Translation is a phase
//! multiplication, which keeps it an exact L2 isometry for any real
//! shift. Dilation u(./t) comes in two flavors: `dilate` resamples
//! with cubic convolution interpolation (fast, reads zero outside the
//! box), `dilate_spectral` resamples the trigonometric interpolant
//! (exact for band-limited data, torus wrap semantics).

use crate::error::{CoreError, Result};
use crate::fft::fft3;
use crate::field::ScalarField;
use rustfft::num_complex::Complex;

fn to_spectrum(u: &ScalarField) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = u.data().iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft3(&mut buf, u.grid().n(), true);
    buf
}

fn from_spectrum(mut buf: Vec<Complex<f64>>, like: &ScalarField) -> ScalarField {
    let n = like.grid().n();
    fft3(&mut buf, n, false);
    let scale = 1.0 / (n * n * n) as f64;
    let data = buf.iter().map(|c| c.re * scale).collect();
    ScalarField::from_vec(like.grid(), data).expect("spectrum length matches grid")
}

/// Apply a real multiplier m(|2 pi xi|^2) in frequency space.
fn apply_symbol(u: &ScalarField, symbol: impl Fn(f64) -> f64) -> ScalarField {
    let g = u.grid();
    let n = g.n();
    let mut buf = to_spectrum(u);
    let two_pi = 2.0 * std::f64::consts::PI;
    for kx in 0..n {
        let fx = two_pi * g.freq(kx);
        for ky in 0..n {
            let fy = two_pi * g.freq(ky);
            let row = (kx * n + ky) * n;
            for kz in 0..n {
                let fz = two_pi * g.freq(kz);
                let m = symbol(fx * fx + fy * fy + fz * fz);
                buf[row + kz] *= m;
            }
        }
    }
    from_spectrum(buf, u)
}

/// Spectral Laplacian.
pub fn laplacian(u: &ScalarField) -> ScalarField {
    apply_symbol(u, |q| -q)
}

/// (-Laplacian + a)^{-1} u for a > 0.
pub fn helmholtz_inverse(u: &ScalarField, a: f64) -> Result<ScalarField> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "helmholtz shift must be positive, got {a}"
        )));
    }
    Ok(apply_symbol(u, |q| 1.0 / (q + a)))
}

/// Squared H1 seminorm: integral of |grad u|^2, evaluated by Parseval.
pub fn h1_seminorm_sq(u: &ScalarField) -> f64 {
    let g = u.grid();
    let n = g.n();
    let buf = to_spectrum(u);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut acc = 0.0;
    for kx in 0..n {
        let fx = two_pi * g.freq(kx);
        for ky in 0..n {
            let fy = two_pi * g.freq(ky);
            let row = (kx * n + ky) * n;
            for kz in 0..n {
                let fz = two_pi * g.freq(kz);
                acc += (fx * fx + fy * fy + fz * fz) * buf[row + kz].norm_sqr();
            }
        }
    }
    acc * g.cell_volume() / (n * n * n) as f64
}

/// Periodic translation: output(x) = u(x - shift). Exact isometry.
pub fn translate(u: &ScalarField, shift: [f64; 3]) -> ScalarField {
    let g = u.grid();
    let n = g.n();
    let mut buf = to_spectrum(u);
    let two_pi = 2.0 * std::f64::consts::PI;
    for kx in 0..n {
        let px = two_pi * g.freq(kx) * shift[0];
        for ky in 0..n {
            let py = two_pi * g.freq(ky) * shift[1];
            let row = (kx * n + ky) * n;
            for kz in 0..n {
                let phase = px + py + two_pi * g.freq(kz) * shift[2];
                buf[row + kz] *= Complex::new(phase.cos(), -phase.sin());
            }
        }
    }
    from_spectrum(buf, u)
}

/// Cubic convolution kernel (Keys, a = -1/2): exact on cubics, C^1.
fn keys_weight(s: f64) -> f64 {
    let s = s.abs();
    if s < 1.0 {
        (1.5 * s - 2.5) * s * s + 1.0
    } else if s < 2.0 {
        ((-0.5 * s + 2.5) * s - 4.0) * s + 2.0
    } else {
        0.0
    }
}

/// Interpolate u at an off-grid point, reading zero outside the box.
pub fn sample(u: &ScalarField, p: [f64; 3]) -> f64 {
    let g = u.grid();
    let n = g.n() as i64;
    let h = g.spacing();
    let l = g.half_length();

    let mut base = [0i64; 3];
    let mut w = [[0.0f64; 4]; 3];
    for ax in 0..3 {
        let t = (p[ax] + l) / h;
        let b = t.floor();
        let f = t - b;
        base[ax] = b as i64;
        for (j, wj) in w[ax].iter_mut().enumerate() {
            *wj = keys_weight(f - (j as f64 - 1.0));
        }
    }

    let mut acc = 0.0;
    for (jx, &wx) in w[0].iter().enumerate() {
        let ix = base[0] + jx as i64 - 1;
        if ix < 0 || ix >= n || wx == 0.0 {
            continue;
        }
        for (jy, &wy) in w[1].iter().enumerate() {
            let iy = base[1] + jy as i64 - 1;
            if iy < 0 || iy >= n || wy == 0.0 {
                continue;
            }
            let row = ((ix * n + iy) * n) as usize;
            let wxy = wx * wy;
            for (jz, &wz) in w[2].iter().enumerate() {
                let iz = base[2] + jz as i64 - 1;
                if iz < 0 || iz >= n || wz == 0.0 {
                    continue;
                }
                acc += wxy * wz * u.data()[row + iz as usize];
            }
        }
    }
    acc
}

/// Dilation u(./t). For t > 1 the support stretches, so the caller's
/// field must decay before |x| = L/t; checked against the boundary of
/// the preimage cube.
pub fn dilate(u: &ScalarField, t: f64) -> Result<ScalarField> {
    if !(0.1..=10.0).contains(&t) {
        return Err(CoreError::InvalidParameter(format!(
            "dilation factor {t} outside [0.1, 10]"
        )));
    }
    if (t - 1.0).abs() < 1e-14 {
        return Ok(u.clone());
    }
    if t > 1.0 {
        let g = u.grid();
        let edge = g.half_length() / t;
        let peak = u.linf_norm();
        if peak > 0.0 {
            let mut boundary_max: f64 = 0.0;
            let n = g.n();
            for ix in 0..n {
                for iy in 0..n {
                    for iz in 0..n {
                        let m = g
                            .coord(ix)
                            .abs()
                            .max(g.coord(iy).abs())
                            .max(g.coord(iz).abs());
                        if (m - edge).abs() <= g.spacing() {
                            boundary_max = boundary_max.max(u.data()[g.index(ix, iy, iz)].abs());
                        }
                    }
                }
            }
            if boundary_max > 1e-4 * peak {
                return Err(CoreError::InvalidParameter(format!(
                    "dilation by t = {t} would push support outside the box \
                     (relative boundary level {:.2e})",
                    boundary_max / peak
                )));
            }
        }
    }

    let g = u.grid();
    let n = g.n();
    let inv = 1.0 / t;
    let mut out = ScalarField::zeros(g);
    for ix in 0..n {
        let x = g.coord(ix) * inv;
        for iy in 0..n {
            let y = g.coord(iy) * inv;
            let row = (ix * n + iy) * n;
            for iz in 0..n {
                out.data_mut()[row + iz] = sample(u, [x, y, g.coord(iz) * inv]);
            }
        }
    }
    Ok(out)
}

/// Dilation u(./t) evaluated through the trigonometric interpolant of
/// the samples: exact (to rounding) for band-limited periodic data,
/// with torus wrap semantics for |x/t| > L. O(n^4) via the periodic
/// sinc resampling matrix, applied separably along each axis.
pub fn dilate_spectral(u: &ScalarField, t: f64) -> Result<ScalarField> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "dilation factor must be positive and finite, got {t}"
        )));
    }
    if t == 1.0 {
        return Ok(u.clone());
    }
    let g = u.grid();
    let n = g.n();
    let l = g.half_length();
    let nf = n as f64;
    // For even n, interpolating samples u_i and evaluating at y gives
    // sum_i u_i S(y - x_i) with S(d) = sin(n q / 2) cos(q / 2)
    // / (n sin(q / 2)), q = pi d / L, and S = 1 at sample coincidence.
    let mut w = vec![0.0f64; n * n];
    for j in 0..n {
        let yj = g.coord(j) / t;
        for (i, wji) in w[j * n..(j + 1) * n].iter_mut().enumerate() {
            let q = 0.5 * std::f64::consts::PI * (yj - g.coord(i)) / l;
            let s = q.sin();
            *wji = if s.abs() < 1e-13 {
                1.0
            } else {
                (nf * q).sin() * q.cos() / (nf * s)
            };
        }
    }
    let mut data = u.data().to_vec();
    let mut line = vec![0.0f64; n];
    let resample = |data: &mut [f64], base: usize, stride: usize, line: &mut [f64]| {
        for (i, li) in line.iter_mut().enumerate() {
            *li = data[base + i * stride];
        }
        for j in 0..n {
            let row = &w[j * n..(j + 1) * n];
            let mut acc = 0.0;
            for (i, &li) in line.iter().enumerate() {
                acc += row[i] * li;
            }
            data[base + j * stride] = acc;
        }
    };
    // row-major z-fastest: index = (ix n + iy) n + iz
    for ix in 0..n {
        for iy in 0..n {
            resample(&mut data, (ix * n + iy) * n, 1, &mut line);
        }
    }
    for ix in 0..n {
        for iz in 0..n {
            resample(&mut data, ix * n * n + iz, n, &mut line);
        }
    }
    for iy in 0..n {
        for iz in 0..n {
            resample(&mut data, iy * n + iz, n * n, &mut line);
        }
    }
    ScalarField::from_vec(g, data)
}

/// Infinitesimal dilation generator x . grad u, the derivative
/// -d/dt u(./t) at t = 1 of the dilation path. Gradients are the nodal
/// derivatives of the trigonometric interpolant (odd Nyquist derivative
/// dropped), so this is the exact tangent of `dilate_spectral` in t.
pub fn dilation_generator(u: &ScalarField) -> ScalarField {
    let g = u.grid();
    let n = g.n();
    let spec = to_spectrum(u);
    let two_pi = 2.0 * std::f64::consts::PI;
    let scale = 1.0 / (n * n * n) as f64;
    let mut out = ScalarField::zeros(g);
    let mut buf = vec![Complex::new(0.0, 0.0); spec.len()];
    for axis in 0..3 {
        buf.copy_from_slice(&spec);
        for kx in 0..n {
            for ky in 0..n {
                let row = (kx * n + ky) * n;
                for kz in 0..n {
                    let k = [kx, ky, kz][axis];
                    let m = if k == n / 2 { 0.0 } else { two_pi * g.freq(k) };
                    let v = buf[row + kz];
                    buf[row + kz] = Complex::new(-m * v.im, m * v.re);
                }
            }
        }
        fft3(&mut buf, n, false);
        let data = out.data_mut();
        for ix in 0..n {
            for iy in 0..n {
                let row = (ix * n + iy) * n;
                for iz in 0..n {
                    let c = g.coord([ix, iy, iz][axis]);
                    data[row + iz] += c * buf[row + iz].re * scale;
                }
            }
        }
    }
    out
}
