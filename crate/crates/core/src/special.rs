//! Constants and quadrature helpers for the Riesz kernel
//!
//! The Riesz potential in three dimensions is
//!   I_alpha(x) = A(alpha) |x|^(alpha - 3),
//!   A(alpha) = Gamma((3-alpha)/2) / (Gamma(alpha/2) pi^(3/2) 2^alpha),
//! with Fourier symbol (2 pi |xi|)^(-alpha) under the unitary transform
//! with kernel e^(-2 pi i x.xi).
//!
//! Two lattice quantities feed the discrete convolution's zero mode:
//!
//! * `cube_kernel_integral`: integral of |w|^(alpha-3) over the unit
//!   cube, i.e. the truncated kernel's own zero-frequency content.
//! * `lattice_constant`: W(alpha) = lim_{x->0} [ K_per(x) - I_alpha(x) ]
//!   on the unit-period lattice, where K_per is the zero-mean
//!   periodization of the kernel. Choosing the zero mode as -W(alpha)
//!   (suitably rescaled) cancels the constant bias that periodization
//!   introduces into a zero-padded free-space convolution, which is
//!   what keeps far-field values accurate in a finite box.
//!
//! W comes from an Ewald split of the lattice sum: with theta-function
//! identities the defining limit becomes two exponentially convergent
//! sums of incomplete gamma values plus two closed-form self terms.

use statrs::function::gamma::{gamma, gamma_ur};

/// Kernel normalization A(alpha); alpha in (0, 3).
pub fn kernel_normalization(alpha: f64) -> f64 {
    let pi = std::f64::consts::PI;
    gamma((3.0 - alpha) / 2.0) / (gamma(alpha / 2.0) * pi.powf(1.5) * 2f64.powf(alpha))
}

/// Riesz kernel value A(alpha) r^(alpha-3) at distance r > 0.
pub fn kernel_value(alpha: f64, r: f64) -> f64 {
    kernel_normalization(alpha) * r.powf(alpha - 3.0)
}

/// Upper incomplete gamma Gamma(a, x).
fn upper_gamma(a: f64, x: f64) -> f64 {
    gamma(a) * gamma_ur(a, x)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-flavoured initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (mut q0, mut q1) = (1.0f64, x);
                for k in 2..=n {
                    let k = k as f64;
                    let q2 = ((2.0 * k - 1.0) * x * q1 - (k - 1.0) * q0) / k;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (x * q1 - q0) / (x * x - 1.0);
                weights[i] = 2.0 / ((1.0 - x * x) * dq * dq);
                break;
            }
        }
        nodes[i] = x;
    }
    (nodes, weights)
}

/// Integral of |w|^(alpha-3) over the unit cube [-1/2, 1/2]^3.
///
/// The cube is star-shaped, so the radial integral collapses to a
/// surface integral: J = (1/alpha) * int_{S^2} R(omega)^alpha dOmega
/// with R the cube's boundary radius. Projecting onto one face turns
/// that into a smooth planar integral handled by Gauss-Legendre.
pub fn cube_kernel_integral(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 3.0, "alpha must lie in (0, 3)");
    let (xs, ws) = gauss_legendre(64);
    let mut acc = 0.0;
    for (&u, &wu) in xs.iter().zip(&ws) {
        let uu = 0.5 * u; // map [-1,1] -> [-1/2, 1/2], jacobian 1/2
        for (&v, &wv) in xs.iter().zip(&ws) {
            let vv = 0.5 * v;
            acc += wu * wv * 0.25 * (uu * uu + vv * vv + 0.25).powf((alpha - 3.0) / 2.0);
        }
    }
    3.0 / alpha * acc
}

/// Ewald evaluation of W(alpha) for the unit simple-cubic lattice.
pub fn lattice_constant(alpha: f64) -> f64 {
    assert!(alpha > 0.0 && alpha < 3.0, "alpha must lie in (0, 3)");
    let pi = std::f64::consts::PI;
    let t0 = 1.0 / (4.0 * pi); // balances both sums: each argument is pi |m|^2
    let four_pi_pow = (4.0 * pi).powf(-1.5);

    let range = 6i64;
    let mut real_sum = 0.0;
    let mut recip_sum = 0.0;
    for mx in -range..=range {
        for my in -range..=range {
            for mz in -range..=range {
                let m2 = (mx * mx + my * my + mz * mz) as f64;
                if m2 == 0.0 {
                    continue;
                }
                let m = m2.sqrt();
                real_sum +=
                    four_pi_pow * (m / 2.0).powf(alpha - 3.0) * upper_gamma((3.0 - alpha) / 2.0, pi * m2);
                recip_sum +=
                    (4.0 * pi * pi * m2).powf(-alpha / 2.0) * upper_gamma(alpha / 2.0, pi * m2);
            }
        }
    }

    let self_terms =
        -(2.0 / alpha) * t0.powf(alpha / 2.0) - (2.0 / (3.0 - alpha)) * four_pi_pow * t0.powf((alpha - 3.0) / 2.0);

    (real_sum + recip_sum + self_terms) / gamma(alpha / 2.0)
}
