//! Minimal 3-D complex FFT built from cached 1-D rustfft plans.
//!
//! Data layout matches `GridSpec`: row-major, z fastest. A transform
//! runs three passes; each pass applies the 1-D FFT to the contiguous
//! innermost axis and then rotates the axes (x,y,z) -> (z,x,y), so
//! after three passes the layout is back to the original order.
//! Forward and inverse are both unnormalized; callers divide by n^3
//! once after an inverse.

use once_cell::sync::Lazy;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

type PlanKey = (usize, bool);

static PLANS: Lazy<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            planner.plan_fft(n, dir)
        })
        .clone()
}

/// Rotate axes (x,y,z) -> (z,x,y): out[(z*n + x)*n + y] = in[(x*n + y)*n + z].
fn rotate_axes(src: &[Complex<f64>], dst: &mut [Complex<f64>], n: usize) {
    // Blocked over (y, z) to keep both streams cache-resident.
    const B: usize = 32;
    for x in 0..n {
        let plane = x * n * n;
        for yb in (0..n).step_by(B) {
            for zb in (0..n).step_by(B) {
                for y in yb..(yb + B).min(n) {
                    let row = plane + y * n;
                    for z in zb..(zb + B).min(n) {
                        dst[(z * n + x) * n + y] = src[row + z];
                    }
                }
            }
        }
    }
}

fn pass(data: &mut [Complex<f64>], scratch: &mut [Complex<f64>], n: usize, forward: bool) {
    let fft = plan(n, forward);
    let mut line_scratch = vec![Complex::default(); fft.get_inplace_scratch_len()];
    for line in data.chunks_exact_mut(n) {
        fft.process_with_scratch(line, &mut line_scratch);
    }
    rotate_axes(data, scratch, n);
    data.copy_from_slice(scratch);
}

/// In-place unnormalized 3-D transform of an n^3 cube.
pub fn fft3(data: &mut [Complex<f64>], n: usize, forward: bool) {
    assert_eq!(data.len(), n * n * n, "fft3 buffer/grid mismatch");
    let mut scratch = vec![Complex::default(); data.len()];
    for _ in 0..3 {
        pass(data, &mut scratch, n, forward);
    }
}

/// Same transform reusing a caller-provided rotation buffer.
pub fn fft3_with_scratch(
    data: &mut [Complex<f64>],
    scratch: &mut [Complex<f64>],
    n: usize,
    forward: bool,
) {
    assert_eq!(data.len(), n * n * n, "fft3 buffer/grid mismatch");
    assert_eq!(scratch.len(), data.len(), "fft3 scratch mismatch");
    for _ in 0..3 {
        pass(data, scratch, n, forward);
    }
}
