//! FFT plumbing for periodic Cartesian grids.
//!
//! Plans are cached globally so repeated transforms of the same length are
//! cheap and safe to issue from multiple threads.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

static PLANS: LazyLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            FftPlanner::new().plan_fft(len, dir)
        })
        .clone()
}

fn fft_1d(buf: &mut [Complex64], forward: bool) {
    let fft = plan(buf.len(), forward);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
}

fn transpose(values: &[Complex64], n: usize, out: &mut [Complex64]) {
    for row in 0..n {
        for col in 0..n {
            out[col * n + row] = values[row * n + col];
        }
    }
}

/// Unnormalized forward DFT of a field stored row-major on an `n`-per-axis
/// grid of `dim` dimensions (`dim` is 1 or 2; total length `n^dim`).
pub(crate) fn dft_forward(values: &mut Vec<Complex64>, n: usize, dim: usize) {
    match dim {
        1 => fft_1d(values, true),
        2 => {
            for row in values.chunks_exact_mut(n) {
                fft_1d(row, true);
            }
            let mut t = vec![Complex64::new(0.0, 0.0); values.len()];
            transpose(values, n, &mut t);
            for row in t.chunks_exact_mut(n) {
                fft_1d(row, true);
            }
            transpose(&t, n, values);
        }
        _ => unreachable!("cartesian grids are 1- or 2-dimensional"),
    }
}

/// Inverse of [`dft_forward`], normalized so the round trip is the identity.
pub(crate) fn dft_inverse(values: &mut Vec<Complex64>, n: usize, dim: usize) {
    match dim {
        1 => fft_1d(values, false),
        2 => {
            for row in values.chunks_exact_mut(n) {
                fft_1d(row, false);
            }
            let mut t = vec![Complex64::new(0.0, 0.0); values.len()];
            transpose(values, n, &mut t);
            for row in t.chunks_exact_mut(n) {
                fft_1d(row, false);
            }
            transpose(&t, n, values);
        }
        _ => unreachable!("cartesian grids are 1- or 2-dimensional"),
    }
    let scale = 1.0 / values.len() as f64;
    for z in values.iter_mut() {
        *z *= scale;
    }
}

/// Angular wavenumbers in FFT storage order for `points` nodes on
/// `[-half_width, half_width)`: xi_k = pi * m / half_width with the integer
/// mode m running over [-points/2, points/2).
pub(crate) fn wavenumbers(points: usize, half_width: f64) -> Vec<f64> {
    let base = std::f64::consts::PI / half_width;
    (0..points)
        .map(|k| {
            let m = if k < points.div_ceil(2) {
                k as i64
            } else {
                k as i64 - points as i64
            };
            base * m as f64
        })
        .collect()
}
