//! FFT and sine-transform plumbing: cached rustfft plans, strided axis
//! transforms over multi-dimensional arrays, and the orthonormal DST-I used
//! to diagonalize the Dirichlet Laplacian on the cross-section.
//!
//! Axis passes parallelize over the leading blocks; each block is a disjoint
//! slice and every line is transformed independently, so results do not
//! depend on the worker count.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use crate::exec;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Cached FFT plan of the given length; `inverse` selects the sign.
pub fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut map = PLANS.lock().unwrap();
    map.entry((len, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// Signed frequency index of FFT bin `bin` for transform length `n`.
pub fn signed_freq(bin: usize, n: usize) -> i64 {
    if bin < n / 2 {
        bin as i64
    } else {
        bin as i64 - n as i64
    }
}

/// In-place FFT along `axis` of a row-major array with extents `dims`.
/// Forward is unnormalized; the inverse divides by the axis length.
pub fn fft_axis(data: &mut [Complex64], dims: &[usize], axis: usize, inverse: bool) {
    let m = dims[axis];
    if m == 1 {
        return;
    }
    let stride: usize = dims[axis + 1..].iter().product();
    let block = m * stride;
    let fft = plan(m, inverse);
    let scratch_len = fft.get_inplace_scratch_len();
    let scale = if inverse { 1.0 / m as f64 } else { 1.0 };

    exec::for_each_chunk_mut(data, block, |_, chunk| {
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        for post in 0..stride {
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = chunk[post + k * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (k, slot) in line.iter().enumerate() {
                chunk[post + k * stride] = *slot * scale;
            }
        }
    });
}

/// Orthonormal DST-I on `n` interior nodes:
/// (S f)_p = sqrt(2/(n+1)) sum_j sin(pi (p+1)(j+1)/(n+1)) f_j.
/// S is symmetric and involutory, so it is its own inverse.
#[derive(Clone, Debug)]
pub struct DstPlan {
    n: usize,
    mat: Vec<f64>,
}

static DST_PLANS: Lazy<Mutex<HashMap<usize, Arc<DstPlan>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

impl DstPlan {
    pub fn get(n: usize) -> Arc<DstPlan> {
        let mut map = DST_PLANS.lock().unwrap();
        map.entry(n)
            .or_insert_with(|| {
                let norm = (2.0 / (n as f64 + 1.0)).sqrt();
                let mut mat = vec![0.0; n * n];
                for p in 0..n {
                    for j in 0..n {
                        mat[p * n + j] =
                            norm * (PI * (p as f64 + 1.0) * (j as f64 + 1.0) / (n as f64 + 1.0)).sin();
                    }
                }
                Arc::new(DstPlan { n, mat })
            })
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply_line(&self, input: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        for p in 0..n {
            let row = &self.mat[p * n..(p + 1) * n];
            let mut acc = Complex64::new(0.0, 0.0);
            for (w, v) in row.iter().zip(input.iter()) {
                acc += *v * *w;
            }
            out[p] = acc;
        }
    }
}

/// In-place DST-I along `axis`.
pub fn dst_axis(data: &mut [Complex64], dims: &[usize], axis: usize, plan: &DstPlan) {
    let m = dims[axis];
    assert_eq!(m, plan.n());
    let stride: usize = dims[axis + 1..].iter().product();
    let block = m * stride;

    exec::for_each_chunk_mut(data, block, |_, chunk| {
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut out = vec![Complex64::new(0.0, 0.0); m];
        for post in 0..stride {
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = chunk[post + k * stride];
            }
            plan.apply_line(&line, &mut out);
            for (k, slot) in out.iter().enumerate() {
                chunk[post + k * stride] = *slot;
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_roundtrip_is_identity() {
        let dims = [4usize, 8, 3];
        let len: usize = dims.iter().product();
        let mut data: Vec<Complex64> = (0..len)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos()))
            .collect();
        let orig = data.clone();
        fft_axis(&mut data, &dims, 1, false);
        fft_axis(&mut data, &dims, 1, true);
        let err: f64 = data
            .iter()
            .zip(orig.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn dst_is_involutory_and_diagonalizes_modes() {
        let n = 6;
        let plan = DstPlan::get(n);
        // S applied twice is the identity
        let line: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(j as f64 + 0.5, -(j as f64)))
            .collect();
        let mut once = vec![Complex64::new(0.0, 0.0); n];
        let mut twice = vec![Complex64::new(0.0, 0.0); n];
        plan.apply_line(&line, &mut once);
        plan.apply_line(&once, &mut twice);
        for (a, b) in twice.iter().zip(line.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        // a pure sine mode maps to a single coefficient
        let p0 = 2usize;
        let mode: Vec<Complex64> = (0..n)
            .map(|j| {
                Complex64::new(
                    (PI * (p0 as f64 + 1.0) * (j as f64 + 1.0) / (n as f64 + 1.0)).sin(),
                    0.0,
                )
            })
            .collect();
        let mut coeff = vec![Complex64::new(0.0, 0.0); n];
        plan.apply_line(&mode, &mut coeff);
        for (p, c) in coeff.iter().enumerate() {
            if p == p0 {
                assert!((c.re - ((n as f64 + 1.0) / 2.0).sqrt()).abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn signed_freq_convention() {
        assert_eq!(signed_freq(0, 8), 0);
        assert_eq!(signed_freq(3, 8), 3);
        assert_eq!(signed_freq(4, 8), -4);
        assert_eq!(signed_freq(7, 8), -1);
    }
}
