//! Sobolev-type norms.
//!
//! The box norm is spectral: sum of H^2(t;H^2(x)) weights over shifted-
//! lattice coefficients. The waveguide norm is the declared discrete proxy
//! for H^2(0,T;H^2(Omega')): spectral weights in t (after even reflection)
//! and in x1 (demodulated by the fiber angle), second-order finite
//! differences in the cross-section, all combined as a weighted l^2 sum.
//! Both are genuine norms: nonnegative, homogeneous, and subadditive by
//! construction.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::{exec, CoreError, Result};

use super::fftutil::{fft_axis, signed_freq};
use super::field::{ComplexField, Layout};
use super::modes::{box_fourier_forward, SobolevWeight};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormTag {
    L2,
    H2H2Box,
    H2H2Waveguide,
}

pub fn sobolev_norm(f: &ComplexField, tag: NormTag) -> Result<f64> {
    match tag {
        NormTag::L2 => Ok(f.norm_l2()),
        NormTag::H2H2Box => {
            let Layout::Box3 { theta } = f.layout() else {
                return Err(CoreError::LayoutMismatch {
                    expected: "box".into(),
                    got: f.layout().describe(),
                });
            };
            let c = box_fourier_forward(f, theta)?;
            Ok(c.h2_norm_sq().sqrt())
        }
        NormTag::H2H2Waveguide => waveguide_h2h2(f),
    }
}

fn waveguide_h2h2(f: &ComplexField) -> Result<f64> {
    let Layout::Waveguide { theta } = f.layout() else {
        return Err(CoreError::LayoutMismatch {
            expected: "waveguide".into(),
            got: f.layout().describe(),
        });
    };
    let g = f.grid();
    let (nt, nx1, n) = (g.nt, g.nx1, g.cross.n_side());
    let t_ext = 2 * nt;
    let plane = n * n;

    // demodulate the quasi-periodic phase and reflect evenly in time
    let mut data = vec![Complex64::new(0.0, 0.0); t_ext * nx1 * plane];
    for j0 in 0..t_ext {
        let src_t = if j0 <= nt { j0 } else { t_ext - j0 };
        for i1 in 0..nx1 {
            let phase = Complex64::from_polar(1.0, -theta * g.x1_node(i1));
            let dst = (j0 * nx1 + i1) * plane;
            let src = f.idx(src_t, i1, 0, 0);
            for k in 0..plane {
                data[dst + k] = f.data()[src + k] * phase;
            }
        }
    }
    let dims = [t_ext, nx1, n, n];
    fft_axis(&mut data, &dims, 0, false);
    fft_axis(&mut data, &dims, 1, false);
    let norm = 1.0 / (t_ext * nx1) as f64;
    for v in data.iter_mut() {
        *v *= norm;
    }

    let h = g.cross.h();
    let quad = h * h;
    let bins = t_ext * nx1;
    let partial = exec::map_indexed(bins, |bin| {
        let m0 = bin / nx1;
        let n1 = bin % nx1;
        let m_t = m0.min(t_ext - m0) as f64;
        let a0 = PI * m_t / g.t_final;
        let a1 = theta + 2.0 * PI * signed_freq(n1, nx1) as f64;
        let a1s = a1 * a1;
        let slice = &data[bin * plane..(bin + 1) * plane];
        let s0 = sum_sq(slice);
        let (d2, d22) = fd_norms_axis(slice, n, h, true);
        let (d3, d33) = fd_norms_axis(slice, n, h, false);
        let d23 = fd_cross_norm(slice, n, h);
        let spatial = (1.0 + a1s + a1s * a1s) * s0
            + (1.0 + a1s) * (d2 + d3)
            + d22
            + d33
            + d23;
        SobolevWeight::time_factor(a0) * spatial * quad
    });
    let total: f64 = partial.iter().sum();
    Ok((2.0 * g.t_final * total).sqrt())
}

fn sum_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// First and second difference line operators, one-sided at the edges.
fn fd_line_first(line: &[Complex64], h: f64, out: &mut [Complex64]) {
    let n = line.len();
    let inv = 1.0 / (2.0 * h);
    out[0] = (line[0] * -3.0 + line[1] * 4.0 - line[2]) * inv;
    for j in 1..n - 1 {
        out[j] = (line[j + 1] - line[j - 1]) * inv;
    }
    out[n - 1] = (line[n - 1] * 3.0 - line[n - 2] * 4.0 + line[n - 3]) * inv;
}

fn fd_line_second(line: &[Complex64], h: f64, out: &mut [Complex64]) {
    let n = line.len();
    let inv = 1.0 / (h * h);
    out[0] = (line[0] * 2.0 - line[1] * 5.0 + line[2] * 4.0 - line[3]) * inv;
    for j in 1..n - 1 {
        out[j] = (line[j + 1] - line[j] * 2.0 + line[j - 1]) * inv;
    }
    out[n - 1] = (line[n - 1] * 2.0 - line[n - 2] * 5.0 + line[n - 3] * 4.0 - line[n - 4]) * inv;
}

/// Squared sums of first/second differences along one axis of an n x n slice.
fn fd_norms_axis(slice: &[Complex64], n: usize, h: f64, axis2: bool) -> (f64, f64) {
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for k in 0..n {
        for j in 0..n {
            line[j] = if axis2 { slice[j * n + k] } else { slice[k * n + j] };
        }
        fd_line_first(&line, h, &mut out);
        s1 += sum_sq(&out);
        fd_line_second(&line, h, &mut out);
        s2 += sum_sq(&out);
    }
    (s1, s2)
}

/// Squared sum of the mixed difference D2 D3.
fn fd_cross_norm(slice: &[Complex64], n: usize, h: f64) -> f64 {
    let mut tmp = vec![Complex64::new(0.0, 0.0); n * n];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    // d/dx3 along rows
    for j2 in 0..n {
        line.copy_from_slice(&slice[j2 * n..(j2 + 1) * n]);
        fd_line_first(&line, h, &mut out);
        tmp[j2 * n..(j2 + 1) * n].copy_from_slice(&out);
    }
    // then d/dx2 along columns
    let mut total = 0.0;
    for k in 0..n {
        for j in 0..n {
            line[j] = tmp[j * n + k];
        }
        fd_line_first(&line, h, &mut out);
        total += sum_sq(&out);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{CrossSection, SpaceTimeGrid};

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(
            1.0,
            8,
            8,
            CrossSection::new(0.5, 8).unwrap(),
            1.75,
            8,
            16,
            16,
        )
        .unwrap()
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let g = grid();
        for layout in [Layout::Waveguide { theta: 0.7 }, Layout::Box3 { theta: 0.7 }] {
            let f = ComplexField::zeros(&g, layout);
            assert_eq!(sobolev_norm(&f, NormTag::L2).unwrap(), 0.0);
        }
        let f = ComplexField::zeros(&g, Layout::Waveguide { theta: 0.7 });
        assert_eq!(sobolev_norm(&f, NormTag::H2H2Waveguide).unwrap(), 0.0);
        let f = ComplexField::zeros(&g, Layout::Box3 { theta: 0.7 });
        assert_eq!(sobolev_norm(&f, NormTag::H2H2Box).unwrap(), 0.0);
    }

    fn sample_field(g: &SpaceTimeGrid, layout: Layout) -> ComplexField {
        ComplexField::from_fn(g, layout, |t, x1, x2, x3| {
            Complex64::new((t + 2.0 * x2).sin() + x1, (x3 - 0.5 * t).cos())
        })
    }

    #[test]
    fn homogeneity_and_triangle_inequality() {
        let g = grid();
        for (layout, tag) in [
            (Layout::Waveguide { theta: 0.4 }, NormTag::H2H2Waveguide),
            (Layout::Box3 { theta: 0.4 }, NormTag::H2H2Box),
            (Layout::Waveguide { theta: 0.4 }, NormTag::L2),
        ] {
            let f = sample_field(&g, layout);
            let s = sobolev_norm(&f, tag).unwrap();
            let doubled = sobolev_norm(&f.scaled(Complex64::new(2.0, 0.0)), tag).unwrap();
            assert!(
                (doubled - 2.0 * s).abs() <= 1e-12 * s.max(1.0),
                "homogeneity for {tag:?}"
            );
            let other = ComplexField::from_fn(&g, layout, |t, x1, x2, x3| {
                Complex64::new(x2 * x3 - t, (x1 * 3.0).sin())
            });
            let so = sobolev_norm(&other, tag).unwrap();
            let mut sum = f.clone();
            sum.axpy(Complex64::new(1.0, 0.0), &other).unwrap();
            let ss = sobolev_norm(&sum, tag).unwrap();
            assert!(ss <= s + so + 1e-10, "triangle for {tag:?}");
        }
    }
}
