//! Shifted-lattice Fourier analysis on the periodic box.
//!
//! Box fields are modulated: f = e^{i theta x1} e^{i pi x2 / (2R)} G with G
//! fully periodic over (-R,R) x (0,1) x (-R,R)^2. The orthonormal basis is
//! phi_alpha(y) = (2R)^{-3/2} e^{i alpha . y} with alpha on the lattice
//!
//!   alpha0 in (pi/R) Z,   alpha1 in theta + 2 pi Z,
//!   alpha2 in pi/(2R) + (pi/R) Z,   alpha3 in (pi/R) Z.
//!
//! The x2 half-step shift guarantees |alpha2| >= pi/(2R) exactly on the
//! integer lattice, which is what bounds the Faddeev-type resolvent.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{CoreError, Result};

use super::fftutil::{fft_axis, signed_freq};
use super::{ComplexField, Layout, SpaceTimeGrid};

/// Integer labels (n0, n1, n2, n3) of a lattice frequency.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeIndex {
    pub n: [i64; 4],
}

impl ModeIndex {
    /// Real frequency vector alpha for a box of half-width R at fiber angle
    /// theta.
    pub fn alpha(&self, theta: f64, box_r: f64) -> [f64; 4] {
        [
            PI * self.n[0] as f64 / box_r,
            theta + 2.0 * PI * self.n[1] as f64,
            PI / (2.0 * box_r) + PI * self.n[2] as f64 / box_r,
            PI * self.n[3] as f64 / box_r,
        ]
    }

    /// |alpha2| >= pi/(2R) holds for every integer n2: on the integer
    /// lattice this is |2 n2 + 1| >= 1, which never fails.
    pub fn alpha2_shift_units(&self) -> i64 {
        2 * self.n[2] + 1
    }
}

/// The discrete H^2(t; H^2(x)) weight family on the box lattice.
pub struct SobolevWeight;

impl SobolevWeight {
    /// Principal weight W(alpha) = (1 + a0^2 + a0^4) (sum_{j,l} aj^2 al^2);
    /// the spatial double sum collapses to (a1^2+a2^2+a3^2)^2.
    pub fn principal(alpha: [f64; 4]) -> f64 {
        let s = alpha[1] * alpha[1] + alpha[2] * alpha[2] + alpha[3] * alpha[3];
        Self::time_factor(alpha[0]) * s * s
    }

    /// Full norm weight including all lower-order derivative combinations:
    /// (1 + a0^2 + a0^4)(1 + s + s^2) with s the spatial frequency square.
    pub fn full(alpha: [f64; 4]) -> f64 {
        let s = alpha[1] * alpha[1] + alpha[2] * alpha[2] + alpha[3] * alpha[3];
        Self::time_factor(alpha[0]) * (1.0 + s + s * s)
    }

    pub fn time_factor(a0: f64) -> f64 {
        let a2 = a0 * a0;
        1.0 + a2 + a2 * a2
    }
}

/// Coefficients <f, phi_alpha> over the truncated lattice, stored in FFT bin
/// order with the same extents as the box grid.
#[derive(Clone, Debug)]
pub struct BoxCoefficients {
    grid: SpaceTimeGrid,
    theta: f64,
    dims: [usize; 4],
    data: Vec<Complex64>,
}

impl BoxCoefficients {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    /// Mode labels of a flat bin index.
    pub fn mode_of(&self, flat: usize) -> ModeIndex {
        let [d0, d1, d2, d3] = self.dims;
        let i3 = flat % d3;
        let i2 = (flat / d3) % d2;
        let i1 = (flat / (d3 * d2)) % d1;
        let i0 = flat / (d3 * d2 * d1);
        ModeIndex {
            n: [
                signed_freq(i0, d0),
                signed_freq(i1, d1),
                signed_freq(i2, d2),
                signed_freq(i3, d3),
            ],
        }
    }

    /// Flat bin index of a mode, if representable on this truncation.
    pub fn bin_of(&self, mode: ModeIndex) -> Option<usize> {
        let [d0, d1, d2, d3] = self.dims;
        let wrap = |n: i64, d: usize| -> Option<usize> {
            let half = d as i64 / 2;
            if n < -half || n >= half {
                None
            } else {
                Some(n.rem_euclid(d as i64) as usize)
            }
        };
        let i0 = wrap(mode.n[0], d0)?;
        let i1 = wrap(mode.n[1], d1)?;
        let i2 = wrap(mode.n[2], d2)?;
        let i3 = wrap(mode.n[3], d3)?;
        Some(((i0 * d1 + i1) * d2 + i2) * d3 + i3)
    }

    /// Per-axis frequency tables in bin order; hot loops index these
    /// instead of recomputing alpha per sample.
    pub fn alpha_tables(&self) -> [Vec<f64>; 4] {
        let r = self.grid.box_r;
        let [d0, d1, d2, d3] = self.dims;
        let a0 = (0..d0).map(|b| PI * signed_freq(b, d0) as f64 / r).collect();
        let a1 = (0..d1)
            .map(|b| self.theta + 2.0 * PI * signed_freq(b, d1) as f64)
            .collect();
        let a2 = (0..d2)
            .map(|b| PI / (2.0 * r) + PI * signed_freq(b, d2) as f64 / r)
            .collect();
        let a3 = (0..d3).map(|b| PI * signed_freq(b, d3) as f64 / r).collect();
        [a0, a1, a2, a3]
    }

    /// sum |c_alpha|^2, which equals the squared L^2(O) norm of the field.
    pub fn l2_norm_sq(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Weighted norm sum W(alpha)|c_alpha|^2 for the full H^2 weight.
    pub fn h2_norm_sq(&self) -> f64 {
        let [a0, a1, a2, a3] = self.alpha_tables();
        let [d0, d1, d2, d3] = self.dims;
        let mut total = 0.0;
        let mut flat = 0;
        for i0 in 0..d0 {
            let t = SobolevWeight::time_factor(a0[i0]);
            for i1 in 0..d1 {
                let f1 = a1[i1] * a1[i1];
                for i2 in 0..d2 {
                    let f12 = f1 + a2[i2] * a2[i2];
                    for i3 in 0..d3 {
                        let s = f12 + a3[i3] * a3[i3];
                        total += t * (1.0 + s + s * s) * self.data[flat].norm_sqr();
                        flat += 1;
                    }
                }
            }
        }
        total
    }
}

fn demodulation(grid: &SpaceTimeGrid, theta: f64, conj: bool) -> (Vec<Complex64>, Vec<Complex64>) {
    let sign = if conj { -1.0 } else { 1.0 };
    let px1: Vec<Complex64> = (0..grid.nx1)
        .map(|j| Complex64::from_polar(1.0, sign * theta * grid.x1_node(j)))
        .collect();
    let px2: Vec<Complex64> = (0..grid.nx2_box)
        .map(|m| {
            Complex64::from_polar(1.0, sign * PI * grid.box_x2_node(m) / (2.0 * grid.box_r))
        })
        .collect();
    (px1, px2)
}

/// Forward shifted-lattice transform: coefficients <f, phi_alpha>.
///
/// Implemented by demodulating the two shifts (e^{-i theta x1},
/// e^{-i pi x2/(2R)}) and applying plain DFTs per axis.
pub fn box_fourier_forward(f: &ComplexField, theta: f64) -> Result<BoxCoefficients> {
    let Layout::Box3 { theta: lt } = f.layout() else {
        return Err(CoreError::LayoutMismatch {
            expected: "box".into(),
            got: f.layout().describe(),
        });
    };
    if (lt - theta).abs() > 1e-12 {
        return Err(CoreError::InvalidParameter(format!(
            "field carries theta={lt}, transform requested theta={theta}"
        )));
    }
    let grid = *f.grid();
    let dims = f.dims();
    let [d0, d1, d2, d3] = dims;
    let (px1, px2) = demodulation(&grid, theta, true);

    let mut data = f.data().to_vec();
    let mut flat = 0;
    for _i0 in 0..d0 {
        for i1 in 0..d1 {
            let p1 = px1[i1];
            for i2 in 0..d2 {
                let p12 = p1 * px2[i2];
                for _i3 in 0..d3 {
                    data[flat] *= p12;
                    flat += 1;
                }
            }
        }
    }
    for axis in 0..4 {
        fft_axis(&mut data, &dims, axis, false);
    }
    // c_n = (2R)^{3/2}/prod(N) * (-1)^{n0+n2+n3} * Ghat(n), the sign coming
    // from referencing the t, x2, x3 axes to -R instead of 0.
    let r = grid.box_r;
    let scale = (2.0 * r).powf(1.5) / (d0 * d1 * d2 * d3) as f64;
    let mut flat = 0;
    for i0 in 0..d0 {
        let s0 = signed_freq(i0, d0);
        for _i1 in 0..d1 {
            for i2 in 0..d2 {
                let s02 = s0 + signed_freq(i2, d2);
                for i3 in 0..d3 {
                    let parity = (s02 + signed_freq(i3, d3)).rem_euclid(2);
                    let sgn = if parity == 0 { scale } else { -scale };
                    data[flat] *= sgn;
                    flat += 1;
                }
            }
        }
    }
    Ok(BoxCoefficients {
        grid,
        theta,
        dims,
        data,
    })
}

/// Inverse of [`box_fourier_forward`]; composes with it to the identity to
/// roundoff.
pub fn box_fourier_inverse(c: &BoxCoefficients) -> ComplexField {
    let grid = c.grid;
    let dims = c.dims;
    let [d0, d1, d2, d3] = dims;
    let r = grid.box_r;
    let scale = (d0 * d1 * d2 * d3) as f64 / (2.0 * r).powf(1.5);
    let mut data = c.data.clone();
    let mut flat = 0;
    for i0 in 0..d0 {
        let s0 = signed_freq(i0, d0);
        for _i1 in 0..d1 {
            for i2 in 0..d2 {
                let s02 = s0 + signed_freq(i2, d2);
                for i3 in 0..d3 {
                    let parity = (s02 + signed_freq(i3, d3)).rem_euclid(2);
                    let sgn = if parity == 0 { scale } else { -scale };
                    data[flat] *= sgn;
                    flat += 1;
                }
            }
        }
    }
    for axis in 0..4 {
        fft_axis(&mut data, &dims, axis, true);
    }
    let (px1, px2) = demodulation(&grid, c.theta, false);
    let mut flat = 0;
    for _i0 in 0..d0 {
        for i1 in 0..d1 {
            let p1 = px1[i1];
            for i2 in 0..d2 {
                let p12 = p1 * px2[i2];
                for _i3 in 0..d3 {
                    data[flat] *= p12;
                    flat += 1;
                }
            }
        }
    }
    let mut out = ComplexField::zeros(&grid, Layout::Box3 { theta: c.theta });
    out.data_mut().copy_from_slice(&data);
    out
}

/// Sample the basis function phi_alpha on the box grid.
pub fn basis_field(grid: &SpaceTimeGrid, theta: f64, mode: ModeIndex) -> ComplexField {
    let alpha = mode.alpha(theta, grid.box_r);
    let norm = (2.0 * grid.box_r).powf(-1.5);
    ComplexField::from_fn(grid, Layout::Box3 { theta }, |t, x1, x2, x3| {
        Complex64::from_polar(
            norm,
            alpha[0] * t + alpha[1] * x1 + alpha[2] * x2 + alpha[3] * x3,
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CrossSection;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(
            1.0,
            8,
            8,
            CrossSection::new(0.5, 4).unwrap(),
            1.75,
            8,
            16,
            16,
        )
        .unwrap()
    }

    #[test]
    fn basis_mode_transforms_to_unit_coefficient() {
        let g = grid();
        let theta = 0.9;
        let mode = ModeIndex { n: [1, -2, 0, 3] };
        let f = basis_field(&g, theta, mode);
        let c = box_fourier_forward(&f, theta).unwrap();
        let bin = c.bin_of(mode).unwrap();
        for (i, v) in c.data().iter().enumerate() {
            if i == bin {
                assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-10, "got {v}");
            } else {
                assert!(v.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_field_has_zero_coefficients() {
        let g = grid();
        let f = ComplexField::zeros(&g, Layout::Box3 { theta: 0.3 });
        let c = box_fourier_forward(&f, 0.3).unwrap();
        assert!(c.data().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn parseval_and_roundtrip() {
        let g = grid();
        let theta = 2.2;
        // deterministic pseudo-random field
        let f = ComplexField::from_fn(&g, Layout::Box3 { theta }, |t, x1, x2, x3| {
            let a = (7.1 * t + 3.0 * x1).sin() + 0.3 * (5.0 * x2 - 2.0 * x3).cos();
            let b = (2.3 * t - x1 + 4.0 * x2 * x3).sin();
            Complex64::new(a, b)
        });
        let c = box_fourier_forward(&f, theta).unwrap();
        let direct = f.norm_l2_sq();
        assert!(
            (c.l2_norm_sq() - direct).abs() <= 1e-10 * direct,
            "parseval {} vs {}",
            c.l2_norm_sq(),
            direct
        );
        let back = box_fourier_inverse(&c);
        let diff: f64 = back
            .data()
            .iter()
            .zip(f.data().iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-10 * direct.sqrt());
    }

    #[test]
    fn shifted_lattice_never_contains_zero_alpha2() {
        let g = grid();
        let f = ComplexField::zeros(&g, Layout::Box3 { theta: 0.0 });
        let c = box_fourier_forward(&f, 0.0).unwrap();
        for flat in 0..c.data().len() {
            // integer-lattice assertion, no float compare
            assert_ne!(c.mode_of(flat).alpha2_shift_units(), 0);
        }
    }

    #[test]
    fn layout_mismatch_rejected() {
        let g = grid();
        let f = ComplexField::zeros(&g, Layout::Waveguide { theta: 0.0 });
        assert!(box_fourier_forward(&f, 0.0).is_err());
    }

    #[test]
    fn sobolev_weight_of_single_mode() {
        let g = grid();
        let theta = 0.4;
        let mode = ModeIndex { n: [1, 0, -1, 2] };
        let alpha = mode.alpha(theta, g.box_r);
        let f = basis_field(&g, theta, mode);
        let c = box_fourier_forward(&f, theta).unwrap();
        // closed-form weight evaluation is the oracle
        let expected = SobolevWeight::full(alpha);
        assert!((c.h2_norm_sq() - expected).abs() < 1e-8 * expected);
        let s: f64 = alpha[1] * alpha[1] + alpha[2] * alpha[2] + alpha[3] * alpha[3];
        assert!(
            (SobolevWeight::principal(alpha) - SobolevWeight::time_factor(alpha[0]) * s * s).abs()
                < 1e-12
        );
    }
}
