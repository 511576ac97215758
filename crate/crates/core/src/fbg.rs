//! Partial Floquet-Bloch-Gel'fand transform on a truncated cylinder of K
//! cells.
//!
//! The transform is a DFT across the cell index:
//!
//!   f_check_theta_m(t, x1, x') = sum_{k=0}^{K-1} e^{-i k theta_m} f(t, x1 + k, x'),
//!   theta_m = 2 pi m / K,
//!
//! with x1 in [0,1). The K fibers are the exact discrete dual of the K-cell
//! ring: the transform is unitary (up to the uniform fiber weight 1/K) and
//! every fiber is exactly quasi-periodic with its own angle, which the
//! stored wrap slice records.

use num_complex::Complex64;

use crate::lattice::{ComplexField, Layout};
use crate::{exec, CoreError, Result};

/// A fiber label m with its angle theta_m = 2 pi m / K.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberIndex {
    pub m: usize,
    pub cells: usize,
}

impl FiberIndex {
    pub fn theta(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.m as f64 / self.cells as f64
    }
}

/// The fibered image of a cylinder field: K quasi-periodic fields on Q',
/// with uniform fiber quadrature weight 1/K.
#[derive(Clone, Debug)]
pub struct FiberedField {
    pub cells: usize,
    pub fibers: Vec<ComplexField>,
}

impl FiberedField {
    pub fn fiber_weight(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn theta(&self, m: usize) -> f64 {
        FiberIndex { m, cells: self.cells }.theta()
    }

    /// (1/K) sum_m ||fiber_m||^2, the fibered L^2 norm squared.
    pub fn norm_l2_sq(&self) -> f64 {
        let w = self.fiber_weight();
        self.fibers.iter().map(|f| f.norm_l2_sq()).sum::<f64>() * w
    }
}

/// Decompose a K-cell cylinder field into its K fibers.
pub fn fbg_forward(f: &ComplexField, cells: usize) -> Result<FiberedField> {
    let Layout::Cylinder { cells: k } = f.layout() else {
        return Err(CoreError::LayoutMismatch {
            expected: format!("cylinder({cells} cells)"),
            got: f.layout().describe(),
        });
    };
    if k != cells {
        return Err(CoreError::ShapeMismatch(format!(
            "field holds {k} cells, fbg_forward called with K = {cells}"
        )));
    }
    let grid = *f.grid();
    let [d0, d1c, d2, d3] = f.dims();
    let nx1 = grid.nx1;
    let plane = d2 * d3;

    let fibers: Vec<ComplexField> = exec::map_indexed(cells, |m| {
        let theta = 2.0 * std::f64::consts::PI * m as f64 / cells as f64;
        let phases: Vec<Complex64> = (0..cells)
            .map(|c| Complex64::from_polar(1.0, -(c as f64) * theta))
            .collect();
        let mut out = ComplexField::zeros(&grid, Layout::Waveguide { theta });
        let [.., o2, o3] = out.dims();
        debug_assert_eq!((o2, o3), (d2, d3));
        for i0 in 0..d0 {
            for j in 0..nx1 {
                let dst = out.idx(i0, j, 0, 0);
                for (c, ph) in phases.iter().enumerate() {
                    let src = ((i0 * d1c) + (j + c * nx1)) * plane;
                    for p in 0..plane {
                        out.data_mut()[dst + p] += ph * f.data()[src + p];
                    }
                }
            }
        }
        // wrap slice at x1 = 1: the sum over cells shifted by one sample,
        // with the ring closing the last term; exactly e^{i theta} times
        // the x1 = 0 plane because K theta_m is a multiple of 2 pi.
        {
            let wrap = out.wrap_slice_mut().expect("waveguide field has wrap");
            for i0 in 0..d0 {
                for (c, ph) in phases.iter().enumerate() {
                    let shifted = (c * nx1 + nx1) % d1c;
                    let src = ((i0 * d1c) + shifted) * plane;
                    for p in 0..plane {
                        wrap[i0 * plane + p] += ph * f.data()[src + p];
                    }
                }
            }
        }
        out
    });
    Ok(FiberedField { cells, fibers })
}

/// Recompose a fibered field onto the K-cell cylinder (the adjoint of the
/// forward transform, with the uniform 1/K fiber weights).
pub fn fbg_inverse(ff: &FiberedField) -> Result<ComplexField> {
    if ff.fibers.len() != ff.cells || ff.cells == 0 {
        return Err(CoreError::ShapeMismatch(format!(
            "fibered field with {} fibers, K = {}",
            ff.fibers.len(),
            ff.cells
        )));
    }
    let grid = *ff.fibers[0].grid();
    let cells = ff.cells;
    let [d0, d1, d2, d3] = ff.fibers[0].dims();
    let plane = d2 * d3;
    let mut out = ComplexField::zeros(&grid, Layout::Cylinder { cells });
    let d1c = cells * d1;
    let weight = 1.0 / cells as f64;

    // fixed-order accumulation over fibers
    for (m, fiber) in ff.fibers.iter().enumerate() {
        let theta = ff.theta(m);
        for c in 0..cells {
            let ph = Complex64::from_polar(weight, c as f64 * theta);
            for i0 in 0..d0 {
                for j in 0..d1 {
                    let dst = ((i0 * d1c) + (j + c * d1)) * plane;
                    let src = fiber.idx(i0, j, 0, 0);
                    for p in 0..plane {
                        out.data_mut()[dst + p] += ph * fiber.data()[src + p];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Relative quasi-periodicity residual of a waveguide field against the
/// angle `theta`, evaluated on the wrap-around stencil.
pub fn quasi_periodicity_check(v: &ComplexField, theta: f64) -> Result<f64> {
    v.quasi_periodicity_residual(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{CrossSection, SpaceTimeGrid};

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(
            0.5,
            4,
            8,
            CrossSection::new(0.5, 5).unwrap(),
            1.75,
            8,
            16,
            16,
        )
        .unwrap()
    }

    fn random_cylinder(grid: &SpaceTimeGrid, cells: usize, seed: u64) -> ComplexField {
        // deterministic hash-based pseudo-random samples
        let mut f = ComplexField::zeros(grid, Layout::Cylinder { cells });
        let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        for v in f.data_mut() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let a = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let b = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            *v = Complex64::new(a, b);
        }
        f
    }

    #[test]
    fn single_cell_support_gives_equal_fibers() {
        let g = grid();
        let cells = 4;
        let mut f = ComplexField::zeros(&g, Layout::Cylinder { cells });
        let [d0, _, d2, d3] = f.dims();
        // support only on cell 0
        for i0 in 0..d0 {
            for j in 0..g.nx1 {
                for i2 in 0..d2 {
                    for i3 in 0..d3 {
                        f.set(i0, j, i2, i3, Complex64::new((i0 + j + i2) as f64, i3 as f64));
                    }
                }
            }
        }
        let ff = fbg_forward(&f, cells).unwrap();
        for m in 0..cells {
            for i0 in 0..d0 {
                for j in 0..g.nx1 {
                    let got = ff.fibers[m].get(i0, j, 1, 2);
                    let want = f.get(i0, j, 1, 2);
                    assert!((got - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bloch_wave_concentrates_on_one_fiber() {
        let g = grid();
        let cells = 8;
        let m0 = 3usize;
        let theta0 = 2.0 * std::f64::consts::PI * m0 as f64 / cells as f64;
        // f(t, x1 + k, x') = e^{i k theta_{m0}} g(t, x1, x')
        let f = ComplexField::from_fn(&g, Layout::Cylinder { cells }, |t, x1, x2, x3| {
            let k = x1.floor();
            Complex64::from_polar(1.0, k * theta0)
                * Complex64::new((t + x2).cos(), (x3 * 2.0).sin() + x1.fract())
        });
        let ff = fbg_forward(&f, cells).unwrap();
        // geometric-sum identity: K g on fiber m0, zero elsewhere
        for m in 0..cells {
            let norm = ff.fibers[m].norm_l2();
            if m == m0 {
                assert!(norm > 1.0);
            } else {
                assert!(norm < 1e-10 * cells as f64, "fiber {m} norm {norm}");
            }
        }
    }

    #[test]
    fn unitarity_and_roundtrip_for_all_k() {
        for cells in [2usize, 4, 8, 16] {
            let g = grid();
            let f = random_cylinder(&g, cells, 42 + cells as u64);
            let ff = fbg_forward(&f, cells).unwrap();
            let total = f.norm_l2_sq();
            assert!(
                (ff.norm_l2_sq() - total).abs() <= 1e-10 * total,
                "unitarity K={cells}"
            );
            let back = fbg_inverse(&ff).unwrap();
            let rel = back.sub(&f).unwrap().norm_l2() / f.norm_l2();
            assert!(rel <= 1e-10, "roundtrip K={cells}: {rel}");
        }
    }

    #[test]
    fn fibers_are_exactly_quasi_periodic() {
        let g = grid();
        let cells = 8;
        let f = random_cylinder(&g, cells, 7);
        let ff = fbg_forward(&f, cells).unwrap();
        for m in 0..cells {
            let res = quasi_periodicity_check(&ff.fibers[m], ff.theta(m)).unwrap();
            assert!(res <= 1e-10, "fiber {m} residual {res}");
        }
    }

    #[test]
    fn single_fiber_inverse_formula() {
        let g = grid();
        let cells = 4;
        let m0 = 1usize;
        let mut ff = FiberedField {
            cells,
            fibers: (0..cells)
                .map(|m| {
                    ComplexField::zeros(
                        &g,
                        Layout::Waveguide {
                            theta: 2.0 * std::f64::consts::PI * m as f64 / cells as f64,
                        },
                    )
                })
                .collect(),
        };
        let gfun = |t: f64, x1: f64, x2: f64, x3: f64| {
            Complex64::new(t + x1 + x2, x3 - 0.2)
        };
        ff.fibers[m0] = ComplexField::from_fn(
            &g,
            Layout::Waveguide {
                theta: ff.theta(m0),
            },
            gfun,
        );
        let back = fbg_inverse(&ff).unwrap();
        // explicit adjoint: f(., x1 + k, .) = (1/K) e^{i k theta_{m0}} g
        let theta0 = ff.theta(m0);
        for c in 0..cells {
            let ph = Complex64::from_polar(1.0 / cells as f64, c as f64 * theta0);
            let got = back.get(2, c * g.nx1 + 3, 1, 1);
            let want = ph * gfun(g.t_node(2), g.x1_node(3), g.cross.node(1), g.cross.node(1));
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_roundtrip() {
        let g = grid();
        let f = ComplexField::zeros(&g, Layout::Cylinder { cells: 2 });
        let ff = fbg_forward(&f, 2).unwrap();
        let back = fbg_inverse(&ff).unwrap();
        assert!(back.max_abs() == 0.0);
    }

    #[test]
    fn forward_commutes_with_time_differences() {
        // discrete (c3): cell-DFT commutes with any per-sample t stencil
        let g = grid();
        let cells = 4;
        let f = random_cylinder(&g, cells, 99);
        let dt = g.dt();
        let diff_t = |x: &ComplexField| {
            let mut out = x.clone();
            let [d0, d1, d2, d3] = x.dims();
            for i0 in 0..d0 {
                let (lo, hi) = (i0.max(1) - 1, (i0 + 1).min(d0 - 1));
                let scale = 1.0 / ((hi - lo) as f64 * dt);
                for i1 in 0..d1 {
                    for i2 in 0..d2 {
                        for i3 in 0..d3 {
                            let v = (x.get(hi, i1, i2, i3) - x.get(lo, i1, i2, i3)) * scale;
                            out.set(i0, i1, i2, i3, v);
                        }
                    }
                }
            }
            out
        };
        let route_a = fbg_forward(&diff_t(&f), cells).unwrap();
        let route_b = fbg_forward(&f, cells).unwrap();
        for m in 0..cells {
            let db = diff_t(&route_b.fibers[m]);
            let num = route_a.fibers[m]
                .data()
                .iter()
                .zip(db.data().iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(num <= 1e-12 * (1.0 + db.norm_l2()), "fiber {m}");
        }
    }
}
