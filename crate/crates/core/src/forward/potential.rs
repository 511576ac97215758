//! Real scalar potentials sampled on the waveguide grid.

use crate::lattice::SpaceTimeGrid;
use crate::{CoreError, Result};

/// Structural claims about a potential (or a difference of potentials),
/// verified where the samples allow it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PotentialFlags {
    /// 1-periodicity in x1; holds by construction for fields defined on one
    /// cell.
    pub periodic_ok: bool,
    /// Vanishes at t = 0 and t = T (difference condition).
    pub endpoint_zero: bool,
    /// Vanishes on the lateral boundary (0,T) x (0,1) x d(omega).
    pub lateral_zero: bool,
}

/// Samples of a real potential on (nt+1, nx1, n, n), with its max-norm bound
/// standing in for the W^{2,inf} budget of the problem class.
#[derive(Clone, Debug)]
pub struct Potential {
    grid: SpaceTimeGrid,
    data: Vec<f64>,
    flags: PotentialFlags,
    max_abs: f64,
}

impl Potential {
    pub fn zero(grid: &SpaceTimeGrid) -> Self {
        let n = grid.cross.n_side();
        Self {
            grid: *grid,
            data: vec![0.0; (grid.nt + 1) * grid.nx1 * n * n],
            flags: PotentialFlags {
                periodic_ok: true,
                endpoint_zero: true,
                lateral_zero: true,
            },
            max_abs: 0.0,
        }
    }

    /// Sample an analytic potential. Claimed flags are verified: periodicity
    /// and lateral vanishing by evaluating the closure at x1 = 1 and on the
    /// boundary nodes, endpoint vanishing sample-wise.
    pub fn from_fn(
        grid: &SpaceTimeGrid,
        claim: PotentialFlags,
        f: impl Fn(f64, f64, f64, f64) -> f64,
    ) -> Result<Self> {
        let n = grid.cross.n_side();
        let (nt, nx1) = (grid.nt, grid.nx1);
        let mut data = vec![0.0; (nt + 1) * nx1 * n * n];
        let mut idx = 0;
        for i0 in 0..=nt {
            let t = grid.t_node(i0);
            for i1 in 0..nx1 {
                let x1 = grid.x1_node(i1);
                for i2 in 0..n {
                    let x2 = grid.cross.node(i2);
                    for i3 in 0..n {
                        data[idx] = f(t, x1, x2, grid.cross.node(i3));
                        idx += 1;
                    }
                }
            }
        }
        let tol = 1e-12;
        if claim.periodic_ok {
            for i0 in [0usize, nt / 2, nt] {
                let t = grid.t_node(i0);
                for i2 in 0..n {
                    let x2 = grid.cross.node(i2);
                    if (f(t, 1.0, x2, 0.0) - f(t, 0.0, x2, 0.0)).abs() > tol {
                        return Err(CoreError::InvalidParameter(
                            "potential claimed 1-periodic in x1 but is not".into(),
                        ));
                    }
                }
            }
        }
        if claim.lateral_zero {
            let hw = grid.cross.half_width();
            for i0 in [0usize, nt / 2, nt] {
                let t = grid.t_node(i0);
                for i1 in 0..nx1 {
                    let x1 = grid.x1_node(i1);
                    for k in 0..n {
                        let u = grid.cross.node(k);
                        for v in [
                            f(t, x1, -hw, u),
                            f(t, x1, hw, u),
                            f(t, x1, u, -hw),
                            f(t, x1, u, hw),
                        ] {
                            if v.abs() > tol {
                                return Err(CoreError::InvalidParameter(
                                    "potential claimed zero on the lateral boundary but is not"
                                        .into(),
                                ));
                            }
                        }
                    }
                }
            }
        }
        let mut p = Self {
            grid: *grid,
            data,
            flags: claim,
            max_abs: 0.0,
        };
        p.max_abs = p.data.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if claim.endpoint_zero {
            p.verify_endpoint_zero()?;
        }
        if !p.data.iter().all(|v| v.is_finite()) {
            return Err(CoreError::NonFinite("potential samples".into()));
        }
        Ok(p)
    }

    fn verify_endpoint_zero(&self) -> Result<()> {
        let plane = self.plane_len();
        let last = self.grid.nt * plane;
        let bad = self.data[..plane].iter().any(|v| v.abs() > 1e-12)
            || self.data[last..last + plane].iter().any(|v| v.abs() > 1e-12);
        if bad {
            Err(CoreError::InvalidParameter(
                "potential claimed zero at t = 0, T but is not".into(),
            ))
        } else {
            Ok(())
        }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn flags(&self) -> PotentialFlags {
        self.flags
    }

    /// Max-norm proxy for the a-priori bound M.
    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn plane_len(&self) -> usize {
        let n = self.grid.cross.n_side();
        self.grid.nx1 * n * n
    }

    /// Spatial plane at time level i0.
    pub fn plane(&self, i0: usize) -> &[f64] {
        let plane = self.plane_len();
        &self.data[i0 * plane..(i0 + 1) * plane]
    }

    /// self + c * other, with flags intersected.
    pub fn add_scaled(&self, c: f64, other: &Potential) -> Result<Potential> {
        if self.grid != other.grid {
            return Err(CoreError::ShapeMismatch("potential grids differ".into()));
        }
        let data: Vec<f64> = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a + c * b)
            .collect();
        let flags = PotentialFlags {
            periodic_ok: self.flags.periodic_ok && other.flags.periodic_ok,
            endpoint_zero: self.flags.endpoint_zero && other.flags.endpoint_zero,
            lateral_zero: self.flags.lateral_zero && other.flags.lateral_zero,
        };
        let max_abs = data.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        Ok(Potential {
            grid: self.grid,
            data,
            flags,
            max_abs,
        })
    }

    /// Difference other - self (the recovery target V2 - V1).
    pub fn difference(&self, other: &Potential) -> Result<Potential> {
        other.add_scaled(-1.0, self)
    }

    /// L^2(Q') norm with the field quadrature.
    pub fn norm_l2(&self) -> f64 {
        let plane = self.plane_len();
        let h = self.grid.cross.h();
        let sw = self.grid.h1() * h * h;
        let dt = self.grid.dt();
        let mut total = 0.0;
        for i0 in 0..=self.grid.nt {
            let tw = if i0 == 0 || i0 == self.grid.nt { 0.5 * dt } else { dt };
            let s: f64 = self.data[i0 * plane..(i0 + 1) * plane]
                .iter()
                .map(|v| v * v)
                .sum();
            total += tw * s;
        }
        (total * sw).sqrt()
    }
}
