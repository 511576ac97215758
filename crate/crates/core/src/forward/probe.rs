//! Probe inputs (v0, h) for the fibered boundary operator, and traces on
//! the lateral boundary Sigma*' = (0,T) x (0,1) x d(omega).

use num_complex::Complex64;

use crate::lattice::{ComplexField, Face, Layout, NormTag, SpaceTimeGrid};
use crate::{CoreError, Result};

/// Samples on the lateral boundary, indexed (t, x1, face, position along
/// the face). Faces are ordered as in [`Face::ALL`]; position k runs over
/// the interior nodes of the transverse coordinate.
#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub dims: [usize; 4],
    pub data: Vec<Complex64>,
}

impl BoundaryTrace {
    pub fn zeros(grid: &SpaceTimeGrid) -> Self {
        let dims = [grid.nt + 1, grid.nx1, 4, grid.cross.n_side()];
        Self {
            data: vec![Complex64::new(0.0, 0.0); dims.iter().product()],
            dims,
        }
    }

    pub fn from_fn(
        grid: &SpaceTimeGrid,
        f: impl Fn(f64, f64, Face, f64) -> Complex64,
    ) -> Self {
        let mut out = Self::zeros(grid);
        let mut idx = 0;
        for i0 in 0..=grid.nt {
            let t = grid.t_node(i0);
            for i1 in 0..grid.nx1 {
                let x1 = grid.x1_node(i1);
                for face in Face::ALL {
                    for k in 0..grid.cross.n_side() {
                        out.data[idx] = f(t, x1, face, grid.cross.node(k));
                        idx += 1;
                    }
                }
            }
        }
        out
    }

    #[inline]
    pub fn idx(&self, i0: usize, i1: usize, face: usize, k: usize) -> usize {
        ((i0 * self.dims[1] + i1) * 4 + face) * self.dims[3] + k
    }

    #[inline]
    pub fn get(&self, i0: usize, i1: usize, face: usize, k: usize) -> Complex64 {
        self.data[self.idx(i0, i1, face, k)]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.norm_sqr() == 0.0)
    }

    /// Squared L^2(Sigma) norm: trapezoid in t, uniform in x1 and arclength.
    pub fn norm_l2_sq(&self, grid: &SpaceTimeGrid) -> f64 {
        let [d0, _, _, _] = self.dims;
        let dt = grid.dt();
        let w_space = grid.h1() * grid.cross.h();
        let per_t = self.dims[1] * 4 * self.dims[3];
        let mut total = 0.0;
        for i0 in 0..d0 {
            let tw = if i0 == 0 || i0 + 1 == d0 { 0.5 * dt } else { dt };
            let s: f64 = self.data[i0 * per_t..(i0 + 1) * per_t]
                .iter()
                .map(|v| v.norm_sqr())
                .sum();
            total += tw * s;
        }
        total * w_space
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(CoreError::ShapeMismatch("boundary trace dims differ".into()));
        }
        Ok(Self {
            dims: self.dims,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// Declared norm of a probe in the trace space, used as the denominator of
/// operator-norm estimates. When the probe comes from a known lifting field
/// the proxy is that field's discrete H^2(0,T;H^2) norm; otherwise a fixed
/// L^2-type trace stencil.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProxyNorm {
    FromLifting(f64),
    TraceStencil(f64),
}

impl ProxyNorm {
    pub fn value(&self) -> f64 {
        match self {
            ProxyNorm::FromLifting(v) | ProxyNorm::TraceStencil(v) => *v,
        }
    }
}

/// Dirichlet probe (v0, h) for one fiber, with the declared proxy norm.
#[derive(Clone, Debug)]
pub struct ProbeInput {
    pub theta: f64,
    /// Initial state on Omega', raw samples (nx1, n, n).
    pub v0: Vec<Complex64>,
    /// Lateral Dirichlet data on Sigma*'.
    pub lateral: BoundaryTrace,
    /// Full space-time lifting when the probe comes from a known field.
    pub lifting: Option<ComplexField>,
    pub proxy: ProxyNorm,
}

impl ProbeInput {
    /// Probe with zero lateral data from an initial state.
    pub fn from_initial_state(grid: &SpaceTimeGrid, theta: f64, v0: Vec<Complex64>) -> Result<Self> {
        let n = grid.cross.n_side();
        if v0.len() != grid.nx1 * n * n {
            return Err(CoreError::ShapeMismatch("v0 plane size".into()));
        }
        let lateral = BoundaryTrace::zeros(grid);
        let proxy = trace_stencil_norm(grid, &v0, &lateral);
        Ok(Self {
            theta,
            v0,
            lateral,
            lifting: None,
            proxy: ProxyNorm::TraceStencil(proxy),
        })
    }

    /// Probe carrying explicit lateral data.
    pub fn from_parts(
        grid: &SpaceTimeGrid,
        theta: f64,
        v0: Vec<Complex64>,
        lateral: BoundaryTrace,
    ) -> Result<Self> {
        let n = grid.cross.n_side();
        if v0.len() != grid.nx1 * n * n {
            return Err(CoreError::ShapeMismatch("v0 plane size".into()));
        }
        let proxy = trace_stencil_norm(grid, &v0, &lateral);
        Ok(Self {
            theta,
            v0,
            lateral,
            lifting: None,
            proxy: ProxyNorm::TraceStencil(proxy),
        })
    }

    /// Probe whose data are the traces of a known quasi-periodic field: the
    /// initial plane and the lateral boundary values (one-sided quadratic
    /// extrapolation onto d(omega)). The proxy norm is the lifting field's
    /// H^2(0,T;H^2) proxy, which exhibits one admissible extension.
    pub fn from_lifting(field: &ComplexField) -> Result<Self> {
        let Layout::Waveguide { theta } = field.layout() else {
            return Err(CoreError::LayoutMismatch {
                expected: "waveguide".into(),
                got: field.layout().describe(),
            });
        };
        let grid = field.grid();
        let n = grid.cross.n_side();
        let mut v0 = vec![Complex64::new(0.0, 0.0); grid.nx1 * n * n];
        for i1 in 0..grid.nx1 {
            for i2 in 0..n {
                for i3 in 0..n {
                    v0[(i1 * n + i2) * n + i3] = field.get(0, i1, i2, i3);
                }
            }
        }
        let lateral = boundary_trace_of_field(field);
        let proxy = crate::lattice::sobolev_norm(field, NormTag::H2H2Waveguide)?;
        Ok(Self {
            theta,
            v0,
            lateral,
            lifting: Some(field.clone()),
            proxy: ProxyNorm::FromLifting(proxy),
        })
    }

    /// a * self + b * other (linear combinations probe the same fiber).
    pub fn linear_combination(&self, a: Complex64, b: Complex64, other: &Self) -> Result<Self> {
        if (self.theta - other.theta).abs() > 1e-14 {
            return Err(CoreError::InvalidParameter("probe thetas differ".into()));
        }
        let v0 = self
            .v0
            .iter()
            .zip(other.v0.iter())
            .map(|(x, y)| a * x + b * y)
            .collect();
        let data = self
            .lateral
            .data
            .iter()
            .zip(other.lateral.data.iter())
            .map(|(x, y)| a * x + b * y)
            .collect();
        let lateral = BoundaryTrace {
            dims: self.lateral.dims,
            data,
        };
        Ok(Self {
            theta: self.theta,
            v0,
            lateral,
            lifting: None,
            proxy: ProxyNorm::TraceStencil(0.0),
        })
    }
}

/// Extract boundary values of a waveguide field by quadratic extrapolation
/// from the three nearest interior nodes.
pub fn boundary_trace_of_field(field: &ComplexField) -> BoundaryTrace {
    let grid = field.grid();
    let n = grid.cross.n_side();
    let mut out = BoundaryTrace::zeros(grid);
    let ex = |a: Complex64, b: Complex64, c: Complex64| a * 3.0 - b * 3.0 + c;
    for i0 in 0..=grid.nt {
        for i1 in 0..grid.nx1 {
            for k in 0..n {
                let vals = [
                    ex(
                        field.get(i0, i1, 0, k),
                        field.get(i0, i1, 1, k),
                        field.get(i0, i1, 2, k),
                    ),
                    ex(
                        field.get(i0, i1, n - 1, k),
                        field.get(i0, i1, n - 2, k),
                        field.get(i0, i1, n - 3, k),
                    ),
                    ex(
                        field.get(i0, i1, k, 0),
                        field.get(i0, i1, k, 1),
                        field.get(i0, i1, k, 2),
                    ),
                    ex(
                        field.get(i0, i1, k, n - 1),
                        field.get(i0, i1, k, n - 2),
                        field.get(i0, i1, k, n - 3),
                    ),
                ];
                for (face, v) in vals.into_iter().enumerate() {
                    let idx = out.idx(i0, i1, face, k);
                    out.data[idx] = v;
                }
            }
        }
    }
    out
}

fn trace_stencil_norm(grid: &SpaceTimeGrid, v0: &[Complex64], lateral: &BoundaryTrace) -> f64 {
    let h = grid.cross.h();
    let sw = grid.h1() * h * h;
    let v0_sq: f64 = v0.iter().map(|v| v.norm_sqr()).sum::<f64>() * sw;
    (v0_sq + lateral.norm_l2_sq(grid)).sqrt()
}
