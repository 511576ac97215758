//! Complex samples over a space-time grid.
//!
//! Three layouts share one storage type:
//!
//! * `Cylinder { cells: K }` — (0,T) x (0,K) x omega with a periodic (ring)
//!   x1 axis of K*nx1 samples; the input side of the FBG transform.
//! * `Waveguide { theta }` — one period cell (0,T) x (0,1) x omega carrying
//!   a quasi-periodicity angle theta. Fields of this layout additionally
//!   store the wrap slice, the sample plane at x1 = 1, which a genuinely
//!   quasi-periodic field determines as e^{i theta} times the x1 = 0 plane.
//!   The quasi-periodicity check compares exactly these stored values.
//! * `Box3 { theta }` — the periodic Fourier box (-R,R) x (0,1) x (-R,R)^2.
//!
//! Samples are indexed (t, x1, x2, x3), x3 fastest.

use num_complex::Complex64;

use crate::{CoreError, Result};

use super::grid::SpaceTimeGrid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Layout {
    Cylinder { cells: usize },
    Waveguide { theta: f64 },
    Box3 { theta: f64 },
}

impl Layout {
    pub fn describe(&self) -> String {
        match self {
            Layout::Cylinder { cells } => format!("cylinder({cells} cells)"),
            Layout::Waveguide { theta } => format!("waveguide(theta={theta})"),
            Layout::Box3 { theta } => format!("box(theta={theta})"),
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match self {
            Layout::Waveguide { theta } | Layout::Box3 { theta } => Some(*theta),
            Layout::Cylinder { .. } => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: SpaceTimeGrid,
    layout: Layout,
    dims: [usize; 4],
    data: Vec<Complex64>,
    /// Sample plane at x1 = 1 for waveguide fields, shape (nt+1, n, n).
    wrap: Option<Vec<Complex64>>,
}

impl ComplexField {
    pub fn dims_for(grid: &SpaceTimeGrid, layout: Layout) -> [usize; 4] {
        let n = grid.cross.n_side();
        match layout {
            Layout::Cylinder { cells } => [grid.nt + 1, cells * grid.nx1, n, n],
            Layout::Waveguide { .. } => [grid.nt + 1, grid.nx1, n, n],
            Layout::Box3 { .. } => [grid.nt_box, grid.nx1, grid.nx2_box, grid.nx3_box],
        }
    }

    pub fn zeros(grid: &SpaceTimeGrid, layout: Layout) -> Self {
        let dims = Self::dims_for(grid, layout);
        let len = dims.iter().product();
        let n = grid.cross.n_side();
        let wrap = match layout {
            Layout::Waveguide { .. } => Some(vec![Complex64::new(0.0, 0.0); (grid.nt + 1) * n * n]),
            _ => None,
        };
        Self {
            grid: *grid,
            layout,
            dims,
            data: vec![Complex64::new(0.0, 0.0); len],
            wrap,
        }
    }

    /// Sample an analytic function on the grid. Waveguide fields also get
    /// their wrap slice, evaluated at x1 = 1.
    pub fn from_fn(
        grid: &SpaceTimeGrid,
        layout: Layout,
        f: impl Fn(f64, f64, f64, f64) -> Complex64,
    ) -> Self {
        let mut out = Self::zeros(grid, layout);
        let [d0, d1, d2, d3] = out.dims;
        let mut idx = 0;
        for i0 in 0..d0 {
            let t = out.coord_t(i0);
            for i1 in 0..d1 {
                let x1 = grid.x1_node(i1);
                for i2 in 0..d2 {
                    let x2 = out.coord_x2(i2);
                    for i3 in 0..d3 {
                        let x3 = out.coord_x3(i3);
                        out.data[idx] = f(t, x1, x2, x3);
                        idx += 1;
                    }
                }
            }
        }
        if let Some(wrap) = out.wrap.as_mut() {
            let n = grid.cross.n_side();
            let mut w = 0;
            for i0 in 0..d0 {
                let t = grid.t_node(i0);
                for i2 in 0..n {
                    let x2 = grid.cross.node(i2);
                    for i3 in 0..n {
                        let x3 = grid.cross.node(i3);
                        wrap[w] = f(t, 1.0, x2, x3);
                        w += 1;
                    }
                }
            }
        }
        out
    }

    fn coord_t(&self, i0: usize) -> f64 {
        match self.layout {
            Layout::Box3 { .. } => self.grid.box_t_node(i0),
            _ => self.grid.t_node(i0),
        }
    }

    fn coord_x2(&self, i2: usize) -> f64 {
        match self.layout {
            Layout::Box3 { .. } => self.grid.box_x2_node(i2),
            _ => self.grid.cross.node(i2),
        }
    }

    fn coord_x3(&self, i3: usize) -> f64 {
        match self.layout {
            Layout::Box3 { .. } => self.grid.box_x3_node(i3),
            _ => self.grid.cross.node(i3),
        }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn layout(&self) -> Layout {
        self.layout
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

    pub fn wrap_slice(&self) -> Option<&[Complex64]> {
        self.wrap.as_deref()
    }

    pub fn wrap_slice_mut(&mut self) -> Option<&mut [Complex64]> {
        self.wrap.as_deref_mut()
    }

    /// Install the wrap slice implied by quasi-periodicity with the layout's
    /// angle: value(x1=1) = e^{i theta} value(x1=0).
    pub fn set_wrap_from_theta(&mut self) {
        let Layout::Waveguide { theta } = self.layout else {
            return;
        };
        let phase = Complex64::from_polar(1.0, theta);
        let [d0, d1, d2, d3] = self.dims;
        let mut wrap = vec![Complex64::new(0.0, 0.0); d0 * d2 * d3];
        let mut w = 0;
        for i0 in 0..d0 {
            for i2 in 0..d2 {
                for i3 in 0..d3 {
                    wrap[w] = phase * self.data[((i0 * d1) * d2 + i2) * d3 + i3];
                    w += 1;
                }
            }
        }
        self.wrap = Some(wrap);
    }

    #[inline]
    pub fn idx(&self, i0: usize, i1: usize, i2: usize, i3: usize) -> usize {
        debug_assert!(i0 < self.dims[0] && i1 < self.dims[1] && i2 < self.dims[2] && i3 < self.dims[3]);
        ((i0 * self.dims[1] + i1) * self.dims[2] + i2) * self.dims[3] + i3
    }

    #[inline]
    pub fn get(&self, i0: usize, i1: usize, i2: usize, i3: usize) -> Complex64 {
        self.data[self.idx(i0, i1, i2, i3)]
    }

    #[inline]
    pub fn set(&mut self, i0: usize, i1: usize, i2: usize, i3: usize, v: Complex64) {
        let k = self.idx(i0, i1, i2, i3);
        self.data[k] = v;
    }

    pub fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout || self.dims != other.dims {
            return Err(CoreError::LayoutMismatch {
                expected: self.layout.describe(),
                got: other.layout.describe(),
            });
        }
        Ok(())
    }

    /// self += c * other (wrap slices combined when both present).
    pub fn axpy(&mut self, c: Complex64, other: &Self) -> Result<()> {
        self.check_same_layout(other)?;
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * b;
        }
        match (self.wrap.as_mut(), other.wrap.as_ref()) {
            (Some(wa), Some(wb)) => {
                for (a, b) in wa.iter_mut().zip(wb.iter()) {
                    *a += c * b;
                }
            }
            (Some(_), None) => self.wrap = None,
            _ => {}
        }
        Ok(())
    }

    pub fn scale(&mut self, c: Complex64) {
        for a in self.data.iter_mut() {
            *a *= c;
        }
        if let Some(w) = self.wrap.as_mut() {
            for a in w.iter_mut() {
                *a *= c;
            }
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }

    /// Quadrature weight of time level i0 (trapezoid on the waveguide,
    /// uniform on the periodic box).
    pub fn t_weight(&self, i0: usize) -> f64 {
        match self.layout {
            Layout::Box3 { .. } => self.grid.box_ht(),
            _ => {
                let dt = self.grid.dt();
                if i0 == 0 || i0 == self.grid.nt {
                    0.5 * dt
                } else {
                    dt
                }
            }
        }
    }

    /// Spatial quadrature weight (x1 x x2 x x3 volume element).
    pub fn space_weight(&self) -> f64 {
        match self.layout {
            Layout::Box3 { .. } => {
                self.grid.h1() * self.grid.box_h2() * self.grid.box_h3()
            }
            _ => {
                let h = self.grid.cross.h();
                self.grid.h1() * h * h
            }
        }
    }

    /// Squared L^2 norm by the grid quadrature, accumulated in fixed order.
    pub fn norm_l2_sq(&self) -> f64 {
        let [d0, d1, d2, d3] = self.dims;
        let plane = d1 * d2 * d3;
        let sw = self.space_weight();
        let mut total = 0.0;
        for i0 in 0..d0 {
            let mut s = 0.0;
            for v in &self.data[i0 * plane..(i0 + 1) * plane] {
                s += v.norm_sqr();
            }
            total += self.t_weight(i0) * s;
        }
        total * sw
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }

    /// L^2 inner product <self, other> (conjugating `other`), fixed order.
    pub fn inner_l2(&self, other: &Self) -> Result<Complex64> {
        self.check_same_layout(other)?;
        let [d0, d1, d2, d3] = self.dims;
        let plane = d1 * d2 * d3;
        let sw = self.space_weight();
        let mut total = Complex64::new(0.0, 0.0);
        for i0 in 0..d0 {
            let mut s = Complex64::new(0.0, 0.0);
            let a = &self.data[i0 * plane..(i0 + 1) * plane];
            let b = &other.data[i0 * plane..(i0 + 1) * plane];
            for (x, y) in a.iter().zip(b.iter()) {
                s += x * y.conj();
            }
            total += self.t_weight(i0) * s;
        }
        Ok(total * sw)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Reject NaN/Inf anywhere in the samples.
    pub fn validate_finite(&self, context: &str) -> Result<()> {
        let ok = self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
            && self
                .wrap
                .iter()
                .flat_map(|w| w.iter())
                .all(|v| v.re.is_finite() && v.im.is_finite());
        if ok {
            Ok(())
        } else {
            Err(CoreError::NonFinite(context.to_string()))
        }
    }

    /// Relative quasi-periodicity residual
    /// ||v(.,1,.) - e^{i theta} v(.,0,.)|| / ||v||,
    /// evaluated on the stored wrap slice (the wrap-around stencil).
    pub fn quasi_periodicity_residual(&self, theta: f64) -> Result<f64> {
        let wrap = self.wrap.as_ref().ok_or_else(|| {
            CoreError::ShapeMismatch("field has no wrap slice at x1=1".into())
        })?;
        let [d0, d1, d2, d3] = self.dims;
        let phase = Complex64::from_polar(1.0, theta);
        let h = self.grid.cross.h();
        let slice_w = h * h;
        let mut num = 0.0;
        let mut w = 0;
        for i0 in 0..d0 {
            let tw = self.t_weight(i0);
            let mut s = 0.0;
            for i2 in 0..d2 {
                for i3 in 0..d3 {
                    let v0 = self.data[((i0 * d1) * d2 + i2) * d3 + i3];
                    s += (wrap[w] - phase * v0).norm_sqr();
                    w += 1;
                }
            }
            num += tw * s;
        }
        let denom = self.norm_l2_sq();
        if denom == 0.0 {
            return Ok(0.0);
        }
        Ok((num * slice_w).sqrt() / denom.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::grid::CrossSection;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(
            1.0,
            8,
            8,
            CrossSection::new(0.5, 6).unwrap(),
            1.75,
            8,
            16,
            16,
        )
        .unwrap()
    }

    #[test]
    fn l2_norm_of_unit_field_is_domain_volume() {
        let g = grid();
        let f = ComplexField::from_fn(&g, Layout::Waveguide { theta: 0.0 }, |_, _, _, _| {
            Complex64::new(1.0, 0.0)
        });
        // volume T * 1 * |omega|, but the x' quadrature only sees the
        // interior nodes: (n h)^2 out of L^2
        let n = g.cross.n_side() as f64;
        let h = g.cross.h();
        let expected = 1.0 * (n * h) * (n * h);
        assert!((f.norm_l2_sq() - expected).abs() < 1e-12);
    }

    #[test]
    fn quasi_periodicity_exact_for_pure_phase() {
        let g = grid();
        let theta = 1.3;
        let f = ComplexField::from_fn(&g, Layout::Waveguide { theta }, |_, x1, x2, x3| {
            Complex64::from_polar(1.0, theta * x1) * Complex64::new(x2 + 2.0, x3)
        });
        assert!(f.quasi_periodicity_residual(theta).unwrap() <= 1e-12);
    }

    #[test]
    fn quasi_periodicity_closed_form_for_wrong_angle() {
        let g = grid();
        let theta = 0.7;
        let theta_p = 2.1;
        // |e^{i theta'} - e^{i theta}| with norm ratio exactly 1 for a pure
        // x1 phase of unit modulus
        let f = ComplexField::from_fn(&g, Layout::Waveguide { theta }, |_, x1, _, _| {
            Complex64::from_polar(1.0, theta_p * x1)
        });
        let expected = (Complex64::from_polar(1.0, theta_p) - Complex64::from_polar(1.0, theta)).norm();
        let got = f.quasi_periodicity_residual(theta).unwrap();
        assert!(
            (got - expected).abs() < 1e-12,
            "residual {got} vs closed form {expected}"
        );
    }

    #[test]
    fn axpy_rejects_layout_mismatch() {
        let g = grid();
        let mut a = ComplexField::zeros(&g, Layout::Waveguide { theta: 0.0 });
        let b = ComplexField::zeros(&g, Layout::Waveguide { theta: 0.5 });
        assert!(a.axpy(Complex64::new(1.0, 0.0), &b).is_err());
    }

    #[test]
    fn validate_finite_catches_nan() {
        let g = grid();
        let mut a = ComplexField::zeros(&g, Layout::Box3 { theta: 0.0 });
        a.data_mut()[3] = Complex64::new(f64::NAN, 0.0);
        assert!(a.validate_finite("test").is_err());
    }
}
