//! Rotation resampling on the box and the extend-and-cutoff lift of
//! waveguide fields onto it.
//!
//! The lift realizes h(t,x1,x') = chi(t,x') (P f~)(t,x1,x') with
//! f~(t,x1,x') = f(t,x1,S* x'): values are read from the waveguide field at
//! un-rotated coordinates, extended by even reflection in t and x' (P), and
//! damped to zero by a tensor-product quintic cutoff chi supported strictly
//! inside the box.

use num_complex::Complex64;

use crate::{exec, CoreError, Result};

use super::field::{ComplexField, Layout};
use super::grid::SpaceTimeGrid;
use super::interp::{cubic_weights, ExtendedWaveguide};

/// Planar rotation (determinant +1) acting on the (x2, x3) plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation2 {
    pub m: [[f64; 2]; 2],
}

impl Rotation2 {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn from_angle(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self {
            m: [[c, -s], [s, c]],
        }
    }

    /// The unique rotation S with S e2 = d, for a unit vector d.
    pub fn mapping_e2_to(d: [f64; 2]) -> Self {
        Self {
            m: [[d[1], d[0]], [-d[0], d[1]]],
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: [
                [self.m[0][0], self.m[1][0]],
                [self.m[0][1], self.m[1][1]],
            ],
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn is_rotation(&self, tol: f64) -> bool {
        let det = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
        let orth = self.m[0][0] * self.m[1][0] + self.m[0][1] * self.m[1][1];
        (det - 1.0).abs() <= tol && orth.abs() <= tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotateDirection {
    /// out(x') = f(S* x')
    Forward,
    /// out(x') = f(S x')
    Inverse,
}

enum PlaneMap {
    Identity,
    Rot180,
    Rot90,
    Rot270,
    General,
}

fn classify(m: [[f64; 2]; 2]) -> PlaneMap {
    let close = |x: f64, y: f64| (x - y).abs() < 1e-13;
    if close(m[0][0], 1.0) && close(m[1][1], 1.0) && close(m[0][1], 0.0) && close(m[1][0], 0.0) {
        PlaneMap::Identity
    } else if close(m[0][0], -1.0) && close(m[1][1], -1.0) && close(m[0][1], 0.0) && close(m[1][0], 0.0)
    {
        PlaneMap::Rot180
    } else if close(m[0][0], 0.0) && close(m[1][1], 0.0) && close(m[0][1], -1.0) && close(m[1][0], 1.0)
    {
        PlaneMap::Rot90
    } else if close(m[0][0], 0.0) && close(m[1][1], 0.0) && close(m[0][1], 1.0) && close(m[1][0], -1.0)
    {
        PlaneMap::Rot270
    } else {
        PlaneMap::General
    }
}

/// Resample a box field under a planar rotation of the (x2,x3) plane:
/// out = f o (id x id x S*) for `Forward`, f o (id x id x S) for `Inverse`.
///
/// Axis-aligned rotations (multiples of 90 degrees) are exact index
/// permutations; the general case uses bicubic interpolation and requires
/// the nonzero samples of `f` to sit inside the inscribed disk with a
/// stencil margin, so that no rotated point leaves the sampled box.
pub fn rotate_resample(
    f: &ComplexField,
    rot: Rotation2,
    dir: RotateDirection,
) -> Result<ComplexField> {
    let Layout::Box3 { .. } = f.layout() else {
        return Err(CoreError::LayoutMismatch {
            expected: "box".into(),
            got: f.layout().describe(),
        });
    };
    if !rot.is_rotation(1e-10) {
        return Err(CoreError::InvalidParameter(
            "rotate_resample requires an orthogonal matrix with determinant +1".into(),
        ));
    }
    let eff = match dir {
        RotateDirection::Forward => rot.transpose(),
        RotateDirection::Inverse => rot,
    };
    let grid = *f.grid();
    let [d0, d1, d2, d3] = f.dims();

    let mut out = ComplexField::zeros(&grid, f.layout());
    match classify(eff.m) {
        PlaneMap::Identity => {
            out.data_mut().copy_from_slice(f.data());
            return Ok(out);
        }
        PlaneMap::Rot180 => {
            permute_plane(f, &mut out, |m2, m3| ((d2 - m2) % d2, (d3 - m3) % d3));
            return Ok(out);
        }
        PlaneMap::Rot90 if d2 == d3 => {
            permute_plane(f, &mut out, |m2, m3| ((d2 - m3) % d2, m2));
            return Ok(out);
        }
        PlaneMap::Rot270 if d2 == d3 => {
            permute_plane(f, &mut out, |m2, m3| (m3, (d2 - m2) % d2));
            return Ok(out);
        }
        _ => {}
    }

    check_rotation_footprint(f)?;
    let h2 = grid.box_h2();
    let h3 = grid.box_h3();
    let r = grid.box_r;
    let plane = d2 * d3;
    let data = f.data();
    exec::for_each_chunk_mut(out.data_mut(), plane, |slab, chunk| {
        // slab enumerates (t, x1) slices
        let base = slab * plane;
        for m2 in 0..d2 {
            let x2 = -r + m2 as f64 * h2;
            for m3 in 0..d3 {
                let x3 = -r + m3 as f64 * h3;
                let src = eff.apply([x2, x3]);
                let p2 = (src[0] + r) / h2;
                let p3 = (src[1] + r) / h3;
                let b2 = p2.floor() as i64;
                let b3 = p3.floor() as i64;
                // stencils that would leave the box read zero: the source
                // point lies beyond the support the footprint check allowed
                if b2 < 1 || b2 + 2 >= d2 as i64 || b3 < 1 || b3 + 2 >= d3 as i64 {
                    chunk[m2 * d3 + m3] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let w2 = cubic_weights(p2 - b2 as f64);
                let w3 = cubic_weights(p3 - b3 as f64);
                let mut acc = Complex64::new(0.0, 0.0);
                for (a, &wa) in w2.iter().enumerate() {
                    let j2 = (b2 + a as i64 - 1) as usize;
                    let mut line = Complex64::new(0.0, 0.0);
                    for (b, &wb) in w3.iter().enumerate() {
                        let j3 = (b3 + b as i64 - 1) as usize;
                        line += data[base + j2 * d3 + j3] * wb;
                    }
                    acc += line * wa;
                }
                chunk[m2 * d3 + m3] = acc;
            }
        }
    });
    let _ = d0;
    let _ = d1;
    Ok(out)
}

fn permute_plane(
    f: &ComplexField,
    out: &mut ComplexField,
    map: impl Fn(usize, usize) -> (usize, usize) + Sync,
) {
    let [_, _, d2, d3] = f.dims();
    let plane = d2 * d3;
    let data = f.data();
    exec::for_each_chunk_mut(out.data_mut(), plane, |slab, chunk| {
        let base = slab * plane;
        for m2 in 0..d2 {
            for m3 in 0..d3 {
                let (s2, s3) = map(m2, m3);
                chunk[m2 * d3 + m3] = data[base + s2 * d3 + s3];
            }
        }
    });
}

fn check_rotation_footprint(f: &ComplexField) -> Result<()> {
    let grid = f.grid();
    let [_, _, d2, d3] = f.dims();
    let r = grid.box_r;
    let h = grid.box_h2().max(grid.box_h3());
    let threshold = 1e-12 * f.max_abs();
    let mut radius: f64 = 0.0;
    let plane = d2 * d3;
    for (i, v) in f.data().iter().enumerate() {
        if v.norm() > threshold {
            let m2 = (i % plane) / d3;
            let m3 = i % d3;
            let x2 = -r + m2 as f64 * grid.box_h2();
            let x3 = -r + m3 as f64 * grid.box_h3();
            radius = radius.max((x2 * x2 + x3 * x3).sqrt());
        }
    }
    if radius + 2.0 * h > r {
        return Err(CoreError::RotationFootprint(format!(
            "support radius {radius:.3} + stencil margin exceeds R = {r:.3}"
        )));
    }
    Ok(())
}

/// Tensor-product quintic cutoff: 1 on [t_flat] x [-x_flat, x_flat]^2,
/// ramping to 0 over `ramp` with C^2 smoothstep profiles.
#[derive(Clone, Copy, Debug)]
pub struct CutoffSpec {
    pub t_flat: (f64, f64),
    pub x_flat: f64,
    pub ramp: f64,
}

fn smoothstep5(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

fn profile(x: f64, lo: f64, hi: f64, ramp: f64) -> f64 {
    if x < lo {
        smoothstep5((x - (lo - ramp)) / ramp)
    } else if x > hi {
        smoothstep5(((hi + ramp) - x) / ramp)
    } else {
        1.0
    }
}

impl CutoffSpec {
    /// Default: flat on a small neighborhood of [0,T] x (rotation footprint
    /// of omega), ramp over 10% of the box width, shrunk as needed so the
    /// support stays strictly inside the box.
    pub fn default_for(grid: &SpaceTimeGrid) -> Self {
        let r = grid.box_r;
        let head_t = r - grid.t_final;
        let head_x = r - grid.cross.circumradius();
        let ramp = (0.1 * 2.0 * r).min(0.45 * head_t).min(0.45 * head_x);
        let pad_t = (2.0 * grid.box_ht())
            .max(0.02 * 2.0 * r)
            .min(0.9 * head_t - ramp);
        let pad_x = (2.0 * grid.box_h2().max(grid.box_h3()))
            .max(0.02 * 2.0 * r)
            .min(0.9 * head_x - ramp);
        Self {
            t_flat: (-pad_t, grid.t_final + pad_t),
            x_flat: grid.cross.circumradius() + pad_x,
            ramp,
        }
    }

    pub fn validate(&self, grid: &SpaceTimeGrid) -> Result<()> {
        let r = grid.box_r;
        if self.ramp <= 0.0 {
            return Err(CoreError::InvalidParameter("cutoff ramp must be positive".into()));
        }
        if self.t_flat.0 >= 0.0 || self.t_flat.1 <= grid.t_final {
            return Err(CoreError::InvalidParameter(
                "cutoff must equal 1 on a neighborhood of [0,T]".into(),
            ));
        }
        if self.x_flat < grid.cross.circumradius() {
            return Err(CoreError::InvalidParameter(
                "cutoff must cover every planar rotation of omega".into(),
            ));
        }
        if self.t_flat.0 - self.ramp <= -r
            || self.t_flat.1 + self.ramp >= r
            || self.x_flat + self.ramp >= r
        {
            return Err(CoreError::CutoffSupport(format!(
                "flat region {:?} x [-{}, {}] with ramp {} reaches the box half-width {}",
                self.t_flat, self.x_flat, self.x_flat, self.ramp, r
            )));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, x2: f64, x3: f64) -> f64 {
        profile(t, self.t_flat.0, self.t_flat.1, self.ramp)
            * profile(x2, -self.x_flat, self.x_flat, self.ramp)
            * profile(x3, -self.x_flat, self.x_flat, self.ramp)
    }
}

/// Lift a waveguide field onto the box in rotated coordinates:
/// h(t,x1,x') = chi(t,x') (P f)(t,x1,S* x'), even reflection extension P.
///
/// On (0,T) x (0,1) x S(omega) the result reproduces the rotated field
/// exactly at every sample the interpolation can resolve; the output is the
/// right-hand side fed to the shifted-lattice resolvent.
pub fn extend_and_cutoff(
    f: &ComplexField,
    rot: Rotation2,
    chi: &CutoffSpec,
) -> Result<ComplexField> {
    let Layout::Waveguide { theta } = f.layout() else {
        return Err(CoreError::LayoutMismatch {
            expected: "waveguide".into(),
            got: f.layout().describe(),
        });
    };
    let grid = *f.grid();
    chi.validate(&grid)?;
    if !rot.is_rotation(1e-10) {
        return Err(CoreError::InvalidParameter("invalid rotation".into()));
    }
    let ext = ExtendedWaveguide::new(f);
    let unrot = rot.transpose();
    let mut out = ComplexField::zeros(&grid, Layout::Box3 { theta });
    let [_, d1, d2, d3] = out.dims();
    let plane = d1 * d2 * d3;
    let dt = grid.dt();
    let hw = grid.cross.half_width();
    let hx = grid.cross.h();
    let r = grid.box_r;

    exec::for_each_chunk_mut(out.data_mut(), plane, |i0, chunk| {
        let t = -r + i0 as f64 * grid.box_ht();
        let chi_t = profile(t, chi.t_flat.0, chi.t_flat.1, chi.ramp);
        if chi_t == 0.0 {
            return;
        }
        let pt = t / dt;
        for i1 in 0..d1 {
            for m2 in 0..d2 {
                let x2 = -r + m2 as f64 * grid.box_h2();
                let chi_t2 = chi_t * profile(x2, -chi.x_flat, chi.x_flat, chi.ramp);
                if chi_t2 == 0.0 {
                    continue;
                }
                for m3 in 0..d3 {
                    let x3 = -r + m3 as f64 * grid.box_h3();
                    let chi_all = chi_t2 * profile(x3, -chi.x_flat, chi.x_flat, chi.ramp);
                    if chi_all == 0.0 {
                        continue;
                    }
                    let y = unrot.apply([x2, x3]);
                    let v = ext.sample(pt, i1, (y[0] + hw) / hx, (y[1] + hw) / hx);
                    chunk[(i1 * d2 + m2) * d3 + m3] = v * chi_all;
                }
            }
        }
    });
    Ok(out)
}
