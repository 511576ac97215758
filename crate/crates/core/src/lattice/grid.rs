//! Discretization of the waveguide cell Q' = (0,T) x (0,1) x omega and of
//! the Fourier box O = (-R,R) x (0,1) x (-R,R)^2.

use crate::{CoreError, Result};

/// Square cross-section omega = (-L/2, L/2)^2, sampled at `n_side` interior
/// nodes per axis with spacing L/(n_side+1). The origin is an interior point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossSection {
    half_width: f64,
    n_side: usize,
}

/// One face of the square boundary with its outward unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Face {
    X2Neg,
    X2Pos,
    X3Neg,
    X3Pos,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::X2Neg, Face::X2Pos, Face::X3Neg, Face::X3Pos];

    /// Outward unit normal in the (x2, x3) plane.
    pub fn normal(self) -> [f64; 2] {
        match self {
            Face::X2Neg => [-1.0, 0.0],
            Face::X2Pos => [1.0, 0.0],
            Face::X3Neg => [0.0, -1.0],
            Face::X3Pos => [0.0, 1.0],
        }
    }
}

impl CrossSection {
    pub fn new(half_width: f64, n_side: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(CoreError::InvalidGrid("half_width must be positive".into()));
        }
        if n_side < 4 {
            return Err(CoreError::InvalidGrid("n_side must be at least 4".into()));
        }
        Ok(Self { half_width, n_side })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Side length L.
    pub fn side_len(&self) -> f64 {
        2.0 * self.half_width
    }

    /// |omega| = L^2, used by the r-selection rule of the stability sweep.
    pub fn area(&self) -> f64 {
        self.side_len() * self.side_len()
    }

    pub fn n_side(&self) -> usize {
        self.n_side
    }

    /// Interior node spacing h = L/(n_side+1).
    pub fn h(&self) -> f64 {
        self.side_len() / (self.n_side as f64 + 1.0)
    }

    /// Coordinate of interior node `j` (storage index, 0-based).
    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 1.0) * self.h()
    }

    /// Largest distance from the origin to a point of omega (the corner).
    pub fn circumradius(&self) -> f64 {
        self.half_width * std::f64::consts::SQRT_2
    }
}

/// Space-time discretization shared by the waveguide and the Fourier box.
///
/// Waveguide: `nt` Crank-Nicolson steps on [0,T] (nt+1 stored time levels),
/// `nx1` periodic samples on one x1 cell, and the cross-section grid.
/// Box: `nt_box` x `nx1` x `nx2_box` x `nx3_box` periodic samples of
/// (-R,R) x (0,1) x (-R,R)^2; the x1 axis is shared with the waveguide.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceTimeGrid {
    pub t_final: f64,
    pub nt: usize,
    pub nx1: usize,
    pub cross: CrossSection,
    pub box_r: f64,
    pub nt_box: usize,
    pub nx2_box: usize,
    pub nx3_box: usize,
}

fn is_pow2(n: usize) -> bool {
    n >= 2 && n & (n - 1) == 0
}

impl SpaceTimeGrid {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t_final: f64,
        nt: usize,
        nx1: usize,
        cross: CrossSection,
        box_r: f64,
        nt_box: usize,
        nx2_box: usize,
        nx3_box: usize,
    ) -> Result<Self> {
        if !(t_final > 0.0) {
            return Err(CoreError::InvalidGrid("t_final must be positive".into()));
        }
        for (name, n) in [
            ("nt", nt),
            ("nx1", nx1),
            ("nt_box", nt_box),
            ("nx2_box", nx2_box),
            ("nx3_box", nx3_box),
        ] {
            if !is_pow2(n) {
                return Err(CoreError::InvalidGrid(format!(
                    "{name} = {n} is not a power of two"
                )));
            }
        }
        // Every planar rotation of omega must land inside (-R,R)^2, and the
        // box time axis must contain [0,T] with room for the cutoff ramps.
        if box_r <= cross.circumradius() {
            return Err(CoreError::InvalidGrid(format!(
                "box_r = {box_r} must exceed sqrt(2)*L/2 = {}",
                cross.circumradius()
            )));
        }
        if box_r <= t_final {
            return Err(CoreError::InvalidGrid(format!(
                "box_r = {box_r} must exceed t_final = {t_final}"
            )));
        }
        Ok(Self {
            t_final,
            nt,
            nx1,
            cross,
            box_r,
            nt_box,
            nx2_box,
            nx3_box,
        })
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.nt as f64
    }

    /// Waveguide time node, i in 0..=nt.
    pub fn t_node(&self, i: usize) -> f64 {
        i as f64 * self.dt()
    }

    /// x1 sample spacing (cell length 1).
    pub fn h1(&self) -> f64 {
        1.0 / self.nx1 as f64
    }

    pub fn x1_node(&self, j: usize) -> f64 {
        j as f64 * self.h1()
    }

    pub fn box_ht(&self) -> f64 {
        2.0 * self.box_r / self.nt_box as f64
    }

    pub fn box_h2(&self) -> f64 {
        2.0 * self.box_r / self.nx2_box as f64
    }

    pub fn box_h3(&self) -> f64 {
        2.0 * self.box_r / self.nx3_box as f64
    }

    pub fn box_t_node(&self, m: usize) -> f64 {
        -self.box_r + m as f64 * self.box_ht()
    }

    pub fn box_x2_node(&self, m: usize) -> f64 {
        -self.box_r + m as f64 * self.box_h2()
    }

    pub fn box_x3_node(&self, m: usize) -> f64 {
        -self.box_r + m as f64 * self.box_h3()
    }

    /// Volume element of the box quadrature.
    pub fn box_weight(&self) -> f64 {
        self.box_ht() * self.h1() * self.box_h2() * self.box_h3()
    }

    /// Quasi-periodic x1 frequency theta + 2*pi*n for a signed mode n.
    pub fn x1_freq(&self, theta: f64, n: i64) -> f64 {
        theta + 2.0 * std::f64::consts::PI * n as f64
    }

    /// Grid with every waveguide resolution doubled (refinement studies).
    pub fn refined(&self) -> Self {
        Self {
            nt: self.nt * 2,
            nx1: self.nx1 * 2,
            cross: CrossSection {
                half_width: self.cross.half_width,
                n_side: self.cross.n_side * 2,
            },
            nt_box: self.nt_box * 2,
            nx2_box: self.nx2_box * 2,
            nx3_box: self.nx3_box * 2,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(
            1.0,
            16,
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
    fn node_coordinates() {
        let g = grid();
        assert!((g.t_node(16) - 1.0).abs() < 1e-15);
        assert!((g.x1_node(8) - 1.0).abs() < 1e-15);
        let c = g.cross;
        assert!((c.node(0) + 0.5 - c.h()).abs() < 1e-15);
        // interior nodes stay strictly inside omega
        assert!(c.node(c.n_side() - 1) < c.half_width());
        assert!((c.area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_power_of_two() {
        let c = CrossSection::new(0.5, 6).unwrap();
        assert!(SpaceTimeGrid::new(1.0, 12, 8, c, 1.75, 8, 16, 16).is_err());
    }

    #[test]
    fn rejects_small_box() {
        let c = CrossSection::new(0.5, 6).unwrap();
        // sqrt(2)/2 = 0.707..., so R = 0.7 cannot hold a rotated omega
        assert!(SpaceTimeGrid::new(0.5, 16, 8, c, 0.7, 8, 16, 16).is_err());
    }

    #[test]
    fn cross_section_invariants() {
        assert!(CrossSection::new(0.0, 8).is_err());
        assert!(CrossSection::new(0.5, 3).is_err());
        let c = CrossSection::new(0.5, 4).unwrap();
        assert!(c.circumradius() > c.half_width());
    }
}
