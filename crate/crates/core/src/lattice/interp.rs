//! Cubic interpolation and even-reflection extension of waveguide fields.

use num_complex::Complex64;

use super::{ComplexField, Layout};

/// 4-point Lagrange cubic weights for a fractional offset u in [0,1)
/// measured from the second of four consecutive nodes. Exact for cubic
/// polynomials; at u = 0 the weights are exactly (0, 1, 0, 0).
#[inline]
pub fn cubic_weights(u: f64) -> [f64; 4] {
    let um1 = u + 1.0;
    let u1 = u - 1.0;
    let u2 = u - 2.0;
    [
        -u * u1 * u2 / 6.0,
        um1 * u1 * u2 / 2.0,
        -um1 * u * u2 / 2.0,
        um1 * u * u1 / 6.0,
    ]
}

/// Even reflection of an integer lattice index into [0, last]:
/// ... f(-1) = f(1), f(last+1) = f(last-1) ...
#[inline]
pub fn fold_even(m: i64, last: i64) -> usize {
    debug_assert!(last > 0);
    let period = 2 * last;
    let q = m.rem_euclid(period);
    if q > last {
        (period - q) as usize
    } else {
        q as usize
    }
}

/// A waveguide field extended to the full x' node lattice (boundary values
/// filled by quadratic extrapolation) so that even-reflection sampling can
/// use plain lattice reads.
///
/// Lattice coordinates: t in node units (t/dt, valid range reflected about
/// 0 and nt), x' in units of h with 0 and n+1 the boundary positions.
pub struct ExtendedWaveguide {
    nt: usize,
    nx1: usize,
    ext: usize,
    data: Vec<Complex64>,
}

impl ExtendedWaveguide {
    pub fn new(f: &ComplexField) -> Self {
        let Layout::Waveguide { .. } = f.layout() else {
            panic!("ExtendedWaveguide requires a waveguide-layout field");
        };
        let g = f.grid();
        let n = g.cross.n_side();
        let ext = n + 2;
        let nt = g.nt;
        let nx1 = g.nx1;
        let mut data = vec![Complex64::new(0.0, 0.0); (nt + 1) * nx1 * ext * ext];
        for i0 in 0..=nt {
            for i1 in 0..nx1 {
                let src = |j2: usize, j3: usize| f.get(i0, i1, j2, j3);
                let base = ((i0 * nx1) + i1) * ext * ext;
                for j2 in 0..n {
                    for j3 in 0..n {
                        data[base + (j2 + 1) * ext + (j3 + 1)] = src(j2, j3);
                    }
                }
                // boundary lattice positions: quadratic extrapolation from
                // the three nearest interior nodes
                let extrap =
                    |a: Complex64, b: Complex64, c: Complex64| a * 3.0 - b * 3.0 + c;
                for j in 1..=n {
                    let lo = extrap(src(0, j - 1), src(1, j - 1), src(2, j - 1));
                    let hi = extrap(src(n - 1, j - 1), src(n - 2, j - 1), src(n - 3, j - 1));
                    data[base + j] = lo;
                    data[base + (n + 1) * ext + j] = hi;
                }
                for j in 1..=n {
                    let lo = extrap(src(j - 1, 0), src(j - 1, 1), src(j - 1, 2));
                    let hi = extrap(src(j - 1, n - 1), src(j - 1, n - 2), src(j - 1, n - 3));
                    data[base + j * ext] = lo;
                    data[base + j * ext + (n + 1)] = hi;
                }
                // corners, extrapolated along x2 from the filled x3 columns
                for j3 in [0usize, n + 1] {
                    let lo = extrap(
                        data[base + ext + j3],
                        data[base + 2 * ext + j3],
                        data[base + 3 * ext + j3],
                    );
                    let hi = extrap(
                        data[base + n * ext + j3],
                        data[base + (n - 1) * ext + j3],
                        data[base + (n - 2) * ext + j3],
                    );
                    data[base + j3] = lo;
                    data[base + (n + 1) * ext + j3] = hi;
                }
            }
        }
        Self { nt, nx1, ext, data }
    }

    #[inline]
    fn at(&self, it: usize, i1: usize, j2: usize, j3: usize) -> Complex64 {
        self.data[((it * self.nx1) + i1) * self.ext * self.ext + j2 * self.ext + j3]
    }

    /// Sample at lattice position (pt, i1, p2, p3) by cubic interpolation
    /// with even reflection in t and x'. `pt` is in time-node units, `p2`
    /// and `p3` in x'-lattice units (0 .. n+1 spans closure(omega)).
    pub fn sample(&self, pt: f64, i1: usize, p2: f64, p3: f64) -> Complex64 {
        let last_t = self.nt as i64;
        let last_x = (self.ext - 1) as i64;

        let bt = pt.floor();
        let wt = cubic_weights(pt - bt);
        let b2 = p2.floor();
        let w2 = cubic_weights(p2 - b2);
        let b3 = p3.floor();
        let w3 = cubic_weights(p3 - b3);

        let mut acc = Complex64::new(0.0, 0.0);
        for (a, &wa) in wt.iter().enumerate() {
            if wa == 0.0 {
                continue;
            }
            let it = fold_even(bt as i64 + a as i64 - 1, last_t);
            let mut plane = Complex64::new(0.0, 0.0);
            for (b, &wb) in w2.iter().enumerate() {
                let j2 = fold_even(b2 as i64 + b as i64 - 1, last_x);
                let mut line = Complex64::new(0.0, 0.0);
                for (c, &wc) in w3.iter().enumerate() {
                    let j3 = fold_even(b3 as i64 + c as i64 - 1, last_x);
                    line += self.at(it, i1, j2, j3) * wc;
                }
                plane += line * wb;
            }
            acc += plane * wa;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{CrossSection, SpaceTimeGrid};

    #[test]
    fn cubic_weights_reproduce_cubics_and_nodes() {
        // exact node hit
        let w = cubic_weights(0.0);
        assert_eq!(w, [0.0, 1.0, 0.0, 0.0]);
        // cubic reproduction at an interior offset
        let p = |x: f64| 2.0 - x + 3.0 * x * x - 0.5 * x * x * x;
        let u = 0.37;
        let w = cubic_weights(u);
        let interp: f64 = (0..4).map(|k| w[k] * p(k as f64 - 1.0)).sum();
        assert!((interp - p(u)).abs() < 1e-13);
        // partition of unity
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fold_reflects_both_ends() {
        assert_eq!(fold_even(-1, 8), 1);
        assert_eq!(fold_even(0, 8), 0);
        assert_eq!(fold_even(8, 8), 8);
        assert_eq!(fold_even(9, 8), 7);
        assert_eq!(fold_even(17, 8), 1);
    }

    #[test]
    fn extension_is_exact_on_stored_samples() {
        let g = SpaceTimeGrid::new(
            1.0,
            8,
            8,
            CrossSection::new(0.5, 6).unwrap(),
            1.75,
            8,
            16,
            16,
        )
        .unwrap();
        let f = ComplexField::from_fn(&g, Layout::Waveguide { theta: 0.0 }, |t, x1, x2, x3| {
            Complex64::new((t + x2).cos() * (1.0 + x1), (x3 - t).sin())
        });
        let ext = ExtendedWaveguide::new(&f);
        for i0 in 0..=g.nt {
            for j in 0..g.cross.n_side() {
                let v = ext.sample(i0 as f64, 3, (j + 1) as f64, 2.0);
                let want = f.get(i0, 3, j, 1);
                assert!((v - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn extension_interpolates_smooth_fields_accurately() {
        let g = SpaceTimeGrid::new(
            1.0,
            16,
            8,
            CrossSection::new(0.5, 24).unwrap(),
            1.75,
            8,
            16,
            16,
        )
        .unwrap();
        let func = |t: f64, x2: f64, x3: f64| {
            Complex64::new((2.0 * t + x2).sin(), (x2 * x3 * 3.0).cos())
        };
        let f = ComplexField::from_fn(&g, Layout::Waveguide { theta: 0.0 }, |t, _x1, x2, x3| {
            func(t, x2, x3)
        });
        let ext = ExtendedWaveguide::new(&f);
        let h = g.cross.h();
        // probe strictly inside the domain, away from reflections
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let t = 0.11 + 0.013 * k as f64;
            let x2 = -0.31 + 0.012 * k as f64;
            let x3 = 0.22 - 0.008 * k as f64;
            let v = ext.sample(
                t / g.dt(),
                0,
                (x2 + g.cross.half_width()) / h,
                (x3 + g.cross.half_width()) / h,
            );
            worst = worst.max((v - func(t, x2, x3)).norm());
        }
        assert!(worst < 5e-4, "cubic interpolation error {worst}");
    }
}
