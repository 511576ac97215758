//! The reduced boundary operator Lambda_{V,theta} and the probe-based
//! estimate of the operator-norm gap between two potentials.

use num_complex::Complex64;

use crate::lattice::{ComplexField, SpaceTimeGrid};
use crate::{CoreError, Result};

use super::potential::Potential;
use super::probe::{BoundaryTrace, ProbeInput};
use super::solver::{solve_fiber_ibvp, SolverOptions};

/// Output of the boundary operator: the Neumann trace on Sigma*' and the
/// final-time state on Omega'.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub neumann: BoundaryTrace,
    /// v(T) samples, (nx1, n, n).
    pub final_state: Vec<Complex64>,
    grid: SpaceTimeGrid,
}

impl BoundaryData {
    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    /// Squared norm in the discrete X1' space L^2(Sigma) x L^2(Omega').
    pub fn norm_sq(&self) -> f64 {
        let h = self.grid.cross.h();
        let sw = self.grid.h1() * h * h;
        let final_sq: f64 = self.final_state.iter().map(|v| v.norm_sqr()).sum::<f64>() * sw;
        self.neumann.norm_l2_sq(&self.grid) + final_sq
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(CoreError::ShapeMismatch("boundary data grids differ".into()));
        }
        Ok(Self {
            neumann: self.neumann.sub(&other.neumann)?,
            final_state: self
                .final_state
                .iter()
                .zip(other.final_state.iter())
                .map(|(a, b)| a - b)
                .collect(),
            grid: self.grid,
        })
    }
}

/// Outward normal derivative on the lateral boundary by the 3-point
/// one-sided second-order stencil, using the Dirichlet data as the boundary
/// value and the two nearest interior samples.
pub fn neumann_trace(v: &ComplexField, lateral: &BoundaryTrace) -> BoundaryTrace {
    let grid = v.grid();
    let n = grid.cross.n_side();
    let h = grid.cross.h();
    let inv = 1.0 / (2.0 * h);
    let mut out = BoundaryTrace::zeros(grid);
    for i0 in 0..=grid.nt {
        for i1 in 0..grid.nx1 {
            for k in 0..n {
                // face order: X2Neg, X2Pos, X3Neg, X3Pos
                let stencils = [
                    (lateral.get(i0, i1, 0, k), v.get(i0, i1, 0, k), v.get(i0, i1, 1, k)),
                    (
                        lateral.get(i0, i1, 1, k),
                        v.get(i0, i1, n - 1, k),
                        v.get(i0, i1, n - 2, k),
                    ),
                    (lateral.get(i0, i1, 2, k), v.get(i0, i1, k, 0), v.get(i0, i1, k, 1)),
                    (
                        lateral.get(i0, i1, 3, k),
                        v.get(i0, i1, k, n - 1),
                        v.get(i0, i1, k, n - 2),
                    ),
                ];
                for (face, (vb, v1, v2)) in stencils.into_iter().enumerate() {
                    let idx = out.idx(i0, i1, face, k);
                    out.data[idx] = (vb * 3.0 - v1 * 4.0 + v2) * inv;
                }
            }
        }
    }
    out
}

/// Lambda_{V,theta}(v0, h) = (d_nu v on Sigma*', v(T)).
pub fn boundary_operator(
    v: &Potential,
    probe: &ProbeInput,
    grid: &SpaceTimeGrid,
    opts: &SolverOptions,
) -> Result<BoundaryData> {
    let sol = solve_fiber_ibvp(v, probe, grid, opts)?;
    Ok(boundary_data_of_solution(&sol, probe))
}

/// Extract the boundary data of an already-computed solution field.
pub fn boundary_data_of_solution(sol: &ComplexField, probe: &ProbeInput) -> BoundaryData {
    let grid = *sol.grid();
    let n = grid.cross.n_side();
    let neumann = neumann_trace(sol, &probe.lateral);
    let mut final_state = vec![Complex64::new(0.0, 0.0); grid.nx1 * n * n];
    for i1 in 0..grid.nx1 {
        for i2 in 0..n {
            for i3 in 0..n {
                final_state[(i1 * n + i2) * n + i3] = sol.get(grid.nt, i1, i2, i3);
            }
        }
    }
    BoundaryData {
        neumann,
        final_state,
        grid,
    }
}

/// Probe-maximum lower estimate of || Lambda_{V2,theta} - Lambda_{V1,theta} ||:
/// gamma_hat = max over probes of the output-gap norm over the declared
/// input proxy norm. Monotone nondecreasing in the probe set.
pub fn operator_norm_estimate(
    v1: &Potential,
    v2: &Potential,
    probes: &[ProbeInput],
    grid: &SpaceTimeGrid,
    opts: &SolverOptions,
) -> Result<f64> {
    if probes.is_empty() {
        return Err(CoreError::EmptyProbeSet("operator_norm_estimate".into()));
    }
    let mut best = 0.0f64;
    for probe in probes {
        let denom = probe.proxy.value();
        if denom <= 0.0 {
            return Err(CoreError::ZeroProbe);
        }
        let b2 = boundary_operator(v2, probe, grid, opts)?;
        let b1 = boundary_operator(v1, probe, grid, opts)?;
        let gap = b2.sub(&b1)?.norm();
        best = best.max(gap / denom);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::PotentialFlags;
    use crate::lattice::{CrossSection, Face};
    use std::f64::consts::PI;

    fn grid() -> SpaceTimeGrid {
        SpaceTimeGrid::new(
            1.0,
            16,
            16,
            CrossSection::new(0.5, 12).unwrap(),
            1.75,
            8,
            16,
            16,
        )
        .unwrap()
    }

    fn eigen_probe(g: &SpaceTimeGrid, theta: f64, k: i64, p: usize, q: usize) -> (ProbeInput, f64) {
        let l = g.cross.side_len();
        let hw = g.cross.half_width();
        let n = g.cross.n_side();
        let freq = theta + 2.0 * PI * k as f64;
        let mut v0 = vec![Complex64::new(0.0, 0.0); g.nx1 * n * n];
        for i1 in 0..g.nx1 {
            let ph = Complex64::from_polar(1.0, freq * g.x1_node(i1));
            for i2 in 0..n {
                let s2 = (p as f64 * PI * (g.cross.node(i2) + hw) / l).sin();
                for i3 in 0..n {
                    let s3 = (q as f64 * PI * (g.cross.node(i3) + hw) / l).sin();
                    v0[(i1 * n + i2) * n + i3] = ph * s2 * s3;
                }
            }
        }
        let lambda = freq * freq + PI * PI * ((p * p + q * q) as f64) / (l * l);
        (
            ProbeInput::from_initial_state(g, theta, v0).unwrap(),
            lambda,
        )
    }

    #[test]
    fn eigenmode_neumann_trace_matches_analytic_derivative() {
        let g = grid();
        let theta = 0.4;
        let (probe, lambda) = eigen_probe(&g, theta, 0, 1, 2);
        let v = Potential::zero(&g);
        let data = boundary_operator(&v, &probe, &g, &SolverOptions::default()).unwrap();
        // d_nu of sin(p pi (x+hw)/l) at x = +hw is (p pi / l) cos(p pi)
        let l = g.cross.side_len();
        let hw = g.cross.half_width();
        let n = g.cross.n_side();
        let dt_phase = 2.0 * (lambda * g.dt() / 2.0).atan() * g.nt as f64;
        let i0 = g.nt;
        let rot = Complex64::from_polar(1.0, -dt_phase);
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i1 in 0..g.nx1 {
            let ph = Complex64::from_polar(1.0, theta * g.x1_node(i1)) * rot;
            for k in 0..n {
                let s3 = (2.0 * PI * (g.cross.node(k) + hw) / l).sin();
                // face X2Pos: derivative of sin(pi (x2+hw)/l) at x2 = hw
                let want = ph * (PI / l) * (PI).cos() * s3;
                let got = data.neumann.get(i0, i1, 1, k);
                worst = worst.max((want - got).norm());
                scale = scale.max(want.norm());
            }
        }
        let h = g.cross.h();
        // one-sided stencil is O(h^2); allow a modest constant
        let bound = 8.0 * h * h * (PI / l).powi(3) * scale.max(1.0);
        assert!(worst <= bound, "neumann error {worst} > bound {bound}");
    }

    #[test]
    fn zero_probe_gives_zero_boundary_data() {
        let g = grid();
        let n = g.cross.n_side();
        let probe = ProbeInput::from_initial_state(
            &g,
            0.0,
            vec![Complex64::new(0.0, 0.0); g.nx1 * n * n],
        )
        .unwrap();
        let v = Potential::zero(&g);
        let data = boundary_operator(&v, &probe, &g, &SolverOptions::default()).unwrap();
        assert!(data.norm() == 0.0);
    }

    #[test]
    fn boundary_operator_is_linear_in_the_probe() {
        let g = grid();
        let theta = 0.7;
        let hw = g.cross.half_width();
        let v = Potential::from_fn(&g, PotentialFlags::default(), |t, x1, x2, x3| {
            0.4 * (1.0 + t) * (PI * (x2 + hw)).sin() * (PI * (x3 + hw)).sin() * (2.0 * PI * x1).cos()
        })
        .unwrap();
        let (p1, _) = eigen_probe(&g, theta, 0, 1, 1);
        let (p2, _) = eigen_probe(&g, theta, 1, 2, 1);
        let a = Complex64::new(0.7, -0.2);
        let b = Complex64::new(-0.1, 1.3);
        let combo = p1.linear_combination(a, b, &p2).unwrap();
        let opts = SolverOptions::default();
        let da = boundary_operator(&v, &p1, &g, &opts).unwrap();
        let db = boundary_operator(&v, &p2, &g, &opts).unwrap();
        let dc = boundary_operator(&v, &combo, &g, &opts).unwrap();
        let n = g.cross.n_side();
        let mut worst: f64 = 0.0;
        for i in 0..g.nx1 * n * n {
            let want = a * da.final_state[i] + b * db.final_state[i];
            worst = worst.max((want - dc.final_state[i]).norm());
        }
        for i in 0..dc.neumann.data.len() {
            let want = a * da.neumann.data[i] + b * db.neumann.data[i];
            worst = worst.max((want - dc.neumann.data[i]).norm());
        }
        assert!(worst < 1e-9, "linearity violation {worst}");
    }

    #[test]
    fn identical_potentials_give_zero_estimate_and_monotone_sets() {
        let g = grid();
        let hw = g.cross.half_width();
        let v1 = Potential::from_fn(&g, PotentialFlags::default(), |_, _, x2, x3| {
            0.3 * (PI * (x2 + hw)).sin() * (PI * (x3 + hw)).sin()
        })
        .unwrap();
        let v2 = v1.clone();
        let (pa, _) = eigen_probe(&g, 0.2, 0, 1, 1);
        let (pb, _) = eigen_probe(&g, 0.2, 1, 1, 2);
        let opts = SolverOptions::default();
        let small = operator_norm_estimate(&v1, &v2, &[pa.clone()], &g, &opts).unwrap();
        assert!(small <= 1e-10, "gamma for equal potentials: {small}");
        // different potentials: estimate grows with the probe set
        let v3 = Potential::from_fn(&g, PotentialFlags::default(), |t, _, x2, x3| {
            0.3 * (1.0 + 0.5 * t) * (2.0 * PI * (x2 + hw)).sin() * (PI * (x3 + hw)).sin()
        })
        .unwrap();
        let g1 = operator_norm_estimate(&v1, &v3, &[pa.clone()], &g, &opts).unwrap();
        let g2 = operator_norm_estimate(&v1, &v3, &[pa, pb], &g, &opts).unwrap();
        assert!(g2 >= g1);
        assert!(g1 > 0.0);
    }

    #[test]
    fn perturbation_response_is_linear_in_epsilon() {
        let g = grid();
        let hw = g.cross.half_width();
        let v1 = Potential::zero(&g);
        let w = Potential::from_fn(
            &g,
            PotentialFlags {
                periodic_ok: true,
                endpoint_zero: true,
                lateral_zero: true,
            },
            |t, x1, x2, x3| {
                let tt = (t * (1.0 - t)).powi(2) * 16.0;
                tt * (PI * (x2 + hw)).sin()
                    * (PI * (x3 + hw)).sin()
                    * (1.0 + 0.4 * (2.0 * PI * x1).cos())
            },
        )
        .unwrap();
        let (probe, _) = eigen_probe(&g, 0.0, 0, 1, 1);
        let opts = SolverOptions::default();
        let eps = [1e-3, 2e-3, 5e-3, 1e-2];
        let gammas: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let v2 = v1.add_scaled(e, &w).unwrap();
                operator_norm_estimate(&v1, &v2, std::slice::from_ref(&probe), &g, &opts).unwrap()
            })
            .collect();
        // least-squares slope through the origin, then relative deviations
        let num: f64 = eps.iter().zip(&gammas).map(|(e, g)| e * g).sum();
        let den: f64 = eps.iter().map(|e| e * e).sum();
        let slope = num / den;
        for (e, ga) in eps.iter().zip(&gammas) {
            let rel = (ga - slope * e).abs() / (slope * e);
            assert!(rel < 0.1, "nonlinearity {rel} at eps {e}");
        }
    }

    #[test]
    fn face_enum_is_exhaustive_for_trace_layout() {
        assert_eq!(Face::ALL.len(), 4);
    }
}
