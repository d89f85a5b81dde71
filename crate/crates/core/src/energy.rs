//! Discrete energy audit.
//!
//! For any admissible nodal field on a bounded diagonal-norm grid,
//! `2 <Phi, Phi_t>_{P x H} + BT_inviscid - BT_viscous = 0` holds up to
//! round-off, where both boundary terms are surface quadratures. On
//! periodic grids the rate itself vanishes.

use serde::{Deserialize, Serialize};

use crate::coeffs::{build_atilde, Axis, NormP, Vec4};
use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;
use crate::sbp::{inner_product, BoundaryValues, Face, Grid2D, GridKind};
use crate::solver::{full_rhs, rk4_step, viscous_fields};
use crate::state::{GasParams, SkewField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalanceReport {
    pub energy: f64,
    pub rate_measured: f64,
    pub surface_inviscid: f64,
    pub surface_viscous: f64,
    pub residual: f64,
}

impl EnergyBalanceReport {
    /// Magnitude the residual is measured against.
    pub fn scale(&self) -> f64 {
        self.rate_measured
            .abs()
            .max(self.surface_inviscid.abs())
            .max(self.surface_viscous.abs())
            .max(self.energy)
    }

    pub fn relative_residual(&self) -> f64 {
        let s = self.scale();
        if s == 0.0 {
            self.residual.abs()
        } else {
            self.residual.abs() / s
        }
    }
}

/// `||Phi||^2_{P x H}`.
pub fn energy_norm(field: &SkewField, grid: &Grid2D, p: &NormP) -> Result<f64> {
    inner_product(grid, p, field, field)
}

/// `2 <Phi, Phi_t>_{P x H}`.
pub fn measured_rate(
    field: &SkewField,
    tendency: &SkewField,
    grid: &Grid2D,
    p: &NormP,
) -> Result<f64> {
    Ok(2.0 * inner_product(grid, p, field, tendency)?)
}

/// Inviscid and viscous surface integrals
/// `(oint Phi^T (n_j Atilde_j) Phi ds, (gamma-1) oint (u_i tau_ij n_j + kappa T_{x_j} n_j) ds)`.
pub fn surface_terms(
    field: &SkewField,
    grid: &Grid2D,
    gas: &GasParams,
    p: &NormP,
) -> Result<(f64, f64)> {
    if grid.kind() == GridKind::Periodic {
        return Err(Error::NoBoundary);
    }
    field.validate()?;
    let (nx, ny) = grid.shape();

    let mut inv_err = None;
    let inviscid = BoundaryValues::from_fn(nx, ny, |face, i, j| {
        let phi = field.get(i, j);
        let [n1, n2] = face.normal();
        let axis = if n1 != 0.0 { Axis::X } else { Axis::Y };
        let sign = n1 + n2;
        match build_atilde(phi, gas, p, axis) {
            Ok(a) => {
                let v = Vec4::from(phi.phi);
                sign * v.dot(&(a * v))
            }
            Err(e) => {
                inv_err.get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = inv_err {
        return Err(e);
    }
    let surface_inviscid = grid.boundary_quadrature(&inviscid)?;

    let surface_viscous = if gas.is_viscous() {
        let vf = viscous_fields(field, grid, gas)?;
        let visc = BoundaryValues::from_fn(nx, ny, |face, i, j| {
            let n = face.normal();
            let mut s = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    s += vf.velocity[a][[i, j]] * vf.tau[a][b][[i, j]] * n[b];
                }
                s += vf.heat_flux[a][[i, j]] * n[a];
            }
            s
        });
        (gas.gamma - 1.0) * grid.boundary_quadrature(&visc)?
    } else {
        0.0
    };
    Ok((surface_inviscid, surface_viscous))
}

/// Full audit of the current field. On periodic grids both surface terms are zero.
pub fn balance_residual(
    field: &SkewField,
    grid: &Grid2D,
    gas: &GasParams,
    p: &NormP,
) -> Result<EnergyBalanceReport> {
    let tendency = full_rhs(field, grid, gas)?;
    let energy = energy_norm(field, grid, p)?;
    let rate_measured = measured_rate(field, &tendency, grid, p)?;
    let (surface_inviscid, surface_viscous) = match grid.kind() {
        GridKind::Bounded => surface_terms(field, grid, gas, p)?,
        GridKind::Periodic => (0.0, 0.0),
    };
    Ok(EnergyBalanceReport {
        energy,
        rate_measured,
        surface_inviscid,
        surface_viscous,
        residual: rate_measured + surface_inviscid - surface_viscous,
    })
}

/// Centered time difference `(E(t+dt) - E(t-dt)) / (2 dt)` from one RK4
/// step forward and one backward.
pub fn time_differenced_rate(
    field: &SkewField,
    grid: &Grid2D,
    gas: &GasParams,
    p: &NormP,
    dt: f64,
) -> Result<f64> {
    let fwd = rk4_step(field, dt, |f| full_rhs(f, grid, gas))?;
    let bwd = rk4_step(field, dt, |f| {
        let mut t = full_rhs(f, grid, gas)?;
        t.scale(-1.0);
        Ok(t)
    })?;
    Ok((energy_norm(&fwd, grid, p)? - energy_norm(&bwd, grid, p)?) / (2.0 * dt))
}

/// `(int rho dOmega, int E_total dOmega)` with the grid quadrature.
pub fn conserved_integrals(field: &SkewField, grid: &Grid2D, gas: &GasParams) -> (f64, f64) {
    let (nx, ny) = grid.shape();
    let mut mass = Vec::with_capacity(nx * ny);
    let mut total = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let w = grid.weight(i, j);
            let [p1, p2, p3, p4] = field.get(i, j).phi;
            mass.push(w * p1 * p1);
            total.push(w * (p4 * p4 / (gas.gamma - 1.0) + 0.5 * (p2 * p2 + p3 * p3)));
        }
    }
    (pairwise_sum(&mass), pairwise_sum(&total))
}

/// Sum of `Phi^T (n Atilde) Phi` over one face, for diagnostics.
pub fn face_flux(
    field: &SkewField,
    grid: &Grid2D,
    gas: &GasParams,
    p: &NormP,
    face: Face,
) -> Result<f64> {
    let (nx, ny) = grid.shape();
    let n = face.normal();
    let axis = if n[0] != 0.0 { Axis::X } else { Axis::Y };
    let sign = n[0] + n[1];
    let (nodes, w): (Vec<(usize, usize)>, &[f64]) = match face {
        Face::Left => ((0..ny).map(|j| (0, j)).collect(), grid.y.weights()),
        Face::Right => ((0..ny).map(|j| (nx - 1, j)).collect(), grid.y.weights()),
        Face::Bottom => ((0..nx).map(|i| (i, 0)).collect(), grid.x.weights()),
        Face::Top => ((0..nx).map(|i| (i, ny - 1)).collect(), grid.x.weights()),
    };
    let mut terms = Vec::with_capacity(nodes.len());
    for ((i, j), w) in nodes.into_iter().zip(w) {
        let phi = field.get(i, j);
        let v = Vec4::from(phi.phi);
        terms.push(w * sign * v.dot(&(build_atilde(phi, gas, p, axis)? * v)));
    }
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::build_p;
    use crate::manufactured::{periodic_smooth_ic_about, random_field};
    use crate::sbp::Order;
    use crate::state::{primitive_to_skew, PrimitiveState, SkewState};

    fn unit_grid(n: usize, kind: GridKind) -> Grid2D {
        Grid2D::uniform(Order::Fourth, n, n, 1.0, 1.0, kind).unwrap()
    }

    #[test]
    fn energy_norm_examples() {
        let g = GasParams::default();
        let p = build_p(&g, 1.0).unwrap();
        let grid = unit_grid(11, GridKind::Bounded);
        let f = SkewField::uniform(11, 11, SkewState::new([1.0, 0.0, 0.0, 1.0]));
        assert!((energy_norm(&f, &grid, &p).unwrap() - 2.0).abs() < 1e-14);
        let rnd = random_field(&grid, PrimitiveState::new(1.0, 0.3, 0.1, 1.0), 0.3, 1).unwrap();
        let mut twice = rnd.clone();
        twice.scale(2.0);
        let e1 = energy_norm(&rnd, &grid, &p).unwrap();
        assert!((energy_norm(&twice, &grid, &p).unwrap() - 4.0 * e1).abs() <= 1e-14 * e1);
        assert_eq!(
            energy_norm(&SkewField::zeros(11, 11), &grid, &p).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_tendency_zero_rate() {
        let g = GasParams::default();
        let p = build_p(&g, 1.0).unwrap();
        let grid = unit_grid(9, GridKind::Periodic);
        let f = SkewField::uniform(9, 9, SkewState::new([1.0, 0.2, 0.0, 1.0]));
        assert_eq!(
            measured_rate(&f, &SkewField::zeros(9, 9), &grid, &p).unwrap(),
            0.0
        );
    }

    #[test]
    fn quiescent_state_has_no_surface_terms() {
        let g = GasParams::new(1.4, 1.0, 0.1, 0.0, 0.1).unwrap();
        let p = build_p(&g, 1.0).unwrap();
        let grid = unit_grid(10, GridKind::Bounded);
        let f = SkewField::uniform(10, 10, SkewState::new([1.3, 0.0, 0.0, 0.8]));
        let (a, b) = surface_terms(&f, &grid, &g, &p).unwrap();
        assert_eq!(a, 0.0);
        assert!(b.abs() < 1e-14);
    }

    #[test]
    fn uniform_flow_faces_cancel() {
        let g = GasParams::default();
        let p = build_p(&g, 1.0).unwrap();
        let grid = unit_grid(10, GridKind::Bounded);
        let f = SkewField::uniform(
            10,
            10,
            primitive_to_skew(PrimitiveState::new(1.0, 0.7, 0.0, 1.0)).unwrap(),
        );
        let (a, _) = surface_terms(&f, &grid, &g, &p).unwrap();
        let left = face_flux(&f, &grid, &g, &p, Face::Left).unwrap();
        assert!(left < 0.0);
        assert!((left + face_flux(&f, &grid, &g, &p, Face::Right).unwrap()).abs() < 1e-14);
        assert!(a.abs() < 1e-14);
    }

    #[test]
    fn balance_holds_for_rough_fields() {
        let g = GasParams::new(1.4, 1.0, 0.05, -0.01, 0.07).unwrap();
        for order in [Order::Second, Order::Fourth] {
            let grid = Grid2D::uniform(order, 14, 11, 1.3, 0.8, GridKind::Bounded).unwrap();
            for seed in 0..10 {
                let p = build_p(&g, 0.5 + seed as f64).unwrap();
                let f = random_field(&grid, PrimitiveState::new(1.0, 0.3, -0.2, 1.0), 0.4, seed)
                    .unwrap();
                let r = balance_residual(&f, &grid, &g, &p).unwrap();
                assert!(
                    r.relative_residual() <= 1e-12,
                    "{order:?} seed {seed}: {r:?}"
                );
                assert!(r.surface_viscous != 0.0);
            }
        }
    }

    #[test]
    fn inviscid_gas_has_no_viscous_surface_term() {
        let g = GasParams::default();
        let p = build_p(&g, 1.0).unwrap();
        let grid = unit_grid(12, GridKind::Bounded);
        let f = random_field(&grid, PrimitiveState::new(1.0, 0.3, -0.2, 1.0), 0.3, 2).unwrap();
        let r = balance_residual(&f, &grid, &g, &p).unwrap();
        assert_eq!(r.surface_viscous, 0.0);
        assert!(r.relative_residual() <= 1e-12);
    }

    #[test]
    fn periodic_rate_vanishes_with_viscosity() {
        let g = GasParams::new(1.4, 1.0, 0.05, 0.0, 0.05).unwrap();
        let p = build_p(&g, 1.0).unwrap();
        let grid = unit_grid(16, GridKind::Periodic);
        let f = random_field(&grid, PrimitiveState::new(1.0, 0.3, -0.2, 1.0), 0.3, 5).unwrap();
        let r = balance_residual(&f, &grid, &g, &p).unwrap();
        assert_eq!((r.surface_inviscid, r.surface_viscous), (0.0, 0.0));
        assert!(r.rate_measured.abs() <= 1e-12 * r.scale(), "{r:?}");
        assert_eq!(surface_terms(&f, &grid, &g, &p), Err(Error::NoBoundary));
    }

    #[test]
    fn semi_discrete_rate_matches_time_difference() {
        let g = GasParams::new(1.4, 1.0, 0.01, 0.0, 0.01).unwrap();
        let p = build_p(&g, 1.0).unwrap();
        let grid = unit_grid(17, GridKind::Bounded);
        let f =
            periodic_smooth_ic_about(&grid, PrimitiveState::new(1.0, 0.5, 0.1, 1.0), 0.1).unwrap();
        let rate = balance_residual(&f, &grid, &g, &p).unwrap().rate_measured;
        let e1 = (time_differenced_rate(&f, &grid, &g, &p, 1e-3).unwrap() - rate).abs();
        let e2 = (time_differenced_rate(&f, &grid, &g, &p, 5e-4).unwrap() - rate).abs();
        assert!(e1 < 1e-3 * rate.abs().max(1.0), "{e1} {rate}");
        // second order in dt
        assert!(e2 < 0.35 * e1, "{e1} {e2}");
    }
}
