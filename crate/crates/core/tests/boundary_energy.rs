//! The boundary module's `W^T A W / w1`, integrated over the faces of a
//! bounded grid, reproduces the energy module's surface terms.

use ndarray::Array2;
use skewns::boundary::{assemble_boundary_term, rotate_stress};
use skewns::coeffs::{build_p, Axis, NormP};
use skewns::energy::{balance_residual, surface_terms};
use skewns::manufactured::{random_field, SmoothField};
use skewns::sbp::{BoundaryValues, Face, Grid2D, GridKind, Order};
use skewns::solver::viscous_fields;
use skewns::state::{GasParams, PrimitiveState, SkewField, UnitNormal};
use skewns::viscous::StressTensor;

/// How `psi_n = d(phi4/phi1)/dn` is traced at boundary nodes.
#[derive(Clone, Copy)]
enum PsiTrace {
    /// Recovered from the discrete temperature gradient the solver uses.
    FromTemperature,
    /// One-sided SBP derivative of `phi4/phi1`.
    OneSided,
}

fn integrated_bt(
    field: &SkewField,
    grid: &Grid2D,
    gas: &GasParams,
    p: &NormP,
    trace: PsiTrace,
) -> f64 {
    let (nx, ny) = grid.shape();
    let vf = viscous_fields(field, grid, gas).unwrap();
    let ratio = Array2::from_shape_fn((nx, ny), |(i, j)| {
        let phi = field.get(i, j).phi;
        phi[3] / phi[0]
    });
    let dr = [
        grid.apply_d(ratio.view(), Axis::X).unwrap(),
        grid.apply_d(ratio.view(), Axis::Y).unwrap(),
    ];
    let dt = [
        grid.apply_d(vf.temperature.view(), Axis::X).unwrap(),
        grid.apply_d(vf.temperature.view(), Axis::Y).unwrap(),
    ];
    let bt = BoundaryValues::from_fn(nx, ny, |face: Face, i, j| {
        let [n1, n2] = face.normal();
        let n = UnitNormal::new(n1, n2).unwrap();
        let psi_n = match trace {
            PsiTrace::FromTemperature => {
                let dtn = dt[0][[i, j]] * n1 + dt[1][[i, j]] * n2;
                gas.gas_constant * dtn / (2.0 * ratio[[i, j]])
            }
            PsiTrace::OneSided => dr[0][[i, j]] * n1 + dr[1][[i, j]] * n2,
        };
        let tau = StressTensor {
            tau: [
                [vf.tau[0][0][[i, j]], vf.tau[0][1][[i, j]]],
                [vf.tau[1][0][[i, j]], vf.tau[1][1][[i, j]]],
            ],
        };
        let (_, _, v) =
            assemble_boundary_term(field.get(i, j), n, rotate_stress(&tau, n), psi_n, gas, p)
                .unwrap();
        v
    });
    grid.boundary_quadrature(&bt).unwrap()
}

fn gas() -> GasParams {
    GasParams::new(1.4, 0.8, 0.03, -0.01, 0.05).unwrap()
}

#[test]
fn integrated_bt_matches_surface_terms() {
    let gas = gas();
    for (order, alpha_sq) in [(Order::Fourth, 1.0), (Order::Second, 2.5)] {
        let p = build_p(&gas, alpha_sq).unwrap();
        let grid = Grid2D::uniform(order, 21, 17, 1.3, 0.9, GridKind::Bounded).unwrap();
        for seed in 0..5 {
            let f =
                random_field(&grid, PrimitiveState::new(1.0, 0.4, -0.3, 1.0), 0.3, seed).unwrap();
            let (inv, visc) = surface_terms(&f, &grid, &gas, &p).unwrap();
            let bt = integrated_bt(&f, &grid, &gas, &p, PsiTrace::FromTemperature);
            let scale = inv.abs().max(visc.abs());
            assert!(
                (bt - (inv - visc)).abs() <= 1e-12 * scale,
                "{bt} vs {}",
                inv - visc
            );

            // and the energy rate is minus the integrated boundary term
            let r = balance_residual(&f, &grid, &gas, &p).unwrap();
            assert!((r.rate_measured + bt).abs() <= 1e-12 * scale.max(r.rate_measured.abs()));
        }
    }
}

#[test]
fn one_sided_psi_trace_converges() {
    let gas = gas();
    let p = build_p(&gas, 1.0).unwrap();
    let smooth =
        SmoothField::new(PrimitiveState::new(1.0, 0.4, -0.3, 1.0), 0.2, [1.0, 1.0]).unwrap();
    let gaps: Vec<f64> = [17, 33, 65]
        .iter()
        .map(|&n| {
            let grid = Grid2D::uniform(Order::Fourth, n, n, 1.0, 1.0, GridKind::Bounded).unwrap();
            let f = smooth.sample(&grid).unwrap();
            let a = integrated_bt(&f, &grid, &gas, &p, PsiTrace::FromTemperature);
            let b = integrated_bt(&f, &grid, &gas, &p, PsiTrace::OneSided);
            (a - b).abs()
        })
        .collect();
    // boundary closure of the fourth-order operator is third order or better
    for w in gaps.windows(2) {
        assert!(w[0] / w[1] > 6.0, "{gaps:?}");
    }
}
