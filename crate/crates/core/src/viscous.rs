//! Viscous stress, dissipation, heat conduction and the rescaled viscous
//! right-hand side of the skew formulation.

use crate::coeffs::NormP;
use crate::error::Result;
use crate::state::{GasParams, PrimitiveState, SkewState, VacuumFloor};

/// `g[i][j] = d u_i / d x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VelocityGradient {
    pub g: [[f64; 2]; 2],
}

impl VelocityGradient {
    pub fn new(g: [[f64; 2]; 2]) -> Self {
        Self { g }
    }

    #[inline]
    pub fn divergence(&self) -> f64 {
        self.g[0][0] + self.g[1][1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StressTensor {
    pub tau: [[f64; 2]; 2],
}

/// Source `S = (0, S2, S3, S4)` of the primitive viscous system.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ViscousSource {
    pub s: [f64; 4],
}

#[inline]
pub fn stress_tensor(grad: &VelocityGradient, g: &GasParams) -> StressTensor {
    let div = grad.divergence();
    let off = g.mu * (grad.g[0][1] + grad.g[1][0]);
    StressTensor {
        tau: [
            [2.0 * g.mu * grad.g[0][0] + g.lambda_visc * div, off],
            [off, 2.0 * g.mu * grad.g[1][1] + g.lambda_visc * div],
        ],
    }
}

/// `Psi = tau_ij (u_i)_{x_j}`.
#[inline]
pub fn dissipation(grad: &VelocityGradient, tau: &StressTensor) -> f64 {
    tau.tau[0][0] * grad.g[0][0]
        + tau.tau[0][1] * grad.g[0][1]
        + tau.tau[1][0] * grad.g[1][0]
        + tau.tau[1][1] * grad.g[1][1]
}

/// Builds `S` from the divergence of the stress, the heat-conduction term
/// `(kappa T_{x_j})_{x_j}` and the dissipation.
pub fn viscous_source(
    tau_div: [f64; 2],
    heat_div: f64,
    psi: f64,
    v: PrimitiveState,
    g: &GasParams,
) -> Result<ViscousSource> {
    v.check(VacuumFloor::default())?;
    Ok(ViscousSource {
        s: [
            0.0,
            tau_div[0] / v.rho,
            tau_div[1] / v.rho,
            (g.gamma - 1.0) * (heat_div + psi),
        ],
    })
}

/// The diagonal scaling `diag(1/(2 phi1), phi1, phi1, 1/(2 phi4))` that
/// maps the primitive source into the skew variables.
pub fn source_scaling(phi: SkewState) -> Result<[f64; 4]> {
    phi.check()?;
    let [p1, _, _, p4] = phi.phi;
    Ok([0.5 / p1, p1, p1, 0.5 / p4])
}

/// `2 P Lambda S` evaluated as a matrix product.
pub fn scaled_rhs(phi: SkewState, s: &ViscousSource, p: &NormP) -> Result<[f64; 4]> {
    let scale = source_scaling(phi)?;
    Ok(std::array::from_fn(|k| 2.0 * p.diag[k] * scale[k] * s.s[k]))
}

/// Closed form `(gamma-1) (0, div_tau_1/phi1, div_tau_2/phi1, (heat + Psi)/phi4)`.
pub fn scaled_rhs_closed_form(
    phi: SkewState,
    tau_div: [f64; 2],
    heat_div: f64,
    psi: f64,
    g: &GasParams,
) -> Result<[f64; 4]> {
    phi.check()?;
    let [p1, _, _, p4] = phi.phi;
    let gm1 = g.gamma - 1.0;
    Ok([
        0.0,
        gm1 * tau_div[0] / p1,
        gm1 * tau_div[1] / p1,
        gm1 * (heat_div + psi) / p4,
    ])
}

pub fn temperature(v: PrimitiveState, g: &GasParams) -> Result<f64> {
    v.check(VacuumFloor::default())?;
    Ok(v.p / (g.gas_constant * v.rho))
}

/// `T = (phi4 / phi1)^2 / R`.
#[inline]
pub fn temperature_from_skew(phi: &SkewState, g: &GasParams) -> f64 {
    let r = phi.phi[3] / phi.phi[0];
    r * r / g.gas_constant
}
