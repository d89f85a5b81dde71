//! Coefficient matrices of the skew-symmetric formulation.
//!
//! `B_i` is the quasilinear coefficient of `Phi_t + B_i Phi_{x_i} = 0`,
//! obtained from the primitive Euler system by the similarity
//! `B = M A_prim M^-1` with `M = dPhi/dV`. `Atilde_i` and the norm `P`
//! satisfy `(Atilde Phi)_x + Atilde^T Phi_x = 2 P B Phi_x`, and the split
//! matrices `C_i, D_i` are `(2P)^-1` times `Atilde` and its transpose.

use nalgebra::{Matrix4, Vector4};

use crate::error::{domain, Error, Result};
use crate::state::{GasParams, SkewState};

pub type Mat4 = Matrix4<f64>;
pub type Vec4 = Vector4<f64>;

/// Coordinate direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    /// Index of the velocity component along this axis (0 or 1).
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Diagonal energy weight `diag(alpha^2, (gamma-1)/2, (gamma-1)/2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormP {
    pub alpha_sq: f64,
    pub diag: [f64; 4],
}

impl NormP {
    pub fn matrix(&self) -> Mat4 {
        Mat4::from_diagonal(&Vec4::from(self.diag))
    }

    /// `phi^T P phi`.
    #[inline]
    pub fn quad(&self, a: &[f64; 4], b: &[f64; 4]) -> f64 {
        self.diag[0] * a[0] * b[0]
            + self.diag[1] * a[1] * b[1]
            + self.diag[2] * a[2] * b[2]
            + self.diag[3] * a[3] * b[3]
    }
}

pub fn build_p(g: &GasParams, alpha_sq: f64) -> Result<NormP> {
    if !(alpha_sq > 0.0) || !alpha_sq.is_finite() {
        return domain(format!("alpha^2 must be positive, got {alpha_sq}"));
    }
    if !(g.gamma > 1.0) {
        return domain("gamma must exceed 1 for a positive norm");
    }
    let half = 0.5 * (g.gamma - 1.0);
    Ok(NormP {
        alpha_sq,
        diag: [alpha_sq, half, half, 1.0],
    })
}

/// Atilde with the state entering only through `u` (velocity along the
/// axis) and `r = phi4 / phi1`. The map is linear in `(u, r)`, which the
/// chain-rule derivative in [`skew_identity_residual`] relies on.
fn atilde_linear(u: f64, r: f64, gamma: f64, alpha_sq: f64, axis: Axis) -> Mat4 {
    let half = 0.5 * (gamma - 1.0);
    let mut a = Mat4::zeros();
    a[(0, 0)] = alpha_sq * u;
    a[(1, 1)] = half * u;
    a[(2, 2)] = half * u;
    a[(3, 3)] = (2.0 - gamma) * u;
    // coupling of phi4 to the momentum component along the axis
    a[(3, 1 + axis.index())] = 2.0 * (gamma - 1.0) * r;
    a
}

pub fn build_atilde(phi: SkewState, g: &GasParams, p: &NormP, axis: Axis) -> Result<Mat4> {
    phi.check()?;
    let u = phi.phi[1 + axis.index()] / phi.phi[0];
    let r = phi.phi[3] / phi.phi[0];
    Ok(atilde_linear(u, r, g.gamma, p.alpha_sq, axis))
}

/// Coefficient matrix of the primitive system `V_t + A V_x = 0`,
/// `V = (rho, u1, u2, p)`.
pub fn primitive_jacobian(rho: f64, u: [f64; 2], p: f64, gamma: f64, axis: Axis) -> Mat4 {
    let k = axis.index();
    let un = u[k];
    let mut a = Mat4::from_diagonal_element(un);
    a[(0, 1 + k)] = rho;
    a[(1 + k, 3)] = 1.0 / rho;
    a[(3, 1 + k)] = gamma * p;
    a
}

/// `dPhi/dV` at the given state.
pub fn skew_jacobian(phi: SkewState) -> Mat4 {
    let [p1, _, _, p4] = phi.phi;
    let [u1, u2] = phi.velocity();
    let mut m = Mat4::zeros();
    m[(0, 0)] = 0.5 / p1;
    m[(1, 0)] = 0.5 * u1 / p1;
    m[(1, 1)] = p1;
    m[(2, 0)] = 0.5 * u2 / p1;
    m[(2, 2)] = p1;
    m[(3, 3)] = 0.5 / p4;
    m
}

pub fn build_b(phi: SkewState, g: &GasParams, axis: Axis) -> Result<Mat4> {
    phi.check()?;
    let [p1, _, _, p4] = phi.phi;
    let a = primitive_jacobian(p1 * p1, phi.velocity(), p4 * p4, g.gamma, axis);
    let m = skew_jacobian(phi);
    let m_inv = m
        .try_inverse()
        .ok_or_else(|| Error::Internal("singular skew Jacobian".into()))?;
    Ok(m * a * m_inv)
}

/// Split-form matrices `C1, C2` (x) and `D1, D2` (y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitMatrices {
    pub c1: Mat4,
    pub c2: Mat4,
    pub d1: Mat4,
    pub d2: Mat4,
}

impl SplitMatrices {
    /// `(conservative, advective)` pair along `axis`.
    pub fn along(&self, axis: Axis) -> (&Mat4, &Mat4) {
        match axis {
            Axis::X => (&self.c1, &self.c2),
            Axis::Y => (&self.d1, &self.d2),
        }
    }
}

pub fn build_split_matrices(phi: SkewState, g: &GasParams, p: &NormP) -> Result<SplitMatrices> {
    // (2P)^-1 is diagonal: scale rows
    let s = p.diag.map(|d| 0.5 / d);
    let scaled = |m: Mat4| Mat4::from_fn(|r, c| s[r] * m[(r, c)]);
    let a1 = build_atilde(phi, g, p, Axis::X)?;
    let a2 = build_atilde(phi, g, p, Axis::Y)?;
    Ok(SplitMatrices {
        c1: scaled(a1),
        c2: scaled(a1.transpose()),
        d1: scaled(a2),
        d2: scaled(a2.transpose()),
    })
}

/// Absolute residual of the skew identity together with the magnitude of
/// the terms it balances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub abs: f64,
    pub scale: f64,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.abs
        } else {
            self.abs / self.scale
        }
    }
}

/// Evaluates `(Atilde Phi)_x + Atilde^T Phi_x - 2 P B Phi_x` given the
/// matrices and the exact derivative data.
pub fn identity_terms(
    atilde: &Mat4,
    d_atilde: &Mat4,
    two_pb: &Mat4,
    phi: &Vec4,
    dphi: &Vec4,
) -> IdentityResidual {
    let t1 = d_atilde * phi + atilde * dphi;
    let t2 = atilde.transpose() * dphi;
    let rhs = two_pb * dphi;
    let res = t1 + t2 - rhs;
    IdentityResidual {
        abs: res.norm(),
        scale: (t1.norm() + t2.norm()).max(rhs.norm()),
    }
}

/// Derivative of Atilde along the axis, by the chain rule through `u` and `phi4/phi1`.
pub fn atilde_derivative(
    phi: SkewState,
    dphi: [f64; 4],
    g: &GasParams,
    p: &NormP,
    axis: Axis,
) -> Result<Mat4> {
    phi.check()?;
    let k = 1 + axis.index();
    let p1 = phi.phi[0];
    let u = phi.phi[k] / p1;
    let r = phi.phi[3] / p1;
    let du = (dphi[k] - u * dphi[0]) / p1;
    let dr = (dphi[3] - r * dphi[0]) / p1;
    Ok(atilde_linear(du, dr, g.gamma, p.alpha_sq, axis))
}

/// Residual of the skew identity at a point where `phi` and its exact
/// derivative `dphi` along `axis` are known.
pub fn skew_identity_residual(
    phi: SkewState,
    dphi: [f64; 4],
    g: &GasParams,
    p: &NormP,
    axis: Axis,
) -> Result<IdentityResidual> {
    let a = build_atilde(phi, g, p, axis)?;
    let da = atilde_derivative(phi, dphi, g, p, axis)?;
    let b = build_b(phi, g, axis)?;
    let two_pb = 2.0 * p.matrix() * b;
    Ok(identity_terms(
        &a,
        &da,
        &two_pb,
        &Vec4::from(phi.phi),
        &Vec4::from(dphi),
    ))
}
