//! Boundary-term analysis in the normal/tangential frame.
//!
//! The surface integrand `Phi^T (n_j Atilde_j) Phi - (gamma-1)(u_i tau_ij n_j + kappa dT/dn)`
//! is written as `W^T A W / w1` with seven variables, block-diagonalized by
//! `R`, then fully diagonalized by `S = diag(1, S22, S22)`. The number of
//! negative diagonal entries is the number of boundary conditions needed.

use nalgebra::{DMatrix, Matrix3, SMatrix, SymmetricEigen, Vector3};

use crate::coeffs::{build_atilde, Axis, NormP, Vec4};
use crate::error::{domain, Degeneracy, Error, Result};
use crate::state::{primitive_to_skew, GasParams, PrimitiveState, SkewState, UnitNormal};
use crate::viscous::StressTensor;

pub type Mat7 = SMatrix<f64, 7, 7>;

/// `|u_n| / c` and `|beta|` below this are treated as exactly degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Relative tolerance for accepting an `A22^-1` factorization.
pub const FACTORIZATION_TOL: f64 = 1e-10;

/// `(phi1, phi1 u_n, phi1 u_t, phi4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedState {
    pub phi: [f64; 4],
}

pub fn rotate_state(phi: SkewState, n: UnitNormal) -> RotatedState {
    let [p1, p2, p3, p4] = phi.phi;
    let (n1, n2) = (n.n1(), n.n2());
    RotatedState {
        phi: [p1, n1 * p2 + n2 * p3, -n2 * p2 + n1 * p3, p4],
    }
}

/// Traction `tau . n`.
pub fn stress_vector(tau: &StressTensor, n: UnitNormal) -> [f64; 2] {
    let t = &tau.tau;
    [
        t[0][0] * n.n1() + t[0][1] * n.n2(),
        t[1][0] * n.n1() + t[1][1] * n.n2(),
    ]
}

/// `(tau_n, tau_t) = N (tau . n)`.
pub fn rotate_stress(tau: &StressTensor, n: UnitNormal) -> (f64, f64) {
    let [a, b] = stress_vector(tau, n);
    (n.n1() * a + n.n2() * b, -n.n2() * a + n.n1() * b)
}

/// `theta = (gamma - 1) kappa / R`.
pub fn theta(g: &GasParams) -> f64 {
    (g.gamma - 1.0) * g.kappa / g.gas_constant
}

/// `(gamma-1) kappa dT/dn = 2 theta (phi4/phi1) psi_n`, `psi_n = d(phi4/phi1)/dn`.
pub fn heat_flux_normal(phi: SkewState, psi_n: f64, g: &GasParams) -> Result<f64> {
    phi.check()?;
    Ok(2.0 * theta(g) * (phi.phi[3] / phi.phi[0]) * psi_n)
}

/// The seven boundary variables.
///
/// `w3` is ordered `((gamma-1)/2 tau_n, (gamma-1)/2 tau_t, theta psi_n)` so
/// that the `-I3` coupling pairs each entry with `(phi2r, phi3r, phi4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTermVector {
    pub w1: f64,
    pub w2: [f64; 3],
    pub w3: [f64; 3],
    pub theta: f64,
    pub psi_n: f64,
    pub tau_n: f64,
    pub tau_t: f64,
}

impl BoundaryTermVector {
    pub fn as_array(&self) -> [f64; 7] {
        [
            self.w1, self.w2[0], self.w2[1], self.w2[2], self.w3[0], self.w3[1], self.w3[2],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryMatrixSet {
    pub a: Mat7,
    pub a11: f64,
    pub a22: Matrix3<f64>,
    pub u_n: f64,
    pub mach_n_sq: f64,
    /// `None` when `u_n = 0`.
    pub beta: Option<f64>,
}

fn a22_matrix(phi2r: f64, phi4: f64, gamma: f64) -> Matrix3<f64> {
    let half = 0.5 * (gamma - 1.0);
    Matrix3::new(
        half * phi2r,
        0.0,
        (gamma - 1.0) * phi4,
        0.0,
        half * phi2r,
        0.0,
        (gamma - 1.0) * phi4,
        0.0,
        (2.0 - gamma) * phi2r,
    )
}

fn normal_mach_sq(phi: SkewState, n: UnitNormal, g: &GasParams) -> (f64, f64) {
    let [p1, p2, p3, p4] = phi.phi;
    let u_n = (n.n1() * p2 + n.n2() * p3) / p1;
    let c_sq = g.gamma * p4 * p4 / (p1 * p1);
    (u_n, u_n * u_n / c_sq)
}

pub fn build_boundary_matrices(
    phi: SkewState,
    n: UnitNormal,
    g: &GasParams,
    p: &NormP,
) -> Result<BoundaryMatrixSet> {
    phi.check()?;
    let r = rotate_state(phi, n);
    let a11 = p.alpha_sq * r.phi[1];
    let a22 = a22_matrix(r.phi[1], r.phi[3], g.gamma);
    let mut a = Mat7::zeros();
    a[(0, 0)] = a11;
    a.fixed_view_mut::<3, 3>(1, 1).copy_from(&a22);
    for k in 0..3 {
        a[(1 + k, 4 + k)] = -1.0;
        a[(4 + k, 1 + k)] = -1.0;
    }
    let (u_n, mach_n_sq) = normal_mach_sq(phi, n, g);
    Ok(BoundaryMatrixSet {
        a,
        a11,
        a22,
        u_n,
        mach_n_sq,
        beta: beta(mach_n_sq, g).ok(),
    })
}

/// The surface integrand evaluated directly from `Atilde_j`, the full stress
/// tensor and `psi_n`:
/// `Phi^T (n_j Atilde_j) Phi - (gamma-1)(u_i tau_ij n_j + kappa dT/dn)`.
pub fn surface_integrand(
    phi: SkewState,
    n: UnitNormal,
    tau: &StressTensor,
    psi_n: f64,
    g: &GasParams,
    p: &NormP,
) -> Result<f64> {
    let v = Vec4::from(phi.phi);
    let a = build_atilde(phi, g, p, Axis::X)? * n.n1() + build_atilde(phi, g, p, Axis::Y)? * n.n2();
    let u = phi.velocity();
    let t = &tau.tau;
    let work =
        u[0] * (t[0][0] * n.n1() + t[0][1] * n.n2()) + u[1] * (t[1][0] * n.n1() + t[1][1] * n.n2());
    // T = phi4^2 / (R phi1^2), so dT/dn = 2 (phi4/phi1) psi_n / R
    let dt_dn = 2.0 * (phi.phi[3] / phi.phi[0]) * psi_n / g.gas_constant;
    Ok(v.dot(&(a * v)) - (g.gamma - 1.0) * (work + g.kappa * dt_dn))
}

/// Builds `W`, `A` and `BT = W^T A W / w1`.
pub fn assemble_boundary_term(
    phi: SkewState,
    n: UnitNormal,
    stresses: (f64, f64),
    psi_n: f64,
    g: &GasParams,
    p: &NormP,
) -> Result<(BoundaryTermVector, BoundaryMatrixSet, f64)> {
    let set = build_boundary_matrices(phi, n, g, p)?;
    let r = rotate_state(phi, n);
    let half = 0.5 * (g.gamma - 1.0);
    let th = theta(g);
    let w = BoundaryTermVector {
        w1: r.phi[0],
        w2: [r.phi[1], r.phi[2], r.phi[3]],
        w3: [half * stresses.0, half * stresses.1, th * psi_n],
        theta: th,
        psi_n,
        tau_n: stresses.0,
        tau_t: stresses.1,
    };
    let v = SMatrix::<f64, 7, 1>::from(w.as_array());
    let bt = v.dot(&(set.a * v)) / w.w1;
    Ok((w, set, bt))
}

fn degeneracy_of(set: &BoundaryMatrixSet, g: &GasParams) -> Option<Degeneracy> {
    if set.mach_n_sq.sqrt() < DEGENERACY_TOL || set.a11 == 0.0 {
        return Some(Degeneracy::StationaryNormalFlow);
    }
    match set.beta {
        Some(b) if b.abs() > DEGENERACY_TOL => None,
        _ => {
            let _ = g;
            Some(Degeneracy::BetaRoot)
        }
    }
}

/// `R W` and `Lambda_A = blkdiag(A11^-1, A22^-1, -A22^-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDiagonal {
    pub rw: [f64; 7],
    pub lambda_a: Mat7,
    /// `(RW)^T Lambda_A (RW) / w1`
    pub value: f64,
}

pub fn block_diagonalize(
    w: &BoundaryTermVector,
    set: &BoundaryMatrixSet,
    g: &GasParams,
) -> Result<BlockDiagonal> {
    if let Some(d) = degeneracy_of(set, g) {
        return Err(Error::Degenerate(d));
    }
    let a22_inv = set
        .a22
        .try_inverse()
        .ok_or(Error::Degenerate(Degeneracy::BetaRoot))?;
    let w2 = Vector3::from(w.w2);
    let w3 = Vector3::from(w.w3);
    let mid = set.a22 * w2 - w3;
    let rw = [set.a11 * w.w1, mid[0], mid[1], mid[2], w3[0], w3[1], w3[2]];
    let mut lambda_a = Mat7::zeros();
    lambda_a[(0, 0)] = 1.0 / set.a11;
    lambda_a.fixed_view_mut::<3, 3>(1, 1).copy_from(&a22_inv);
    lambda_a.fixed_view_mut::<3, 3>(4, 4).copy_from(&(-a22_inv));
    let v = SMatrix::<f64, 7, 1>::from(rw);
    let value = v.dot(&(lambda_a * v)) / w.w1;
    Ok(BlockDiagonal {
        rw,
        lambda_a,
        value,
    })
}

/// Which factorization `A22^-1 = S22 Lambda22^-1 S22^T` reproduced the
/// dense inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum A22Variant {
    /// Coupling entry `-2 phi4/phi1`, `S22 Lambda22^-1 S22^T`.
    Printed,
    /// Coupling entry `-2 phi4/phi1`, `S22^T Lambda22^-1 S22`.
    PrintedTransposed,
    /// Coupling entry `-2 phi4/phi2r`, `S22 Lambda22^-1 S22^T`.
    CorrectedCoupling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct A22Diagonalization {
    pub s22: Matrix3<f64>,
    pub lambda22: [f64; 3],
    pub variant: A22Variant,
    pub verified: bool,
    /// Relative deviation of the accepted factorization from the dense inverse.
    pub residual: f64,
}

fn unit_upper(entry: f64) -> Matrix3<f64> {
    let mut s = Matrix3::identity();
    s[(0, 2)] = entry;
    s
}

pub fn diagonalize_a22(phi: SkewState, n: UnitNormal, g: &GasParams) -> Result<A22Diagonalization> {
    let p = crate::coeffs::build_p(g, 1.0)?;
    let set = build_boundary_matrices(phi, n, g, &p)?;
    if let Some(d) = degeneracy_of(&set, g) {
        return Err(Error::Degenerate(d));
    }
    let beta = set.beta.expect("non-degenerate");
    let r = rotate_state(phi, n);
    let (p1, p2r, p4) = (r.phi[0], r.phi[1], r.phi[3]);
    let half = 0.5 * (g.gamma - 1.0);
    let lambda22 = [half * p2r, half * p2r, (2.0 - g.gamma) * p2r * beta];
    let inv_l = Matrix3::from_diagonal(&Vector3::from(lambda22.map(|v| 1.0 / v)));
    let dense = set
        .a22
        .try_inverse()
        .ok_or(Error::Degenerate(Degeneracy::BetaRoot))?;
    let scale = dense.abs().max();
    let rel = |m: Matrix3<f64>| (m - dense).abs().max() / scale;

    let printed = unit_upper(-2.0 * p4 / p1);
    let corrected = unit_upper(-2.0 * p4 / p2r);
    let candidates = [
        (
            A22Variant::Printed,
            printed,
            rel(printed * inv_l * printed.transpose()),
        ),
        (
            A22Variant::PrintedTransposed,
            printed,
            rel(printed.transpose() * inv_l * printed),
        ),
        (
            A22Variant::CorrectedCoupling,
            corrected,
            rel(corrected * inv_l * corrected.transpose()),
        ),
    ];
    let chosen = candidates
        .iter()
        .find(|c| c.2 <= FACTORIZATION_TOL)
        .unwrap_or_else(|| {
            candidates
                .iter()
                .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
                .expect("non-empty")
        });
    Ok(A22Diagonalization {
        s22: chosen.1,
        lambda22,
        variant: chosen.0,
        verified: chosen.2 <= FACTORIZATION_TOL,
        residual: chosen.2,
    })
}

/// `M*^2 = 2 (gamma-1) / (gamma (2-gamma))`, the root of beta.
pub fn critical_mach_sq(g: &GasParams) -> f64 {
    2.0 * (g.gamma - 1.0) / (g.gamma * (2.0 - g.gamma))
}

/// `beta = (M_n^2 - M*^2) / M_n^2`.
pub fn beta(mach_n_sq: f64, g: &GasParams) -> Result<f64> {
    if !(g.gamma > 1.0 && g.gamma < 2.0) {
        return domain(format!("gamma must lie in (1, 2), got {}", g.gamma));
    }
    if !mach_n_sq.is_finite() || mach_n_sq < 0.0 {
        return domain(format!("M_n^2 must be non-negative, got {mach_n_sq}"));
    }
    if mach_n_sq == 0.0 {
        return Err(Error::Degenerate(Degeneracy::StationaryNormalFlow));
    }
    Ok((mach_n_sq - critical_mach_sq(g)) / mach_n_sq)
}

/// Locates the sign change of beta on `(lo, hi)` by bisection, using only
/// evaluations of [`beta`].
pub fn beta_root_by_bisection(g: &GasParams, mut lo: f64, mut hi: f64) -> Result<f64> {
    let blo = beta(lo, g)?;
    if blo.signum() == beta(hi, g)?.signum() {
        return domain("beta does not change sign on the bracket");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta(mid, g)?.signum() == blo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The seven diagonal entries
/// `(1/(alpha^2 phi1^2 u_n)) (1; 2/(g-1), 2/(g-1), 1/((2-g) beta); -...)`,
/// with the first entry carrying `alpha^2` (`alpha^2 = 1` gives the
/// classical form).
pub fn final_lambda(phi: SkewState, n: UnitNormal, g: &GasParams, p: &NormP) -> Result<[f64; 7]> {
    let set = build_boundary_matrices(phi, n, g, p)?;
    if let Some(d) = degeneracy_of(&set, g) {
        return Err(Error::Degenerate(d));
    }
    let beta = set.beta.expect("non-degenerate");
    let p1 = phi.phi[0];
    let f = 1.0 / (p1 * p1 * set.u_n);
    let e = 2.0 / (g.gamma - 1.0);
    let t = 1.0 / ((2.0 - g.gamma) * beta);
    Ok([f / p.alpha_sq, f * e, f * e, f * t, -f * e, -f * e, -f * t])
}

/// `BT` evaluated three ways: directly, through `R`, and through `S^T R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CongruenceChain {
    pub direct: f64,
    pub block: f64,
    pub diagonal: f64,
    pub variant: A22Variant,
}

impl CongruenceChain {
    pub fn max_relative_gap(&self) -> f64 {
        let s = self
            .direct
            .abs()
            .max(self.block.abs())
            .max(self.diagonal.abs())
            .max(f64::MIN_POSITIVE);
        (self.direct - self.block)
            .abs()
            .max((self.direct - self.diagonal).abs())
            / s
    }
}

pub fn congruence_chain(
    phi: SkewState,
    n: UnitNormal,
    stresses: (f64, f64),
    psi_n: f64,
    g: &GasParams,
    p: &NormP,
) -> Result<CongruenceChain> {
    let (w, set, direct) = assemble_boundary_term(phi, n, stresses, psi_n, g, p)?;
    let blk = block_diagonalize(&w, &set, g)?;
    let diag = diagonalize_a22(phi, n, g)?;
    let lam = final_lambda(phi, n, g, p)?;
    let st = diag.s22.transpose();
    let y2 = st * Vector3::new(blk.rw[1], blk.rw[2], blk.rw[3]);
    let y3 = st * Vector3::new(blk.rw[4], blk.rw[5], blk.rw[6]);
    let z = [blk.rw[0], y2[0], y2[1], y2[2], y3[0], y3[1], y3[2]];
    let diagonal = z.iter().zip(&lam).map(|(z, l)| l * z * z).sum();
    Ok(CongruenceChain {
        direct,
        block: blk.value,
        diagonal,
        variant: diag.variant,
    })
}

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn of_values(values: &[f64], zero_tol: f64) -> Self {
        let mut s = Signature::default();
        for v in values {
            if v.abs() <= zero_tol {
                s.zero += 1;
            } else if *v > 0.0 {
                s.positive += 1;
            } else {
                s.negative += 1;
            }
        }
        s
    }
}

/// Signature of a symmetric matrix from its eigenvalues.
pub fn dense_signature(m: &DMatrix<f64>) -> Signature {
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Signature::of_values(eig.eigenvalues.as_slice(), 1e-12 * scale)
}

/// Signature of `A / w1` at the given state.
pub fn boundary_matrix_signature(
    phi: SkewState,
    n: UnitNormal,
    g: &GasParams,
    p: &NormP,
) -> Result<Signature> {
    let set = build_boundary_matrices(phi, n, g, p)?;
    let m = DMatrix::from_iterator(7, 7, set.a.iter().map(|v| v / phi.phi[0]));
    Ok(dense_signature(&m))
}

/// A concrete state with `sign(u_n)` and `M_n^2` prescribed:
/// `rho = p = 1`, tangential velocity 0.25, normal `(1, 0)`.
pub fn representative_state(
    u_n_sign: f64,
    mach_n_sq: f64,
    g: &GasParams,
) -> Result<(SkewState, UnitNormal)> {
    if u_n_sign == 0.0 || !u_n_sign.is_finite() {
        return Err(Error::Degenerate(Degeneracy::StationaryNormalFlow));
    }
    if !(mach_n_sq >= 0.0) {
        return domain("M_n^2 must be non-negative");
    }
    let c = g.gamma.sqrt();
    let u_n = u_n_sign.signum() * mach_n_sq.sqrt() * c;
    let phi = primitive_to_skew(PrimitiveState::new(1.0, u_n, 0.25, 1.0))?;
    Ok((phi, UnitNormal::X_PLUS))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcCount {
    pub count: usize,
    pub signs: [i8; 7],
    pub beta: f64,
}

/// Number of negative entries of the final diagonal, from the signs of
/// `u_n` and `beta(M_n^2)` alone.
pub fn count_boundary_conditions(u_n_sign: f64, mach_n_sq: f64, g: &GasParams) -> Result<BcCount> {
    if !(g.gamma > 1.0 && g.gamma < 2.0) {
        return domain(format!("gamma must lie in (1, 2), got {}", g.gamma));
    }
    if u_n_sign == 0.0 || !u_n_sign.is_finite() {
        return Err(Error::Degenerate(Degeneracy::StationaryNormalFlow));
    }
    let b = beta(mach_n_sq, g)?;
    if b.abs() <= DEGENERACY_TOL {
        return Err(Error::Degenerate(Degeneracy::BetaRoot));
    }
    let s = u_n_sign.signum() as i8;
    let sb = b.signum() as i8;
    let signs = [s, s, s, s * sb, -s, -s, -s * sb];
    Ok(BcCount {
        count: signs.iter().filter(|v| **v < 0).count(),
        signs,
        beta: b,
    })
}

/// One row of a boundary-condition sweep. `count` is `None` on degenerate rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcRow {
    pub gamma: f64,
    pub u_n_sign: i8,
    pub mach_n_sq: f64,
    pub beta: Option<f64>,
    pub signs: Option<[i8; 7]>,
    pub count: Option<usize>,
    /// Negative eigenvalues of the dense `A / w1` at a representative state.
    pub dense_negative: Option<usize>,
    pub degeneracy: Option<Degeneracy>,
}

pub fn sweep(g: &GasParams, mach_n_sq: &[f64], signs: &[i8]) -> Result<Vec<BcRow>> {
    let p = crate::coeffs::build_p(g, 1.0)?;
    let mut rows = Vec::new();
    for &s in signs {
        for &m in mach_n_sq {
            let b = beta(m, g).ok();
            let row = match count_boundary_conditions(s as f64, m, g) {
                Ok(c) => {
                    let (phi, n) = representative_state(s as f64, m, g)?;
                    BcRow {
                        gamma: g.gamma,
                        u_n_sign: s,
                        mach_n_sq: m,
                        beta: b,
                        signs: Some(c.signs),
                        count: Some(c.count),
                        dense_negative: Some(boundary_matrix_signature(phi, n, g, &p)?.negative),
                        degeneracy: None,
                    }
                }
                Err(Error::Degenerate(d)) => BcRow {
                    gamma: g.gamma,
                    u_n_sign: s,
                    mach_n_sq: m,
                    beta: b,
                    signs: None,
                    count: None,
                    dense_negative: None,
                    degeneracy: Some(d),
                },
                Err(e) => return Err(e),
            };
            rows.push(row);
        }
    }
    Ok(rows)
}
