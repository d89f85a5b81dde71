//! Variable sets of the 2D ideal-gas model and the exact maps between them.
//!
//! Three sets are used: primitive `(rho, u1, u2, p)`, skew
//! `phi = (sqrt(rho), sqrt(rho) u1, sqrt(rho) u2, sqrt(p))` and conservative
//! `(rho, m1, m2, E)`. Every transform rejects vacuum instead of clipping.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default lower bound for density and pressure accepted at transform entry.
pub const DEFAULT_FLOOR: f64 = 1e-12;

/// Tolerance on `|n| - 1` for unit normals.
pub const UNIT_NORMAL_TOL: f64 = 1e-12;

/// Ideal gas with constant transport coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub gamma: f64,
    pub gas_constant: f64,
    pub mu: f64,
    pub lambda_visc: f64,
    pub kappa: f64,
}

impl GasParams {
    pub fn new(
        gamma: f64,
        gas_constant: f64,
        mu: f64,
        lambda_visc: f64,
        kappa: f64,
    ) -> Result<Self> {
        let g = Self {
            gamma,
            gas_constant,
            mu,
            lambda_visc,
            kappa,
        };
        g.validate()?;
        Ok(g)
    }

    /// Inviscid gas, `gamma = 1.4`, `R = 1`.
    pub fn inviscid(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0, 0.0, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.gamma,
            self.gas_constant,
            self.mu,
            self.lambda_visc,
            self.kappa,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return domain("gas parameters must be finite");
        }
        if !(self.gamma > 1.0 && self.gamma < 2.0) {
            return domain(format!("gamma must lie in (1, 2), got {}", self.gamma));
        }
        if self.gas_constant <= 0.0 {
            return domain(format!(
                "gas constant must be positive, got {}",
                self.gas_constant
            ));
        }
        if self.mu < 0.0 {
            return domain(format!("mu must be non-negative, got {}", self.mu));
        }
        if self.kappa < 0.0 {
            return domain(format!("kappa must be non-negative, got {}", self.kappa));
        }
        if 3.0 * self.lambda_visc + 2.0 * self.mu < 0.0 {
            return domain("3 lambda + 2 mu must be non-negative");
        }
        Ok(())
    }

    pub fn is_viscous(&self) -> bool {
        self.mu != 0.0 || self.lambda_visc != 0.0 || self.kappa != 0.0
    }
}

impl Default for GasParams {
    fn default() -> Self {
        Self {
            gamma: 1.4,
            gas_constant: 1.0,
            mu: 0.0,
            lambda_visc: 0.0,
            kappa: 0.0,
        }
    }
}

/// Lower bounds on density and pressure. Values below are rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumFloor {
    pub rho_min: f64,
    pub p_min: f64,
}

impl Default for VacuumFloor {
    fn default() -> Self {
        Self {
            rho_min: DEFAULT_FLOOR,
            p_min: DEFAULT_FLOOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u1: f64,
    pub u2: f64,
    pub p: f64,
}

impl PrimitiveState {
    pub fn new(rho: f64, u1: f64, u2: f64, p: f64) -> Self {
        Self { rho, u1, u2, p }
    }

    pub fn check(&self, floor: VacuumFloor) -> Result<()> {
        if ![self.rho, self.u1, self.u2, self.p]
            .iter()
            .all(|v| v.is_finite())
        {
            return domain("non-finite primitive state");
        }
        if !(self.rho >= floor.rho_min && self.rho > 0.0) {
            return domain(format!(
                "density {} below floor {}",
                self.rho, floor.rho_min
            ));
        }
        if !(self.p >= floor.p_min && self.p > 0.0) {
            return domain(format!("pressure {} below floor {}", self.p, floor.p_min));
        }
        Ok(())
    }
}

/// The skew variables `phi` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewState {
    pub phi: [f64; 4],
}

impl SkewState {
    pub const fn new(phi: [f64; 4]) -> Self {
        Self { phi }
    }

    pub fn check(&self) -> Result<()> {
        if !self.phi.iter().all(|v| v.is_finite()) {
            return domain("non-finite skew state");
        }
        if self.phi[0] <= 0.0 {
            return domain(format!("phi1 = {} must be positive", self.phi[0]));
        }
        if self.phi[3] <= 0.0 {
            return domain(format!("phi4 = {} must be positive", self.phi[3]));
        }
        Ok(())
    }

    /// Velocity `(phi2 / phi1, phi3 / phi1)`. Caller guarantees `phi1 > 0`.
    #[inline]
    pub fn velocity(&self) -> [f64; 2] {
        [self.phi[1] / self.phi[0], self.phi[2] / self.phi[0]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservativeState {
    pub rho: f64,
    pub m1: f64,
    pub m2: f64,
    pub energy: f64,
}

impl ConservativeState {
    pub fn new(rho: f64, m1: f64, m2: f64, energy: f64) -> Self {
        Self {
            rho,
            m1,
            m2,
            energy,
        }
    }
}

pub fn primitive_to_skew(v: PrimitiveState) -> Result<SkewState> {
    primitive_to_skew_with(v, VacuumFloor::default())
}

pub fn primitive_to_skew_with(v: PrimitiveState, floor: VacuumFloor) -> Result<SkewState> {
    v.check(floor)?;
    let s = v.rho.sqrt();
    Ok(SkewState::new([s, s * v.u1, s * v.u2, v.p.sqrt()]))
}

pub fn skew_to_primitive(phi: SkewState) -> Result<PrimitiveState> {
    phi.check()?;
    let [p1, p2, p3, p4] = phi.phi;
    Ok(PrimitiveState::new(p1 * p1, p2 / p1, p3 / p1, p4 * p4))
}

pub fn conservative_to_primitive(u: ConservativeState, g: &GasParams) -> Result<PrimitiveState> {
    conservative_to_primitive_with(u, g, VacuumFloor::default())
}

pub fn conservative_to_primitive_with(
    u: ConservativeState,
    g: &GasParams,
    floor: VacuumFloor,
) -> Result<PrimitiveState> {
    if ![u.rho, u.m1, u.m2, u.energy].iter().all(|v| v.is_finite()) {
        return domain("non-finite conservative state");
    }
    if !(u.rho >= floor.rho_min && u.rho > 0.0) {
        return domain(format!("density {} below floor {}", u.rho, floor.rho_min));
    }
    let kinetic = 0.5 * (u.m1 * u.m1 + u.m2 * u.m2) / u.rho;
    let internal = u.energy - kinetic;
    if !(internal > 0.0) {
        return domain(format!("non-positive internal energy {internal}"));
    }
    let v = PrimitiveState::new(
        u.rho,
        u.m1 / u.rho,
        u.m2 / u.rho,
        (g.gamma - 1.0) * internal,
    );
    v.check(floor)?;
    Ok(v)
}

pub fn primitive_to_conservative(v: PrimitiveState, g: &GasParams) -> Result<ConservativeState> {
    v.check(VacuumFloor::default())?;
    let energy = v.p / (g.gamma - 1.0) + 0.5 * v.rho * (v.u1 * v.u1 + v.u2 * v.u2);
    Ok(ConservativeState::new(
        v.rho,
        v.rho * v.u1,
        v.rho * v.u2,
        energy,
    ))
}

/// Outward unit normal, checked to `|n| = 1` within [`UNIT_NORMAL_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitNormal([f64; 2]);

impl UnitNormal {
    pub fn new(n1: f64, n2: f64) -> Result<Self> {
        let len = n1.hypot(n2);
        if !len.is_finite() || (len - 1.0).abs() > UNIT_NORMAL_TOL {
            return domain(format!("normal ({n1}, {n2}) is not unit length"));
        }
        Ok(Self([n1, n2]))
    }

    /// Normalizes an arbitrary non-zero direction.
    pub fn from_direction(d1: f64, d2: f64) -> Result<Self> {
        let len = d1.hypot(d2);
        if !(len > 0.0) || !len.is_finite() {
            return domain("zero or non-finite direction");
        }
        Ok(Self([d1 / len, d2 / len]))
    }

    pub const X_PLUS: UnitNormal = UnitNormal([1.0, 0.0]);
    pub const X_MINUS: UnitNormal = UnitNormal([-1.0, 0.0]);
    pub const Y_PLUS: UnitNormal = UnitNormal([0.0, 1.0]);
    pub const Y_MINUS: UnitNormal = UnitNormal([0.0, -1.0]);

    #[inline]
    pub fn n1(&self) -> f64 {
        self.0[0]
    }
    #[inline]
    pub fn n2(&self) -> f64 {
        self.0[1]
    }
    pub fn components(&self) -> [f64; 2] {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowCharacterization {
    pub sound_speed: f64,
    pub u_n: f64,
    pub mach_n: f64,
}

pub fn flow_characterization(
    v: PrimitiveState,
    n: UnitNormal,
    g: &GasParams,
) -> Result<FlowCharacterization> {
    v.check(VacuumFloor::default())?;
    let c = (g.gamma * v.p / v.rho).sqrt();
    let u_n = n.n1() * v.u1 + n.n2() * v.u2;
    Ok(FlowCharacterization {
        sound_speed: c,
        u_n,
        mach_n: u_n / c,
    })
}

/// Skew variables on an `nx x ny` node grid, one array per component.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewField {
    pub comps: [Array2<f64>; 4],
}

impl SkewField {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            comps: std::array::from_fn(|_| Array2::zeros((nx, ny))),
        }
    }

    pub fn uniform(nx: usize, ny: usize, s: SkewState) -> Self {
        Self {
            comps: std::array::from_fn(|k| Array2::from_elem((nx, ny), s.phi[k])),
        }
    }

    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(usize, usize) -> SkewState) -> Self {
        let mut out = Self::zeros(nx, ny);
        for i in 0..nx {
            for j in 0..ny {
                out.set(i, j, f(i, j));
            }
        }
        out
    }

    pub fn shape(&self) -> (usize, usize) {
        let d = self.comps[0].dim();
        (d.0, d.1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> SkewState {
        SkewState::new(std::array::from_fn(|k| self.comps[k][[i, j]]))
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, s: SkewState) {
        for k in 0..4 {
            self.comps[k][[i, j]] = s.phi[k];
        }
    }

    /// Checks positivity of `phi1` and `phi4` at every node.
    pub fn validate(&self) -> Result<()> {
        let (nx, ny) = self.shape();
        for i in 0..nx {
            for j in 0..ny {
                if let Err(e) = self.get(i, j).check() {
                    return Err(Error::InvalidNode {
                        i,
                        j,
                        reason: e.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &SkewField) {
        for k in 0..4 {
            self.comps[k].scaled_add(a, &other.comps[k]);
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.comps {
            c.mapv_inplace(|v| v * a);
        }
    }

    pub fn max_abs_diff(&self, other: &SkewField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn unit_rest_state_maps_to_unit_phi() {
        let s = primitive_to_skew(PrimitiveState::new(1.0, 0.0, 0.0, 1.0)).unwrap();
        assert_eq!(s.phi, [1.0, 0.0, 0.0, 1.0]);
        let v = skew_to_primitive(s).unwrap();
        assert_eq!(v, PrimitiveState::new(1.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn skew_arithmetic() {
        let s = primitive_to_skew(PrimitiveState::new(4.0, 2.0, -1.0, 9.0)).unwrap();
        assert_eq!(s.phi, [2.0, 4.0, -2.0, 3.0]);
        let v = skew_to_primitive(SkewState::new([2.0, 4.0, -2.0, 3.0])).unwrap();
        assert_eq!(v, PrimitiveState::new(4.0, 2.0, -1.0, 9.0));
    }

    #[test]
    fn vacuum_rejected() {
        assert!(skew_to_primitive(SkewState::new([0.0, 0.0, 0.0, 1.0])).is_err());
        assert!(skew_to_primitive(SkewState::new([1.0, 0.0, 0.0, -1.0])).is_err());
        assert!(primitive_to_skew(PrimitiveState::new(0.0, 0.0, 0.0, 1.0)).is_err());
        assert!(primitive_to_skew(PrimitiveState::new(1.0, 0.0, 0.0, 1e-13)).is_err());
        let floor = VacuumFloor {
            rho_min: 1e-20,
            p_min: 1e-20,
        };
        assert!(primitive_to_skew_with(PrimitiveState::new(1.0, 0.0, 0.0, 1e-13), floor).is_ok());
    }

    #[test]
    fn conservative_examples() {
        let g = GasParams::default();
        let v = conservative_to_primitive(ConservativeState::new(1.0, 0.0, 0.0, 2.5), &g).unwrap();
        assert_eq!(v.rho, 1.0);
        assert_eq!((v.u1, v.u2), (0.0, 0.0));
        assert!((v.p - 1.0).abs() < 1e-15);

        let u = primitive_to_conservative(PrimitiveState::new(1.0, 0.0, 0.0, 1.0), &g).unwrap();
        assert!((u.energy - 2.5).abs() < 1e-15);
        assert_eq!((u.rho, u.m1, u.m2), (1.0, 0.0, 0.0));

        assert!(conservative_to_primitive(ConservativeState::new(1.0, 1.0, 0.0, 0.5), &g).is_err());
        assert!(primitive_to_conservative(PrimitiveState::new(-1.0, 0.0, 0.0, 1.0), &g).is_err());
    }

    #[test]
    fn gas_admissibility() {
        assert!(GasParams::new(1.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(GasParams::new(2.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(GasParams::new(1.4, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(GasParams::new(1.4, 1.0, -1.0, 0.0, 0.0).is_err());
        assert!(GasParams::new(1.4, 1.0, 1.0, -1.0, 0.0).is_err());
        assert!(GasParams::new(1.4, 1.0, 1.0, -2.0 / 3.0, 0.1).is_ok());
    }

    #[test]
    fn flow_characterization_examples() {
        let g = GasParams::default();
        let f = flow_characterization(
            PrimitiveState::new(1.0, 1.0, 0.0, 1.0 / 1.4),
            UnitNormal::X_PLUS,
            &g,
        )
        .unwrap();
        assert!((f.sound_speed - 1.0).abs() < 1e-15);
        assert_eq!(f.u_n, 1.0);
        assert!((f.mach_n - 1.0).abs() < 1e-15);

        let n = UnitNormal::from_direction(0.3, -0.7).unwrap();
        let f = flow_characterization(PrimitiveState::new(1.0, 0.0, 0.0, 2.0), n, &g).unwrap();
        assert_eq!((f.u_n, f.mach_n), (0.0, 0.0));

        let f = flow_characterization(
            PrimitiveState::new(1.0, 3.0, -2.0, 1.0),
            UnitNormal::Y_PLUS,
            &g,
        )
        .unwrap();
        assert_eq!(f.u_n, -2.0);

        assert!(UnitNormal::new(1.0, 1.0).is_err());
    }

    #[test]
    fn field_validation_names_node() {
        let mut f = SkewField::uniform(3, 4, SkewState::new([1.0, 0.0, 0.0, 1.0]));
        assert!(f.validate().is_ok());
        f.set(2, 1, SkewState::new([-1.0, 0.0, 0.0, 1.0]));
        match f.validate() {
            Err(Error::InvalidNode { i: 2, j: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    fn prim() -> impl Strategy<Value = PrimitiveState> {
        (1e-3f64..1e3, -1e2f64..1e2, -1e2f64..1e2, 1e-3f64..1e4)
            .prop_map(|(r, a, b, p)| PrimitiveState::new(r, a, b, p))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn skew_round_trip(v in prim()) {
            let w = skew_to_primitive(primitive_to_skew(v).unwrap()).unwrap();
            prop_assert!(rel(w.rho, v.rho) < 1e-13);
            prop_assert!(rel(w.p, v.p) < 1e-13);
            prop_assert!((w.u1 - v.u1).abs() <= 1e-13 * v.u1.abs().max(1.0));
            prop_assert!((w.u2 - v.u2).abs() <= 1e-13 * v.u2.abs().max(1.0));
        }

        #[test]
        fn conservative_round_trip(v in prim(), gamma in 1.05f64..1.95) {
            let g = GasParams::inviscid(gamma).unwrap();
            let u = primitive_to_conservative(v, &g).unwrap();
            let w = conservative_to_primitive(u, &g).unwrap();
            prop_assert!(rel(w.rho, v.rho) < 1e-13);
            // p is recovered from E - kinetic; cancellation grows with the Mach number.
            let kin = 0.5 * v.rho * (v.u1 * v.u1 + v.u2 * v.u2);
            let scale = 1.0 + (gamma - 1.0) * kin / v.p;
            prop_assert!(rel(w.p, v.p) < 1e-13 * scale);
            prop_assert!((w.u1 - v.u1).abs() <= 1e-13 * v.u1.abs().max(1.0));
        }

        #[test]
        fn skew_is_monotone_in_rho_and_p(v in prim(), f in 1.0001f64..10.0) {
            let a = primitive_to_skew(v).unwrap();
            let b = primitive_to_skew(PrimitiveState { rho: v.rho * f, ..v }).unwrap();
            let c = primitive_to_skew(PrimitiveState { p: v.p * f, ..v }).unwrap();
            prop_assert!(b.phi[0] > a.phi[0]);
            prop_assert!(c.phi[3] > a.phi[3]);
            prop_assert_eq!(a, primitive_to_skew(v).unwrap());
        }
    }
}
