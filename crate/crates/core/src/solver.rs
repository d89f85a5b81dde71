//! Semi-discrete right-hand side of the split-form equations and explicit
//! RK4 time stepping.
//!
//! Inviscid part: `Phi_t = -[Dx(C1 Phi) + C2 Dx Phi + Dy(D1 Phi) + D2 Dy Phi]`
//! with the split matrices rebuilt from the current field at every node.
//! Viscous part: `Phi_t = Lambda S` with velocity gradients, stress
//! divergence, dissipation and heat flux all taken with the same first
//! derivative operator (wide stencil for second derivatives).

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{build_p, build_split_matrices, Axis, NormP, Vec4};
use crate::energy::{balance_residual, EnergyBalanceReport};
use crate::error::{Error, Result};
use crate::manufactured::{periodic_smooth_ic_about, random_field};
use crate::sbp::{Grid2D, GridKind, Order};
use crate::state::{primitive_to_skew, GasParams, PrimitiveState, SkewField, SkewState};
use crate::viscous::{
    dissipation, scaled_rhs_closed_form, stress_tensor, temperature_from_skew, VelocityGradient,
};

/// Evaluates `f` at every node, row-major in `(i, j)`, optionally in parallel.
pub(crate) fn map_nodes<T, F>(grid: &Grid2D, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, usize) -> T + Sync,
{
    let (nx, ny) = grid.shape();
    if grid.parallel {
        (0..nx * ny)
            .into_par_iter()
            .map(|k| f(k / ny, k % ny))
            .collect()
    } else {
        (0..nx * ny).map(|k| f(k / ny, k % ny)).collect()
    }
}

fn check_field(field: &SkewField, grid: &Grid2D) -> Result<()> {
    if field.shape() != grid.shape() {
        return Err(Error::Shape {
            expected: grid.shape(),
            got: field.shape(),
        });
    }
    field.validate()
}

fn unit_norm(gas: &GasParams) -> NormP {
    build_p(gas, 1.0).expect("gamma validated by GasParams")
}

fn derivative_all(grid: &Grid2D, field: &SkewField, axis: Axis) -> SkewField {
    let mut out = SkewField::zeros(grid.shape().0, grid.shape().1);
    for k in 0..4 {
        grid.apply_d_into(field.comps[k].view(), axis, &mut out.comps[k]);
    }
    out
}

/// Inviscid tendency of the split form.
pub fn inviscid_rhs(field: &SkewField, grid: &Grid2D, gas: &GasParams) -> Result<SkewField> {
    check_field(field, grid)?;
    let p = unit_norm(gas);
    let (nx, ny) = grid.shape();

    // conservative-part fluxes C1 Phi and D1 Phi, assembled before differencing
    let fluxes = map_nodes(grid, |i, j| {
        let phi = field.get(i, j);
        let m = build_split_matrices(phi, gas, &p)?;
        let v = Vec4::from(phi.phi);
        Ok((m.c1 * v, m.d1 * v))
    });
    let mut fx = SkewField::zeros(nx, ny);
    let mut fy = SkewField::zeros(nx, ny);
    for (k, r) in fluxes.into_iter().enumerate() {
        let (a, b) = r?;
        let (i, j) = (k / ny, k % ny);
        fx.set(i, j, SkewState::new([a[0], a[1], a[2], a[3]]));
        fy.set(i, j, SkewState::new([b[0], b[1], b[2], b[3]]));
    }
    let dfx = derivative_all(grid, &fx, Axis::X);
    let dfy = derivative_all(grid, &fy, Axis::Y);
    let dx = derivative_all(grid, field, Axis::X);
    let dy = derivative_all(grid, field, Axis::Y);

    let tend = map_nodes(grid, |i, j| {
        // the state was validated above, so the rebuild cannot fail
        let m = build_split_matrices(field.get(i, j), gas, &p).expect("validated state");
        let adv = m.c2 * Vec4::from(dx.get(i, j).phi) + m.d2 * Vec4::from(dy.get(i, j).phi);
        let cons = Vec4::from(dfx.get(i, j).phi) + Vec4::from(dfy.get(i, j).phi);
        -(cons + adv)
    });
    let mut out = SkewField::zeros(nx, ny);
    for (k, t) in tend.into_iter().enumerate() {
        out.set(k / ny, k % ny, SkewState::new([t[0], t[1], t[2], t[3]]));
    }
    Ok(out)
}

/// Tendency of the B form, `-(B1 Dx Phi + B2 Dy Phi)`, used as a reference
/// for the split form on smooth fields.
pub fn b_form_rhs(field: &SkewField, grid: &Grid2D, gas: &GasParams) -> Result<SkewField> {
    check_field(field, grid)?;
    let dx = derivative_all(grid, field, Axis::X);
    let dy = derivative_all(grid, field, Axis::Y);
    let (nx, ny) = grid.shape();
    let mut out = SkewField::zeros(nx, ny);
    for i in 0..nx {
        for j in 0..ny {
            let phi = field.get(i, j);
            let b1 = crate::coeffs::build_b(phi, gas, Axis::X)?;
            let b2 = crate::coeffs::build_b(phi, gas, Axis::Y)?;
            let t = -(b1 * Vec4::from(dx.get(i, j).phi) + b2 * Vec4::from(dy.get(i, j).phi));
            out.set(i, j, SkewState::new([t[0], t[1], t[2], t[3]]));
        }
    }
    Ok(out)
}

/// Nodal viscous quantities, all built from the grid's first-derivative operator.
#[derive(Debug, Clone)]
pub struct ViscousFields {
    pub velocity: [Array2<f64>; 2],
    /// `grad[i][j] = D_j u_i`
    pub grad: [[Array2<f64>; 2]; 2],
    pub tau: [[Array2<f64>; 2]; 2],
    pub psi: Array2<f64>,
    pub temperature: Array2<f64>,
    /// `kappa D_j T`
    pub heat_flux: [Array2<f64>; 2],
}

pub fn viscous_fields(field: &SkewField, grid: &Grid2D, gas: &GasParams) -> Result<ViscousFields> {
    check_field(field, grid)?;
    let (nx, ny) = grid.shape();
    let u1 = &field.comps[1] / &field.comps[0];
    let u2 = &field.comps[2] / &field.comps[0];
    let d = |f: &Array2<f64>, a: Axis| {
        let mut o = Array2::zeros((nx, ny));
        grid.apply_d_into(f.view(), a, &mut o);
        o
    };
    let grad = [
        [d(&u1, Axis::X), d(&u1, Axis::Y)],
        [d(&u2, Axis::X), d(&u2, Axis::Y)],
    ];
    let mut tau: [[Array2<f64>; 2]; 2] =
        std::array::from_fn(|_| std::array::from_fn(|_| Array2::zeros((nx, ny))));
    let mut psi = Array2::zeros((nx, ny));
    for i in 0..nx {
        for j in 0..ny {
            let g = VelocityGradient::new([
                [grad[0][0][[i, j]], grad[0][1][[i, j]]],
                [grad[1][0][[i, j]], grad[1][1][[i, j]]],
            ]);
            let t = stress_tensor(&g, gas);
            for a in 0..2 {
                for b in 0..2 {
                    tau[a][b][[i, j]] = t.tau[a][b];
                }
            }
            psi[[i, j]] = dissipation(&g, &t);
        }
    }
    let temperature = Array2::from_shape_fn((nx, ny), |(i, j)| {
        temperature_from_skew(&field.get(i, j), gas)
    });
    let heat_flux = [
        d(&temperature, Axis::X) * gas.kappa,
        d(&temperature, Axis::Y) * gas.kappa,
    ];
    Ok(ViscousFields {
        velocity: [u1, u2],
        grad,
        tau,
        psi,
        temperature,
        heat_flux,
    })
}

/// Viscous tendency `Lambda S`.
pub fn viscous_rhs(field: &SkewField, grid: &Grid2D, gas: &GasParams) -> Result<SkewField> {
    let (nx, ny) = grid.shape();
    if !gas.is_viscous() {
        check_field(field, grid)?;
        return Ok(SkewField::zeros(nx, ny));
    }
    let vf = viscous_fields(field, grid, gas)?;
    let d = |f: &Array2<f64>, a: Axis| {
        let mut o = Array2::zeros((nx, ny));
        grid.apply_d_into(f.view(), a, &mut o);
        o
    };
    let div1 = d(&vf.tau[0][0], Axis::X) + d(&vf.tau[0][1], Axis::Y);
    let div2 = d(&vf.tau[1][0], Axis::X) + d(&vf.tau[1][1], Axis::Y);
    let heat = d(&vf.heat_flux[0], Axis::X) + d(&vf.heat_flux[1], Axis::Y);
    let p = unit_norm(gas);
    let mut out = SkewField::zeros(nx, ny);
    for i in 0..nx {
        for j in 0..ny {
            let r = scaled_rhs_closed_form(
                field.get(i, j),
                [div1[[i, j]], div2[[i, j]]],
                heat[[i, j]],
                vf.psi[[i, j]],
                gas,
            )?;
            // undo the 2P weighting
            out.set(
                i,
                j,
                SkewState::new(std::array::from_fn(|k| 0.5 * r[k] / p.diag[k])),
            );
        }
    }
    Ok(out)
}

/// Full tendency: inviscid plus viscous.
pub fn full_rhs(field: &SkewField, grid: &Grid2D, gas: &GasParams) -> Result<SkewField> {
    let mut t = inviscid_rhs(field, grid, gas)?;
    if gas.is_viscous() {
        t.add_scaled(1.0, &viscous_rhs(field, grid, gas)?);
    }
    Ok(t)
}

/// A state that RK4 can advance.
pub trait OdeState: Clone {
    fn add_scaled(&mut self, a: f64, other: &Self);
    fn admissible(&self) -> Result<()> {
        Ok(())
    }
}

impl OdeState for f64 {
    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += a * other;
    }
}

impl OdeState for Vec<f64> {
    fn add_scaled(&mut self, a: f64, other: &Self) {
        for (x, y) in self.iter_mut().zip(other) {
            *x += a * y;
        }
    }
}

impl OdeState for SkewField {
    fn add_scaled(&mut self, a: f64, other: &Self) {
        SkewField::add_scaled(self, a, other)
    }
    fn admissible(&self) -> Result<()> {
        self.validate()
    }
}

/// Classical four-stage Runge-Kutta step. Each stage state is checked for
/// admissibility before the right-hand side is evaluated on it.
pub fn rk4_step<S, F>(y: &S, dt: f64, rhs: F) -> Result<S>
where
    S: OdeState,
    F: Fn(&S) -> Result<S>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let stage = |k: usize, s: &S| -> Result<S> {
        s.admissible()
            .map_err(|e| Error::Domain(format!("RK4 stage {k} left the admissible region: {e}")))?;
        rhs(s)
    };
    let k1 = stage(1, y)?;
    let mut y2 = y.clone();
    y2.add_scaled(0.5 * dt, &k1);
    let k2 = stage(2, &y2)?;
    let mut y3 = y.clone();
    y3.add_scaled(0.5 * dt, &k2);
    let k3 = stage(3, &y3)?;
    let mut y4 = y.clone();
    y4.add_scaled(dt, &k3);
    let k4 = stage(4, &y4)?;
    let mut out = y.clone();
    out.add_scaled(dt / 6.0, &k1);
    out.add_scaled(dt / 3.0, &k2);
    out.add_scaled(dt / 3.0, &k3);
    out.add_scaled(dt / 6.0, &k4);
    out.admissible()
        .map_err(|e| Error::Domain(format!("RK4 update left the admissible region: {e}")))?;
    Ok(out)
}

/// Largest `(|u| + c) / h` over the field, summed over both axes.
pub fn max_wave_rate(field: &SkewField, grid: &Grid2D, gas: &GasParams) -> f64 {
    let (nx, ny) = grid.shape();
    let mut m: f64 = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            let s = field.get(i, j);
            let [u1, u2] = s.velocity();
            let c = (gas.gamma).sqrt() * s.phi[3] / s.phi[0];
            m = m.max((u1.abs() + c) / grid.x.h() + (u2.abs() + c) / grid.y.h());
        }
    }
    m
}

/// Time step `cfl * h / (max|u| + c)`.
pub fn cfl_time_step(field: &SkewField, grid: &Grid2D, gas: &GasParams, cfl: f64) -> f64 {
    let (nx, ny) = grid.shape();
    let mut speed: f64 = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            let s = field.get(i, j);
            let [u1, u2] = s.velocity();
            let c = gas.gamma.sqrt() * s.phi[3] / s.phi[0];
            speed = speed.max(u1.hypot(u2) + c);
        }
    }
    cfl * grid.min_spacing() / speed
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    /// The base state everywhere.
    Uniform,
    /// Trigonometric perturbation of the base state, periodic on the domain.
    Smooth,
    /// Independent random perturbations at every node (seeded).
    Random,
}

fn default_order() -> Order {
    Order::Fourth
}
fn default_one() -> f64 {
    1.0
}
fn default_cfl() -> f64 {
    0.5
}
fn default_base() -> [f64; 4] {
    [1.0, 0.5, 0.0, 1.0]
}
fn default_amplitude() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}

/// Flat, unit-free description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "default_one")]
    pub extent_x: f64,
    #[serde(default = "default_one")]
    pub extent_y: f64,
    pub kind: GridKind,
    #[serde(default = "default_order")]
    pub order: Order,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_one")]
    pub gas_constant: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub lambda_visc: f64,
    #[serde(default)]
    pub kappa: f64,
    pub initial_condition: InitialCondition,
    /// Base primitive state `(rho, u1, u2, p)`.
    #[serde(default = "default_base")]
    pub base_state: [f64; 4],
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    /// Either `final_time` or `steps` must be given.
    #[serde(default)]
    pub final_time: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_one")]
    pub alpha_sq: f64,
    #[serde(default = "default_true")]
    pub record_energy: bool,
    /// Keep every k-th state; the first and last are always kept.
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    #[serde(default)]
    pub parallel: bool,
}

fn default_gamma() -> f64 {
    1.4
}

impl CaseConfig {
    /// A periodic smooth case with default gas and time settings.
    pub fn periodic_smooth(n: usize) -> Self {
        Self {
            nx: n,
            ny: n,
            extent_x: 1.0,
            extent_y: 1.0,
            kind: GridKind::Periodic,
            order: Order::Fourth,
            gamma: 1.4,
            gas_constant: 1.0,
            mu: 0.0,
            lambda_visc: 0.0,
            kappa: 0.0,
            initial_condition: InitialCondition::Smooth,
            base_state: default_base(),
            amplitude: 0.1,
            seed: 0,
            final_time: None,
            steps: Some(10),
            dt: None,
            cfl: 0.5,
            alpha_sq: 1.0,
            record_energy: true,
            snapshot_every: None,
            parallel: false,
        }
    }

    pub fn gas(&self) -> Result<GasParams> {
        GasParams::new(
            self.gamma,
            self.gas_constant,
            self.mu,
            self.lambda_visc,
            self.kappa,
        )
    }

    pub fn norm(&self) -> Result<NormP> {
        build_p(&self.gas()?, self.alpha_sq)
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Ok(Grid2D::uniform(
            self.order,
            self.nx,
            self.ny,
            self.extent_x,
            self.extent_y,
            self.kind,
        )?
        .with_parallel(self.parallel))
    }

    pub fn validate(&self) -> Result<()> {
        self.gas()?;
        self.norm()?;
        self.grid()?;
        match (self.final_time, self.steps) {
            (None, None) => {
                return Err(Error::Config(
                    "one of final_time or steps is required".into(),
                ))
            }
            (Some(t), _) if !(t > 0.0) => {
                return Err(Error::Config("final_time must be positive".into()))
            }
            (_, Some(0)) => return Err(Error::Config("steps must be at least 1".into())),
            _ => {}
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.cfl > 0.0) {
            return Err(Error::Config("cfl must be positive".into()));
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::Config("snapshot_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn initial_field(&self) -> Result<SkewField> {
        let grid = self.grid()?;
        let [rho, u1, u2, p] = self.base_state;
        let base = PrimitiveState::new(rho, u1, u2, p);
        match self.initial_condition {
            InitialCondition::Uniform => {
                let s = primitive_to_skew(base)?;
                Ok(SkewField::uniform(self.nx, self.ny, s))
            }
            InitialCondition::Smooth => periodic_smooth_ic_about(&grid, base, self.amplitude),
            InitialCondition::Random => random_field(&grid, base, self.amplitude, self.seed),
        }
    }
}

/// Time levels, kept states and per-step energy audits of one run.
#[derive(Debug, Clone, Default)]
pub struct SolutionHistory {
    pub times: Vec<f64>,
    pub snapshots: Vec<(usize, SkewField)>,
    /// One report per time level (index 0 is the initial state) when enabled.
    pub energy: Vec<EnergyBalanceReport>,
    pub dt: f64,
    pub warnings: Vec<String>,
}

impl SolutionHistory {
    pub fn final_field(&self) -> &SkewField {
        &self
            .snapshots
            .last()
            .expect("history holds the initial state")
            .1
    }
}

/// Local CFL numbers above this trigger a warning.
pub const CFL_WARNING: f64 = 1.0;

pub fn run_case(config: &CaseConfig) -> Result<SolutionHistory> {
    config.validate()?;
    let gas = config.gas()?;
    let norm = config.norm()?;
    let grid = config.grid()?;
    let mut field = config.initial_field()?;

    let dt0 = config
        .dt
        .unwrap_or_else(|| cfl_time_step(&field, &grid, &gas, config.cfl));
    let (steps, dt) = match (config.steps, config.final_time) {
        (Some(n), _) => (n, dt0),
        (None, Some(t)) => {
            let n = (t / dt0).ceil().max(1.0) as usize;
            (n, t / n as f64)
        }
        (None, None) => unreachable!("validated"),
    };

    let mut hist = SolutionHistory {
        dt,
        ..Default::default()
    };
    hist.times.push(0.0);
    if config.record_energy {
        hist.energy
            .push(balance_residual(&field, &grid, &gas, &norm)?);
    }
    hist.snapshots.push((0, field.clone()));

    let rhs = |f: &SkewField| full_rhs(f, &grid, &gas);
    for step in 1..=steps {
        let speed = cfl_time_step(&field, &grid, &gas, 1.0);
        if dt / speed > CFL_WARNING {
            hist.warnings.push(format!(
                "step {step}: CFL number {:.3} exceeds {CFL_WARNING}",
                dt / speed
            ));
        }
        field = rk4_step(&field, dt, rhs).map_err(|e| match e {
            Error::Domain(m) => Error::Domain(format!("step {step}: {m}")),
            other => other,
        })?;
        hist.times.push(step as f64 * dt);
        if config.record_energy {
            hist.energy
                .push(balance_residual(&field, &grid, &gas, &norm)?);
        }
        let keep = step == steps || config.snapshot_every.is_some_and(|k| step % k == 0);
        if keep {
            hist.snapshots.push((step, field.clone()));
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest(nx: usize, ny: usize) -> SkewField {
        SkewField::uniform(nx, ny, SkewState::new([1.1, 0.3, -0.2, 0.9]))
    }

    #[test]
    fn constant_field_has_zero_tendency() {
        let gas = GasParams::new(1.4, 1.0, 0.1, 0.0, 0.1).unwrap();
        for kind in [GridKind::Bounded, GridKind::Periodic] {
            let grid = Grid2D::uniform(Order::Fourth, 12, 10, 1.0, 1.0, kind).unwrap();
            let f = rest(12, 10);
            assert!(inviscid_rhs(&f, &grid, &gas).unwrap().max_abs() < 1e-12);
            assert!(viscous_rhs(&f, &grid, &gas).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn inviscid_gas_has_zero_viscous_tendency() {
        let grid = Grid2D::uniform(Order::Second, 9, 9, 1.0, 1.0, GridKind::Bounded).unwrap();
        let f = random_field(&grid, PrimitiveState::new(1.0, 0.2, 0.1, 1.0), 0.3, 4).unwrap();
        assert_eq!(
            viscous_rhs(&f, &grid, &GasParams::default())
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn linear_shear_free_stretch() {
        // u1 = a x, rho and p constant: tau constant so div tau = 0,
        // Psi = (2 mu + lambda) a^2 and only phi4 changes.
        let a = 0.3;
        let (mu, lam) = (0.05, 0.02);
        let gas = GasParams::new(1.4, 1.0, mu, lam, 0.0).unwrap();
        let grid = Grid2D::uniform(Order::Fourth, 12, 12, 1.0, 1.0, GridKind::Bounded).unwrap();
        let f = SkewField::from_fn(12, 12, |i, j| {
            let x = grid.node(i, j)[0];
            primitive_to_skew(PrimitiveState::new(1.0, a * x, 0.0, 1.0)).unwrap()
        });
        let t = viscous_rhs(&f, &grid, &gas).unwrap();
        let psi = (2.0 * mu + lam) * a * a;
        for i in 0..12 {
            for j in 0..12 {
                let v = t.get(i, j).phi;
                assert!(v[0] == 0.0 && v[1].abs() < 1e-13 && v[2].abs() < 1e-13);
                assert!((v[3] - 0.4 * psi / 2.0).abs() < 1e-13, "{}", v[3]);
            }
        }
    }

    #[test]
    fn invalid_node_is_reported() {
        let grid = Grid2D::uniform(Order::Second, 5, 5, 1.0, 1.0, GridKind::Periodic).unwrap();
        let mut f = rest(5, 5);
        f.set(3, 2, SkewState::new([1.0, 0.0, 0.0, 0.0]));
        assert!(matches!(
            inviscid_rhs(&f, &grid, &GasParams::default()),
            Err(Error::InvalidNode { i: 3, j: 2, .. })
        ));
        assert!(matches!(
            inviscid_rhs(&rest(4, 5), &grid, &GasParams::default()),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn rk4_zero_rhs_leaves_field_unchanged() {
        let f = rest(6, 7);
        let g = rk4_step(&f, 0.1, |s: &SkewField| {
            Ok(SkewField::zeros(s.shape().0, s.shape().1))
        })
        .unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn rk4_scalar_decay() {
        let y = rk4_step(&1.0f64, 0.1, |y: &f64| Ok(-*y)).unwrap();
        // 1 - z + z^2/2 - z^3/6 + z^4/24 at z = 0.1
        let poly = 1.0 - 0.1 + 0.005 - 0.001 / 6.0 + 0.0001 / 24.0;
        assert!((y - poly).abs() < 1e-15);
        assert!((y - 0.9048375).abs() < 1e-7);
        assert!((y - (-0.1f64).exp()).abs() < 1e-7);
        assert!(rk4_step(&1.0f64, 0.0, |y: &f64| Ok(-*y)).is_err());
    }

    #[test]
    fn rk4_rejects_inadmissible_stage() {
        let f = rest(5, 5);
        let res = rk4_step(&f, 1.0, |s: &SkewField| {
            let mut t = SkewField::zeros(5, 5);
            t.comps[0].fill(-10.0 * s.comps[0][[0, 0]]);
            Ok(t)
        });
        assert!(matches!(res, Err(Error::Domain(m)) if m.contains("stage 2")));
    }

    #[test]
    fn steady_state_stays_constant() {
        let mut cfg = CaseConfig::periodic_smooth(16);
        cfg.initial_condition = InitialCondition::Uniform;
        cfg.base_state = [1.0, 0.0, 0.0, 1.0];
        cfg.mu = 0.05;
        cfg.kappa = 0.05;
        cfg.steps = Some(20);
        let h = run_case(&cfg).unwrap();
        let f0 = &h.snapshots[0].1;
        assert!(h.final_field().max_abs_diff(f0) <= 1e-13);
        assert_eq!(h.times.len(), 21);
        assert!(h.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn final_time_is_hit_exactly() {
        let mut cfg = CaseConfig::periodic_smooth(12);
        cfg.steps = None;
        cfg.final_time = Some(0.05);
        let h = run_case(&cfg).unwrap();
        assert!((h.times.last().unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn config_rejects_unknown_keys_and_missing_horizon() {
        let bad = r#"{"nx": 9, "ny": 9, "kind": "periodic", "initial_condition": "smooth", "steps": 1, "bogus": 1}"#;
        assert!(serde_json::from_str::<CaseConfig>(bad).is_err());
        let ok =
            r#"{"nx": 9, "ny": 9, "kind": "periodic", "initial_condition": "smooth", "steps": 1}"#;
        let cfg: CaseConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.order, Order::Fourth);
        assert_eq!(cfg.cfl, 0.5);
        assert_eq!(cfg.alpha_sq, 1.0);
        let mut c = cfg.clone();
        c.steps = None;
        assert!(c.validate().is_err());
        let bad_order = r#"{"nx": 9, "ny": 9, "kind": "periodic", "initial_condition": "smooth", "steps": 1, "order": 6}"#;
        assert!(serde_json::from_str::<CaseConfig>(bad_order).is_err());
    }

    #[test]
    fn parallel_rhs_is_bitwise_identical() {
        let gas = GasParams::new(1.4, 1.0, 0.02, 0.0, 0.03).unwrap();
        let grid = Grid2D::uniform(Order::Fourth, 20, 17, 1.0, 1.0, GridKind::Bounded).unwrap();
        let f = random_field(&grid, PrimitiveState::new(1.0, 0.2, -0.1, 1.0), 0.2, 9).unwrap();
        let a = full_rhs(&f, &grid, &gas).unwrap();
        let b = full_rhs(&f, &grid.clone().with_parallel(true), &gas).unwrap();
        assert_eq!(a, b);
    }
}
