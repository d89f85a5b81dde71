//! Randomized identity suites behind `skewns verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boundary::{
    assemble_boundary_term, beta_root_by_bisection, boundary_matrix_signature, congruence_chain,
    critical_mach_sq, final_lambda, rotate_stress, surface_integrand, Signature,
};
use crate::coeffs::{
    atilde_derivative, build_atilde, build_b, build_p, identity_terms, Axis, NormP, Vec4,
};
use crate::energy::balance_residual;
use crate::manufactured::{random_field, PolynomialField};
use crate::sbp::{Grid2D, GridKind, Order};
use crate::state::{
    primitive_to_skew, skew_to_primitive, GasParams, PrimitiveState, SkewState, UnitNormal,
};
use crate::viscous::{scaled_rhs, scaled_rhs_closed_form, viscous_source, StressTensor};
use crate::Result;

/// Which entry of `Atilde_1` the fault mode perturbs, and by how much.
pub const FAULT_ENTRY: (usize, usize) = (1, 1);
pub const FAULT_SIZE: f64 = 1e-6;

pub const SKEW_IDENTITY: &str = "skew_identity";
pub const VISCOUS_SCALING: &str = "viscous_scaling";
pub const ENERGY_BALANCE: &str = "energy_balance";
pub const BOUNDARY_TERM: &str = "boundary_term";
pub const CONGRUENCE_CHAIN: &str = "congruence_chain";
pub const SIGNATURE: &str = "boundary_signature";
pub const BETA_ROOT: &str = "beta_root";

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub trials: usize,
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub description: &'static str,
    pub samples: usize,
    pub tolerance: f64,
    pub worst: f64,
    /// The sample that produced `worst`.
    pub worst_case: String,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub fault_injected: bool,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &SuiteResult> {
        self.suites.iter().filter(|s| !s.passed)
    }
}

struct Worst {
    value: f64,
    case: String,
    samples: usize,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            case: String::new(),
            samples: 0,
        }
    }

    fn record(&mut self, value: f64, case: impl FnOnce() -> String) {
        self.samples += 1;
        // NaN counts as worst
        if !(value <= self.value) {
            self.value = value;
            self.case = case();
        }
    }

    fn finish(self, name: &'static str, description: &'static str, tolerance: f64) -> SuiteResult {
        SuiteResult {
            name,
            description,
            samples: self.samples,
            tolerance,
            passed: self.value <= tolerance,
            worst: self.value,
            worst_case: self.case,
        }
    }
}

fn random_gas(rng: &mut ChaCha8Rng, viscous: bool) -> GasParams {
    let gamma = rng.gen_range(1.05..1.95);
    if viscous {
        let mu = rng.gen_range(0.0..0.1);
        let lambda = rng.gen_range(-2.0 * mu / 3.0..=0.05);
        GasParams::new(
            gamma,
            rng.gen_range(0.5..2.0),
            mu,
            lambda,
            rng.gen_range(0.0..0.2),
        )
        .expect("admissible draw")
    } else {
        GasParams::inviscid(gamma).expect("admissible draw")
    }
}

fn random_primitive(rng: &mut ChaCha8Rng) -> PrimitiveState {
    PrimitiveState::new(
        rng.gen_range(0.2..3.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(0.2..3.0),
    )
}

fn random_normal(rng: &mut ChaCha8Rng) -> UnitNormal {
    loop {
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if let Ok(n) = UnitNormal::from_direction(a, b) {
            return n;
        }
    }
}

fn random_stress(rng: &mut ChaCha8Rng) -> StressTensor {
    let off = rng.gen_range(-1.0..1.0);
    StressTensor {
        tau: [
            [rng.gen_range(-1.0..1.0), off],
            [off, rng.gen_range(-1.0..1.0)],
        ],
    }
}

/// A random admissible boundary sample: state, normal, stress, `psi_n`, gas and norm.
pub struct BoundarySample {
    pub phi: SkewState,
    pub normal: UnitNormal,
    pub tau: StressTensor,
    pub psi_n: f64,
    pub gas: GasParams,
    pub norm: NormP,
}

impl BoundarySample {
    pub fn draw(rng: &mut ChaCha8Rng) -> Self {
        let gas = random_gas(rng, true);
        let norm = build_p(&gas, rng.gen_range(0.2..3.0)).expect("positive alpha");
        let phi = primitive_to_skew(random_primitive(rng)).expect("admissible draw");
        BoundarySample {
            phi,
            normal: random_normal(rng),
            tau: random_stress(rng),
            psi_n: rng.gen_range(-1.0..1.0),
            gas,
            norm,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "phi={:?} n={:?} gamma={} alpha^2={} tau={:?} psi_n={}",
            self.phi.phi,
            self.normal.components(),
            self.gas.gamma,
            self.norm.alpha_sq,
            self.tau.tau,
            self.psi_n
        )
    }
}

/// Points per polynomial field in the skew-identity suite.
const POINTS_PER_FIELD: usize = 4;

fn skew_identity(rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut w = Worst::new();
    for field_no in 0..opts.trials {
        let field = PolynomialField::random(rng);
        let gas = random_gas(rng, false);
        let p = build_p(&gas, rng.gen_range(0.2..3.0))?;
        for _ in 0..POINTS_PER_FIELD {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let s = field.eval(x)?;
            for axis in Axis::BOTH {
                let dphi = s.d[axis.index()];
                let mut a = build_atilde(s.phi, &gas, &p, axis)?;
                if opts.inject_fault && axis == Axis::X {
                    a[FAULT_ENTRY] += FAULT_SIZE;
                }
                let da = atilde_derivative(s.phi, dphi, &gas, &p, axis)?;
                let two_pb = 2.0 * p.matrix() * build_b(s.phi, &gas, axis)?;
                let r = identity_terms(&a, &da, &two_pb, &Vec4::from(s.phi.phi), &Vec4::from(dphi));
                w.record(r.relative(), || {
                    format!(
                        "field {field_no} x={x:?} axis={axis:?} phi={:?} dphi={dphi:?} gamma={} alpha^2={}",
                        s.phi.phi, gas.gamma, p.alpha_sq
                    )
                });
            }
        }
    }
    Ok(w.finish(
        SKEW_IDENTITY,
        "(Atilde Phi)_x + Atilde^T Phi_x = 2 P B Phi_x on random cubic fields",
        1e-10,
    ))
}

fn viscous_scaling(rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut w = Worst::new();
    for _ in 0..opts.trials {
        let gas = random_gas(rng, true);
        let p = build_p(&gas, rng.gen_range(0.2..3.0))?;
        let v = random_primitive(rng);
        let phi = primitive_to_skew(v)?;
        let tau_div = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let heat = rng.gen_range(-2.0..2.0);
        let psi = rng.gen_range(0.0..2.0);
        let s = viscous_source(tau_div, heat, psi, skew_to_primitive(phi)?, &gas)?;
        let m = scaled_rhs(phi, &s, &p)?;
        let c = scaled_rhs_closed_form(phi, tau_div, heat, psi, &gas)?;
        let scale = c
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let err = m
            .iter()
            .zip(&c)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
            / scale;
        w.record(err, || {
            format!(
                "phi={:?} gamma={} tau_div={tau_div:?} heat={heat} psi={psi}",
                phi.phi, gas.gamma
            )
        });
    }
    Ok(w.finish(
        VISCOUS_SCALING,
        "2 P Lambda S equals its closed form",
        1e-12,
    ))
}

/// Fields per run of the energy suite; each is a full 17x17 RHS evaluation.
const ENERGY_FIELDS_MAX: usize = 20;

fn energy_balance(rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut w = Worst::new();
    for k in 0..opts.trials.min(ENERGY_FIELDS_MAX) {
        let gas = random_gas(rng, true);
        let p = build_p(&gas, rng.gen_range(0.2..3.0))?;
        let order = if k % 2 == 0 {
            Order::Fourth
        } else {
            Order::Second
        };
        let grid = Grid2D::uniform(
            order,
            17,
            17,
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
            GridKind::Bounded,
        )?;
        let base = random_primitive(rng);
        let seed = rng.gen();
        let field = random_field(&grid, base, 0.3, seed)?;
        let r = balance_residual(&field, &grid, &gas, &p)?;
        let scale = r
            .rate_measured
            .abs()
            .max(r.surface_inviscid.abs())
            .max(r.surface_viscous.abs())
            .max(f64::MIN_POSITIVE);
        w.record(r.residual.abs() / scale, || {
            format!(
                "order={order:?} base={base:?} field seed={seed} gamma={} mu={} kappa={}",
                gas.gamma, gas.mu, gas.kappa
            )
        });
    }
    Ok(w.finish(
        ENERGY_BALANCE,
        "2<Phi, Phi_t> + surface_inviscid - surface_viscous = 0 on random bounded fields",
        1e-12,
    ))
}

fn boundary_term(
    rng: &mut ChaCha8Rng,
    opts: &VerifyOptions,
    samples: usize,
) -> Result<SuiteResult> {
    let mut w = Worst::new();
    for _ in 0..samples.max(opts.trials) {
        let s = BoundarySample::draw(rng);
        let (_, _, bt) = assemble_boundary_term(
            s.phi,
            s.normal,
            rotate_stress(&s.tau, s.normal),
            s.psi_n,
            &s.gas,
            &s.norm,
        )?;
        let d = surface_integrand(s.phi, s.normal, &s.tau, s.psi_n, &s.gas, &s.norm)?;
        w.record((bt - d).abs() / d.abs().max(1.0), || s.describe());
    }
    Ok(w.finish(
        BOUNDARY_TERM,
        "W^T A W / w1 equals the surface integrand",
        1e-12,
    ))
}

/// Samples closer than this to `u_n = 0` or `beta = 0` are redrawn.
const NONDEGENERATE_MARGIN: f64 = 1e-3;

fn nondegenerate(rng: &mut ChaCha8Rng) -> Result<BoundarySample> {
    loop {
        let s = BoundarySample::draw(rng);
        let set = crate::boundary::build_boundary_matrices(s.phi, s.normal, &s.gas, &s.norm)?;
        if set.mach_n_sq > NONDEGENERATE_MARGIN
            && set.beta.is_some_and(|b| b.abs() > NONDEGENERATE_MARGIN)
        {
            return Ok(s);
        }
    }
}

fn congruence(
    rng: &mut ChaCha8Rng,
    opts: &VerifyOptions,
    samples: usize,
) -> Result<(SuiteResult, SuiteResult)> {
    let mut chain = Worst::new();
    let mut sig = Worst::new();
    for _ in 0..samples.max(opts.trials) {
        let s = nondegenerate(rng)?;
        let c = congruence_chain(
            s.phi,
            s.normal,
            rotate_stress(&s.tau, s.normal),
            s.psi_n,
            &s.gas,
            &s.norm,
        )?;
        chain.record(c.max_relative_gap(), || {
            format!("{} variant={:?}", s.describe(), c.variant)
        });
        let lam = final_lambda(s.phi, s.normal, &s.gas, &s.norm)?;
        let dense = boundary_matrix_signature(s.phi, s.normal, &s.gas, &s.norm)?;
        let expected = Signature::of_values(&lam, 0.0);
        let mismatch = if dense == expected { 0.0 } else { 1.0 };
        sig.record(mismatch, || {
            format!("{} dense={dense:?} lambda={expected:?}", s.describe())
        });
    }
    Ok((
        chain.finish(
            CONGRUENCE_CHAIN,
            "BT through R and through S^T R agree",
            1e-10,
        ),
        sig.finish(
            SIGNATURE,
            "eigen-signature of A/w1 matches the final diagonal (1 = mismatch)",
            0.0,
        ),
    ))
}

fn beta_root(rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<SuiteResult> {
    let mut w = Worst::new();
    for k in 0..opts.trials.min(50) {
        let gamma = if k == 0 {
            1.4
        } else {
            rng.gen_range(1.05..1.95)
        };
        let g = GasParams::inviscid(gamma)?;
        let exact = critical_mach_sq(&g);
        let root = beta_root_by_bisection(&g, 1e-6, 1e6)?;
        w.record((root - exact).abs(), || {
            format!("gamma={gamma} bisection={root} formula={exact}")
        });
    }
    Ok(w.finish(
        BETA_ROOT,
        "sign change of beta sits at 2(gamma-1)/(gamma(2-gamma))",
        1e-6,
    ))
}

/// Boundary suites draw at least this many samples regardless of `trials`.
pub const BOUNDARY_SAMPLES: usize = 1000;

pub fn run_suites(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut suites = vec![
        skew_identity(&mut rng, opts)?,
        viscous_scaling(&mut rng, opts)?,
        energy_balance(&mut rng, opts)?,
        boundary_term(&mut rng, opts, BOUNDARY_SAMPLES)?,
    ];
    let (chain, sig) = congruence(&mut rng, opts, BOUNDARY_SAMPLES)?;
    suites.push(chain);
    suites.push(sig);
    suites.push(beta_root(&mut rng, opts)?);
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifyReport {
        seed: opts.seed,
        trials: opts.trials,
        fault_injected: opts.inject_fault,
        suites,
        passed,
    })
}
