//! C ABI for skewns.
//!
//! Every function returns a [`SkewnsStatus`]; on failure the message is
//! available from [`skewns_last_error_message`] on the same thread.
//! Simulations are opaque handles created by [`skewns_simulation_new`] and
//! released with [`skewns_simulation_free`].
//!
//! Field buffers are component-major: `buf[(k * nx + i) * ny + j]` holds
//! component `k` of `Phi` at node `(i, j)`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use skewns::boundary::{count_boundary_conditions, final_lambda};
use skewns::coeffs::{build_p, NormP};
use skewns::energy::balance_residual;
use skewns::sbp::Grid2D;
use skewns::solver::{cfl_time_step, full_rhs, rk4_step, CaseConfig};
use skewns::state::{
    primitive_to_skew, skew_to_primitive, GasParams, PrimitiveState, SkewField, SkewState,
    UnitNormal,
};
use skewns::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkewnsStatus {
    Ok = 0,
    NullPointer = 1,
    /// Inadmissible physical input (vacuum, gamma outside (1, 2), non-unit normal).
    Domain = 2,
    /// Unparseable or inconsistent configuration.
    Config = 3,
    /// Buffer length does not match the grid.
    Shape = 4,
    /// Boundary analysis at `u_n = 0` or `beta = 0`.
    Degenerate = 5,
    /// A grid node left the admissible region.
    InvalidState = 6,
    Panic = 7,
    Internal = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SkewnsStatus {
    match e {
        Error::Domain(_) => SkewnsStatus::Domain,
        Error::InvalidNode { .. } => SkewnsStatus::InvalidState,
        Error::Config(_) => SkewnsStatus::Config,
        Error::Shape { .. } => SkewnsStatus::Shape,
        Error::Degenerate(_) => SkewnsStatus::Degenerate,
        Error::NoBoundary | Error::Internal(_) => SkewnsStatus::Internal,
    }
}

struct Fail(SkewnsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(SkewnsStatus::NullPointer, format!("{name} is null"))
}

/// Runs `f`, records any error or panic, and returns the status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SkewnsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SkewnsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SkewnsStatus::Panic
        }
    }
}

unsafe fn read4(p: *const f64, name: &str) -> Result<[f64; 4], Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    let mut v = [0.0; 4];
    ptr::copy_nonoverlapping(p, v.as_mut_ptr(), 4);
    Ok(v)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length in bytes,
/// excluding the terminator. `buf` may be null to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn skewns_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn skewns_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `(rho, u1, u2, p)` to `(sqrt rho, sqrt rho u1, sqrt rho u2, sqrt p)`.
///
/// # Safety
/// `prim` and `out` must each point to 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn skewns_primitive_to_skew(prim: *const f64, out: *mut f64) -> SkewnsStatus {
    guard(|| {
        let [rho, u1, u2, p] = read4(prim, "prim")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let phi = primitive_to_skew(PrimitiveState::new(rho, u1, u2, p))?;
        ptr::copy_nonoverlapping(phi.phi.as_ptr(), out, 4);
        Ok(())
    })
}

/// Inverse of [`skewns_primitive_to_skew`].
///
/// # Safety
/// `phi` and `out` must each point to 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn skewns_skew_to_primitive(phi: *const f64, out: *mut f64) -> SkewnsStatus {
    guard(|| {
        let phi = read4(phi, "phi")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = skew_to_primitive(SkewState::new(phi))?;
        ptr::copy_nonoverlapping([v.rho, v.u1, v.u2, v.p].as_ptr(), out, 4);
        Ok(())
    })
}

/// `beta = (M_n^2 - M*^2) / M_n^2`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skewns_beta(gamma: f64, mn_sq: f64, out: *mut f64) -> SkewnsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = GasParams::inviscid(gamma)?;
        *out = skewns::boundary::beta(mn_sq, &g)?;
        Ok(())
    })
}

/// Number of boundary conditions for the sign of `u_n` and `M_n^2`.
/// `signs` may be null; otherwise it receives the 7 entry signs (+1 or -1).
///
/// # Safety
/// `count` must be valid; `signs` must be null or point to 7 bytes.
#[no_mangle]
pub unsafe extern "C" fn skewns_count_bc(
    gamma: f64,
    u_n_sign: f64,
    mn_sq: f64,
    count: *mut u32,
    signs: *mut i8,
) -> SkewnsStatus {
    guard(|| {
        if count.is_null() {
            return Err(null("count"));
        }
        let g = GasParams::inviscid(gamma)?;
        let c = count_boundary_conditions(u_n_sign, mn_sq, &g)?;
        *count = c.count as u32;
        if !signs.is_null() {
            ptr::copy_nonoverlapping(c.signs.as_ptr(), signs, 7);
        }
        Ok(())
    })
}

/// The seven diagonal entries of the fully diagonalized boundary term at
/// state `phi` on a face with unit normal `(n1, n2)`.
///
/// # Safety
/// `phi` must point to 4 doubles and `out` to 7.
#[no_mangle]
pub unsafe extern "C" fn skewns_final_lambda(
    gamma: f64,
    alpha_sq: f64,
    phi: *const f64,
    n1: f64,
    n2: f64,
    out: *mut f64,
) -> SkewnsStatus {
    guard(|| {
        let phi = SkewState::new(read4(phi, "phi")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let g = GasParams::inviscid(gamma)?;
        let p = build_p(&g, alpha_sq)?;
        let lam = final_lambda(phi, UnitNormal::new(n1, n2)?, &g, &p)?;
        ptr::copy_nonoverlapping(lam.as_ptr(), out, 7);
        Ok(())
    })
}

/// One energy audit, field for field as in `energy.csv`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SkewnsEnergyReport {
    pub energy: f64,
    pub rate_measured: f64,
    pub surface_inviscid: f64,
    pub surface_viscous: f64,
    pub residual: f64,
}

/// Opaque simulation state.
pub struct SkewnsSimulation {
    grid: Grid2D,
    gas: GasParams,
    norm: NormP,
    field: SkewField,
    dt: f64,
    time: f64,
    steps: u64,
}

fn simulation_from_json(json: &str) -> Result<SkewnsSimulation, Fail> {
    let cfg: CaseConfig =
        serde_json::from_str(json).map_err(|e| Fail(SkewnsStatus::Config, e.to_string()))?;
    let mut probe = cfg.clone();
    // the handle is stepped explicitly, so a horizon is not required
    if probe.steps.is_none() && probe.final_time.is_none() {
        probe.steps = Some(1);
    }
    probe.validate()?;
    let grid = cfg.grid()?;
    let gas = cfg.gas()?;
    let field = cfg.initial_field()?;
    let dt = cfg
        .dt
        .unwrap_or_else(|| cfl_time_step(&field, &grid, &gas, cfg.cfl));
    Ok(SkewnsSimulation {
        norm: cfg.norm()?,
        grid,
        gas,
        field,
        dt,
        time: 0.0,
        steps: 0,
    })
}

/// Creates a simulation from a JSON case description (same keys as the
/// `skewns` config files; `steps`/`final_time` may be omitted).
///
/// # Safety
/// `config_json` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn skewns_simulation_new(
    config_json: *const c_char,
    out: *mut *mut SkewnsSimulation,
) -> SkewnsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        let json = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Fail(SkewnsStatus::Config, format!("config is not UTF-8: {e}")))?;
        *out = Box::into_raw(Box::new(simulation_from_json(json)?));
        Ok(())
    })
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from [`skewns_simulation_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn skewns_simulation_free(sim: *mut SkewnsSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

unsafe fn sim_ref<'a>(sim: *const SkewnsSimulation) -> Result<&'a SkewnsSimulation, Fail> {
    sim.as_ref().ok_or_else(|| null("sim"))
}

unsafe fn sim_mut<'a>(sim: *mut SkewnsSimulation) -> Result<&'a mut SkewnsSimulation, Fail> {
    sim.as_mut().ok_or_else(|| null("sim"))
}

/// Grid size, time step, current time and completed steps. Any output pointer may be null.
///
/// # Safety
/// `sim` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn skewns_simulation_info(
    sim: *const SkewnsSimulation,
    nx: *mut usize,
    ny: *mut usize,
    dt: *mut f64,
    time: *mut f64,
    steps: *mut u64,
) -> SkewnsStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        let (a, b) = s.grid.shape();
        if !nx.is_null() {
            *nx = a;
        }
        if !ny.is_null() {
            *ny = b;
        }
        if !dt.is_null() {
            *dt = s.dt;
        }
        if !time.is_null() {
            *time = s.time;
        }
        if !steps.is_null() {
            *steps = s.steps;
        }
        Ok(())
    })
}

/// Advances `n` RK4 steps. On failure the state is left at the last good step.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn skewns_simulation_step(
    sim: *mut SkewnsSimulation,
    n: u64,
) -> SkewnsStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        for _ in 0..n {
            let (grid, gas) = (&s.grid, &s.gas);
            s.field = rk4_step(&s.field, s.dt, |f| full_rhs(f, grid, gas))?;
            s.steps += 1;
            s.time = s.steps as f64 * s.dt;
        }
        Ok(())
    })
}

/// Energy audit of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn skewns_simulation_energy(
    sim: *const SkewnsSimulation,
    out: *mut SkewnsEnergyReport,
) -> SkewnsStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = balance_residual(&s.field, &s.grid, &s.gas, &s.norm)?;
        *out = SkewnsEnergyReport {
            energy: r.energy,
            rate_measured: r.rate_measured,
            surface_inviscid: r.surface_inviscid,
            surface_viscous: r.surface_viscous,
            residual: r.residual,
        };
        Ok(())
    })
}

fn field_len(s: &SkewnsSimulation) -> usize {
    let (nx, ny) = s.grid.shape();
    4 * nx * ny
}

/// Copies the current field into `buf` (length `4 nx ny`, component-major).
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn skewns_simulation_get_field(
    sim: *const SkewnsSimulation,
    buf: *mut f64,
    len: usize,
) -> SkewnsStatus {
    guard(|| {
        let s = sim_ref(sim)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != field_len(s) {
            return Err(Fail(
                SkewnsStatus::Shape,
                format!("buffer holds {len} doubles, field needs {}", field_len(s)),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        let (nx, ny) = s.grid.shape();
        for (k, c) in s.field.comps.iter().enumerate() {
            for i in 0..nx {
                for j in 0..ny {
                    out[(k * nx + i) * ny + j] = c[[i, j]];
                }
            }
        }
        Ok(())
    })
}

/// Replaces the current field. Rejected (state unchanged) if any node is inadmissible.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn skewns_simulation_set_field(
    sim: *mut SkewnsSimulation,
    buf: *const f64,
    len: usize,
) -> SkewnsStatus {
    guard(|| {
        let s = sim_mut(sim)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len != field_len(s) {
            return Err(Fail(
                SkewnsStatus::Shape,
                format!("buffer holds {len} doubles, field needs {}", field_len(s)),
            ));
        }
        let src = std::slice::from_raw_parts(buf, len);
        let (nx, ny) = s.grid.shape();
        let f = SkewField::from_fn(nx, ny, |i, j| {
            SkewState::new(std::array::from_fn(|k| src[(k * nx + i) * ny + j]))
        });
        f.validate()?;
        s.field = f;
        Ok(())
    })
}
