//! Test fields with exactly known derivatives, initial data generators and
//! dense reference computations.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::sbp::{Grid2D, GridKind};
use crate::state::{primitive_to_skew, PrimitiveState, SkewField, SkewState};

/// Highest power per axis.
pub const MAX_DEGREE: usize = 3;

/// Rectangular window `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Window {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (self.x[0]..=self.x[1]).contains(&p[0]) && (self.y[0]..=self.y[1]).contains(&p[1])
    }

    fn sup_abs(&self, axis: usize) -> f64 {
        let r = if axis == 0 { self.x } else { self.y };
        r[0].abs().max(r[1].abs())
    }
}

/// Bivariate polynomial per skew component:
/// `phi_k(x, y) = sum_{a,b <= 3} coeffs[k][a][b] x^a y^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField {
    pub coeffs: [[[f64; MAX_DEGREE + 1]; MAX_DEGREE + 1]; 4],
    pub window: Window,
}

/// Value and exact first derivatives `(d/dx, d/dy)` of each component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub phi: SkewState,
    pub d: [[f64; 4]; 2],
}

impl PolynomialField {
    /// Certifies `phi1, phi4 > 0` on the window with the bound
    /// `c_00 - sum |c_ab| sup|x|^a sup|y|^b > 0`.
    pub fn new(
        coeffs: [[[f64; MAX_DEGREE + 1]; MAX_DEGREE + 1]; 4],
        window: Window,
    ) -> Result<Self> {
        if !(window.x[0] < window.x[1] && window.y[0] < window.y[1]) {
            return domain("empty polynomial window");
        }
        let f = Self { coeffs, window };
        for k in [0, 3] {
            if !(f.lower_bound(k) > 0.0) {
                return domain(format!(
                    "component {} not certified positive on the window",
                    k + 1
                ));
            }
        }
        Ok(f)
    }

    /// Lower bound of component `k` on the window.
    pub fn lower_bound(&self, k: usize) -> f64 {
        let (sx, sy) = (self.window.sup_abs(0), self.window.sup_abs(1));
        let c = &self.coeffs[k];
        let mut rest = 0.0;
        for (a, row) in c.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if a + b > 0 {
                    rest += v.abs() * sx.powi(a as i32) * sy.powi(b as i32);
                }
            }
        }
        c[0][0] - rest
    }

    /// Random cubic field on `[-1, 1]^2`, positive by construction.
    pub fn random(rng: &mut impl Rng) -> Self {
        let window = Window {
            x: [-1.0, 1.0],
            y: [-1.0, 1.0],
        };
        let mut coeffs = [[[0.0; MAX_DEGREE + 1]; MAX_DEGREE + 1]; 4];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let positive = k == 0 || k == 3;
            let c0: f64 = if positive {
                rng.gen_range(1.0..2.0)
            } else {
                rng.gen_range(-1.0..1.0)
            };
            let s = if positive { c0 / 30.0 } else { 0.5 };
            for (a, row) in c.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    *v = if a + b == 0 { c0 } else { rng.gen_range(-s..s) };
                }
            }
        }
        Self::new(coeffs, window).expect("positive by construction")
    }

    /// Linear field `phi = value + grad_x x + grad_y y`.
    pub fn linear(
        value: [f64; 4],
        grad_x: [f64; 4],
        grad_y: [f64; 4],
        window: Window,
    ) -> Result<Self> {
        let mut coeffs = [[[0.0; MAX_DEGREE + 1]; MAX_DEGREE + 1]; 4];
        for k in 0..4 {
            coeffs[k][0][0] = value[k];
            coeffs[k][1][0] = grad_x[k];
            coeffs[k][0][1] = grad_y[k];
        }
        Self::new(coeffs, window)
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<FieldSample> {
        if !self.window.contains(x) {
            return Err(Error::Domain(format!(
                "point {x:?} outside the field window"
            )));
        }
        let pow = |v: f64, n: usize| -> f64 {
            if n == 0 {
                1.0
            } else {
                v.powi(n as i32)
            }
        };
        let mut phi = [0.0; 4];
        let mut d = [[0.0; 4]; 2];
        for k in 0..4 {
            for a in 0..=MAX_DEGREE {
                for b in 0..=MAX_DEGREE {
                    let c = self.coeffs[k][a][b];
                    if c == 0.0 {
                        continue;
                    }
                    phi[k] += c * pow(x[0], a) * pow(x[1], b);
                    if a > 0 {
                        d[0][k] += c * a as f64 * pow(x[0], a - 1) * pow(x[1], b);
                    }
                    if b > 0 {
                        d[1][k] += c * b as f64 * pow(x[0], a) * pow(x[1], b - 1);
                    }
                }
            }
        }
        Ok(FieldSample {
            phi: SkewState::new(phi),
            d,
        })
    }
}

pub fn eval_field(f: &PolynomialField, x: [f64; 2]) -> Result<FieldSample> {
    f.eval(x)
}

/// Smooth trigonometric perturbation of a uniform primitive state on a
/// `Lx x Ly` periodic box, with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothField {
    pub base: PrimitiveState,
    pub amplitude: f64,
    pub extent: [f64; 2],
}

impl SmoothField {
    pub fn new(base: PrimitiveState, amplitude: f64, extent: [f64; 2]) -> Result<Self> {
        base.check(Default::default())?;
        if !(0.0..1.0).contains(&amplitude) {
            return domain(format!("amplitude {amplitude} must lie in [0, 1)"));
        }
        Ok(Self {
            base,
            amplitude,
            extent,
        })
    }

    /// Primitive values and their derivatives with respect to the phases
    /// `(tx, ty) = (2 pi x / Lx, 2 pi y / Ly)`.
    fn primitive_by_phase(&self, tx: f64, ty: f64) -> ([f64; 4], [[f64; 4]; 2]) {
        let a = self.amplitude;
        let b = self.base;
        let (sx, cx) = tx.sin_cos();
        let (sy, cy) = ty.sin_cos();
        let (sxy, cxy) = (tx + ty).sin_cos();
        let v = [
            b.rho * (1.0 + a * sx * cy),
            b.u1 + a * cxy,
            b.u2 + a * sx * sy,
            b.p * (1.0 + a * cx * sy),
        ];
        let dx = [
            b.rho * a * cx * cy,
            -a * sxy,
            a * cx * sy,
            -b.p * a * sx * sy,
        ];
        let dy = [
            -b.rho * a * sx * sy,
            -a * sxy,
            a * sx * cy,
            b.p * a * cx * cy,
        ];
        (v, [dx, dy])
    }

    fn skew_sample(&self, v: [f64; 4], dv: [[f64; 4]; 2], scale: [f64; 2]) -> Result<FieldSample> {
        let phi = primitive_to_skew(PrimitiveState::new(v[0], v[1], v[2], v[3]))?;
        let s = phi.phi[0];
        let mut d = [[0.0; 4]; 2];
        for ax in 0..2 {
            let [drho, du, dv2, dp] = dv[ax].map(|x| x * scale[ax]);
            let ds = 0.5 * drho / s;
            d[ax] = [
                ds,
                ds * v[1] + s * du,
                ds * v[2] + s * dv2,
                0.5 * dp / phi.phi[3],
            ];
        }
        Ok(FieldSample { phi, d })
    }

    pub fn eval(&self, x: [f64; 2]) -> Result<FieldSample> {
        let (tx, ty) = (TAU * x[0] / self.extent[0], TAU * x[1] / self.extent[1]);
        let (v, dv) = self.primitive_by_phase(tx, ty);
        self.skew_sample(v, dv, [TAU / self.extent[0], TAU / self.extent[1]])
    }

    /// Value at grid node `(i, j)`; on periodic grids indices wrap, so
    /// `(i + nx, j)` gives bitwise the same state as `(i, j)`.
    pub fn at_node(&self, grid: &Grid2D, i: usize, j: usize) -> Result<FieldSample> {
        let (nx, ny) = grid.shape();
        let (tx, ty) = match grid.kind() {
            GridKind::Periodic => (
                TAU * (i % nx) as f64 / nx as f64,
                TAU * (j % ny) as f64 / ny as f64,
            ),
            GridKind::Bounded => {
                let [x, y] = grid.node(i, j);
                (TAU * x / self.extent[0], TAU * y / self.extent[1])
            }
        };
        let (v, dv) = self.primitive_by_phase(tx, ty);
        self.skew_sample(v, dv, [TAU / self.extent[0], TAU / self.extent[1]])
    }

    pub fn sample(&self, grid: &Grid2D) -> Result<SkewField> {
        let (nx, ny) = grid.shape();
        let mut f = SkewField::zeros(nx, ny);
        for i in 0..nx {
            for j in 0..ny {
                f.set(i, j, self.at_node(grid, i, j)?.phi);
            }
        }
        f.validate()?;
        Ok(f)
    }
}

/// Smooth perturbation of `(rho, u1, u2, p) = (1, 0.5, 0, 1)`.
pub fn periodic_smooth_ic(grid: &Grid2D, amplitude: f64) -> Result<SkewField> {
    periodic_smooth_ic_about(grid, PrimitiveState::new(1.0, 0.5, 0.0, 1.0), amplitude)
}

pub fn periodic_smooth_ic_about(
    grid: &Grid2D,
    base: PrimitiveState,
    amplitude: f64,
) -> Result<SkewField> {
    SmoothField::new(base, amplitude, [grid.x.extent(), grid.y.extent()])?.sample(grid)
}

/// Nodewise independent random perturbation (relative for `rho`, `p`,
/// absolute for velocities). Not smooth.
pub fn random_field(
    grid: &Grid2D,
    base: PrimitiveState,
    amplitude: f64,
    seed: u64,
) -> Result<SkewField> {
    base.check(Default::default())?;
    if !(0.0..1.0).contains(&amplitude) {
        return domain(format!("amplitude {amplitude} must lie in [0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, ny) = grid.shape();
    let mut f = SkewField::zeros(nx, ny);
    for i in 0..nx {
        for j in 0..ny {
            let mut r = || {
                if amplitude > 0.0 {
                    rng.gen_range(-amplitude..amplitude)
                } else {
                    0.0
                }
            };
            let v = PrimitiveState::new(
                base.rho * (1.0 + r()),
                base.u1 + r(),
                base.u2 + r(),
                base.p * (1.0 + r()),
            );
            f.set(i, j, primitive_to_skew(v)?);
        }
    }
    Ok(f)
}

/// Plain `v^T M v`, row by row.
pub fn dense_quadratic_oracle(v: &[f64], m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() != v.len() || m.ncols() != v.len() {
        return Err(Error::Shape {
            expected: (v.len(), v.len()),
            got: (m.nrows(), m.ncols()),
        });
    }
    let mut total = 0.0;
    for (i, vi) in v.iter().enumerate() {
        let mut row = 0.0;
        for (j, vj) in v.iter().enumerate() {
            row += m[(i, j)] * vj;
        }
        total += vi * row;
    }
    Ok(total)
}
