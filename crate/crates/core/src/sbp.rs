//! Diagonal-norm summation-by-parts first-derivative operators.
//!
//! `D = H^-1 Q` with `H` diagonal positive and `Q + Q^T = diag(-1, 0, .., 0, 1)`
//! on bounded grids (`Q + Q^T = 0` on periodic grids). Two families are
//! provided: second order (central interior, one-sided first/last rows) and
//! the classical fourth-order interior with second-order boundary closure.

#![allow(clippy::excessive_precision)]

use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut1, Axis as NdAxis, Zip};
use serde::{Deserialize, Serialize};

use crate::coeffs::{Axis, NormP};
use crate::error::{Error, Result};
use crate::reduce::pairwise_sum;
use crate::state::SkewField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Bounded,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    Second,
    Fourth,
}

impl Order {
    pub fn interior(self) -> usize {
        match self {
            Order::Second => 2,
            Order::Fourth => 4,
        }
    }

    /// Accuracy of the boundary closure rows.
    pub fn boundary(self) -> usize {
        match self {
            Order::Second => 1,
            Order::Fourth => 2,
        }
    }
}

impl TryFrom<u8> for Order {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            2 => Ok(Order::Second),
            4 => Ok(Order::Fourth),
            _ => Err(format!("unsupported operator order {v} (use 2 or 4)")),
        }
    }
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        o.interior() as u8
    }
}

const INTERIOR2: [f64; 3] = [-0.5, 0.0, 0.5];
const INTERIOR4: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];

const NORM4: [f64; 4] = [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0];
#[rustfmt::skip]
const CLOSURE4: [[f64; 6]; 4] = [
    [-24.0 / 17.0, 59.0 / 34.0, -4.0 / 17.0, -3.0 / 34.0, 0.0, 0.0],
    [-0.5, 0.0, 0.5, 0.0, 0.0, 0.0],
    [4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0, 0.0],
    [3.0 / 98.0, 0.0, -59.0 / 98.0, 0.0, 32.0 / 49.0, -4.0 / 49.0],
];

/// One-dimensional SBP operator stored as sparse rows of `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperator1D {
    order: Order,
    kind: GridKind,
    n: usize,
    extent: f64,
    h: f64,
    weights: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
}

pub fn build_sbp(order: Order, n: usize, extent: f64, kind: GridKind) -> Result<SbpOperator1D> {
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::Config(format!(
            "extent must be positive, got {extent}"
        )));
    }
    let min_n = match (order, kind) {
        (Order::Second, _) => 3,
        (Order::Fourth, GridKind::Periodic) => 5,
        (Order::Fourth, GridKind::Bounded) => 8,
    };
    if n < min_n {
        return Err(Error::Config(format!(
            "order {} {:?} operator needs at least {min_n} nodes, got {n}",
            order.interior(),
            kind
        )));
    }
    let h = match kind {
        GridKind::Bounded => extent / (n - 1) as f64,
        GridKind::Periodic => extent / n as f64,
    };
    let interior: &[f64] = match order {
        Order::Second => &INTERIOR2,
        Order::Fourth => &INTERIOR4,
    };
    let half = interior.len() / 2;
    let central = |i: usize| -> Vec<(usize, f64)> {
        // antisymmetric pairs adjacent, so constants cancel exactly
        (1..=half)
            .rev()
            .flat_map(|k| {
                let c = interior[half + k] / h;
                [((i + n - k) % n, -c), ((i + k) % n, c)]
            })
            .collect()
    };

    let mut weights = vec![h; n];
    let mut rows: Vec<Vec<(usize, f64)>> = (0..n).map(central).collect();
    if kind == GridKind::Bounded {
        let (norm, closure): (&[f64], Vec<Vec<f64>>) = match order {
            Order::Second => (&[0.5], vec![vec![-1.0, 1.0]]),
            Order::Fourth => (&NORM4, CLOSURE4.iter().map(|r| r.to_vec()).collect()),
        };
        for (i, (w, row)) in norm.iter().zip(&closure).enumerate() {
            weights[i] = w * h;
            weights[n - 1 - i] = w * h;
            rows[i] = row
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, c)| (j, c / h))
                .collect();
            rows[n - 1 - i] = row
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0.0)
                .map(|(j, c)| (n - 1 - j, -c / h))
                .collect();
        }
    }
    Ok(SbpOperator1D {
        order,
        kind,
        n,
        extent,
        h,
        weights,
        rows,
    })
}

impl SbpOperator1D {
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn order(&self) -> Order {
        self.order
    }
    pub fn kind(&self) -> GridKind {
        self.kind
    }
    pub fn extent(&self) -> f64 {
        self.extent
    }
    /// Diagonal of `H`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|i| i as f64 * self.h).collect()
    }

    #[inline]
    pub fn apply_into(&self, f: ArrayView1<f64>, mut out: ArrayViewMut1<f64>) {
        if let (Some(fs), Some(os)) = (f.as_slice(), out.as_slice_mut()) {
            for (o, row) in os.iter_mut().zip(&self.rows) {
                *o = row.iter().map(|&(j, c)| c * fs[j]).sum();
            }
            return;
        }
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, c)| c * f[j]).sum();
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n, "field length must match operator size");
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, c)| c * f[j]).sum())
            .collect()
    }

    pub fn dense_d(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.n, self.n));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, c) in row {
                d[[i, j]] += c;
            }
        }
        d
    }

    pub fn dense_h(&self) -> Array2<f64> {
        Array2::from_diag(&ndarray::Array1::from(self.weights.clone()))
    }

    /// `Q = H D`.
    pub fn dense_q(&self) -> Array2<f64> {
        let mut q = self.dense_d();
        for (i, mut row) in q.rows_mut().into_iter().enumerate() {
            row *= self.weights[i];
        }
        q
    }

    /// `Q + Q^T`.
    pub fn boundary_matrix(&self) -> Array2<f64> {
        let q = self.dense_q();
        &q + &q.t()
    }

    /// Expected `Q + Q^T` for this grid kind.
    pub fn expected_boundary_matrix(&self) -> Array2<f64> {
        let mut b = Array2::zeros((self.n, self.n));
        if self.kind == GridKind::Bounded {
            b[[0, 0]] = -1.0;
            b[[self.n - 1, self.n - 1]] = 1.0;
        }
        b
    }
}

/// Outward-facing sides of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    Left,
    Right,
    Bottom,
    Top,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Left, Face::Right, Face::Bottom, Face::Top];

    pub fn normal(self) -> [f64; 2] {
        match self {
            Face::Left => [-1.0, 0.0],
            Face::Right => [1.0, 0.0],
            Face::Bottom => [0.0, -1.0],
            Face::Top => [0.0, 1.0],
        }
    }
}

/// Nodal values on the four faces. Left/right carry `ny` values, bottom/top `nx`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundaryValues {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
}

impl BoundaryValues {
    pub fn face(&self, f: Face) -> &[f64] {
        match f {
            Face::Left => &self.left,
            Face::Right => &self.right,
            Face::Bottom => &self.bottom,
            Face::Top => &self.top,
        }
    }

    /// Evaluates `f(face, i, j)` at each boundary node.
    pub fn from_fn(nx: usize, ny: usize, mut f: impl FnMut(Face, usize, usize) -> f64) -> Self {
        Self {
            left: (0..ny).map(|j| f(Face::Left, 0, j)).collect(),
            right: (0..ny).map(|j| f(Face::Right, nx - 1, j)).collect(),
            bottom: (0..nx).map(|i| f(Face::Bottom, i, 0)).collect(),
            top: (0..nx).map(|i| f(Face::Top, i, ny - 1)).collect(),
        }
    }
}

/// Tensor-product grid on `[0, Lx] x [0, Ly]`. Arrays are indexed `[i, j]`
/// with `i` along x.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub x: SbpOperator1D,
    pub y: SbpOperator1D,
    /// Parallelize derivative application across grid lines.
    pub parallel: bool,
}

impl Grid2D {
    pub fn new(x: SbpOperator1D, y: SbpOperator1D) -> Result<Self> {
        if x.kind != y.kind {
            return Err(Error::Config(
                "both axes must share the same grid kind".into(),
            ));
        }
        Ok(Self {
            x,
            y,
            parallel: false,
        })
    }

    pub fn uniform(
        order: Order,
        nx: usize,
        ny: usize,
        lx: f64,
        ly: f64,
        kind: GridKind,
    ) -> Result<Self> {
        Self::new(
            build_sbp(order, nx, lx, kind)?,
            build_sbp(order, ny, ly, kind)?,
        )
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.x.n, self.y.n)
    }

    pub fn kind(&self) -> GridKind {
        self.x.kind
    }

    pub fn op(&self, axis: Axis) -> &SbpOperator1D {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
        }
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [i as f64 * self.x.h, j as f64 * self.y.h]
    }

    /// Quadrature weight of node `(i, j)`.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.x.weights[i] * self.y.weights[j]
    }

    pub fn min_spacing(&self) -> f64 {
        self.x.h.min(self.y.h)
    }

    pub fn check_shape(&self, f: ArrayView2<f64>) -> Result<()> {
        let got = f.dim();
        if got != self.shape() {
            return Err(Error::Shape {
                expected: self.shape(),
                got,
            });
        }
        Ok(())
    }

    /// Derivative of a nodal scalar along `axis`.
    pub fn apply_d(&self, f: ArrayView2<f64>, axis: Axis) -> Result<Array2<f64>> {
        self.check_shape(f)?;
        let mut out = Array2::zeros(f.dim());
        self.apply_d_into(f, axis, &mut out);
        Ok(out)
    }

    /// Unchecked variant of [`apply_d`](Self::apply_d) writing into `out`.
    ///
    /// Along x whole rows are combined (contiguous memory); along y each row
    /// is a lane. Both accumulate stencil entries in the same order as
    /// [`SbpOperator1D::apply`].
    pub fn apply_d_into(&self, f: ArrayView2<f64>, axis: Axis, out: &mut Array2<f64>) {
        match axis {
            Axis::X => {
                let op = &self.x;
                let body = |i: usize, mut o: ArrayViewMut1<f64>| {
                    o.fill(0.0);
                    for &(j, c) in &op.rows[i] {
                        o.scaled_add(c, &f.row(j));
                    }
                };
                let z = Zip::indexed(out.rows_mut());
                if self.parallel {
                    z.par_for_each(body);
                } else {
                    z.for_each(body);
                }
            }
            Axis::Y => {
                let op = &self.y;
                let z = Zip::from(f.lanes(NdAxis(1))).and(out.lanes_mut(NdAxis(1)));
                if self.parallel {
                    z.par_for_each(|a, b| op.apply_into(a, b));
                } else {
                    z.for_each(|a, b| op.apply_into(a, b));
                }
            }
        }
    }

    /// `sum_ij H_ij a_ij b_ij`.
    pub fn scalar_inner(&self, a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
        self.check_shape(a)?;
        self.check_shape(b)?;
        let (nx, ny) = self.shape();
        let mut terms = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            for j in 0..ny {
                terms.push(self.weight(i, j) * a[[i, j]] * b[[i, j]]);
            }
        }
        Ok(pairwise_sum(&terms))
    }

    /// Discrete surface integral. Each face uses the tangential `H` weights.
    pub fn boundary_quadrature(&self, values: &BoundaryValues) -> Result<f64> {
        if self.kind() == GridKind::Periodic {
            return Err(Error::NoBoundary);
        }
        let (nx, ny) = self.shape();
        let mut terms = Vec::with_capacity(2 * (nx + ny));
        for face in Face::ALL {
            let (vals, w) = match face {
                Face::Left | Face::Right => (values.face(face), &self.y.weights),
                Face::Bottom | Face::Top => (values.face(face), &self.x.weights),
            };
            if vals.len() != w.len() {
                return Err(Error::Shape {
                    expected: (w.len(), 1),
                    got: (vals.len(), 1),
                });
            }
            terms.extend(vals.iter().zip(w).map(|(v, w)| v * w));
        }
        Ok(pairwise_sum(&terms))
    }
}

/// `<a, (P x H) b>` for skew fields.
pub fn inner_product(grid: &Grid2D, p: &NormP, a: &SkewField, b: &SkewField) -> Result<f64> {
    for f in [a, b] {
        if f.shape() != grid.shape() {
            return Err(Error::Shape {
                expected: grid.shape(),
                got: f.shape(),
            });
        }
    }
    let (nx, ny) = grid.shape();
    let mut terms = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let w = grid.weight(i, j);
            let q: f64 = (0..4)
                .map(|k| p.diag[k] * a.comps[k][[i, j]] * b.comps[k][[i, j]])
                .sum();
            terms.push(w * q);
        }
    }
    Ok(pairwise_sum(&terms))
}
