//! Dense row-major matrices, unit vectors, Gram matrices, and the
//! expectation q-norm they all feed.
//!
//! Conventions used across the crate:
//! - `X` is n x d with rows `x_i`; expectations `E_i` average over rows.
//! - `‖x‖_q̄ = ((1/n) Σ_i |x_i|^q)^(1/q)` (the expectation q-norm), so
//!   `‖X‖_{2→q̄} = sup_{‖v‖₂=1} ‖Xv‖_q̄`.
//! - All reductions run in fixed index order; nothing here depends on the
//!   thread count.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fixed-order dot product; the only inner-product kernel in the crate.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for k in 0..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

/// Euclidean norm with the same summation order as [`dot`].
#[inline]
pub fn euclidean_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Expectation q-norm `((1/n) Σ |x_k|^q)^(1/q)` for integer q ≥ 1.
pub fn expectation_q_norm(xs: &[f64], q: u32) -> Result<f64> {
    if q == 0 {
        return Err(Error::invalid("expectation_q_norm requires q >= 1"));
    }
    if xs.is_empty() {
        return Err(Error::invalid("expectation_q_norm requires a nonempty vector"));
    }
    Ok(mean_abs_pow(xs, q).powf(1.0 / f64::from(q)))
}

/// `(1/n) Σ |x_k|^q` without the root; shared by the norm and the oracles.
pub fn mean_abs_pow(xs: &[f64], q: u32) -> f64 {
    let mut acc = 0.0;
    for &x in xs {
        acc += x.abs().powi(q as i32);
    }
    acc / xs.len() as f64
}

/// Which norm a [`UnitVector`] is unit in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    Euclidean,
    /// ℓ_p for real p ≥ 1.
    Lp(f64),
}

/// A vector checked to have unit norm (within 1e-9) in its declared norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVector {
    coords: Vec<f64>,
    kind: NormKind,
}

const UNIT_TOL: f64 = 1e-9;

fn lp_norm(coords: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return coords.iter().map(|x| x.abs()).sum();
    }
    if p == 2.0 {
        return euclidean_norm(coords);
    }
    coords.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

impl UnitVector {
    /// Wraps coordinates that are already Euclidean-unit.
    pub fn euclidean(coords: Vec<f64>) -> Result<Self> {
        Self::checked(coords, NormKind::Euclidean)
    }

    /// Wraps coordinates that are already ℓ_p-unit.
    pub fn lp(coords: Vec<f64>, p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::invalid(format!("lp norm requires p >= 1, got {p}")));
        }
        Self::checked(coords, NormKind::Lp(p))
    }

    fn checked(coords: Vec<f64>, kind: NormKind) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("unit vector must be nonempty"));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("unit vector has non-finite coordinates"));
        }
        let n = match kind {
            NormKind::Euclidean => euclidean_norm(&coords),
            NormKind::Lp(p) => lp_norm(&coords, p),
        };
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!("vector norm {n} is not unit (tol {UNIT_TOL})")));
        }
        Ok(UnitVector { coords, kind })
    }

    /// Normalizes arbitrary coordinates to the Euclidean sphere.
    pub fn normalized_euclidean(coords: Vec<f64>) -> Result<Self> {
        let n = euclidean_norm(&coords);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::degenerate("cannot normalize a zero or non-finite vector"));
        }
        let coords = coords.into_iter().map(|x| x / n).collect();
        Ok(UnitVector { coords, kind: NormKind::Euclidean })
    }

    /// Normalizes arbitrary coordinates to the ℓ_p sphere.
    pub fn normalized_lp(coords: Vec<f64>, p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::invalid(format!("lp norm requires p >= 1, got {p}")));
        }
        let n = lp_norm(&coords, p);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::degenerate("cannot normalize a zero or non-finite vector"));
        }
        let coords = coords.into_iter().map(|x| x / n).collect();
        Ok(UnitVector { coords, kind: NormKind::Lp(p) })
    }

    /// Euclidean basis vector e_r (0-indexed).
    pub fn basis(dim: usize, r: usize) -> Self {
        assert!(r < dim);
        let mut coords = vec![0.0; dim];
        coords[r] = 1.0;
        UnitVector { coords, kind: NormKind::Euclidean }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// ℓ_p norm of this vector (whatever norm it is unit in).
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.coords, p)
    }
}

/// Dense n x d matrix, row-major, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl DataMatrix {
    pub fn from_vec(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!("matrix dimensions must be positive, got {n}x{d}")));
        }
        if data.len() != n * d {
            return Err(Error::invalid(format!(
                "data length {} does not match {n}x{d}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(DataMatrix { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("matrix needs at least one row"));
        }
        let d = rows[0].len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("ragged rows"));
        }
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), d, data)
    }

    /// The d x d identity as a data matrix (n = d).
    pub fn identity(d: usize) -> Self {
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            data[i * d + i] = 1.0;
        }
        DataMatrix { n: d, d, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    /// X v for a length-d vector; returns the n inner products.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.d);
        self.rows().map(|r| dot(r, v)).collect()
    }

    /// Xᵀ t for a length-n vector: Σ_i t_i x_i, accumulated in row order.
    pub fn apply_transpose(&self, t: &[f64]) -> Vec<f64> {
        assert_eq!(t.len(), self.n);
        let mut out = vec![0.0; self.d];
        for (i, r) in self.rows().enumerate() {
            let ti = t[i];
            if ti != 0.0 {
                for k in 0..self.d {
                    out[k] += ti * r[k];
                }
            }
        }
        out
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        euclidean_norm(self.row(i))
    }

    pub fn max_row_norm(&self) -> f64 {
        (0..self.n).map(|i| self.row_norm(i)).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::invalid("scale factor must be finite"));
        }
        let data = self.data.iter().map(|x| x * c).collect();
        DataMatrix::from_vec(self.n, self.d, data)
    }

    /// ‖Xv‖_q̄ for a Euclidean-unit direction.
    pub fn image_q_norm(&self, v: &[f64], q: u32) -> Result<f64> {
        expectation_q_norm(&self.apply(v), q)
    }
}

/// Dense symmetric matrix (full storage for cheap matvecs).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        SymMatrix { dim, data: vec![0.0; dim * dim] }
    }

    /// Wraps a row-major square buffer, validating symmetry to 1e-9
    /// (relative to the largest entry) and finiteness.
    pub fn from_vec(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::invalid("bad symmetric matrix dimensions"));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("symmetric matrix entries must be finite"));
        }
        let scale = data.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (data[i * dim + j] - data[j * dim + i]).abs() > 1e-9 * scale {
                    return Err(Error::invalid(format!("matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    /// Adds w · x xᵀ into the upper triangle; call [`Self::mirror`] once after
    /// all accumulation.
    #[inline]
    pub(crate) fn add_scaled_outer_upper(&mut self, w: f64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for k in 0..self.dim {
            let wxk = w * x[k];
            let row = &mut self.data[k * self.dim..(k + 1) * self.dim];
            for l in k..self.dim {
                row[l] += wxk * x[l];
            }
        }
    }

    /// Copies the upper triangle onto the lower one.
    pub(crate) fn mirror(&mut self) {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                self.data[j * self.dim + i] = self.data[i * self.dim + j];
            }
        }
    }

    pub(crate) fn scale(&mut self, c: f64) {
        for x in &mut self.data {
            *x *= c;
        }
    }

    /// M v, row-major fixed-order accumulation.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        self.data.chunks_exact(self.dim).map(|row| dot(row, v)).collect()
    }

    /// vᵀ M v.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(&self.matvec(v), v)
    }

    pub fn frobenius_norm(&self) -> f64 {
        euclidean_norm(&self.data)
    }
}

/// Gram matrix G_ij = ⟨x_i, x_j⟩ of the rows of X.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(SymMatrix);

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.0.entry(i, j)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.0.data()[i * self.0.dim()..(i + 1) * self.0.dim()]
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.0
    }
}

/// Builds the Gram matrix of the rows of X. Upper triangle is computed with
/// the shared dot kernel and mirrored, so G is bitwise symmetric.
pub fn gram(x: &DataMatrix) -> GramMatrix {
    let n = x.n();
    let mut g = SymMatrix::zeros(n);
    for i in 0..n {
        let xi = x.row(i);
        for j in i..n {
            let v = dot(xi, x.row(j));
            g.set(i, j, v);
        }
    }
    g.mirror();
    GramMatrix(g)
}

/// One Gram row ⟨x_i, x_j⟩ for all j, with the same kernel as [`gram`].
/// Bitwise equal to `gram(x).row(i)`: IEEE products commute, and the k-loop
/// order inside [`dot`] is the same on both paths.
pub fn gram_row(x: &DataMatrix, i: usize) -> Vec<f64> {
    let xi = x.row(i);
    x.rows().map(|xj| dot(xi, xj)).collect()
}

/// Normalized nonzero rows with their original indices, plus the indices of
/// zero rows (which are omitted from every proxy list).
pub fn normalize_rows(x: &DataMatrix) -> (Vec<(usize, UnitVector)>, Vec<usize>) {
    let mut normalized = Vec::with_capacity(x.n());
    let mut zero_rows = Vec::new();
    for i in 0..x.n() {
        let r = x.row(i);
        let nrm = euclidean_norm(r);
        if nrm == 0.0 {
            zero_rows.push(i);
        } else {
            let coords = r.iter().map(|v| v / nrm).collect();
            normalized.push((i, UnitVector { coords, kind: NormKind::Euclidean }));
        }
    }
    (normalized, zero_rows)
}

/// q is valid for certificates when it is an even integer ≥ 2.
pub(crate) fn check_even_q(q: u32) -> Result<()> {
    if q < 2 || q % 2 != 0 {
        return Err(Error::invalid(format!("q must be an even integer >= 2, got {q}")));
    }
    Ok(())
}

/// Σ_j w_j x_j x_jᵀ accumulated in row order (upper triangle, then mirrored).
/// Zero-weight rows are skipped; with a start of +0.0 per entry the skip is
/// arithmetically inert.
pub(crate) fn weighted_outer_sum(x: &DataMatrix, w: &[f64]) -> SymMatrix {
    debug_assert_eq!(w.len(), x.n());
    let mut m = SymMatrix::zeros(x.d());
    for (j, row) in x.rows().enumerate() {
        if w[j] != 0.0 {
            m.add_scaled_outer_upper(w[j], row);
        }
    }
    m.mirror();
    m
}

/// Divides X by s = max_i ‖x_i‖₂ and returns (X/s, s).
///
/// Every certified quantity is positively homogeneous of degree 1 in X, so
/// certificates compute on X/s (keeping all powered inner products ≤ 1 per
/// factor) and rescale reported values by s.
pub fn prescale(x: &DataMatrix) -> Result<(DataMatrix, f64)> {
    let s = x.max_row_norm();
    if s == 0.0 {
        return Err(Error::degenerate("all-zero matrix"));
    }
    let data = x.data().iter().map(|v| v / s).collect();
    Ok((DataMatrix::from_vec(x.n(), x.d(), data)?, s))
}
