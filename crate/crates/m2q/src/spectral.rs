//! Top eigenpair of symmetric PSD matrices and top singular pair of
//! rectangular matrices, via plain power iteration with explicit tolerance
//! and determinism contracts. No deflation, no full decompositions.

use crate::error::{Error, Result};
use crate::matrix::{dot, euclidean_norm, DataMatrix, SymMatrix, UnitVector};
use crate::sampling;

/// Result of a power-iteration run.
///
/// `lambda` is the Rayleigh quotient of the returned `vector` (computed with
/// the same matvec that produced `residual = ‖M v − lambda v‖₂`), so
/// `lambda ≤ lambda_max(M)` always holds up to roundoff: the estimate is a
/// witnessed lower bound that doubles as the eigenvalue estimate.
#[derive(Debug, Clone)]
pub struct SpectralWitness {
    pub lambda: f64,
    pub vector: UnitVector,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Default tolerance for eigensolves.
pub const EIG_TOL: f64 = 1e-10;
/// Default iteration cap for eigensolves.
pub const EIG_MAX_ITER: usize = 5000;

/// Top eigenpair of a symmetric PSD matrix by power iteration from a seeded
/// random unit start.
///
/// Convergence requires both the Rayleigh delta and the residual to fall
/// below `tol·max(1, lambda)`; the residual condition is the stronger one and
/// bounds the eigenvalue error directly (|lambda − lambda_max| ≤ residual for
/// symmetric M). For the zero matrix the start vector is returned with
/// lambda = 0. Bitwise deterministic for fixed (m, tol, max_iter, seed).
pub fn top_eigenpair_psd(
    m: &SymMatrix,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SpectralWitness> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid(format!("tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be >= 1"));
    }
    if m.data().iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    // SymMatrix construction already enforces symmetry; recheck cheaply so a
    // hand-mutated buffer cannot slip through.
    debug_assert!(is_symmetric(m));

    let dim = m.dim();
    let mut v = sampling::unit_sphere_point(dim, seed);
    let mut y = m.matvec(&v);
    let mut lambda = dot(&v, &y);
    let mut residual = residual_norm(&y, lambda, &v);
    let mut iterations = 0;
    let mut converged = false;

    for t in 1..=max_iter {
        iterations = t;
        let ny = euclidean_norm(&y);
        if ny == 0.0 {
            // Zero matrix (or an exact-kernel iterate): nothing to chase.
            lambda = 0.0;
            residual = 0.0;
            converged = true;
            break;
        }
        for k in 0..dim {
            v[k] = y[k] / ny;
        }
        y = m.matvec(&v);
        let next = dot(&v, &y);
        let scale = next.abs().max(1.0);
        let delta_ok = (next - lambda).abs() <= tol * scale;
        residual = residual_norm(&y, next, &v);
        lambda = next;
        if delta_ok && residual <= tol * scale {
            converged = true;
            break;
        }
    }

    Ok(SpectralWitness {
        lambda,
        vector: UnitVector::euclidean(v).expect("power iterate is unit"),
        iterations,
        residual,
        converged,
    })
}

fn residual_norm(y: &[f64], lambda: f64, v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..y.len() {
        let r = y[k] - lambda * v[k];
        acc += r * r;
    }
    acc.sqrt()
}

fn is_symmetric(m: &SymMatrix) -> bool {
    let dim = m.dim();
    let scale = m.data().iter().fold(0.0_f64, |a, x| a.max(x.abs())).max(1.0);
    for i in 0..dim {
        for j in (i + 1)..dim {
            if (m.entry(i, j) - m.entry(j, i)).abs() > 1e-9 * scale {
                return false;
            }
        }
    }
    true
}

/// Top singular triple of a rectangular matrix.
#[derive(Debug, Clone)]
pub struct SingularTriple {
    /// ‖X · right‖₂, computed explicitly (not as an eigenvalue square root).
    pub sigma: f64,
    pub right: UnitVector,
    /// X·right/sigma; `None` when sigma = 0 (left vector undefined).
    pub left: Option<UnitVector>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Top singular pair via power iteration on XᵀX (d x d, built once).
pub fn top_singular_pair(
    x: &DataMatrix,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SingularTriple> {
    let d = x.d();
    let mut a = SymMatrix::zeros(d);
    for row in x.rows() {
        a.add_scaled_outer_upper(1.0, row);
    }
    a.mirror();
    let w = top_eigenpair_psd(&a, tol, max_iter, seed)?;
    let image = x.apply(w.vector.coords());
    let sigma = euclidean_norm(&image);
    let left = if sigma > 0.0 {
        Some(UnitVector::normalized_euclidean(image).expect("nonzero image"))
    } else {
        None
    };
    Ok(SingularTriple {
        sigma,
        right: w.vector,
        left,
        iterations: w.iterations,
        residual: w.residual,
        converged: w.converged,
    })
}
