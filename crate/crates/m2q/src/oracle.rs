//! Heuristic maximizers of v ↦ ‖Xv‖_q̄ used as validated lower bounds.
//!
//! The ascent here is the symmetric tensor power method: for even q the map
//! v ← normalize(E_i ⟨x_i,v⟩^(q−1) x_i) never decreases the objective
//! E_i ⟨x_i,v⟩^q. That monotonicity is checked at runtime rather than
//! assumed: if roundoff produces a decrease, the run stops and keeps the best
//! iterate seen. Oracle values are never used inside certificates.

use crate::error::{Error, Result};
use crate::matrix::{check_even_q, euclidean_norm, mean_abs_pow, DataMatrix, UnitVector};
use crate::sampling;
use rayon::prelude::*;
use serde::Serialize;

/// Outcome of one ascent run.
#[derive(Debug, Clone)]
pub struct AscendOutcome {
    /// Best objective seen, reported as its q-th root: ‖X·vector‖_q̄.
    pub value: f64,
    pub vector: UnitVector,
    pub iterations: usize,
    pub converged: bool,
}

/// Best result over many ascent starts.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub vector: UnitVector,
    pub restarts_used: usize,
    pub ascent_iterations_total: usize,
    /// Fraction of starts whose ascent converged before the iteration cap.
    pub converged_fraction: f64,
}

/// Default ascent iteration cap.
pub const ASCEND_MAX_ITER: usize = 500;
/// Default ascent tolerance (relative objective increase).
pub const ASCEND_TOL: f64 = 1e-12;
/// Default number of random restarts.
pub const ORACLE_RESTARTS: usize = 64;

/// Tensor power ascent from `start`.
///
/// Stops when the objective increase drops to tol·max(1, f), when the
/// gradient direction degenerates to zero (one deterministic perturbation is
/// attempted first), or at `max_iter`.
pub fn ascend(
    x: &DataMatrix,
    q: u32,
    start: &UnitVector,
    max_iter: usize,
    tol: f64,
) -> Result<AscendOutcome> {
    check_even_q(q)?;
    if start.dim() != x.d() {
        return Err(Error::invalid("start dimension does not match matrix"));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid("tol must be nonnegative"));
    }

    let n = x.n() as f64;
    let qm1 = (q - 1) as i32;
    let mut v = start.coords().to_vec();
    let mut t = x.apply(&v);
    let mut f = mean_abs_pow(&t, q);
    let mut best_f = f;
    let mut best_v = v.clone();
    let mut iterations = 0;
    let mut converged = false;
    let mut perturbed = false;

    for it in 1..=max_iter {
        iterations = it;
        // g = (1/n) Σ_i t_i^(q-1) x_i; q-1 is odd so signs carry through.
        let mut g = vec![0.0; x.d()];
        for (i, row) in x.rows().enumerate() {
            let w = t[i].powi(qm1);
            if w != 0.0 {
                for k in 0..x.d() {
                    g[k] += w * row[k];
                }
            }
        }
        for gk in &mut g {
            *gk /= n;
        }
        let gn = euclidean_norm(&g);
        if gn == 0.0 {
            if perturbed || best_f > 0.0 {
                converged = true;
                break;
            }
            // Deterministic nudge off a stationary zero (e.g. start in the
            // kernel); if the matrix is all zero the next pass exits above.
            perturbed = true;
            v[0] += 1e-3;
            let nv = euclidean_norm(&v);
            for vk in &mut v {
                *vk /= nv;
            }
            t = x.apply(&v);
            f = mean_abs_pow(&t, q);
            if f > best_f {
                best_f = f;
                best_v = v.clone();
            }
            continue;
        }
        for k in 0..x.d() {
            v[k] = g[k] / gn;
        }
        t = x.apply(&v);
        let next = mean_abs_pow(&t, q);
        if next < f {
            // Roundoff broke monotonicity; stop and keep the best seen.
            break;
        }
        let gain = next - f;
        f = next;
        if f > best_f {
            best_f = f;
            best_v = v.clone();
        }
        if gain <= tol * f.max(1.0) {
            converged = true;
            break;
        }
    }

    Ok(AscendOutcome {
        value: best_f.powf(1.0 / f64::from(q)),
        vector: UnitVector::euclidean(best_v).expect("ascent iterate is unit"),
        iterations,
        converged,
    })
}

/// Configuration for [`oracle_lower_bound`].
#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { restarts: ORACLE_RESTARTS, seed: 0, max_iter: ASCEND_MAX_ITER, tol: ASCEND_TOL }
    }
}

/// Best ascent over warm starts (taken first, in order) plus seeded random
/// restarts. Ties break toward the earliest start, so the reduction is
/// deterministic and independent of the parallel schedule.
///
/// The returned value is at least the best warm start's initial objective:
/// ascent never drops below its starting point.
pub fn oracle_lower_bound(
    x: &DataMatrix,
    q: u32,
    cfg: &OracleConfig,
    warm_starts: &[UnitVector],
) -> Result<OracleResult> {
    check_even_q(q)?;
    if cfg.restarts == 0 && warm_starts.is_empty() {
        return Err(Error::invalid("need at least one start"));
    }
    let starts: Vec<UnitVector> = warm_starts
        .iter()
        .cloned()
        .chain((0..cfg.restarts).map(|k| {
            UnitVector::euclidean(sampling::unit_sphere_from(
                &mut sampling::substream(cfg.seed, k as u64),
                x.d(),
            ))
            .expect("sphere point is unit")
        }))
        .collect();

    let outcomes: Vec<AscendOutcome> = starts
        .par_iter()
        .map(|s| ascend(x, q, s, cfg.max_iter, cfg.tol))
        .collect::<Result<_>>()?;

    let mut best = 0usize;
    let mut total_iterations = 0usize;
    let mut converged = 0usize;
    for (k, o) in outcomes.iter().enumerate() {
        total_iterations += o.iterations;
        if o.converged {
            converged += 1;
        }
        if o.value > outcomes[best].value {
            best = k;
        }
    }
    let chosen = &outcomes[best];
    Ok(OracleResult {
        value: chosen.value,
        vector: chosen.vector.clone(),
        restarts_used: starts.len(),
        ascent_iterations_total: total_iterations,
        converged_fraction: converged as f64 / starts.len() as f64,
    })
}

/// Result of a dense 2-dimensional grid search.
#[derive(Debug, Clone)]
pub struct Grid2dResult {
    pub value: f64,
    pub vector: UnitVector,
    /// Grid angle achieving the maximum.
    pub theta: f64,
    /// sup-error bound: Lipschitz constant of the objective times half the
    /// grid spacing.
    pub error_bound: f64,
    pub grid_points: usize,
}

/// Exhaustive θ-grid over half the unit circle (d = 2 only): the objective
/// has even symmetry for even q, so [0, π) covers the sphere.
///
/// Independent of every certificate path; used as the reference oracle for
/// tiny instances. The error bound uses |∂‖Xv(θ)‖_q̄/∂θ| ≤ (E_i ‖x_i‖₂^q)^(1/q).
pub fn grid_oracle_2d(x: &DataMatrix, q: u32, grid_points: usize) -> Result<Grid2dResult> {
    check_even_q(q)?;
    grid_2d_impl(x, grid_points, |v| {
        let image = x.apply(v);
        mean_abs_pow(&image, q).powf(1.0 / f64::from(q))
    })
    .map(|mut r| {
        r.error_bound = lipschitz_2q(x, q) * (std::f64::consts::PI / r.grid_points as f64) / 2.0;
        r
    })
}

/// θ-grid maximizing the plain ℓ_q norm ratio ‖Xv‖_q/‖v‖_p over the ℓ_p unit
/// circle (d = 2 only). For even q the ratio is symmetric under v ↦ −v.
pub fn grid_oracle_2d_lp(x: &DataMatrix, p: f64, q: u32, grid_points: usize) -> Result<Grid2dResult> {
    check_even_q(q)?;
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("p must be >= 1, got {p}")));
    }
    let qf = f64::from(q);
    let mut r = grid_2d_impl(x, grid_points, |v| {
        let lp = if p == 2.0 {
            euclidean_norm(v)
        } else {
            (v[0].abs().powf(p) + v[1].abs().powf(p)).powf(1.0 / p)
        };
        let image = x.apply(v);
        let lq = image.iter().map(|t| t.abs().powi(q as i32)).sum::<f64>().powf(1.0 / qf);
        lq / lp
    })?;
    // Lipschitz bound for h(θ) = ‖Xv(θ)‖_q / ‖v(θ)‖_p on the Euclidean circle:
    // |h'| ≤ Lf/g_min + Lf·Lg/g_min² with Lf = (Σ_i ‖x_i‖₂^q)^(1/q) bounding
    // both the numerator and its derivative, g_min = min(1, 2^(1/p−1/2)) the
    // smallest ℓ_p norm on the circle, and Lg = max(1, 2^(1/p−1/2)) bounding
    // |d‖v‖_p/dθ| ≤ ‖v'‖_p.
    let lf = {
        let norms: Vec<f64> = (0..x.n()).map(|i| x.row_norm(i)).collect();
        norms.iter().map(|t| t.powi(q as i32)).sum::<f64>().powf(1.0 / qf)
    };
    let two_pow = 2f64.powf(1.0 / p - 0.5);
    let g_min = two_pow.min(1.0);
    let lg = two_pow.max(1.0);
    let lipschitz = lf / g_min + lf * lg / (g_min * g_min);
    r.error_bound = lipschitz * (std::f64::consts::PI / r.grid_points as f64) / 2.0;
    // Rescale the witness to the ℓ_p sphere.
    let vp = UnitVector::normalized_lp(r.vector.coords().to_vec(), p)?;
    Ok(Grid2dResult { vector: vp, ..r })
}

fn grid_2d_impl(
    x: &DataMatrix,
    grid_points: usize,
    objective: impl Fn(&[f64]) -> f64,
) -> Result<Grid2dResult> {
    if x.d() != 2 {
        return Err(Error::invalid("grid oracle requires d = 2"));
    }
    if grid_points < 2 {
        return Err(Error::invalid("grid needs at least 2 points"));
    }
    let mut best_val = f64::NEG_INFINITY;
    let mut best_theta = 0.0;
    for k in 0..grid_points {
        let theta = std::f64::consts::PI * k as f64 / grid_points as f64;
        let (s, c) = theta.sin_cos();
        let val = objective(&[c, s]);
        if val > best_val {
            best_val = val;
            best_theta = theta;
        }
    }
    let (s, c) = best_theta.sin_cos();
    Ok(Grid2dResult {
        value: best_val,
        vector: UnitVector::euclidean(vec![c, s]).expect("grid point is unit"),
        theta: best_theta,
        error_bound: f64::NAN, // filled by callers that define the Lipschitz bound
        grid_points,
    })
}

fn lipschitz_2q(x: &DataMatrix, q: u32) -> f64 {
    let norms: Vec<f64> = (0..x.n()).map(|i| x.row_norm(i)).collect();
    mean_abs_pow(&norms, q).powf(1.0 / f64::from(q))
}
