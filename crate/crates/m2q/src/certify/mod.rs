//! Certificate routes: proxy-direction, spectral baseline, and the
//! row/singular-vector comparison route, plus the p→q interpolation wrapper.
//!
//! Every route reports the same JSON-serializable [`CertificateReport`]. The
//! proxy route is the headline: it returns a finite list of candidate
//! directions whose best image q-norm `B` traps the operator norm in
//! `[B, factor·B]` with `factor = d^(1/4 − 1/(2q))`.
//!
//! Scaling convention: inputs are divided by the largest row norm `s` before
//! any Gram or eigen work, and reported quantities are mapped back to the
//! original scale afterwards. Under X → cX the relevant objects are
//! homogeneous with known degree: `B` and `certified_upper` scale like c,
//! the per-row aggregate operator norms like c^(2q−2), and the top eigenvalue
//! of the weighted second-moment matrix like c^(2q).

mod baseline;
mod guth;
mod interp;
mod proxy;

pub use baseline::{
    baseline_certificate, flatten_check, BASELINE_EIG_MAX_ITER, BASELINE_EIG_TOL, FLATTEN_CAP,
};
pub use guth::guth_certificate;
pub use interp::{gamma_p, p_to_q_certificate, sampled_p_to_q_lower, PToQReport};
pub use proxy::{build_mi, frobenius_mv, proxy_certificate, GRAM_CACHE_MAX_N};

use crate::error::{Error, Result};
use crate::matrix::{mean_abs_pow, DataMatrix, UnitVector};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

/// Which certificate route produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Proxy,
    Baseline,
    Guth,
}

/// Three-way outcome of testing a report against a threshold pair (α, β).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    /// The witnessed lower bound already exceeds α.
    #[serde(rename = "YES-witnessed")]
    YesWitnessed,
    /// B ≤ α and the route's factor fits inside β/α, so the certified upper
    /// bound factor·B ≤ β: consistent with the norm being below β.
    #[serde(rename = "NO-consistent")]
    NoConsistent,
    /// B ≤ α but β/α is smaller than the route's factor: the sandwich is too
    /// loose to separate the two hypotheses.
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::YesWitnessed => "YES-witnessed",
            Decision::NoConsistent => "NO-consistent",
            Decision::Inconclusive => "inconclusive",
        })
    }
}

/// Where a candidate direction came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Standard basis vector e_r.
    Basis(usize),
    /// Normalized data row i (original row index, before zero rows dropped).
    Row(usize),
    /// Top eigenvector of the i-th row's weighted second-moment matrix.
    EigMi(usize),
    /// Top eigenvector of the aggregate weighted second-moment matrix.
    EigMtilde,
    /// Top right singular vector of X.
    Singular,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Basis(r) => write!(f, "basis({r})"),
            Provenance::Row(i) => write!(f, "row({i})"),
            Provenance::EigMi(i) => write!(f, "eigMi({i})"),
            Provenance::EigMtilde => f.write_str("eigMtilde"),
            Provenance::Singular => f.write_str("singular"),
        }
    }
}

/// One candidate direction with its origin.
#[derive(Debug, Clone)]
pub struct ProxyEntry {
    pub vector: UnitVector,
    pub provenance: Provenance,
}

/// How many entries of each kind the list holds, in list order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProxyCounts {
    pub basis: usize,
    pub rows: usize,
    pub eig_mi: usize,
    pub eig_mtilde: usize,
}

/// The finite candidate list evaluated by the proxy route.
///
/// Order is fixed: d basis vectors, then one entry per nonzero row, then one
/// eigenvector per nonzero row, then the single aggregate eigenvector. Rows
/// that are exactly zero are skipped (their indices are recorded) so the list
/// always has `d + 2·(nonzero rows) + 1` entries.
#[derive(Debug, Clone)]
pub struct ProxyList {
    pub entries: Vec<ProxyEntry>,
    pub counts: ProxyCounts,
    /// Original indices of rows dropped for being exactly zero.
    pub zero_rows: Vec<usize>,
}

impl ProxyList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Candidate unit vectors in list order (e.g. to warm-start an oracle).
    pub fn vectors(&self) -> impl Iterator<Item = &UnitVector> {
        self.entries.iter().map(|e| &e.vector)
    }
}

/// Best direction in serialized reports.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionReport {
    /// Human-readable origin, e.g. `"row(17)"` or `"eigMtilde"`.
    pub provenance: String,
    pub coords: Vec<f64>,
}

impl DirectionReport {
    fn from_entry(entry: &ProxyEntry) -> Self {
        DirectionReport {
            provenance: entry.provenance.to_string(),
            coords: entry.vector.coords().to_vec(),
        }
    }
}

/// Eigensolver settings recorded in every report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub eig_tol: f64,
    pub max_iter: usize,
}

/// Wall-clock milliseconds per certificate phase.
///
/// The baseline route maps its phases onto the same keys: `gram` is the Gram
/// build, `Mi_loop` the entrywise-power kernel build, `Mtilde` the
/// eigensolve, and `list_eval` is zero (it evaluates no list).
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct PhaseTimings {
    pub gram: f64,
    #[serde(rename = "Mi_loop")]
    pub mi_loop: f64,
    #[serde(rename = "Mtilde")]
    pub mtilde: f64,
    pub list_eval: f64,
}

/// Numerical diagnostics attached to a report.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Largest residual ‖Mv − λv‖₂ over every power-iteration solve in the
    /// run, measured on the prescaled problem (it is a solver health check,
    /// not a certified quantity).
    pub max_eig_residual: f64,
    /// Top eigenvalue of the route's aggregate matrix, on the original scale:
    /// λ(M̃) for the proxy route, λ(K) for the baseline, absent otherwise.
    #[serde(rename = "lambda_Mtilde")]
    pub lambda_mtilde: Option<f64>,
    pub wall_ms: PhaseTimings,
    /// Operator norms ‖M_i‖ per nonzero row (original scale), parallel to the
    /// list's eigMi entries. Diagnostic only; omitted from JSON.
    #[serde(skip)]
    pub mi_op_norms: Vec<f64>,
}

/// Settings shared by the eigensolver-backed certificate routes.
#[derive(Debug, Clone, Copy)]
pub struct CertifyConfig {
    pub eig_tol: f64,
    pub eig_max_iter: usize,
    pub seed: u64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            eig_tol: crate::spectral::EIG_TOL,
            eig_max_iter: crate::spectral::EIG_MAX_ITER,
            seed: 0,
        }
    }
}

impl CertifyConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.eig_tol > 0.0 && self.eig_tol.is_finite()) {
            return Err(Error::invalid(format!("eig_tol must be positive, got {}", self.eig_tol)));
        }
        if self.eig_max_iter == 0 {
            return Err(Error::invalid("eig_max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// One certificate run, shaped for JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub method: Method,
    pub q: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub n: usize,
    pub d: usize,
    /// Certified multiplicative gap: true norm ∈ [B, factor·B].
    pub factor: f64,
    /// Witnessed lower bound; `None` for the baseline route, which certifies
    /// only an upper bound.
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub certified_upper: f64,
    pub best_direction: Option<DirectionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub diagnostics: Diagnostics,
}

/// Classifies a lower bound `b` with gap `factor` against thresholds (α, β).
///
/// `b > α` is a witnessed YES regardless of β. Otherwise the test is only
/// allowed to answer NO when the promise gap is at least the certificate gap,
/// i.e. β/α ≥ factor (compared with one part in 10¹² of slack so that
/// β = α·factor computed in floating point still qualifies).
pub fn decide_values(b: f64, factor: f64, alpha: f64, beta: f64) -> Result<Decision> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive and finite, got {alpha}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be positive and finite, got {beta}")));
    }
    if !b.is_finite() || b < 0.0 {
        return Err(Error::invalid(format!("lower bound must be finite and >= 0, got {b}")));
    }
    if b > alpha {
        Ok(Decision::YesWitnessed)
    } else if beta >= alpha * factor * (1.0 - 1e-12) {
        Ok(Decision::NoConsistent)
    } else {
        Ok(Decision::Inconclusive)
    }
}

/// [`decide_values`] applied to a report's `B` and `factor`.
///
/// Baseline reports carry no lower bound and cannot be decided.
pub fn decide(report: &CertificateReport, alpha: f64, beta: f64) -> Result<Decision> {
    let b = report
        .b
        .ok_or_else(|| Error::invalid("report has no witnessed lower bound (baseline route); decision undefined"))?;
    decide_values(b, report.factor, alpha, beta)
}

/// Evaluates ‖Xv̂‖_q̄ for every entry and returns (argmax, max, all values).
///
/// Values are computed in parallel but reduced sequentially with a strict
/// `>`, so ties keep the earliest entry and the result is independent of the
/// thread count.
pub(crate) fn evaluate_entries(
    x: &DataMatrix,
    q: u32,
    entries: &[ProxyEntry],
) -> (usize, f64, Vec<f64>) {
    debug_assert!(!entries.is_empty());
    let values: Vec<f64> = entries
        .par_iter()
        .map(|e| mean_abs_pow(&x.apply(e.vector.coords()), q).powf(1.0 / f64::from(q)))
        .collect();
    let mut best = 0usize;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    (best, values[best], values)
}

pub(crate) fn ms_since(t: std::time::Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
