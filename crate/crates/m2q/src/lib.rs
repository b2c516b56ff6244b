//! Certified upper bounds and witnessed lower bounds for hypercontractive
//! 2→q (and general p→q) operator norms of dense row-sampled matrices.
//!
//! The certified route evaluates ‖Xv̂‖_q̄ over a small list of proxy
//! directions (coordinate axes, normalized rows, per-row contraction
//! eigenvectors, and one aggregate eigenvector) and pays only a
//! d^(1/4 − 1/(2q)) approximation factor; a spectral flattening baseline at
//! d^(1/4) and a rows-plus-singular-vector comparison list are provided for
//! contrast, together with a tensor-power-ascent oracle for validated lower
//! bounds and seeded instance generators.
//!
//! Determinism contract: every randomized routine takes an explicit seed and
//! produces bitwise-identical results at any thread count.

pub mod certify;
pub mod error;
pub mod gen;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::{
    dot, expectation_q_norm, gram, gram_row, normalize_rows, prescale, DataMatrix, GramMatrix,
    NormKind, SymMatrix, UnitVector,
};
pub use spectral::{top_eigenpair_psd, top_singular_pair, SingularTriple, SpectralWitness};
