//! Seeded sampling primitives.
//!
//! Every random quantity in this crate flows through ChaCha20 streams seeded
//! from a caller-supplied `u64`, with normals produced by the Box-Muller
//! transform below. The method is fixed so that any value derived from a seed
//! is bitwise reproducible across runs, platforms, and thread counts.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

const INV_2_53: f64 = 1.0 / 9007199254740992.0; // 2^-53

/// ChaCha20 stream for a given seed. Stream 0 of [`substream`].
pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent substream `k` of the generator for `seed`.
///
/// Uses the ChaCha stream counter, so substreams never overlap and a
/// per-row parallel fill is bitwise identical to the sequential one.
pub fn substream(seed: u64, k: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(k);
    r
}

/// Uniform draw from (0, 1]; never returns 0 so `ln` is safe.
#[inline]
fn uniform_open_closed(r: &mut ChaCha20Rng) -> f64 {
    ((r.next_u64() >> 11) + 1) as f64 * INV_2_53
}

/// Uniform draw from [0, 1).
#[inline]
fn uniform_half_open(r: &mut ChaCha20Rng) -> f64 {
    (r.next_u64() >> 11) as f64 * INV_2_53
}

/// Fills `out` with standard normals via Box-Muller:
/// z0 = sqrt(-2 ln u1) cos(2 pi u2), z1 = sqrt(-2 ln u1) sin(2 pi u2).
///
/// Two uniforms are consumed per pair; for odd lengths the second member of
/// the final pair is discarded, so the stream position depends only on
/// `out.len()`.
pub fn fill_standard_normals(r: &mut ChaCha20Rng, out: &mut [f64]) {
    let mut k = 0;
    while k < out.len() {
        let u1 = uniform_open_closed(r);
        let u2 = uniform_half_open(r);
        let rad = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        out[k] = rad * c;
        k += 1;
        if k < out.len() {
            out[k] = rad * s;
            k += 1;
        }
    }
}

/// A uniform sign in {-1.0, +1.0}.
pub fn uniform_sign(r: &mut ChaCha20Rng) -> f64 {
    if r.next_u64() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Seeded point on the Euclidean unit sphere in `dim` dimensions
/// (normalized standard normals).
pub fn unit_sphere_point(dim: usize, seed: u64) -> Vec<f64> {
    assert!(dim >= 1, "unit_sphere_point needs dim >= 1");
    let mut r = rng(seed);
    unit_sphere_from(&mut r, dim)
}

/// Next point on the unit sphere from an existing stream.
pub fn unit_sphere_from(r: &mut ChaCha20Rng, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    loop {
        fill_standard_normals(r, &mut v);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-150 {
            for x in &mut v {
                *x /= norm;
            }
            return v;
        }
        // Astronomically unlikely; redraw keeps the contract total.
    }
}
