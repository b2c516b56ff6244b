//! Seeded instance generators.
//!
//! Every generator is a pure function of its spec: rows draw from per-row
//! substreams of the seed, so output is bitwise-identical at any thread
//! count and any generation order. Gaussians come from the crate-wide
//! Box–Muller transform (see [`crate::sampling`]), fixed so documented
//! empirical values are reproducible from seeds alone.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::sampling;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    /// Rows i.i.d. N(0, I_d).
    Gaussian,
    /// Adversarial spiked construction that fools row/singular-direction
    /// candidate lists while hiding a large fourth moment along e_1.
    DecoySpike,
    /// All rows equal to c·u for a seeded unit u.
    RankOne,
    /// The d×d identity.
    Identity,
    /// ρn rows of s·e_1 planted in a Gaussian bulk.
    PlantedSpike,
}

impl GenKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(GenKind::Gaussian),
            "decoy_spike" => Ok(GenKind::DecoySpike),
            "rank_one" => Ok(GenKind::RankOne),
            "identity" => Ok(GenKind::Identity),
            "planted_spike" => Ok(GenKind::PlantedSpike),
            other => Err(Error::invalid(format!(
                "unknown kind '{other}' (expected gaussian, decoy_spike, rank_one, identity, planted_spike)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            GenKind::Gaussian => "gaussian",
            GenKind::DecoySpike => "decoy_spike",
            GenKind::RankOne => "rank_one",
            GenKind::Identity => "identity",
            GenKind::PlantedSpike => "planted_spike",
        }
    }
}

/// Kind-specific real parameters. Unset fields fall back to the kind's
/// documented default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    /// rank_one: row magnitude (default 1). decoy_spike: the size multiplier
    /// C ≥ 1 with n = C·d³ rounded to a multiple of d (default 50).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// planted_spike: fraction ρ ∈ (0, 1] of rows carrying the spike
    /// (default 1/d).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spike_fraction: Option<f64>,
    /// planted_spike: spike magnitude s > 0 (default √d, which plants a
    /// fourth moment of d along e_1 at the default fraction).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spike_mag: Option<f64>,
}

fn default_q_hint() -> u32 {
    4
}

/// Serializable description of one instance; the sidecar provenance record
/// written next to generated matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GenKind,
    /// Row count. For decoy_spike, n is derived from (d, C); 0 means
    /// "derive", any other value must match the derived count.
    #[serde(default)]
    pub n: usize,
    pub d: usize,
    /// The q the instance is calibrated for (metadata only).
    #[serde(default = "default_q_hint")]
    pub q_hint: u32,
    pub seed: u64,
    #[serde(default)]
    pub params: GenParams,
}

/// Number of rows [`generate`] will produce for a spec.
pub fn derived_n(spec: &GeneratorSpec) -> Result<usize> {
    Ok(match spec.kind {
        GenKind::DecoySpike => {
            decoy_spike_shape(spec.d, spec.params.c.unwrap_or(DECOY_DEFAULT_C))?.0
        }
        GenKind::Identity => spec.d,
        _ => spec.n,
    })
}

/// Dispatches a spec to its generator after consistency checks.
pub fn generate(spec: &GeneratorSpec) -> Result<DataMatrix> {
    let derived = derived_n(spec)?;
    if spec.n != 0 && spec.n != derived {
        return Err(Error::invalid(format!(
            "spec says n = {} but kind {} derives n = {derived}",
            spec.n,
            spec.kind.as_str()
        )));
    }
    match spec.kind {
        GenKind::Gaussian => gen_gaussian(require_n(spec)?, spec.d, spec.seed),
        GenKind::DecoySpike => {
            gen_decoy_spike(spec.d, spec.params.c.unwrap_or(DECOY_DEFAULT_C), spec.seed)
        }
        GenKind::RankOne => {
            gen_rank_one(require_n(spec)?, spec.d, spec.params.c.unwrap_or(1.0), spec.seed)
        }
        GenKind::Identity => Ok(DataMatrix::identity(spec.d)),
        GenKind::PlantedSpike => {
            let rho = spec.params.spike_fraction.unwrap_or(1.0 / spec.d as f64);
            let s = spec.params.spike_mag.unwrap_or((spec.d as f64).sqrt());
            gen_planted_spike(require_n(spec)?, spec.d, rho, s, spec.seed)
        }
    }
}

fn require_n(spec: &GeneratorSpec) -> Result<usize> {
    if spec.n == 0 {
        return Err(Error::invalid(format!("kind {} requires an explicit n", spec.kind.as_str())));
    }
    Ok(spec.n)
}

/// Rows i.i.d. standard normal; row i uses substream (seed, i).
pub fn gen_gaussian(n: usize, d: usize, seed: u64) -> Result<DataMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("gaussian generator needs n, d >= 1"));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0f64; d];
            sampling::fill_standard_normals(&mut sampling::substream(seed, i as u64), &mut row);
            row
        })
        .collect();
    DataMatrix::from_vec(n, d, rows.concat())
}

/// Default size multiplier for the decoy construction.
pub const DECOY_DEFAULT_C: f64 = 50.0;

fn decoy_spike_shape(d: usize, c: f64) -> Result<(usize, usize)> {
    if d < 3 {
        return Err(Error::invalid(format!("decoy_spike requires d >= 3, got {d}")));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::invalid(format!("decoy_spike requires C >= 1, got {c}")));
    }
    // n = C·d³ rounded to a multiple of d, i.e. r = round(C·d²) spiked rows.
    let r = (c * (d * d) as f64).round() as usize;
    Ok((r * d, r))
}

/// The decoy instance: r = n/d spiked rows (s_i·√d, d^(1/4)·Z_i) followed by
/// n − r rows (0, Z_i), with Z_i ~ N(0, I_{d−1} + e_1e_1ᵀ) so the population
/// covariance points its top eigenvector near coordinate 2, away from the
/// spike. Along e_1 the empirical fourth moment is exactly r·d²/n = d.
pub fn gen_decoy_spike(d: usize, c: f64, seed: u64) -> Result<DataMatrix> {
    let (n, r) = decoy_spike_shape(d, c)?;
    let sqrt_d = (d as f64).sqrt();
    let quarter = (d as f64).powf(0.25);
    let sqrt2 = 2f64.sqrt();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = sampling::substream(seed, i as u64);
            let mut z = vec![0.0f64; d - 1];
            sampling::fill_standard_normals(&mut rng, &mut z);
            z[0] *= sqrt2; // the variance-2 component of Z sits first
            let mut row = Vec::with_capacity(d);
            if i < r {
                row.push(sampling::uniform_sign(&mut rng) * sqrt_d);
                row.extend(z.iter().map(|v| quarter * v));
            } else {
                row.push(0.0);
                row.extend_from_slice(&z);
            }
            row
        })
        .collect();
    DataMatrix::from_vec(n, d, rows.concat())
}

/// All rows c·u for a seeded unit direction u; the true 2→q̄ norm is c for
/// every q.
pub fn gen_rank_one(n: usize, d: usize, c: f64, direction_seed: u64) -> Result<DataMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("rank_one generator needs n, d >= 1"));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("rank_one magnitude must be >= 0, got {c}")));
    }
    let u = sampling::unit_sphere_point(d, direction_seed);
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        data.extend(u.iter().map(|v| c * v));
    }
    DataMatrix::from_vec(n, d, data)
}

/// round(ρn) rows equal to s·e_1, the rest i.i.d. N(0, I_d).
pub fn gen_planted_spike(n: usize, d: usize, rho: f64, s: f64, seed: u64) -> Result<DataMatrix> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("planted_spike generator needs n, d >= 1"));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid(format!("spike fraction must be in (0, 1], got {rho}")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid(format!("spike magnitude must be positive, got {s}")));
    }
    let k = ((rho * n as f64).round() as usize).min(n);
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0f64; d];
            if i < k {
                row[0] = s;
            } else {
                sampling::fill_standard_normals(&mut sampling::substream(seed, i as u64), &mut row);
            }
            row
        })
        .collect();
    DataMatrix::from_vec(n, d, rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{expectation_q_norm, mean_abs_pow, weighted_outer_sum};

    #[test]
    fn gaussian_is_deterministic_and_seed_sensitive() {
        let a = gen_gaussian(20, 5, 7).unwrap();
        let b = gen_gaussian(20, 5, 7).unwrap();
        let c = gen_gaussian(20, 5, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_row_norms_concentrate() {
        // E‖x‖² = d; with n = 4096 the empirical mean sits within 10%.
        let x = gen_gaussian(4096, 16, 3).unwrap();
        let mean_sq: f64 =
            x.rows().map(|r| r.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / 4096.0;
        assert!((14.4..=17.6).contains(&mean_sq), "mean squared norm {mean_sq}");
    }

    #[test]
    fn gaussian_covariance_concentrates() {
        // ‖(1/n)XᵀX − I‖op ≤ 5√(d/n) at n = 4d². Both spectral edges are
        // reached through PSD shifts so the power iteration applies.
        let (n, d) = (256usize, 8usize);
        let x = gen_gaussian(n, d, 11).unwrap();
        let mut cov = weighted_outer_sum(&x, &vec![1.0; n]);
        cov.scale(1.0 / n as f64);
        let bound = 5.0 * (d as f64 / n as f64).sqrt();
        // λ_max(cov + I) − 2 = λ_max(cov) − 1.
        let mut up = cov.clone();
        for i in 0..d {
            up.set(i, i, up.entry(i, i) + 1.0);
        }
        let top = crate::spectral::top_eigenpair_psd(&up, 1e-12, 20_000, 1).unwrap();
        let dev_high = top.lambda - 2.0;
        assert!(dev_high <= bound, "upper deviation {dev_high} vs bound {bound}");
        // λ_max(3I − cov) − 2 = 1 − λ_min(cov); PSD because λ_max(cov) < 3.
        let mut down = cov.clone();
        down.scale(-1.0);
        for i in 0..d {
            down.set(i, i, down.entry(i, i) + 3.0);
        }
        let bottom = crate::spectral::top_eigenpair_psd(&down, 1e-12, 20_000, 1).unwrap();
        let dev_low = bottom.lambda - 2.0;
        assert!(dev_low <= bound, "lower deviation {dev_low} vs bound {bound}");
    }

    #[test]
    fn decoy_layout_and_moments() {
        let d = 8usize;
        let c = 5.0;
        let x = gen_decoy_spike(d, c, 2).unwrap();
        let r = (c * (d * d) as f64).round() as usize;
        assert_eq!(x.n(), r * d);
        let sqrt_d = (d as f64).sqrt();
        for (i, row) in x.rows().enumerate() {
            if i < r {
                assert_eq!(row[0].abs(), sqrt_d, "spiked row {i}");
            } else {
                assert_eq!(row[0], 0.0, "bulk row {i}");
            }
        }
        // Fourth moment along e_1 is exactly r·d²/n = d up to float rounding.
        let col0: Vec<f64> = x.rows().map(|row| row[0]).collect();
        let m4 = mean_abs_pow(&col0, 4);
        assert!((m4 - d as f64).abs() <= 1e-9 * d as f64, "m4 = {m4}");
        // Spiked rows have norm Θ(d^(3/4)).
        let mean_norm: f64 = (0..r).map(|i| x.row_norm(i)).sum::<f64>() / r as f64;
        let scale = (d as f64).powf(0.75);
        assert!(
            (0.5 * scale..=2.0 * scale).contains(&mean_norm),
            "spiked mean norm {mean_norm} vs d^(3/4) = {scale}"
        );
    }

    #[test]
    fn decoy_rejects_small_d_and_small_c() {
        assert!(gen_decoy_spike(2, 50.0, 0).is_err());
        assert!(gen_decoy_spike(8, 0.5, 0).is_err());
    }

    #[test]
    fn rank_one_exact_values() {
        let x = gen_rank_one(6, 4, 2.0, 9).unwrap();
        let u = sampling::unit_sphere_point(4, 9);
        // ‖Xu‖_q̄ = c exactly (all rows give ⟨cu, u⟩ = c).
        let val = expectation_q_norm(&x.apply(&u), 6).unwrap();
        assert!((val - 2.0).abs() < 1e-12);
        let zero = gen_rank_one(3, 4, 0.0, 9).unwrap();
        assert!(zero.rows().all(|r| r.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn planted_spike_fraction_one_is_rank_one() {
        let x = gen_planted_spike(5, 3, 1.0, 2.5, 4).unwrap();
        for row in x.rows() {
            assert_eq!(row, &[2.5, 0.0, 0.0][..]);
        }
    }

    #[test]
    fn planted_spike_moment_along_e1() {
        // ρ = 1/d, s = √d: E⟨x,e_1⟩⁴ ≥ ρ·s⁴ = d.
        let (n, d) = (64usize, 4usize);
        let x = gen_planted_spike(n, d, 1.0 / d as f64, (d as f64).sqrt(), 6).unwrap();
        let col0: Vec<f64> = x.rows().map(|row| row[0]).collect();
        assert!(mean_abs_pow(&col0, 4) >= d as f64 * (1.0 - 1e-12));
    }

    #[test]
    fn spec_dispatch_and_validation() {
        let spec = GeneratorSpec {
            kind: GenKind::DecoySpike,
            n: 0,
            d: 8,
            q_hint: 4,
            seed: 1,
            params: GenParams { c: Some(50.0), ..Default::default() },
        };
        assert_eq!(derived_n(&spec).unwrap(), 25_600);
        let x = generate(&spec).unwrap();
        assert_eq!(x.n(), 25_600);
        // A stale n in the GeneratorSpec is rejected.
        let bad = GeneratorSpec { n: 100, ..spec.clone() };
        assert!(generate(&bad).is_err());
        // Identity derives n = d.
        let id = GeneratorSpec {
            kind: GenKind::Identity,
            n: 0,
            d: 3,
            q_hint: 4,
            seed: 0,
            params: GenParams::default(),
        };
        assert_eq!(generate(&id).unwrap(), DataMatrix::identity(3));
        // Explicit-n kinds refuse n = 0.
        let no_n = GeneratorSpec { kind: GenKind::Gaussian, n: 0, ..id.clone() };
        assert!(generate(&no_n).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = GeneratorSpec {
            kind: GenKind::PlantedSpike,
            n: 32,
            d: 4,
            q_hint: 4,
            seed: 12,
            params: GenParams {
                c: None,
                spike_fraction: Some(0.25),
                spike_mag: Some(2.0),
            },
        };
        let js = serde_json::to_string(&spec).unwrap();
        assert!(js.contains("\"planted_spike\""));
        let back: GeneratorSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(generate(&spec).unwrap(), generate(&back).unwrap());
        assert!(GenKind::parse("decoy_spike").is_ok());
        assert!(GenKind::parse("nope").is_err());
    }
}
