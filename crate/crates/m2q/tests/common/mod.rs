//! Shared fixtures for the integration suites: the randomized instance grid
//! and small numeric helpers.

#![allow(dead_code)]

use m2q::gen;
use m2q::DataMatrix;

/// One randomized test instance.
pub struct Instance {
    pub label: String,
    pub x: DataMatrix,
    pub q: u32,
    pub seed: u64,
}

/// Instance families with tunable (n, d): a dense Gaussian cloud, a Gaussian
/// cloud with a planted heavy direction, and an exactly rank-one matrix.
pub const SUITE_KINDS: [&str; 3] = ["gaussian", "planted_spike", "rank_one"];
pub const SUITE_DIMS: [usize; 4] = [2, 4, 8, 16];
pub const SUITE_SIZES: [usize; 3] = [8, 64, 512];
pub const SUITE_QS: [u32; 3] = [2, 4, 6];
pub const SUITE_REPS: u64 = 2;

/// The full randomized grid: kinds × d × n × q × seeds = 3·4·3·3·2 = 216
/// instances. Deterministic: the same call always returns the same matrices.
pub fn suite_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for (ki, kind) in SUITE_KINDS.iter().enumerate() {
        for (di, &d) in SUITE_DIMS.iter().enumerate() {
            for (ni, &n) in SUITE_SIZES.iter().enumerate() {
                for rep in 0..SUITE_REPS {
                    let seed = 1 + rep + 10 * ni as u64 + 100 * di as u64 + 1000 * ki as u64;
                    let x = make_instance(kind, n, d, seed);
                    for &q in &SUITE_QS {
                        out.push(Instance {
                            label: format!("{kind} d={d} n={n} q={q} seed={seed}"),
                            x: x.clone(),
                            q,
                            seed,
                        });
                    }
                }
            }
        }
    }
    out
}

pub fn make_instance(kind: &str, n: usize, d: usize, seed: u64) -> DataMatrix {
    match kind {
        "gaussian" => gen::gen_gaussian(n, d, seed).unwrap(),
        // A 30% planted fraction at magnitude 1.5·√d: heavy enough to move
        // the q-norm landscape, light enough to keep the bulk Gaussian.
        "planted_spike" => gen::gen_planted_spike(n, d, 0.3, 1.5 * (d as f64).sqrt(), seed).unwrap(),
        "rank_one" => gen::gen_rank_one(n, d, 1.25, seed).unwrap(),
        other => panic!("unknown instance kind {other}"),
    }
}

/// `lhs ≤ rhs` up to relative slack (measured against `rhs`, with an absolute
/// floor for values near zero).
pub fn le_with_rel_slack(lhs: f64, rhs: f64, rel: f64) -> bool {
    lhs <= rhs + rel * rhs.abs().max(1e-300)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Least-squares slope of log(value) against log(scale).
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> f64 {
    assert!(points.len() >= 2, "slope fit needs at least two points");
    let logs: Vec<(f64, f64)> = points.iter().map(|&(s, v)| (s.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
