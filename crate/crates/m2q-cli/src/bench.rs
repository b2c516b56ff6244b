//! `bench-scaling`: certified values across a dimension sweep with a
//! least-squares slope fit in log-log coordinates, one fit per method.

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use m2q::certify::{baseline_certificate, proxy_certificate, CertifyConfig};
use m2q::gen::gen_gaussian;
use m2q::matrix::DataMatrix;
use m2q::oracle::{oracle_lower_bound, OracleConfig};
use serde::Serialize;
use std::path::Path;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Args)]
pub struct BenchArgs {
    /// Even exponent q >= 2.
    #[arg(long, default_value_t = 4)]
    q: u32,
    /// Dimension sweep (comma separated, at least 3 distinct values).
    #[arg(long, value_delimiter = ',', default_value = "8,16,24,32")]
    dims: Vec<usize>,
    /// Rows per dimension: `4d2` (n = 4*d^2) or `fixed:<n>`.
    #[arg(long, default_value = "4d2")]
    n_rule: String,
    /// Seeds per dimension (seed-base, seed-base+1, ...); the fit uses the
    /// per-dimension median.
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    seed_base: u64,
    /// Methods to fit (comma separated).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "proxy,baseline,oracle")]
    methods: Vec<BenchMethod>,
    /// Per-run rows are written here.
    #[arg(long, default_value = "bench.csv")]
    out_csv: PathBuf,
    /// Print the full result as JSON instead of the slope table.
    #[arg(long)]
    json: bool,
    /// Skip generation and inject the exact power law d^slope (fitter check).
    #[arg(long)]
    synthetic_slope: Option<f64>,
    /// Oracle restarts.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    /// Skip dimensions whose n^2*d^2 exceeds this budget (with a warning);
    /// fewer than 3 surviving dimensions is exit 5, never a silent fit.
    #[arg(long, default_value_t = super::DEFAULT_BUDGET)]
    max_budget: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchMethod {
    Proxy,
    Baseline,
    Oracle,
}

impl BenchMethod {
    fn name(self) -> &'static str {
        match self {
            BenchMethod::Proxy => "proxy",
            BenchMethod::Baseline => "baseline",
            BenchMethod::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Serialize)]
struct BenchRow {
    d: usize,
    n: usize,
    seed: u64,
    method: &'static str,
    value: f64,
    wall_ms: f64,
}

#[derive(Debug, Serialize)]
struct SlopeFit {
    method: &'static str,
    slope: f64,
    intercept: f64,
    residual_l2: f64,
    points: usize,
}

#[derive(Debug, Serialize)]
struct BenchResult {
    q: u32,
    n_rule: String,
    seeds: u64,
    rows: Vec<BenchRow>,
    slopes: Vec<SlopeFit>,
}

enum NRule {
    FourDSquared,
    Fixed(usize),
}

impl NRule {
    fn n(&self, d: usize) -> usize {
        match *self {
            NRule::FourDSquared => 4 * d * d,
            NRule::Fixed(n) => n,
        }
    }
}

fn parse_n_rule(s: &str) -> Result<NRule> {
    if s == "4d2" {
        return Ok(NRule::FourDSquared);
    }
    if let Some(rest) = s.strip_prefix("fixed:") {
        let n: usize = rest.parse().with_context(|| format!("bad row count in --n-rule '{s}'"))?;
        if n == 0 {
            bail!("--n-rule fixed:<n> needs n >= 1");
        }
        return Ok(NRule::Fixed(n));
    }
    bail!("unknown --n-rule '{s}' (expected 4d2 or fixed:<n>)");
}

pub fn cmd_bench(a: &BenchArgs) -> Result<u8> {
    let rule = parse_n_rule(&a.n_rule)?;
    {
        let mut sorted = a.dims.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != a.dims.len() {
            bail!("--dims entries must be distinct");
        }
    }
    if a.dims.len() < 3 {
        bail!("a slope fit needs at least 3 dimensions, got {}", a.dims.len());
    }
    if a.dims.iter().any(|&d| d == 0) {
        bail!("--dims entries must be >= 1");
    }
    if a.methods.is_empty() {
        bail!("--methods must not be empty");
    }
    if a.seeds == 0 {
        bail!("--seeds must be >= 1");
    }
    let mut methods = Vec::new();
    for &m in &a.methods {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }

    let mut rows: Vec<BenchRow> = Vec::new();
    let mut kept: Vec<usize> = Vec::new();
    for &d in &a.dims {
        let n = rule.n(d);
        let cost = (n as f64).powi(2) * (d as f64).powi(2);
        if a.synthetic_slope.is_none() && cost > a.max_budget {
            eprintln!(
                "warning: skipping d = {d} (n = {n}): n^2*d^2 = {cost:.3e} exceeds budget {:.3e}",
                a.max_budget
            );
            continue;
        }
        kept.push(d);
        if let Some(s) = a.synthetic_slope {
            for &m in &methods {
                rows.push(BenchRow {
                    d,
                    n,
                    seed: 0,
                    method: m.name(),
                    value: (d as f64).powf(s),
                    wall_ms: 0.0,
                });
            }
            continue;
        }
        // Instances sequential (memory bound), methods sequential (fair timing).
        for k in 0..a.seeds {
            let seed = a.seed_base.wrapping_add(k);
            let x = gen_gaussian(n, d, seed)?;
            for &m in &methods {
                let t0 = Instant::now();
                let value = run_method(&x, a.q, m, seed, a.restarts)?;
                rows.push(BenchRow {
                    d,
                    n,
                    seed,
                    method: m.name(),
                    value,
                    wall_ms: t0.elapsed().as_secs_f64() * 1e3,
                });
            }
        }
    }

    if kept.len() < 3 {
        eprintln!(
            "resource budget kept only {} of {} dimensions; a slope fit needs at least 3",
            kept.len(),
            a.dims.len()
        );
        return Ok(5);
    }

    let mut slopes = Vec::new();
    for &m in &methods {
        let pts: Vec<(f64, f64)> = kept
            .iter()
            .map(|&d| {
                let mut vals: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.d == d && r.method == m.name())
                    .map(|r| r.value)
                    .collect();
                (d as f64, median(&mut vals))
            })
            .collect();
        let (slope, intercept, residual_l2) = fit_loglog(&pts)?;
        slopes.push(SlopeFit { method: m.name(), slope, intercept, residual_l2, points: pts.len() });
    }

    write_rows_csv(&a.out_csv, &rows)?;

    if a.json {
        let result =
            BenchResult { q: a.q, n_rule: a.n_rule.clone(), seeds: a.seeds, rows, slopes };
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        println!("{:<10} {:>12} {:>14} {:>7}", "method", "slope", "residual_l2", "points");
        for s in &slopes {
            println!(
                "{:<10} {:>12.6} {:>14.3e} {:>7}",
                s.method, s.slope, s.residual_l2, s.points
            );
        }
        println!("rows written to {}", a.out_csv.display());
    }
    Ok(0)
}

fn run_method(x: &DataMatrix, q: u32, m: BenchMethod, seed: u64, restarts: usize) -> Result<f64> {
    Ok(match m {
        BenchMethod::Proxy => {
            let cfg = CertifyConfig { seed, ..CertifyConfig::default() };
            proxy_certificate(x, q, &cfg)?.1.certified_upper
        }
        BenchMethod::Baseline => baseline_certificate(x, q)?.certified_upper,
        BenchMethod::Oracle => {
            let cfg = OracleConfig { restarts, seed, ..OracleConfig::default() };
            oracle_lower_bound(x, q, &cfg, &[])?.value
        }
    })
}

fn write_rows_csv(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut out = String::from("d,n,seed,method,value,wall_ms\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.d, r.n, r.seed, r.method, r.value, r.wall_ms
        ));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn median(vals: &mut [f64]) -> f64 {
    assert!(!vals.is_empty());
    vals.sort_by(|x, y| x.partial_cmp(y).expect("bench values are never NaN"));
    let k = vals.len();
    if k % 2 == 1 {
        vals[k / 2]
    } else {
        0.5 * (vals[k / 2 - 1] + vals[k / 2])
    }
}

/// Least-squares line of ln y on ln x: (slope, intercept, l2 residual).
fn fit_loglog(pts: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if pts.len() < 3 {
        bail!("slope fit needs at least 3 points, got {}", pts.len());
    }
    if pts.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0) || !y.is_finite()) {
        bail!("slope fit needs positive finite values");
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let n = pts.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        bail!("slope fit needs at least two distinct dimensions");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(u, v)| (u - mx) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_l2 = lx
        .iter()
        .zip(&ly)
        .map(|(u, v)| {
            let e = v - (intercept + slope * u);
            e * e
        })
        .sum::<f64>()
        .sqrt();
    Ok((slope, intercept, residual_l2))
}
