//! `m2q` command line: generate instances, certify operator norms, search for
//! witness directions, run the ascent oracle, fit scaling slopes, and profile
//! the decoy-spike construction against rival direction lists.
//!
//! Exit codes are part of the interface: 0 = success (or a NO-consistent
//! decision), 2 = usage/parse/IO error, 3 = YES-witnessed, 4 = inconclusive,
//! 5 = resource budget exceeded. The thread count is taken from the
//! `M2Q_THREADS` environment variable (default: available parallelism);
//! results are bitwise independent of it.

mod bench;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use m2q::certify::{
    baseline_certificate, decide, guth_certificate, proxy_certificate, CertificateReport,
    CertifyConfig, Decision, Method,
};
use m2q::gen::{gen_decoy_spike, generate, GenKind, GenParams, GeneratorSpec};
use m2q::matrix::{mean_abs_pow, normalize_rows, DataMatrix, UnitVector};
use m2q::oracle::{oracle_lower_bound, OracleConfig};
use m2q::spectral::top_singular_pair;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Default per-call cap on the work estimate n²·d².
const DEFAULT_BUDGET: f64 = 2e10;

#[derive(Parser)]
#[command(
    name = "m2q",
    version,
    about = "Certified upper bounds and witnessed lower bounds for 2->q operator norms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it with a sidecar spec JSON.
    Gen(GenArgs),
    /// Certify a stored matrix and optionally decide a threshold pair.
    Certify(CertifyArgs),
    /// Print the best proxy direction and its witnessed value B.
    Search(SearchArgs),
    /// Run the tensor-power ascent oracle for a validated lower bound.
    Oracle(OracleArgs),
    /// Sweep dimensions, fit log-log slopes per method, emit CSV + JSON.
    BenchScaling(bench::BenchArgs),
    /// Decoy-spike demo: moment profile of proxy vs row/singular lists.
    Limitation(LimitationArgs),
}

fn main() -> ExitCode {
    // Clap itself exits 2 on usage errors, keeping the code contract uniform.
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Search(a) => cmd_search(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::BenchScaling(a) => bench::cmd_bench(&a),
        Command::Limitation(a) => cmd_limitation(a),
    }
}

fn init_threads() -> Result<()> {
    let raw = match std::env::var("M2Q_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => bail!("M2Q_THREADS is not valid unicode: {e}"),
        Ok(s) => s,
    };
    let k: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("M2Q_THREADS must be a positive integer, got '{raw}'"))?;
    if k == 0 {
        bail!("M2Q_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .context("building the global thread pool")?;
    Ok(())
}

/// Prints the budget refusal and returns true when n²·d² exceeds the cap.
fn over_budget(x: &DataMatrix, max_budget: f64, what: &str) -> bool {
    let cost = (x.n() as f64).powi(2) * (x.d() as f64).powi(2);
    if cost > max_budget {
        eprintln!(
            "resource budget exceeded for {what}: n^2*d^2 = {cost:.3e} > {max_budget:.3e} \
             (raise --max-budget to override)"
        );
        true
    } else {
        false
    }
}

fn read_input(path: &Path) -> Result<DataMatrix> {
    m2q::io::read_matrix(path).with_context(|| format!("reading {}", path.display()))
}

// ---------------------------------------------------------------- gen

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Gaussian,
    DecoySpike,
    RankOne,
    Identity,
    PlantedSpike,
}

impl From<KindArg> for GenKind {
    fn from(k: KindArg) -> GenKind {
        match k {
            KindArg::Gaussian => GenKind::Gaussian,
            KindArg::DecoySpike => GenKind::DecoySpike,
            KindArg::RankOne => GenKind::RankOne,
            KindArg::Identity => GenKind::Identity,
            KindArg::PlantedSpike => GenKind::PlantedSpike,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Instance family.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Row count; derived for decoy-spike (C*d^3 rounded to a multiple of d)
    /// and identity (n = d).
    #[arg(long, default_value_t = 0)]
    n: usize,
    /// Column count.
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; a `.csv` extension writes text, anything else binary.
    #[arg(long)]
    out: PathBuf,
    /// Kind constant: decoy-spike size multiplier (default 50) or rank-one
    /// row magnitude (default 1).
    #[arg(long = "C", alias = "c", value_name = "C")]
    c: Option<f64>,
    /// planted-spike: fraction of rows carrying the spike (default 1/d).
    #[arg(long)]
    spike_fraction: Option<f64>,
    /// planted-spike: spike magnitude (default sqrt(d)).
    #[arg(long)]
    spike_mag: Option<f64>,
    /// Exponent the instance is calibrated for (metadata only).
    #[arg(long, default_value_t = 4)]
    q_hint: u32,
}

fn cmd_gen(a: GenArgs) -> Result<u8> {
    let mut spec = GeneratorSpec {
        kind: a.kind.into(),
        n: a.n,
        d: a.d,
        q_hint: a.q_hint,
        seed: a.seed,
        params: GenParams { c: a.c, spike_fraction: a.spike_fraction, spike_mag: a.spike_mag },
    };
    let x = generate(&spec)?;
    let csv = a.out.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if csv {
        m2q::io::write_csv(&a.out, &x)
    } else {
        m2q::io::write_binary(&a.out, &x)
    }
    .with_context(|| format!("writing {}", a.out.display()))?;

    // The sidecar records the derived n so it regenerates without guessing.
    spec.n = x.n();
    let mut sidecar = a.out.clone().into_os_string();
    sidecar.push(".spec.json");
    let sidecar = PathBuf::from(sidecar);
    std::fs::write(&sidecar, serde_json::to_string_pretty(&spec)?)
        .with_context(|| format!("writing {}", sidecar.display()))?;

    println!(
        "wrote {} (n = {}, d = {}, format = {}, checksum = {:016x})",
        a.out.display(),
        x.n(),
        x.d(),
        if csv { "csv" } else { "binary" },
        fnv1a64(&x)
    );
    println!("sidecar {}", sidecar.display());
    Ok(0)
}

/// FNV-1a over the shape and the little-endian entry bytes.
fn fnv1a64(x: &DataMatrix) -> u64 {
    const PRIME: u64 = 0x100000001b3;
    fn eat(h: &mut u64, bytes: &[u8]) {
        for &b in bytes {
            *h ^= u64::from(b);
            *h = h.wrapping_mul(PRIME);
        }
    }
    let mut h: u64 = 0xcbf29ce484222325;
    eat(&mut h, &(x.n() as u64).to_le_bytes());
    eat(&mut h, &(x.d() as u64).to_le_bytes());
    for v in x.data() {
        eat(&mut h, &v.to_bits().to_le_bytes());
    }
    h
}

// ---------------------------------------------------------------- certify

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Proxy,
    Baseline,
    Guth,
    All,
}

#[derive(Args)]
struct CertifyArgs {
    /// Matrix file, binary or CSV (sniffed).
    #[arg(long = "in")]
    input: PathBuf,
    /// Even exponent q >= 2.
    #[arg(long)]
    q: u32,
    #[arg(long, value_enum, default_value = "proxy")]
    method: MethodArg,
    /// YES threshold; enables the decision and the decision exit codes.
    #[arg(long)]
    alpha: Option<f64>,
    /// NO threshold (default alpha * factor, the tightest decidable promise).
    #[arg(long)]
    beta: Option<f64>,
    /// Print full report(s) as JSON instead of summary lines.
    #[arg(long)]
    json: bool,
    /// Seed for eigensolver starts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refuse (exit 5) when n^2*d^2 exceeds this work budget.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    max_budget: f64,
}

fn cmd_certify(a: CertifyArgs) -> Result<u8> {
    let x = read_input(&a.input)?;
    if over_budget(&x, a.max_budget, "certify") {
        return Ok(5);
    }
    let cfg = CertifyConfig { seed: a.seed, ..CertifyConfig::default() };
    let methods: Vec<MethodArg> = match a.method {
        MethodArg::All => vec![MethodArg::Proxy, MethodArg::Baseline, MethodArg::Guth],
        m => vec![m],
    };

    let mut reports: Vec<CertificateReport> = Vec::new();
    for m in methods {
        let mut rep = match m {
            MethodArg::Proxy => proxy_certificate(&x, a.q, &cfg)?.1,
            MethodArg::Baseline => baseline_certificate(&x, a.q)?,
            MethodArg::Guth => guth_certificate(&x, a.q, &cfg)?,
            MethodArg::All => unreachable!("expanded above"),
        };
        if let Some(alpha) = a.alpha {
            if rep.b.is_some() {
                let beta = a.beta.unwrap_or(alpha * rep.factor);
                rep.decision = Some(decide(&rep, alpha, beta)?);
                rep.alpha = Some(alpha);
            } else {
                eprintln!("note: baseline route has no witnessed lower bound; decision skipped");
            }
        }
        reports.push(rep);
    }

    if a.json {
        if reports.len() == 1 {
            println!("{}", serde_json::to_string_pretty(&reports[0])?);
        } else {
            println!("{}", serde_json::to_string_pretty(&reports)?);
        }
    } else {
        for rep in &reports {
            print_report_line(rep);
        }
    }

    // With --method all the proxy report comes first, so its decision keys
    // the exit code; baseline-only runs carry no decision and exit 0.
    let code = reports
        .iter()
        .find_map(|r| r.decision)
        .map_or(0, |d| match d {
            Decision::NoConsistent => 0,
            Decision::YesWitnessed => 3,
            Decision::Inconclusive => 4,
        });
    Ok(code)
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Proxy => "proxy",
        Method::Baseline => "baseline",
        Method::Guth => "guth",
    }
}

fn print_report_line(rep: &CertificateReport) {
    let b = rep.b.map_or_else(|| "-".to_string(), |b| format!("{b:.9}"));
    let mut line = format!(
        "method = {:<8}  n = {}  d = {}  q = {}  B = {b}  factor = {:.9}  certified_upper = {:.9}",
        method_name(rep.method),
        rep.n,
        rep.d,
        rep.q,
        rep.factor,
        rep.certified_upper
    );
    if let Some(d) = rep.decision {
        line.push_str(&format!("  decision = {d}"));
    }
    println!("{line}");
    if rep.decision == Some(Decision::YesWitnessed) {
        if let Some(dir) = &rep.best_direction {
            println!("witness [{}]: {:?}", dir.provenance, dir.coords);
        }
    }
}

// ---------------------------------------------------------------- search

#[derive(Args)]
struct SearchArgs {
    /// Matrix file, binary or CSV (sniffed).
    #[arg(long = "in")]
    input: PathBuf,
    /// Even exponent q >= 2.
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the full proxy report as JSON.
    #[arg(long)]
    json: bool,
    /// Refuse (exit 5) when n^2*d^2 exceeds this work budget.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    max_budget: f64,
}

fn cmd_search(a: SearchArgs) -> Result<u8> {
    let x = read_input(&a.input)?;
    if over_budget(&x, a.max_budget, "search") {
        return Ok(5);
    }
    let cfg = CertifyConfig { seed: a.seed, ..CertifyConfig::default() };
    let (_list, rep) = proxy_certificate(&x, a.q, &cfg)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rep)?);
        return Ok(0);
    }
    let b = rep.b.context("proxy report is missing its witnessed value")?;
    let dir = rep.best_direction.as_ref().context("proxy report is missing its direction")?;
    println!(
        "B = {b:.12}  (true norm within factor {:.9}: certified_upper = {:.12})",
        rep.factor, rep.certified_upper
    );
    println!("direction [{}]: {:?}", dir.provenance, dir.coords);
    Ok(0)
}

// ---------------------------------------------------------------- oracle

#[derive(Args)]
struct OracleArgs {
    /// Matrix file, binary or CSV (sniffed).
    #[arg(long = "in")]
    input: PathBuf,
    /// Even exponent q >= 2.
    #[arg(long)]
    q: u32,
    #[arg(long, default_value_t = m2q::oracle::ORACLE_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed the ascent with every proxy-list direction first.
    #[arg(long)]
    warm_from_proxy: bool,
    #[arg(long, default_value_t = m2q::oracle::ASCEND_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = m2q::oracle::ASCEND_TOL)]
    tol: f64,
    /// Refuse (exit 5) when --warm-from-proxy would exceed this budget.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    max_budget: f64,
}

fn cmd_oracle(a: OracleArgs) -> Result<u8> {
    let x = read_input(&a.input)?;
    let mut warm: Vec<UnitVector> = Vec::new();
    if a.warm_from_proxy {
        if over_budget(&x, a.max_budget, "oracle --warm-from-proxy") {
            return Ok(5);
        }
        let cfg = CertifyConfig { seed: a.seed, ..CertifyConfig::default() };
        let (list, _) = proxy_certificate(&x, a.q, &cfg)?;
        warm = list.vectors().cloned().collect();
    }
    let cfg = OracleConfig { restarts: a.restarts, seed: a.seed, max_iter: a.max_iter, tol: a.tol };
    let res = oracle_lower_bound(&x, a.q, &cfg, &warm)?;
    println!("{}", serde_json::to_string_pretty(&res)?);
    Ok(0)
}

// ---------------------------------------------------------------- limitation

#[derive(Args)]
struct LimitationArgs {
    /// Ambient dimension (>= 3).
    #[arg(long)]
    d: usize,
    /// Size multiplier: n = C*d^3 rounded to a multiple of d.
    #[arg(long = "C", alias = "c", value_name = "C", default_value_t = m2q::gen::DECOY_DEFAULT_C)]
    c: f64,
    /// Number of seeds (seed-base, seed-base+1, ...).
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    seed_base: u64,
    /// Print the full profile as JSON.
    #[arg(long)]
    json: bool,
}

/// Fixed caps for the "dimension-independent constant" checks.
const MOMENT_CAP: f64 = 10.0;
const DIST_CAP: f64 = 0.25;

#[derive(Debug, Serialize)]
struct LimitationRow {
    seed: u64,
    /// E_i <x_i, u>^4 for the top right singular vector u.
    m_u4: f64,
    /// max_j E_i <x_i, row_j>^4 over normalized rows.
    max_row_m4: f64,
    /// E_i <x_i, e1>^4 (the planted direction).
    m_e1_4: f64,
    /// min over signs of ||u -+ e2||_2.
    dist_u_e2: f64,
    /// Lower bound on the proxy B^4: best of basis + row directions, a
    /// sublist of the full proxy list.
    proxy_b4_lb: f64,
    /// Best fourth moment over the rows-plus-singular-vector list.
    guth_b4: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct LimitationSummary {
    d: usize,
    #[serde(rename = "C")]
    c: f64,
    n: usize,
    q: u32,
    moment_cap: f64,
    dist_cap: f64,
    planted_floor: f64,
    rows: Vec<LimitationRow>,
    passes: usize,
    majority_pass: bool,
}

fn cmd_limitation(a: LimitationArgs) -> Result<u8> {
    let mut rows: Vec<LimitationRow> = Vec::new();
    let mut n = 0usize;
    for k in 0..a.seeds {
        let seed = a.seed_base.wrapping_add(k);
        let x = gen_decoy_spike(a.d, a.c, seed)?;
        n = x.n();
        rows.push(limitation_row(&x, seed)?);
    }
    let passes = rows.iter().filter(|r| r.pass).count();
    let summary = LimitationSummary {
        d: a.d,
        c: a.c,
        n,
        q: 4,
        moment_cap: MOMENT_CAP,
        dist_cap: DIST_CAP,
        planted_floor: a.d as f64,
        rows,
        passes,
        majority_pass: 2 * passes > a.seeds as usize,
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
        return Ok(0);
    }
    println!(
        "decoy spike d = {}, C = {}, n = {}, q = 4; caps: moments <= {}, dist(u, -+e2) <= {}, planted >= {}",
        summary.d, summary.c, summary.n, MOMENT_CAP, DIST_CAP, summary.planted_floor
    );
    for r in &summary.rows {
        println!(
            "seed {}: E<x,u>^4 = {:.3}  max_j E<x,row_j>^4 = {:.3}  E<x,e1>^4 = {:.6}  \
             dist(u, -+e2) = {:.4}  proxy B^4 >= {:.6}  guth B^4 = {:.3}  [{}]",
            r.seed,
            r.m_u4,
            r.max_row_m4,
            r.m_e1_4,
            r.dist_u_e2,
            r.proxy_b4_lb,
            r.guth_b4,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "majority verdict: {} ({}/{} seeds pass)",
        if summary.majority_pass { "pass" } else { "FAIL" },
        passes,
        a.seeds
    );
    Ok(0)
}

fn moment4(x: &DataMatrix, v: &[f64]) -> f64 {
    mean_abs_pow(&x.apply(v), 4)
}

fn limitation_row(x: &DataMatrix, seed: u64) -> Result<LimitationRow> {
    let d = x.d();
    let triple = top_singular_pair(x, 1e-10, 10_000, seed)?;
    let m_u4 = moment4(x, triple.right.coords());

    let (normalized, _zero) = normalize_rows(x);
    let row_moments: Vec<f64> =
        normalized.par_iter().map(|(_, v)| moment4(x, v.coords())).collect();
    // Sequential strict-max so ties and thread counts cannot reorder anything.
    let mut max_row_m4 = 0.0f64;
    for &m in &row_moments {
        if m > max_row_m4 {
            max_row_m4 = m;
        }
    }

    let basis_moments: Vec<f64> =
        (0..d).map(|r| moment4(x, UnitVector::basis(d, r).coords())).collect();
    let m_e1_4 = basis_moments[0];

    let mut proxy_b4_lb = max_row_m4;
    for &m in &basis_moments {
        if m > proxy_b4_lb {
            proxy_b4_lb = m;
        }
    }
    let guth_b4 = if m_u4 > max_row_m4 { m_u4 } else { max_row_m4 };

    let u = triple.right.coords();
    let mut dm = 0.0f64;
    let mut dp = 0.0f64;
    for (i, &c) in u.iter().enumerate() {
        let t = if i == 1 { 1.0 } else { 0.0 };
        dm += (c - t) * (c - t);
        dp += (c + t) * (c + t);
    }
    let dist_u_e2 = dm.min(dp).sqrt();

    let df = d as f64;
    let pass = m_u4 <= MOMENT_CAP
        && max_row_m4 <= MOMENT_CAP
        && m_e1_4 >= df
        && dist_u_e2 <= DIST_CAP
        && proxy_b4_lb >= df
        && guth_b4 <= MOMENT_CAP;

    Ok(LimitationRow { seed, m_u4, max_row_m4, m_e1_4, dist_u_e2, proxy_b4_lb, guth_b4, pass })
}
