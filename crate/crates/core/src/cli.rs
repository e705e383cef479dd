//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{check_claims, convergence_raster, gen, lower_bound_run, Region, Scheme};
use crate::bench;
use crate::deflate::{deflate, deflate_checked, DeflateParams};
use crate::eigh::{eigh, eigh_boosted, residual_check, EighResult, RecursionStats};
use crate::error::{Error, Result};
use crate::fparith::{Fp, FpMatrix, FpScalar, PrecisionConfig};
use crate::linalg::eigh_f64;
use crate::primitives::io::{read_matrix, write_matrix};
use crate::primitives::{ErrorModel, RngState};
use crate::report::{precision_report, precision_sweep};
use crate::sign::{estimate_b, sign_matrix, SignParams};

#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "specbisect", version, about = "Hermitian eigensolver by spectral bisection")]
pub struct Cli {
    /// Seed for all random draws.
    #[arg(long, global = true, env = "SPECBISECT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Mantissa width t (u = 2^-t).
    #[arg(long, global = true, default_value_t = 53)]
    pub bits: u32,
    /// Write a JSON record of the run configuration and results here.
    #[arg(long, global = true)]
    pub stats: Option<PathBuf>,
    /// key=value file supplying flags not given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Input {
    /// Matrix file (`rows cols hermitian` header, then `i j re im` lines).
    #[arg(long, conflicts_with = "gue")]
    pub input: Option<PathBuf>,
    /// Use a seeded GUE matrix of this order instead of a file.
    #[arg(long)]
    pub gue: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Eigendecomposition A = U D U*.
    Eigh {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 0.25)]
        theta: f64,
        /// Retry with theta = 1/2 until the failure probability is below this.
        #[arg(long)]
        boost: Option<f64>,
        #[arg(long)]
        out_u: Option<PathBuf>,
        #[arg(long)]
        out_d: Option<PathBuf>,
    },
    /// Newton-Schulz matrix sign.
    Sign {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        /// Upper bound on ||A|| (default: Frobenius norm).
        #[arg(long)]
        b: Option<f64>,
        /// Upper bound on ||A^-1|| (default: from a binary64 eigensolve).
        #[arg(long)]
        a_inv_norm: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orthonormal basis of the range of a rank-r projector.
    Deflate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        rank: usize,
        /// Enables the precision gate with this beta.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        rho: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iteration counts of the scalar sign iterations over a complex grid.
    Raster {
        #[arg(long, default_value = "ns")]
        scheme: String,
        #[arg(long, default_value_t = -2.5, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, default_value_t = 2.5, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long, default_value_t = -2.5, allow_hyphen_values = true)]
        ymin: f64,
        #[arg(long, default_value_t = 2.5, allow_hyphen_values = true)]
        ymax: f64,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[arg(long, default_value_t = 1e-15)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: u32,
        /// `.csv` or `.pgm`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hadamard lower-bound construction.
    LowerBound {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 1.0 / 1024.0)]
        u: f64,
    },
    /// Sufficient and necessary mantissa widths.
    PrecisionReport {
        #[arg(long, default_value_t = 1e-15)]
        eps: f64,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long, default_value_t = 4000)]
        n: usize,
        /// Also print the table over the standard (n, eps) grid.
        #[arg(long)]
        sweep: bool,
    },
    /// Flop counts and wall time of eigh across sizes.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [8usize, 16, 32])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [1u64])]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub mantissa_bits: u32,
    pub stats: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub command: Command,
}

impl From<&Cli> for RunConfig {
    fn from(c: &Cli) -> Self {
        RunConfig {
            seed: c.seed,
            mantissa_bits: c.bits,
            stats: c.stats.clone(),
            config: c.config.clone(),
            command: c.command.clone(),
        }
    }
}

/// Parse a key=value file. Blank lines and `#` comments are skipped; keys
/// may be written with `_` or `-`; surrounding quotes on values are dropped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('[') {
            continue;
        }
        let (key, val) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", k + 1)))?;
        let key = key.trim().replace('_', "-");
        let val = val.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(Error::Parse(format!("config line {}: empty key", k + 1)));
        }
        out.push((key, val));
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn given(args: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

/// Append flags from the `--config` file that the command line does not set.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let mut out = args.clone();
    for (k, v) in parse_config(&text)? {
        if k == "config" || given(&args, &k) {
            continue;
        }
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => out.push(format!("--{k}={v}")),
        }
    }
    Ok(out)
}

fn load(input: &Input, seed: u64, cfg: &PrecisionConfig) -> Result<FpMatrix> {
    match (&input.input, input.gue) {
        (Some(p), _) => Ok(read_matrix(p)?.0),
        (None, Some(n)) => gen::gue(n, seed, cfg),
        (None, None) => Err(Error::Domain("give --input FILE or --gue N".into())),
    }
}

fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn column(d: &[Fp]) -> FpMatrix {
    let mut m = FpMatrix::zeros(d.len(), 1);
    for (i, x) in d.iter().enumerate() {
        m.set(i, 0, FpScalar::real(*x));
    }
    m
}

fn eigh_summary(res: &EighResult, stats: &RecursionStats) -> serde_json::Value {
    serde_json::json!({
        "eigenvalues": res.d_f64(),
        "residual_bound_target": res.residual_bound_target,
        "sv_window": res.sv_window,
        "outside_theorem_regime": res.outside_theorem_regime,
        "stats": stats,
    })
}

/// Run a parsed command, writing human output to `out`; returns the JSON
/// result that goes into the stats file.
pub fn execute(cli: &Cli, out: &mut dyn std::io::Write) -> Result<serde_json::Value> {
    let cfg = PrecisionConfig::new(cli.bits)?;
    let rng = RngState::new(cli.seed);
    let em = ErrorModel::default();
    let io = |e: std::io::Error| Error::Io(e.to_string());
    let value = match &cli.command {
        Command::Eigh { input, eps, theta, boost, out_u, out_d } => {
            let a = load(input, cli.seed, &cfg)?;
            let (res, stats, attempts) = match boost {
                Some(tp) => {
                    let b = eigh_boosted(&a, *eps, *tp, rng, &cfg)?;
                    (b.result, b.stats, b.attempts)
                }
                None => {
                    let (r, s) = eigh(&a, *eps, *theta, rng, &cfg)?;
                    (r, s, 1)
                }
            };
            if let Some(p) = out_u {
                write_matrix(p, &res.u, false)?;
            }
            if let Some(p) = out_d {
                write_matrix(p, &column(&res.d), false)?;
            }
            let est = residual_check(&a, &res, rng.split(u64::MAX), 32);
            writeln!(out, "n = {}, nodes = {}, depth = {}, residual estimate = {est:e}", a.rows(), stats.node_count, stats.max_depth).map_err(io)?;
            for x in res.d_f64() {
                writeln!(out, "{x:.17e}").map_err(io)?;
            }
            let mut v = eigh_summary(&res, &stats);
            v["attempts"] = attempts.into();
            v["residual_estimate"] = est.into();
            v
        }
        Command::Sign { input, eps, b, a_inv_norm, out: path } => {
            let a = load(input, cli.seed, &cfg)?;
            let b = b.unwrap_or_else(|| estimate_b(&a));
            let inv = match a_inv_norm {
                Some(x) => *x,
                None => {
                    let (vals, _) = eigh_f64(a.rows(), &a.to_f64());
                    let m = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
                    if m == 0.0 {
                        return Err(Error::Domain("matrix is singular".into()));
                    }
                    1.0 / m
                }
            };
            let params = SignParams::new(*eps, b, inv, a.rows())?;
            let (s, trace) = sign_matrix(&a, &params, &cfg)?;
            if let Some(p) = path {
                write_matrix(p, &s, true)?;
            }
            writeln!(out, "iterations = {}, N_SIGN = {:.3}", trace.iterations, params.n_sign()).map_err(io)?;
            serde_json::json!({ "params": params, "trace": trace })
        }
        Command::Deflate { input, rank, beta, rho, out: path } => {
            let p = load(input, cli.seed, &cfg)?;
            let q = match beta {
                Some(beta) => {
                    let params = DeflateParams::convenient(p.rows(), *rank, *beta, *rho, 1.0)?;
                    deflate_checked(&p, &params, rng, &cfg)?.0
                }
                None => deflate(&p, *rank, rng, &cfg)?.0,
            };
            if let Some(path) = path {
                write_matrix(path, &q, false)?;
            }
            writeln!(out, "basis: {} x {}", q.rows(), q.cols()).map_err(io)?;
            serde_json::json!({ "rows": q.rows(), "cols": q.cols() })
        }
        Command::Raster { scheme, xmin, xmax, ymin, ymax, grid, tol, max_iter, out: path } => {
            let scheme: Scheme = scheme.parse()?;
            let region = Region { xmin: *xmin, xmax: *xmax, ymin: *ymin, ymax: *ymax };
            let r = convergence_raster(scheme, region, *grid, *tol, *max_iter)?;
            if let Some(p) = path {
                let bytes = if p.extension().is_some_and(|e| e == "pgm") { r.to_pgm() } else { r.to_csv().into_bytes() };
                std::fs::write(p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            }
            let conv = r.counts.iter().filter(|&&c| c <= *max_iter).count();
            writeln!(out, "{conv} of {} points converged", r.counts.len()).map_err(io)?;
            let mut v = serde_json::json!({ "converged": conv, "points": r.counts.len() });
            if xmin == &-*xmax && ymin == &-*ymax && xmax == ymax {
                let other = match scheme {
                    Scheme::Newton => Scheme::NewtonSchulz,
                    Scheme::NewtonSchulz => Scheme::Newton,
                };
                let o = convergence_raster(other, region, *grid, *tol, *max_iter)?;
                let claims = match scheme {
                    Scheme::NewtonSchulz => check_claims(&r, &o),
                    Scheme::Newton => check_claims(&o, &r),
                };
                writeln!(out, "convergence-region claims hold: {}", claims.holds()).map_err(io)?;
                v["claims"] = serde_json::to_value(&claims).map_err(|e| Error::Io(e.to_string()))?;
            }
            v
        }
        Command::LowerBound { n, eps, u } => {
            let rep = lower_bound_run(*n, *u, *eps, cli.seed, &cfg)?;
            writeln!(
                out,
                "residual vs A = {:e}, vs A' = {:e}, bound un/4 = {:e}, fl-identity = {}, bound met = {}",
                rep.residual_a, rep.residual_perturbed, rep.bound, rep.fl_identity, rep.bound_met
            )
            .map_err(io)?;
            serde_json::to_value(&rep).map_err(|e| Error::Io(e.to_string()))?
        }
        Command::PrecisionReport { eps, theta, n, sweep } => {
            let rep = precision_report(*eps, *theta, *n, &em)?;
            write!(out, "{}", rep.to_table()).map_err(io)?;
            let mut v = serde_json::to_value(&rep).map_err(|e| Error::Io(e.to_string()))?;
            if *sweep {
                let rows = precision_sweep(*theta, &em);
                writeln!(out, "n,eps,sufficient,necessary").map_err(io)?;
                for (n, e, s, m) in &rows {
                    writeln!(out, "{n},{e:e},{s},{m}").map_err(io)?;
                }
                v["sweep"] = serde_json::to_value(&rows).map_err(|e| Error::Io(e.to_string()))?;
            }
            writeln!(out, "{}", serde_json::to_string(&v).map_err(|e| Error::Io(e.to_string()))?).map_err(io)?;
            v
        }
        Command::Bench { sizes, eps, seeds, out: path } => {
            let rows = bench::bench(sizes, *eps, seeds, &cfg)?;
            let csv = bench::to_csv(&rows);
            match path {
                Some(p) => std::fs::write(p, &csv).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
                None => write!(out, "{csv}").map_err(io)?,
            }
            serde_json::json!({ "rows": rows, "flop_slope": bench::flop_slope(&rows) })
        }
    };
    if let Some(p) = &cli.stats {
        let record = serde_json::json!({ "run_config": RunConfig::from(cli), "result": value });
        write_json(p, &record)?;
    }
    Ok(value)
}

/// Full entry point: config expansion, parsing, execution. Returns the
/// process exit code.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let args: Vec<String> = args.into_iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let args = match expand_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
