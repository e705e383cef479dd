//! Flop and wall-time measurements of `eigh` across sizes.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::analysis::gen;
use crate::eigh::eigh;
use crate::error::Result;
use crate::fparith::{flops, PrecisionConfig};
use crate::primitives::RngState;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub seed: u64,
    pub eps: f64,
    pub real_flops: u64,
    pub complex_ops: u64,
    pub wall_ms: f64,
    pub nodes: usize,
}

pub const CSV_HEADER: &str = "n,seed,eps,real_flops,complex_ops,wall_ms,nodes";

/// One `eigh` call per `(size, seed)` on a GUE matrix, `theta = 1/2`.
pub fn bench(sizes: &[usize], eps: f64, seeds: &[u64], cfg: &PrecisionConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        for &seed in seeds {
            let a = gen::gue(n, seed, cfg)?;
            let start = Instant::now();
            let (out, f) = flops::measure(|| eigh(&a, eps, 0.5, RngState::new(seed).split(1), cfg));
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let (_, stats) = out?;
            rows.push(BenchRow {
                n,
                seed,
                eps,
                real_flops: f.real,
                complex_ops: f.complex,
                wall_ms,
                nodes: stats.node_count,
            });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:e},{},{},{:.3},{}",
            r.n, r.seed, r.eps, r.real_flops, r.complex_ops, r.wall_ms, r.nodes
        );
    }
    s
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Mean real flops per size, then the log-log slope.
pub fn flop_slope(rows: &[BenchRow]) -> Option<f64> {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let pts: Vec<(f64, f64)> = sizes
        .iter()
        .map(|&n| {
            let v: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.real_flops as f64).collect();
            (n as f64, v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    loglog_slope(&pts)
}
