//! The scalar Newton-Schulz map `g(x) = (3x - x^3)/2`, its potential
//! `m(x) = |1 - x^2|` and checkers for the three scalar convergence lemmas
//! (monotone convergence, quadratic convergence, overall convergence under
//! bounded adversarial noise).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hp::Big;
use crate::linalg::Real;
use crate::primitives::{ErrorModel, RngState};

pub fn g_scalar(x: f64) -> f64 {
    (3.0 * x - x * x * x) / 2.0
}

pub fn potential_m(x: f64) -> f64 {
    (1.0 - x * x).abs()
}

/// Iteration count after which the noisy scalar iteration started at `x0`
/// is within `eps` of the fixed points:
/// `2.5 + 2 lg(1 / min(|x0|, 0.5)) + lg lg(1/eps)`.
pub fn n_scalar(x0: f64, eps: f64) -> Result<f64> {
    if x0 == 0.0 || !x0.is_finite() {
        return Err(Error::Domain("n_scalar needs x0 != 0".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("n_scalar needs eps in (0, 1), got {eps}")));
    }
    let m = x0.abs().min(0.5);
    Ok(2.5 + 2.0 * (1.0 / m).log2() + (1.0 / eps).log2().log2())
}

/// One-step error constant `mu_g(n, a) = (7 + (6 + mu_MM(n)) a^2) a / 2`.
pub fn mu_g(n: usize, a: f64, em: &ErrorModel) -> f64 {
    0.5 * (7.0 + (6.0 + em.mu_mm(n)) * a * a) * a
}

/// Outcome of a predicate sweep.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LemmaReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checked > 0 && self.violations.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.violations.len() < 50 {
            self.violations.push(what());
        }
    }

    fn merge(&mut self, o: LemmaReport) {
        self.checked += o.checked;
        self.violations.extend(o.violations);
    }
}

fn big(x: f64) -> Big {
    Big::from_f64(x)
}

fn g_big(x: &Big) -> Big {
    let x3 = &(x * x) * x;
    let three = big(3.0);
    let t = &(&three * x) - &x3;
    &t * &big(0.5)
}

fn m_big(x: &Big) -> Big {
    (&big(1.0) - &(x * x)).abs()
}

/// Grid points `step, 2 step, ...` strictly inside `(lo, hi)`, plus points
/// just inside both ends.
fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    let first = (lo / step).floor() as i64 + 1;
    let mut k = first;
    loop {
        let x = k as f64 * step;
        if x >= hi {
            break;
        }
        if x > lo {
            pts.push(x);
        }
        k += 1;
    }
    let nudge = 2f64.powi(-30);
    pts.push(lo + (hi - lo).min(lo.abs().max(1e-300)) * nudge);
    pts.push(hi - (hi - lo) * nudge);
    pts
}

/// Monotone convergence: for `u <= 3/16`, `x` in `±(u, sqrt3 - (sqrt3 - 1)u)`
/// and `|xi| <= u`, `g(x) + xi` has the sign of `x`; for
/// `|x|` in `[(8/3)u, 1 - (8/3)u]`, `|x| <= |g(x) + xi| <= 1 + u`.
pub fn check_monotone(u: f64, step: f64) -> Result<LemmaReport> {
    if !(u > 0.0 && u <= 3.0 / 16.0) {
        return Err(Error::Domain("monotone lemma needs u in (0, 3/16]".into()));
    }
    let s3 = 3f64.sqrt();
    let hi = s3 - (s3 - 1.0) * u;
    let (a, b) = (8.0 / 3.0 * u, 1.0 - 8.0 / 3.0 * u);
    let one_u = &big(1.0) + &big(u);
    let mut rep = LemmaReport::default();
    let xis = [-u, 0.0, u];
    let mut pts = grid(u, hi, step);
    pts.extend([a, b]);
    for &x in &pts {
        for sx in [x, -x] {
            let bx = big(sx);
            let gx = g_big(&bx);
            for &xi in &xis {
                let y = &gx + &big(xi);
                if sx.abs() > u && sx.abs() < hi {
                    let same = if sx > 0.0 { y > Big::zero() } else { y < Big::zero() };
                    rep.record(same, || format!("sign flips at x={sx:e}, xi={xi:e}"));
                }
                if sx.abs() >= a && sx.abs() <= b {
                    let ay = y.abs();
                    let ok = bx.abs() <= ay && ay <= one_u;
                    rep.record(ok, || format!("|x| <= |g+xi| <= 1+u fails at x={sx:e}, xi={xi:e}"));
                }
            }
        }
    }
    Ok(rep)
}

/// Quadratic convergence: `20|xi| <= |x| <= 1 - sqrt(10|xi|)` implies
/// `m(g(x) + xi) <= m(x)^2`; `|x| <= sqrt2, |xi| <= 1` implies
/// `m(g(x) + xi) <= m(x)^2 + 4|xi|`. Noise values tried: `{-u, 0, u}` and the
/// largest admissible `|xi|` at each `x` for the first clause, and a spread
/// over `[-1, 1]` for the second.
pub fn check_quadratic(u: f64, step: f64) -> Result<LemmaReport> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain("quadratic lemma needs u in (0, 1)".into()));
    }
    let mut rep = LemmaReport::default();
    let s2 = 2f64.sqrt();
    let pts = grid(0.0, s2, step);
    let shrink = 1.0 - 2f64.powi(-20);
    for &x in &pts {
        for sx in [x, -x] {
            let bx = big(sx);
            let gx = g_big(&bx);
            let mx = m_big(&bx);
            let m2 = &mx * &mx;
            let xmax = (x / 20.0).min((1.0 - x).powi(2) / 10.0) * shrink;
            let mut first = vec![-u, 0.0, u];
            if x <= 1.0 {
                first.extend([xmax, -xmax]);
            }
            for xi in first {
                let admissible = 20.0 * xi.abs() <= x && x <= 1.0 - (10.0 * xi.abs()).sqrt();
                if !admissible {
                    continue;
                }
                let my = m_big(&(&gx + &big(xi)));
                rep.record(my <= m2, || format!("m(g+xi) > m^2 at x={sx:e}, xi={xi:e}"));
            }
            for xi in [-1.0, -0.5, -0.1, -u, 0.0, u, 0.1, 0.5, 1.0] {
                let my = m_big(&(&gx + &big(xi)));
                let rhs = &m2 + &big(4.0 * xi.abs());
                rep.record(my <= rhs, || format!("m(g+xi) > m^2 + 4|xi| at x={sx:e}, xi={xi:e}"));
            }
        }
    }
    Ok(rep)
}

/// Overall convergence: from every grid `x0` in `±[20u, 1.5]` the noisy
/// iteration `x <- g(x) + xi`, `|xi| <= u`, satisfies `m(x_k) <= eps` for
/// `k` from `ceil(n_scalar(x0, eps))` through four further steps. Noise
/// comes from three greedy adversaries (maximize `m`, push towards zero,
/// push away from zero) and `random_patterns` seeded random sign sequences.
///
/// Trajectories are evaluated in binary64; its rounding error is below
/// `1e-15` per step, far under `u >= 2^-30`.
pub fn check_overall(u: f64, eps: f64, step: f64, random_patterns: usize, seed: u64) -> Result<LemmaReport> {
    if !(10.0 * u <= eps && eps <= 3.0 / 80.0) {
        return Err(Error::Domain("overall lemma needs 10u <= eps <= 3/80".into()));
    }
    let mut pts = grid(20.0 * u, 1.5, step);
    pts.push(20.0 * u);
    pts.push(1.5);
    // log-spaced points near the small end, where the grid is coarse
    let mut x = 20.0 * u;
    while x < 1.5 {
        pts.push(x);
        x *= 2f64.powf(0.125);
    }
    let mut rng = RngState::new(seed);
    let mut rep = LemmaReport::default();
    for &x in &pts {
        for x0 in [x, -x] {
            let n = n_scalar(x0, eps)?.ceil() as usize;
            let mut advs: Vec<Box<dyn FnMut(f64) -> f64>> = vec![
                Box::new(|y: f64| {
                    let g = g_scalar(y);
                    [-u, 0.0, u]
                        .into_iter()
                        .max_by(|a, b| potential_m(g + a).total_cmp(&potential_m(g + b)))
                        .unwrap()
                }),
                Box::new(|y: f64| -u * y.signum()),
                Box::new(|y: f64| u * y.signum()),
            ];
            for _ in 0..random_patterns {
                let mut bits = rng.next_u128();
                let mut used = 0;
                let mut r = rng.split(bits as u64);
                advs.push(Box::new(move |_| {
                    if used == 128 {
                        bits = r.next_u128();
                        used = 0;
                    }
                    used += 1;
                    let b = bits & 1;
                    bits >>= 1;
                    if b == 1 {
                        u
                    } else {
                        -u
                    }
                }));
            }
            for (ai, adv) in advs.iter_mut().enumerate() {
                let mut y = x0;
                for k in 1..=n + 4 {
                    y = g_scalar(y) + adv(y);
                    if k >= n {
                        let m = potential_m(y);
                        rep.record(m <= eps, || {
                            format!("x0={x0:e}, adversary {ai}: m(x_{k})={m:e} > eps={eps:e}")
                        });
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// All three sweeps for one `(u, eps)` pair.
pub fn check_all(u: f64, eps: f64, step: f64) -> Result<LemmaReport> {
    let mut rep = check_monotone(u, step)?;
    rep.merge(check_quadratic(u, step)?);
    rep.merge(check_overall(u, eps, step, 2, 0x5eed)?);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_and_m_values() {
        assert_eq!(g_scalar(0.0), 0.0);
        assert_eq!(g_scalar(1.0), 1.0);
        assert_eq!(g_scalar(-1.0), -1.0);
        assert_eq!(g_scalar(0.5), 0.6875);
        assert!(g_scalar(3f64.sqrt()).abs() < 1e-15);
        assert_eq!(potential_m(1.0), 0.0);
        assert_eq!(potential_m(0.0), 1.0);
        assert_eq!(potential_m(0.6875), 0.52734375);
    }

    #[test]
    fn n_scalar_values() {
        assert_eq!(n_scalar(0.5, 2f64.powi(-16)).unwrap(), 8.5);
        assert_eq!(n_scalar(1.0, 2f64.powi(-16)).unwrap(), 8.5);
        assert_eq!(n_scalar(-0.25, 2f64.powi(-16)).unwrap(), 10.5);
        assert!(matches!(n_scalar(0.0, 0.01), Err(Error::Domain(_))));
    }

    #[test]
    fn lemma_sweeps_on_coarse_grid() {
        let u = 2f64.powi(-10);
        let rep = check_all(u, 10.0 * u, 1e-2).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert!(rep.checked > 1000);
    }

    #[test]
    fn sweep_preconditions() {
        let rep = check_monotone(3.0 / 16.0, 1e-2).unwrap();
        assert!(rep.passed());
        let rep = check_overall(0.003, 0.03, 1e-2, 0, 1).unwrap();
        assert!(rep.passed());
        assert!(check_overall(0.01, 0.05, 1e-2, 0, 1).is_err());
        assert!(check_monotone(0.2, 1e-2).is_err());
    }
}
