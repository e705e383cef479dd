//! Newton-Schulz matrix sign.
//!
//! `A_0 = fl(A/b)`, `A_{k+1} = g(A_k)` with `g(A) = MM(A, 3I - MM(A, A))/2`,
//! stopping once `||I - MM(A_k, A_k)||_max <= eps/(4n)`. The square
//! `MM(A_k, A_k)` computed for the stopping test is reused by the next step.

pub mod scalar;

use serde::{Deserialize, Serialize};

pub use scalar::{g_scalar, mu_g, n_scalar, potential_m};

use crate::error::{Error, Result};
use crate::fparith::{Arith, Cx, Fp, FpMatrix, Mat, PrecisionConfig};
use crate::linalg::eigh_f64;
use crate::primitives::{frobenius, mm_herm_k, ErrorModel};
use crate::with_arith;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignParams {
    pub epsilon: f64,
    /// Upper bound on `||A||`.
    pub b: f64,
    /// `||A^-1||` or an upper bound on it.
    pub a_inv_norm: f64,
    pub n: usize,
    /// Record the spectral norm of every iterate in the trace.
    #[serde(default)]
    pub track_norms: bool,
}

impl SignParams {
    pub fn new(epsilon: f64, b: f64, a_inv_norm: f64, n: usize) -> Result<Self> {
        let p = SignParams {
            epsilon,
            b,
            a_inv_norm,
            n,
            track_norms: false,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Domain(format!("sign epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::Domain(format!("sign bound b must be positive, got {}", self.b)));
        }
        if !(self.a_inv_norm * self.b >= 1.0) || !self.a_inv_norm.is_finite() {
            return Err(Error::Precondition(format!(
                "need ||A^-1|| * b >= 1, got {} * {}",
                self.a_inv_norm, self.b
            )));
        }
        if self.n == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        Ok(())
    }

    /// Iteration bound `N_SCALAR(1/(||A^-1|| b), eps/(8n))`.
    pub fn n_sign(&self) -> f64 {
        let x0 = 1.0 / (self.a_inv_norm * self.b);
        let es = (self.epsilon / (8.0 * self.n as f64)).min(3.0 / 80.0);
        n_scalar(x0, es).expect("validated parameters")
    }

    /// Iteration cap before the run is declared non-convergent.
    pub fn iteration_cap(&self) -> usize {
        4 * self.n_sign().ceil() as usize
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SignTrace {
    /// `||A_k||` for `k = 0..=iterations`; empty unless norms are tracked.
    pub iterates_norm: Vec<f64>,
    /// `||I - MM(A_k, A_k)||_max` for `k = 0..=iterations`.
    pub stop_metric: Vec<f64>,
    pub iterations: usize,
    /// The stopping threshold `eps/(4n)`.
    pub threshold: f64,
    /// The metric stopped improving at the rounding floor before reaching
    /// the threshold; the best iterate was returned.
    pub stagnated: bool,
}

/// `||A||_F`, an upper bound on the spectral norm.
pub fn estimate_b(a: &FpMatrix) -> f64 {
    frobenius(a)
}

/// Largest unit roundoff for which the sign guarantee holds:
/// `eps / (||A^-1|| b * 4 max(N n mu_g(n, 1.1), n^2))`.
pub fn sign_precision(eps: f64, b: f64, a_inv_norm: f64, n: usize, em: &ErrorModel) -> Result<f64> {
    let p = SignParams::new(eps, b, a_inv_norm, n)?;
    let nn = n as f64;
    let big_n = p.n_sign();
    let den = 4.0 * (big_n * nn * mu_g(n, 1.1, em)).max(nn * nn);
    Ok(eps / (a_inv_norm * b * den))
}

fn check_gate(n: usize, cfg: &PrecisionConfig) -> Result<()> {
    let u = cfg.unit_roundoff();
    let lim = (1.0 / 3.0f64).min(1.0 / ErrorModel::default().mu_mm(n));
    if u > lim {
        return Err(Error::Precondition(format!(
            "unit roundoff {u:e} exceeds {lim:e} required by the matrix sign step at n = {n}"
        )));
    }
    Ok(())
}

/// `3I - P` touching only the diagonal.
fn three_minus<A: Arith>(ar: &A, p: &Mat<A::R>) -> Mat<A::R> {
    let n = p.rows;
    let three = ar.fl64(3.0);
    let mut t = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j {
                ar.count(1, 0);
                Cx::new(ar.sub(three, p.at(i, i).re), ar.zero())
            } else {
                ar.cneg(p.at(i, j))
            };
            t.set(i, j, v);
        }
    }
    t
}

/// One Newton-Schulz step given the square `p = MM(a, a)`.
fn step_k<A: Arith>(ar: &A, a: &Mat<A::R>, p: &Mat<A::R>) -> Mat<A::R> {
    let t = three_minus(ar, p);
    let mut y = mm_herm_k(ar, a, &t);
    for z in y.data.iter_mut() {
        *z = ar.chalf(*z);
    }
    ar.count(0, (a.rows * a.rows) as u64);
    y
}

pub(crate) fn g_matrix_k<A: Arith>(ar: &A, a: &Mat<A::R>) -> Mat<A::R> {
    let p = mm_herm_k(ar, a, a);
    step_k(ar, a, &p)
}

/// `||I - P||_max` with the diagonal differences rounded at working precision.
fn stop_metric<A: Arith>(ar: &A, p: &Mat<A::R>) -> f64 {
    let n = p.rows;
    let mut m = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let z = p.at(i, j);
            let v = if i == j {
                ar.approx(ar.sub(ar.one(), z.re)).abs().hypot(ar.approx(z.im))
            } else {
                ar.approx(z.re).hypot(ar.approx(z.im))
            };
            m = m.max(v);
        }
    }
    m
}

fn spectral_of<A: Arith>(ar: &A, a: &Mat<A::R>) -> f64 {
    let (vals, _) = eigh_f64(a.rows, &ar.approx_mat(a));
    vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn require_hermitian(a: &FpMatrix) -> Result<()> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::Dimension(format!("expected a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if !a.is_hermitian() {
        return Err(Error::Domain("matrix is not exactly Hermitian".into()));
    }
    Ok(())
}

/// `g(A) = MM(A, 3I - MM(A, A)) / 2`, exactly Hermitian, with the final
/// halving exact.
pub fn g_matrix(a: &FpMatrix, cfg: &PrecisionConfig) -> Result<FpMatrix> {
    require_hermitian(a)?;
    check_gate(a.rows(), cfg)?;
    let a = a.round_to(cfg)?;
    with_arith!(cfg, |ar| {
        let g = g_matrix_k(&ar, &ar.import_mat(&a));
        ar.check().map(|_| ar.export_mat(&g))
    })
}

/// Round `x > 0` to working precision, upwards.
fn round_up(x: f64, cfg: &PrecisionConfig) -> Result<Fp> {
    let exact = Fp::from_f64_exact(x);
    let r = exact.round_to(cfg)?;
    if r.cmp_value(&exact).is_lt() {
        let ulp = Fp::from_int_scaled(false, 1, r.exponent() + 1 - cfg.mantissa_bits() as i32);
        r.add(&ulp, cfg)
    } else {
        Ok(r)
    }
}

pub(crate) fn sign_k<A: Arith>(ar: &A, a: &Mat<A::R>, p: &SignParams) -> Result<(Mat<A::R>, SignTrace)> {
    let n = a.rows;
    let u = ar.unit_roundoff();
    let b = ar.import(&round_up(p.b, ar.config())?);
    let mut x = Mat::zeros(n, n);
    for (dst, src) in x.data.iter_mut().zip(&a.data) {
        *dst = ar.cdiv_real(*src, b);
    }
    let threshold = p.epsilon / (4.0 * n as f64);
    let floor = 8.0 * n as f64 * u;
    let cap = p.iteration_cap();
    let mut trace = SignTrace {
        threshold,
        ..Default::default()
    };
    let mut sq = mm_herm_k(ar, &x, &x);
    trace.stop_metric.push(stop_metric(ar, &sq));
    if p.track_norms {
        trace.iterates_norm.push(spectral_of(ar, &x));
    }
    let mut best: Option<(f64, Mat<A::R>)> = None;
    for k in 1..=cap {
        x = step_k(ar, &x, &sq);
        sq = mm_herm_k(ar, &x, &x);
        let m = stop_metric(ar, &sq);
        trace.stop_metric.push(m);
        trace.iterations = k;
        if p.track_norms {
            trace.iterates_norm.push(spectral_of(ar, &x));
        }
        if m <= threshold {
            return Ok((x, trace));
        }
        let prev = trace.stop_metric[k - 1];
        if best.as_ref().map_or(true, |b| m < b.0) {
            best = Some((m, x.clone()));
        }
        if k >= 2 && m > prev / 2.0 && m <= floor {
            let (_, bx) = best.expect("set above");
            trace.stagnated = true;
            return Ok((bx, trace));
        }
        // a runaway iterate means the input violated the norm bound
        if !m.is_finite() || m > 1e6 {
            break;
        }
    }
    Err(Error::NonConvergence(format!(
        "matrix sign did not reach {threshold:e} within {} iterations (last metric {:e})",
        trace.iterations,
        trace.stop_metric.last().copied().unwrap_or(f64::NAN)
    )))
}

/// Newton-Schulz approximation of `sign(A)` to accuracy `params.epsilon`.
pub fn sign_matrix(a: &FpMatrix, params: &SignParams, cfg: &PrecisionConfig) -> Result<(FpMatrix, SignTrace)> {
    require_hermitian(a)?;
    params.validate()?;
    if params.n != a.rows() {
        return Err(Error::Dimension(format!(
            "sign parameters are for n = {}, matrix is {}x{}",
            params.n,
            a.rows(),
            a.cols()
        )));
    }
    check_gate(a.rows(), cfg)?;
    let a = a.round_to(cfg)?;
    with_arith!(cfg, |ar| {
        let (s, tr) = sign_k(&ar, &ar.import_mat(&a), params)?;
        ar.check().map(|_| (ar.export_mat(&s), tr))
    })
}
