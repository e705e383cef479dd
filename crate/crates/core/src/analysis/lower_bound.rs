//! Hadamard construction showing how many bits any backward-stable
//! eigensolver needs.
//!
//! A Sylvester-Hadamard `A` has entries `±1` and `||A|| = sqrt n`. Adding
//! `(u/2) B` with `B = ±J` (all ones) changes no entry after rounding to
//! `t = ceil(lg(1/u))` bits, yet moves `A` by `un/2` in norm. A solver that
//! reads its input at precision `u` cannot tell `A` from `A'`, so for one
//! of them its residual is at least `un/4`.

use serde::Serialize;

use crate::eigh::eigh;
use crate::error::{Error, Result};
use crate::fparith::{Fp, FpMatrix, FpScalar, PrecisionConfig};
use crate::hp::Big;
use crate::linalg::{CMat, Real, C};
use crate::primitives::RngState;

use super::oracle::{oracle_spectral_norm_big, to_big};

/// Sylvester-Hadamard matrix of order `n` (a power of two).
pub fn hadamard(n: usize) -> Result<FpMatrix> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Domain(format!("no Sylvester-Hadamard matrix of order {n}")));
    }
    let mut h = FpMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if (i & j).count_ones() % 2 == 0 { Fp::ONE } else { Fp::ONE.neg() };
            h.set(i, j, FpScalar::real(v));
        }
    }
    Ok(h)
}

/// `lg(1/eps) + 0.5 lg n - 2`: bits below which a residual of
/// `eps ||A||` is out of reach on Hadamard inputs.
pub fn necessary_bits_real(eps: f64, n: usize) -> f64 {
    (1.0 / eps).log2() + 0.5 * (n as f64).log2() - 2.0
}

pub fn necessary_bits(eps: f64, n: usize) -> u32 {
    necessary_bits_real(eps, n).ceil().max(0.0) as u32
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub n: usize,
    pub u: f64,
    pub bits: u32,
    /// `+1` or `-1`: the sign of `B = ±J`.
    pub b_sign: i32,
    /// Every entry of `A'` rounds to the matching entry of `A`.
    pub fl_identity: bool,
    /// `||A - U D U*||`.
    pub residual_a: f64,
    /// `||A' - U D U*||`.
    pub residual_perturbed: f64,
    /// `un/4`.
    pub bound: f64,
    pub bound_met: bool,
    pub eps: Option<f64>,
    /// `sqrt(n) eps`, the residual target for `A` at accuracy `eps`.
    pub target: Option<f64>,
    /// `u <= 4 eps / sqrt n`.
    pub constraint_met: Option<bool>,
}

fn residual_big(a: &CMat<Big>, u: &FpMatrix, d: &[Fp]) -> CMat<Big> {
    let ub = to_big(u);
    let mut ud = ub.clone();
    for (j, x) in d.iter().enumerate() {
        let s = Big::from_fp(x);
        for i in 0..ud.rows {
            let v = ud.at(i, j).scale(&s);
            ud.set(i, j, v);
        }
    }
    a.sub(&ud.matmul(&ub.adjoint()))
}

/// Run the construction against a given decomposition `(U, D)` of the
/// Hadamard matrix of order `n`. The sign of `B` follows the sign of the
/// entry sum of `A - U D U*`, which guarantees
/// `||A' - U D U*|| >= |1* (A' - U D U*) 1| / n >= un/2`.
pub fn lower_bound_demo(n: usize, u: f64, decomposition: (&FpMatrix, &[Fp]), eps: Option<f64>) -> Result<LowerBoundReport> {
    if !(u > 0.0 && u < 0.5) {
        return Err(Error::Domain(format!("u must lie in (0, 1/2), got {u}")));
    }
    let a = hadamard(n)?;
    let (uu, d) = decomposition;
    if uu.rows() != n || uu.cols() != d.len() {
        return Err(Error::Dimension("decomposition does not match the Hadamard order".into()));
    }
    let bits = (1.0 / u).log2().ceil() as u32;
    let cfg = PrecisionConfig::new(bits)?;
    let ab = to_big(&a);
    let r = residual_big(&ab, uu, d);
    let mut total = Big::zero();
    for i in 0..n {
        for j in 0..n {
            total = &total + &r.at(i, j).re;
        }
    }
    let b_sign = if total < Big::zero() { -1 } else { 1 };
    let step = Fp::from_f64_exact(b_sign as f64 * u / 2.0);
    let wide = PrecisionConfig::new(128)?;
    let mut fl_identity = true;
    let mut ap = CMat::<Big>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let x = a.get(i, j).re.add(&step, &wide)?;
            if x.round_to(&cfg)? != a.get(i, j).re {
                fl_identity = false;
            }
            ap.set(i, j, C::real(Big::from_fp(&x)));
        }
    }
    let rp = residual_big(&ap, uu, d);
    let residual_a = oracle_spectral_norm_big(&r);
    let residual_perturbed = oracle_spectral_norm_big(&rp);
    let bound = u * n as f64 / 4.0;
    let target = eps.map(|e| (n as f64).sqrt() * e);
    Ok(LowerBoundReport {
        n,
        u,
        bits,
        b_sign,
        fl_identity,
        residual_a,
        residual_perturbed,
        bound,
        bound_met: residual_perturbed >= bound,
        eps,
        target,
        constraint_met: eps.map(|e| u <= 4.0 * e / (n as f64).sqrt()),
    })
}

/// End to end: decompose the Hadamard matrix with `eigh` at accuracy `eps`
/// and run the construction on the result.
pub fn lower_bound_run(n: usize, u: f64, eps: f64, seed: u64, cfg: &PrecisionConfig) -> Result<LowerBoundReport> {
    let a = hadamard(n)?;
    let (res, _) = eigh(&a, eps, 0.5, RngState::new(seed), cfg)?;
    lower_bound_demo(n, u, (&res.u, &res.d), Some(eps))
}
