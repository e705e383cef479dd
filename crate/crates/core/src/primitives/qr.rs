//! Householder QR with reflectors in the style of LAPACK's `zlarfg`.
//!
//! Each reflector `H = I - tau v v*` has `v[0] = 1` and maps its column onto
//! a real multiple of `e1`, so R has a real diagonal; rows of R and columns
//! of Q are then negated where needed to make that diagonal nonnegative.

use crate::error::{Error, Result};
use crate::fparith::{Arith, Cx, FpMatrix, Mat, PrecisionConfig};
use crate::with_arith;

struct Reflector<R> {
    v: Vec<Cx<R>>,
    tau: Cx<R>,
}

/// Reduce `a` (n x m, n >= m) to upper triangular form in place and return
/// the reflectors.
fn householder<A: Arith>(ar: &A, r: &mut Mat<A::R>) -> Vec<Reflector<A::R>> {
    let (n, m) = (r.rows, r.cols);
    let steps = m.min(n);
    let mut refl = Vec::with_capacity(steps);
    for j in 0..steps {
        let alpha = r.at(j, j);
        let mut xsq = ar.zero();
        for i in j + 1..n {
            let x = r.at(i, j);
            xsq = ar.add(xsq, ar.add(ar.mul(x.re, x.re), ar.mul(x.im, x.im)));
        }
        let mut v = vec![Cx::default(); n - j];
        v[0] = Cx::new(ar.one(), ar.zero());
        if ar.is_zero(xsq) && ar.is_zero(alpha.im) {
            refl.push(Reflector {
                v,
                tau: Cx::default(),
            });
            continue;
        }
        let sumsq = ar.add(
            ar.add(ar.mul(alpha.re, alpha.re), ar.mul(alpha.im, alpha.im)),
            xsq,
        );
        let norm = ar.sqrt(sumsq);
        let beta = if ar.lt(alpha.re, ar.zero()) {
            norm
        } else {
            ar.neg(norm)
        };
        let tau = Cx::new(
            ar.div(ar.sub(beta, alpha.re), beta),
            ar.div(ar.neg(alpha.im), beta),
        );
        // v[i] = x[i] / (alpha - beta)
        let d = Cx::new(ar.sub(alpha.re, beta), alpha.im);
        let dsq = ar.add(ar.mul(d.re, d.re), ar.mul(d.im, d.im));
        for i in j + 1..n {
            let num = ar.cmul(r.at(i, j), ar.cconj(d));
            v[i - j] = ar.cdiv_real(num, dsq);
            r.set(i, j, Cx::default());
        }
        r.set(j, j, Cx::new(beta, ar.zero()));
        // apply H* = I - conj(tau) v v* to the trailing columns
        let ctau = ar.cconj(tau);
        for c in j + 1..m {
            let w = reflect_dot(ar, &v, |i| r.at(j + i, c));
            let s = ar.cmul(ctau, w);
            for (i, vi) in v.iter().enumerate() {
                let upd = ar.csub(r.at(j + i, c), ar.cmul(*vi, s));
                r.set(j + i, c, upd);
            }
        }
        refl.push(Reflector { v, tau });
    }
    refl
}

/// `sum_i conj(v[i]) * x(i)`
fn reflect_dot<A: Arith>(ar: &A, v: &[Cx<A::R>], x: impl Fn(usize) -> Cx<A::R>) -> Cx<A::R> {
    let mut acc = ar.cmul(ar.cconj(v[0]), x(0));
    for (i, vi) in v.iter().enumerate().skip(1) {
        acc = ar.cadd(acc, ar.cmul(ar.cconj(*vi), x(i)));
    }
    acc
}

/// First `k` columns of `H_1 ... H_s`, built by applying the reflectors to
/// the identity in reverse order.
fn form_q<A: Arith>(ar: &A, n: usize, k: usize, refl: &[Reflector<A::R>]) -> Mat<A::R> {
    let mut q = Mat::zeros(n, k);
    for i in 0..k.min(n) {
        q.set(i, i, Cx::new(ar.one(), ar.zero()));
    }
    for (j, h) in refl.iter().enumerate().rev() {
        if ar.is_zero(h.tau.re) && ar.is_zero(h.tau.im) {
            continue;
        }
        for c in 0..k {
            let w = reflect_dot(ar, &h.v, |i| q.at(j + i, c));
            let s = ar.cmul(h.tau, w);
            for (i, vi) in h.v.iter().enumerate() {
                let upd = ar.csub(q.at(j + i, c), ar.cmul(*vi, s));
                q.set(j + i, c, upd);
            }
        }
    }
    q
}

fn fix_signs<A: Arith>(ar: &A, q: &mut Mat<A::R>, r: &mut Mat<A::R>) {
    for j in 0..r.cols.min(r.rows) {
        if ar.lt(r.at(j, j).re, ar.zero()) {
            for c in j..r.cols {
                let v = ar.cneg(r.at(j, c));
                r.set(j, c, v);
            }
            if j < q.cols {
                for i in 0..q.rows {
                    let v = ar.cneg(q.at(i, j));
                    q.set(i, j, v);
                }
            }
        }
    }
}

/// Full QR: `Q` is n x n, `R` is n x m.
pub(crate) fn qr_k<A: Arith>(ar: &A, a: &Mat<A::R>) -> (Mat<A::R>, Mat<A::R>) {
    let mut r = a.clone();
    let refl = householder(ar, &mut r);
    let mut q = form_q(ar, a.rows, a.rows, &refl);
    fix_signs(ar, &mut q, &mut r);
    (q, r)
}

/// The first m columns of Q for an n x m input; identical to the leading
/// columns of the full factor.
pub(crate) fn qr_thin_q_k<A: Arith>(ar: &A, a: &Mat<A::R>) -> Mat<A::R> {
    let mut r = a.clone();
    let refl = householder(ar, &mut r);
    let mut q = form_q(ar, a.rows, a.cols, &refl);
    fix_signs(ar, &mut q, &mut r);
    q
}

/// Householder QR of an n x m matrix (n >= m) with a real nonnegative diagonal in R.
pub fn qr(a: &FpMatrix, cfg: &PrecisionConfig) -> Result<(FpMatrix, FpMatrix)> {
    if a.rows() < a.cols() || a.cols() == 0 {
        return Err(Error::Dimension(format!(
            "qr needs rows >= cols >= 1, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let a = a.round_to(cfg)?;
    with_arith!(cfg, |ar| {
        let (q, r) = qr_k(&ar, &ar.import_mat(&a));
        ar.check().map(|_| (ar.export_mat(&q), ar.export_mat(&r)))
    })
}
