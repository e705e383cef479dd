//! Randomized range extraction from an approximate projector: multiply by a
//! Gaussian matrix, QR, keep the first `r` columns of Q.

use serde::{Deserialize, Serialize};

use crate::analysis::oracle::{oracle_eigh_big, oracle_singular_values_big, to_big};
use crate::error::{Error, Result};
use crate::fparith::{Arith, FpMatrix, Mat, PrecisionConfig};
use crate::hp::Big;
use crate::linalg::{orthonormalize, CMat, Real, C};
use crate::primitives::{mm_k, normals_k, qr_thin_q_k, ErrorModel, RngState};
use crate::with_arith;

/// Parameters of the deflation guarantee.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeflateParams {
    pub r: usize,
    pub beta: f64,
    pub rho: f64,
    pub x_param: f64,
    pub t_param: f64,
    pub eta: f64,
}

impl DeflateParams {
    /// `x = sqrt(rho/r)`, `t = sqrt(ln(4/rho)/n)`, so the failure
    /// probability is exactly `rho`.
    pub fn convenient(n: usize, r: usize, beta: f64, rho: f64, eta: f64) -> Result<Self> {
        let x = (rho / r as f64).sqrt();
        let t = ((4.0 / rho).ln() / n as f64).sqrt();
        Self::raw(r, beta, rho, x, t, eta)
    }

    pub fn raw(r: usize, beta: f64, rho: f64, x_param: f64, t_param: f64, eta: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")));
        }
        if !(eta > 0.0 && eta <= 1.2) {
            return Err(Error::Domain(format!("eta must lie in (0, 6/5], got {eta}")));
        }
        if !(beta >= 0.0) || r == 0 {
            return Err(Error::Domain("need beta >= 0 and r >= 1".into()));
        }
        Ok(DeflateParams {
            r,
            beta,
            rho,
            x_param,
            t_param,
            eta,
        })
    }

    /// `2 exp(-n t^2) + (r/2) x^2`.
    pub fn failure_probability(&self, n: usize) -> f64 {
        2.0 * (-(n as f64) * self.t_param * self.t_param).exp() + self.r as f64 / 2.0 * self.x_param * self.x_param
    }

    /// `6 ((s1 + 2)/sr) ((2 sqrt2 + t) sqrt(n) / x) beta`.
    pub fn error_bound(&self, n: usize, sigma_1: f64, sigma_r: f64) -> f64 {
        6.0 * ((sigma_1 + 2.0) / sigma_r)
            * ((2.0 * 2f64.sqrt() + self.t_param) * (n as f64).sqrt() / self.x_param)
            * self.beta
    }

    /// Largest `beta` admitted by the convenience parameterization.
    pub fn max_beta(&self, n: usize, sigma_1: f64, sigma_r: f64) -> f64 {
        let nf = n as f64;
        (self.rho.sqrt() * self.eta / (nf * self.r as f64).sqrt())
            * (sigma_r / (sigma_1 + 2.0))
            / (12.0 * 2f64.sqrt() + 6.0 * ((4.0 / self.rho).ln() / nf).sqrt())
    }
}

/// `u_DEFLATE = beta / (4 mu_QR(n) + 2 sqrt(n) c_N + 2 mu_MM(n))`.
pub fn deflate_precision(beta: f64, n: usize, em: &ErrorModel) -> f64 {
    beta / (4.0 * em.mu_qr(n) + 2.0 * (n as f64).sqrt() * em.c_normal + 2.0 * em.mu_mm(n))
}

/// Only the first `r` columns of `P G` influence the first `r` columns of
/// Q, so only those are formed. All `n^2` Gaussian samples are still drawn
/// so stream consumption matches the full algorithm.
pub(crate) fn deflate_k<A: Arith>(ar: &A, p: &Mat<A::R>, r: usize, rng: RngState) -> Result<(Mat<A::R>, RngState)> {
    let n = p.rows;
    let (g, rng) = normals_k(ar, n * n, rng)?;
    let mut gr = Mat::zeros(n, r);
    for i in 0..n {
        for j in 0..r {
            gr.set(i, j, g[i * n + j]);
        }
    }
    let y = mm_k(ar, p, &gr);
    Ok((qr_thin_q_k(ar, &y), rng))
}

fn check_shape(p: &FpMatrix, r: usize) -> Result<()> {
    let n = p.rows();
    if !p.is_square() || n < 2 {
        return Err(Error::Dimension(format!("deflate needs a square matrix with n >= 2, got {}x{}", n, p.cols())));
    }
    if r == 0 || r >= n {
        return Err(Error::Domain(format!("rank {r} outside [1, {}]", n - 1)));
    }
    Ok(())
}

/// The n x r basis estimate and the advanced stream.
pub fn deflate(p: &FpMatrix, r: usize, rng: RngState, cfg: &PrecisionConfig) -> Result<(FpMatrix, RngState)> {
    check_shape(p, r)?;
    let p = p.round_to(cfg)?;
    with_arith!(cfg, |ar| {
        let (q, rng) = deflate_k(&ar, &ar.import_mat(&p), r, rng)?;
        ar.check().map(|_| (ar.export_mat(&q), rng))
    })
}

/// [`deflate`] with the precision gate `u <= u_DEFLATE(beta, n)` enforced.
pub fn deflate_checked(
    p: &FpMatrix,
    params: &DeflateParams,
    rng: RngState,
    cfg: &PrecisionConfig,
) -> Result<(FpMatrix, RngState)> {
    check_shape(p, params.r)?;
    let gate = deflate_precision(params.beta, p.rows(), &ErrorModel::default());
    if cfg.unit_roundoff() > gate {
        return Err(Error::Precondition(format!(
            "unit roundoff {:e} exceeds the deflation gate {gate:e}",
            cfg.unit_roundoff()
        )));
    }
    deflate(p, params.r, rng, cfg)
}

/// `min_W ||U_tilde - U W||` over unitary `W`, with `U` an orthonormal basis
/// of the dominant `r`-dimensional range of `a`, at oracle precision.
pub fn residual_subspace_distance(u_tilde: &FpMatrix, a: &FpMatrix, r: usize) -> Result<f64> {
    let n = a.rows();
    if u_tilde.rows() != n || u_tilde.cols() != r || r == 0 || r > n {
        return Err(Error::Dimension("basis shape does not match the rank".into()));
    }
    // left singular vectors of A from A A*
    let ab = to_big(a);
    let gram = ab.matmul(&ab.adjoint());
    let d = oracle_eigh_big(&gram, &gram.to_f64())?;
    let s: Vec<f64> = d
        .eigenvalues
        .iter()
        .rev()
        .map(|x| if *x < Big::zero() { 0.0 } else { x.sqrt().to_f64() })
        .collect();
    if s[r - 1] == 0.0 || (r < n && s[r] * 1e6 > s[r - 1]) {
        return Err(Error::Domain(format!(
            "rank {r} is not well defined: sigma_r = {:e}, sigma_r+1 = {:e}",
            s[r - 1],
            s.get(r).copied().unwrap_or(0.0)
        )));
    }
    let basis = d.eigenvectors.cols_range(n - r, n);
    Ok(procrustes_distance(&to_big(u_tilde), &basis))
}

/// `min_W ||ut - u W||` for orthonormal `u` (n x r).
pub fn procrustes_distance(ut: &CMat<Big>, u: &CMat<Big>) -> f64 {
    let r = u.cols;
    let m = u.adjoint().matmul(ut);
    // polar factor of M: W = M (M* M)^(-1/2), completed where M is singular
    let mm = m.adjoint().matmul(&m);
    let d = oracle_eigh_big(&mm, &mm.to_f64()).expect("Gram matrix is Hermitian");
    let y = &d.eigenvectors;
    let my = m.matmul(y);
    let mut x = CMat::<Big>::zeros(r, r);
    let tiny = Big::from_f64(1e-60);
    for j in 0..r {
        let lam = d.eigenvalues[j].clone();
        if lam > tiny {
            let inv = Big::one() / lam.sqrt();
            for i in 0..r {
                x.set(i, j, my.at(i, j).scale(&inv));
            }
        } else {
            x.set(j, j, C::real(Big::one()));
        }
    }
    orthonormalize(&mut x);
    let w = x.matmul(&y.adjoint());
    let diff = ut.sub(&u.matmul(&w));
    oracle_singular_values_big(&diff)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::gen;
    use crate::fparith::FpScalar;
    use crate::fparith::flops;

    fn big_cols(v: &[(f64, f64)], rows: usize, cols: usize) -> CMat<Big> {
        CMat::<Big>::from_f64(rows, cols, v)
    }

    #[test]
    fn two_dimensional_square_root_loss() {
        for eps in [1e-4, 1e-8, 1e-12] {
            let a = (2.0 * eps as f64).sqrt();
            let mut ut = big_cols(&[(a.cos(), 0.0), (a.sin(), 0.0)], 2, 1);
            orthonormalize(&mut ut);
            let u = big_cols(&[(1.0, 0.0), (0.0, 0.0)], 2, 1);
            let d = procrustes_distance(&ut, &u);
            // sqrt2 sqrt(1 - cos a) = 2 sin(a/2)
            let expect = 2.0 * (a / 2.0).sin();
            assert!((d - expect).abs() <= 1e-9 * expect, "{d:e} vs {expect:e}");
            assert!((d / (2.0 * eps).sqrt() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn procrustes_invariance() {
        let c = PrecisionConfig::default();
        let (p, q) = gen::projector(6, 2, 3, &c).unwrap();
        let qb = big_cols(&q.to_f64(), 6, 2);
        assert!(procrustes_distance(&qb, &qb) < 1e-30);
        // a permutation with phases
        let w = big_cols(&[(0.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, 0.0)], 2, 2);
        assert!(procrustes_distance(&qb.matmul(&w), &qb) < 1e-30);
        let ut = FpMatrix::from_f64(6, 2, &q.to_f64(), &c).unwrap();
        assert!(residual_subspace_distance(&ut, &p, 2).unwrap() < 1e-14);
        assert!(matches!(residual_subspace_distance(&ut, &p, 3), Err(Error::Dimension(_))));
    }

    #[test]
    fn ill_defined_rank() {
        let c = PrecisionConfig::default();
        let a = FpMatrix::from_real_diag(&[1.0, 0.5, 0.0], &c).unwrap();
        let ut = FpMatrix::identity(3).first_cols(1);
        assert!(matches!(residual_subspace_distance(&ut, &a, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_one_projector() {
        let c = PrecisionConfig::default();
        let mut p = FpMatrix::zeros(5, 5);
        p.set(0, 0, FpScalar::ONE);
        let (ut, _) = deflate(&p, 1, RngState::new(1), &c).unwrap();
        assert_eq!(ut.cols(), 1);
        let d = residual_subspace_distance(&ut, &p, 1).unwrap();
        assert!(d <= 100.0 * ErrorModel::default().mu_qr(5) * c.unit_roundoff());
    }

    #[test]
    fn block_projector_and_orthonormality() {
        let c = PrecisionConfig::default();
        let p = FpMatrix::from_real_diag(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0], &c).unwrap();
        let (ut, _) = deflate(&p, 3, RngState::new(2), &c).unwrap();
        for i in 3..6 {
            for j in 0..3 {
                assert!(ut.get(i, j).is_zero());
            }
        }
        let em = ErrorModel::default();
        let g = CMat::<f64>::from_f64(6, 3, &ut.to_f64());
        let defect = g.adjoint().matmul(&g).sub(&CMat::identity(3)).frobenius();
        assert!(defect <= 4.0 * em.mu_qr(6) * c.unit_roundoff());
    }

    #[test]
    fn flops_and_stream() {
        let c = PrecisionConfig::default();
        let (p, _) = gen::projector(8, 3, 5, &c).unwrap();
        let rng = RngState::new(9);
        let ((_, after), f) = flops::measure(|| deflate(&p, 3, rng, &c).unwrap());
        let em = ErrorModel::default();
        assert!(f.real <= em.t_mm(8) + em.t_qr(8) + em.t_normal * 64);
        let mut probe = rng;
        probe.advance(2 * 64);
        assert_eq!(after, probe);
    }

    #[test]
    fn rank_bounds_and_gate() {
        let c = PrecisionConfig::default();
        let p = FpMatrix::identity(4);
        assert!(matches!(deflate(&p, 0, RngState::new(0), &c), Err(Error::Domain(_))));
        assert!(matches!(deflate(&p, 4, RngState::new(0), &c), Err(Error::Domain(_))));
        let params = DeflateParams::convenient(4, 2, 1e-20, 0.1, 1.0).unwrap();
        assert!(matches!(deflate_checked(&p, &params, RngState::new(0), &c), Err(Error::Precondition(_))));
    }

    #[test]
    fn precision_formula() {
        let em = ErrorModel::default();
        let a = deflate_precision(1e-6, 16, &em);
        assert!((deflate_precision(2e-6, 16, &em) / a - 2.0).abs() < 1e-15);
        assert!(deflate_precision(1e-6, 32, &em) < a);
        // 1e-6 / (4*30*64 + 2*4*16 + 2*32)
        assert!((a - 1e-6 / 7872.0).abs() < 1e-22);
    }

    #[test]
    fn convenient_parameters_give_rho() {
        let p = DeflateParams::convenient(16, 4, 1e-6, 0.1, 1.0).unwrap();
        assert!((p.failure_probability(16) - 0.1).abs() < 1e-12);
    }
}
