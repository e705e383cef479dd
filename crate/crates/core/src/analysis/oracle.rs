//! High-precision reference decompositions.
//!
//! Eigenvectors are computed by cyclic Jacobi at 256 bits, warm-started from
//! a binary64 Jacobi basis re-orthonormalized at full precision, so only a
//! few high-precision sweeps are needed.

use crate::error::{Error, Result};
use crate::fparith::FpMatrix;
use crate::hp::Big;
use crate::linalg::{eigh_f64, jacobi_eigh, orthonormalize, CMat, Real, C};

#[derive(Clone, Debug)]
pub struct OracleDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<Big>,
    pub eigenvectors: CMat<Big>,
    /// `||V* V - I||_F`.
    pub ortho_defect: f64,
}

impl OracleDecomposition {
    pub fn eigenvalues_f64(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|x| x.to_f64()).collect()
    }

    /// `V f(Lambda) V*`.
    pub fn apply(&self, f: impl Fn(&Big) -> Big) -> CMat<Big> {
        let n = self.eigenvalues.len();
        let mut vd = self.eigenvectors.clone();
        for (j, lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                let v = vd.at(i, j).scale(&s);
                vd.set(i, j, v);
            }
        }
        vd.matmul(&self.eigenvectors.adjoint())
    }
}

pub fn to_big(a: &FpMatrix) -> CMat<Big> {
    CMat {
        rows: a.rows(),
        cols: a.cols(),
        data: a
            .data()
            .iter()
            .map(|z| C::new(Big::from_fp(&z.re), Big::from_fp(&z.im)))
            .collect(),
    }
}

/// Eigendecomposition of a Hermitian matrix at oracle precision.
pub fn oracle_eigh(a: &FpMatrix) -> Result<OracleDecomposition> {
    if !a.is_square() || !a.is_hermitian() {
        return Err(Error::Domain("oracle needs an exactly Hermitian matrix".into()));
    }
    oracle_eigh_big(&to_big(a), &a.to_f64())
}

pub(crate) fn oracle_eigh_big(a: &CMat<Big>, approx: &[(f64, f64)]) -> Result<OracleDecomposition> {
    let n = a.rows;
    if n > 512 {
        return Err(Error::Domain("oracle supports n <= 512".into()));
    }
    if n == 0 {
        return Ok(OracleDecomposition {
            eigenvalues: vec![],
            eigenvectors: CMat::zeros(0, 0),
            ortho_defect: 0.0,
        });
    }
    let (_, v0) = eigh_f64(n, approx);
    let mut v = CMat::<Big>::from_f64(n, n, &v0.to_f64());
    orthonormalize(&mut v);
    let (vals, vecs) = jacobi_eigh(a, Some(v), 1e-50, 30);
    let defect = vecs.adjoint().matmul(&vecs).sub(&CMat::identity(n)).frobenius().to_f64();
    Ok(OracleDecomposition {
        eigenvalues: vals,
        eigenvectors: vecs,
        ortho_defect: defect,
    })
}

/// `sign(A)` by functional calculus on the oracle decomposition.
pub fn oracle_sign(a: &FpMatrix) -> Result<CMat<Big>> {
    let d = oracle_eigh(a)?;
    let scale = d.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.to_f64().abs()));
    if d.eigenvalues.iter().any(|x| x.to_f64().abs() <= 1e-60 * scale) {
        return Err(Error::Domain("sign of a singular matrix".into()));
    }
    Ok(d.apply(|x| Big::from_f64(if *x < Big::zero() { -1.0 } else { 1.0 })))
}

/// Distance from `c` to the spectrum: `min_j |lambda_j - c|`.
pub fn oracle_pseudospectrum_gap(a: &FpMatrix, c: f64) -> Result<f64> {
    let d = oracle_eigh(a)?;
    Ok(d.eigenvalues_f64().iter().fold(f64::INFINITY, |m, x| m.min((x - c).abs())))
}

/// Singular values (descending) of a general matrix at oracle precision.
pub fn oracle_singular_values_big(m: &CMat<Big>) -> Vec<f64> {
    let g = m.adjoint().matmul(m);
    let approx = g.to_f64();
    let d = oracle_eigh_big(&g, &approx).expect("Gram matrix is Hermitian");
    let mut s: Vec<f64> = d
        .eigenvalues
        .iter()
        .map(|x| if *x < Big::zero() { 0.0 } else { x.sqrt().to_f64() })
        .collect();
    s.reverse();
    s
}

pub fn oracle_spectral_norm_big(m: &CMat<Big>) -> f64 {
    oracle_singular_values_big(m).first().copied().unwrap_or(0.0)
}

pub fn oracle_spectral_norm(a: &FpMatrix) -> f64 {
    oracle_spectral_norm_big(&to_big(a))
}

/// `||U diag(d) U* - A||` at oracle precision.
pub fn oracle_residual(a: &FpMatrix, u: &FpMatrix, d: &[f64]) -> f64 {
    let ub = to_big(u);
    let mut ud = ub.clone();
    for (j, x) in d.iter().enumerate() {
        let s = Big::from_f64(*x);
        for i in 0..ud.rows {
            let v = ud.at(i, j).scale(&s);
            ud.set(i, j, v);
        }
    }
    let r = ud.matmul(&ub.adjoint()).sub(&to_big(a));
    oracle_spectral_norm_big(&r)
}

/// Binary64 counterparts for large checks whose tolerance is far above
/// binary64 rounding.
pub mod f64_checks {
    use super::*;
    use crate::linalg::singular_values_f64;

    pub fn residual(a: &FpMatrix, u: &FpMatrix, d: &[f64]) -> f64 {
        let n = a.rows();
        let um = CMat::<f64>::from_f64(u.rows(), u.cols(), &u.to_f64());
        let mut ud = um.clone();
        for (j, x) in d.iter().enumerate() {
            for i in 0..ud.rows {
                let v = ud.at(i, j).scale(x);
                ud.set(i, j, v);
            }
        }
        let r = ud.matmul(&um.adjoint()).sub(&CMat::from_f64(n, n, &a.to_f64()));
        singular_values_f64(n, n, &r.to_f64())[0]
    }

    pub fn singular_values(m: &FpMatrix) -> Vec<f64> {
        singular_values_f64(m.rows(), m.cols(), &m.to_f64())
    }

    pub fn spectral_norm(m: &FpMatrix) -> f64 {
        singular_values(m).first().copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fparith::PrecisionConfig;

    #[test]
    fn diagonal_and_swap() {
        let c = PrecisionConfig::default();
        let d = oracle_eigh(&FpMatrix::from_real_diag(&[3.0, -1.0, 2.0], &c).unwrap()).unwrap();
        assert_eq!(d.eigenvalues_f64(), vec![-1.0, 2.0, 3.0]);
        let s = FpMatrix::from_f64(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)], &c).unwrap();
        let d = oracle_eigh(&s).unwrap();
        assert_eq!(d.eigenvalues_f64(), vec![-1.0, 1.0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d.eigenvectors.at(0, 1).re.to_f64().abs() - h).abs() < 1e-16);
        assert!(d.ortho_defect < 1e-40);
    }

    #[test]
    fn random_reconstruction() {
        let a = crate::analysis::gen::gue(16, 11, &PrecisionConfig::default()).unwrap();
        let d = oracle_eigh(&a).unwrap();
        let rec = d.apply(|x| x.clone()).sub(&to_big(&a));
        let norm = oracle_spectral_norm(&a);
        assert!(rec.frobenius().to_f64() <= 1e-40 * norm);
        assert!(d.ortho_defect <= 1e-40);
    }

    #[test]
    fn sign_and_gap() {
        let c = PrecisionConfig::default();
        let s = oracle_sign(&FpMatrix::from_real_diag(&[5.0, -2.0], &c).unwrap()).unwrap();
        assert_eq!(s.at(0, 0).re.to_f64(), 1.0);
        assert_eq!(s.at(1, 1).re.to_f64(), -1.0);
        assert!(oracle_sign(&FpMatrix::from_real_diag(&[1.0, 0.0], &c).unwrap()).is_err());
        let g = oracle_pseudospectrum_gap(&FpMatrix::from_real_diag(&[1.0, 3.0], &c).unwrap(), 2.0).unwrap();
        assert_eq!(g, 1.0);
    }
}
