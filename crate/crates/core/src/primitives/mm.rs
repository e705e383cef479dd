use crate::error::{Error, Result};
use crate::fparith::{Arith, Cx, FpMatrix, Mat, PrecisionConfig};
use crate::with_arith;

/// Schoolbook product with a fixed left-to-right summation order.
pub(crate) fn mm_k<A: Arith>(ar: &A, a: &Mat<A::R>, b: &Mat<A::R>) -> Mat<A::R> {
    debug_assert_eq!(a.cols, b.rows);
    let bt = transpose(b);
    let mut c = Mat::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let ra = a.row(i);
        for j in 0..b.cols {
            c.data[i * b.cols + j] = dot(ar, ra, bt.row(j));
        }
    }
    c
}

/// Product whose exact value is known to be Hermitian: only the upper
/// triangle is computed, the lower triangle is its conjugate mirror and the
/// diagonal is made real.
pub(crate) fn mm_herm_k<A: Arith>(ar: &A, a: &Mat<A::R>, b: &Mat<A::R>) -> Mat<A::R> {
    debug_assert_eq!(a.cols, b.rows);
    debug_assert_eq!(a.rows, b.cols);
    let n = a.rows;
    let bt = transpose(b);
    let mut c = Mat::zeros(n, n);
    for i in 0..n {
        let ra = a.row(i);
        for j in i..n {
            let v = dot(ar, ra, bt.row(j));
            if i == j {
                c.data[i * n + i] = Cx::new(v.re, ar.zero());
            } else {
                c.data[i * n + j] = v;
                c.data[j * n + i] = ar.cconj(v);
            }
        }
    }
    c
}

#[inline]
fn dot<A: Arith>(ar: &A, x: &[Cx<A::R>], y: &[Cx<A::R>]) -> Cx<A::R> {
    let mut acc = ar.cmul(x[0], y[0]);
    for k in 1..x.len() {
        acc = ar.cadd(acc, ar.cmul(x[k], y[k]));
    }
    acc
}

fn transpose<R: Copy + Default>(m: &Mat<R>) -> Mat<R> {
    let mut t = Mat::zeros(m.cols, m.rows);
    for i in 0..m.rows {
        for j in 0..m.cols {
            t.data[j * m.rows + i] = m.data[i * m.cols + j];
        }
    }
    t
}

/// Matrix product at working precision.
///
/// When `b` is exactly the conjugate transpose of `a` (a Gram-type product),
/// the result is symmetrized so it is exactly Hermitian.
pub fn mm(a: &FpMatrix, b: &FpMatrix, cfg: &PrecisionConfig) -> Result<FpMatrix> {
    if a.cols() != b.rows() || a.cols() == 0 {
        return Err(Error::Dimension(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let gram = a.rows() == b.cols() && *b == a.adjoint();
    let a = a.round_to(cfg)?;
    let b = b.round_to(cfg)?;
    with_arith!(cfg, |ar| {
        let (am, bm) = (ar.import_mat(&a), ar.import_mat(&b));
        let c = if gram {
            mm_herm_k(&ar, &am, &bm)
        } else {
            mm_k(&ar, &am, &bm)
        };
        ar.check().map(|_| ar.export_mat(&c))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fparith::flops;

    #[test]
    fn identity_and_diagonal() {
        let c = PrecisionConfig::new(24).unwrap();
        let x = FpMatrix::from_f64(2, 2, &[(0.3, 0.1), (1.5, -2.0), (7.0, 0.0), (0.0, 1.0)], &c)
            .unwrap();
        assert_eq!(mm(&FpMatrix::identity(2), &x, &c).unwrap(), x);
        let d = FpMatrix::from_real_diag(&[2.0, -3.0], &c).unwrap();
        let dd = mm(&d, &d, &c).unwrap();
        assert_eq!(dd, FpMatrix::from_real_diag(&[4.0, 9.0], &c).unwrap());
    }

    #[test]
    fn gram_products_are_exactly_hermitian() {
        let c = PrecisionConfig::new(53).unwrap();
        let entries: Vec<(f64, f64)> = (0..12)
            .map(|k| ((k as f64 * 0.37).sin(), (k as f64 * 1.3).cos()))
            .collect();
        let x = FpMatrix::from_f64(3, 4, &entries, &c).unwrap();
        let g = mm(&x.adjoint(), &x, &c).unwrap();
        assert!(g.is_hermitian());
        let g2 = mm(&x, &x.adjoint(), &c).unwrap();
        assert!(g2.is_hermitian());
    }

    #[test]
    fn flop_count_matches_schoolbook() {
        let c = PrecisionConfig::new(53).unwrap();
        let n = 8;
        let entries: Vec<(f64, f64)> = (0..n * n).map(|k| (k as f64, 1.0)).collect();
        let a = FpMatrix::from_f64(n, n, &entries, &c).unwrap();
        let b = FpMatrix::identity(n);
        let (_, f) = flops::measure(|| mm(&a, &b, &c).unwrap());
        let n = n as u64;
        assert_eq!(f.complex, n * n * (2 * n - 1));
        assert_eq!(f.real, n * n * (6 * n + 2 * (n - 1)));
    }

    #[test]
    fn dimension_mismatch() {
        let c = PrecisionConfig::default();
        assert!(matches!(
            mm(&FpMatrix::zeros(2, 3), &FpMatrix::zeros(2, 3), &c),
            Err(Error::Dimension(_))
        ));
    }
}
