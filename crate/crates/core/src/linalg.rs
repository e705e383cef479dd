//! Small dense complex linear algebra over a generic real field, used for
//! norms (binary64) and for the high-precision oracles.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::hp::{big_to_f64, Big, ORACLE_BITS, RM};

pub trait Real:
    Clone
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

impl Real for Big {
    fn from_f64(x: f64) -> Self {
        Big(astro_float::BigFloat::from_f64(x, ORACLE_BITS))
    }
    fn to_f64(&self) -> f64 {
        big_to_f64(&self.0)
    }
    fn sqrt(&self) -> Self {
        Big(self.0.sqrt(ORACLE_BITS, RM))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct C<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> C<T> {
    pub fn new(re: T, im: T) -> Self {
        C { re, im }
    }
    pub fn zero() -> Self {
        C::new(T::zero(), T::zero())
    }
    pub fn real(re: T) -> Self {
        C::new(re, T::zero())
    }
    pub fn conj(&self) -> Self {
        C::new(self.re.clone(), -self.im.clone())
    }
    pub fn add(&self, o: &Self) -> Self {
        C::new(self.re.clone() + o.re.clone(), self.im.clone() + o.im.clone())
    }
    pub fn sub(&self, o: &Self) -> Self {
        C::new(self.re.clone() - o.re.clone(), self.im.clone() - o.im.clone())
    }
    pub fn mul(&self, o: &Self) -> Self {
        C::new(
            self.re.clone() * o.re.clone() - self.im.clone() * o.im.clone(),
            self.re.clone() * o.im.clone() + self.im.clone() * o.re.clone(),
        )
    }
    pub fn scale(&self, s: &T) -> Self {
        C::new(self.re.clone() * s.clone(), self.im.clone() * s.clone())
    }
    pub fn norm_sqr(&self) -> T {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }
    pub fn abs(&self) -> T {
        self.norm_sqr().sqrt()
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C::real(T::one());
        }
        m
    }

    pub fn from_f64(rows: usize, cols: usize, v: &[(f64, f64)]) -> Self {
        CMat {
            rows,
            cols,
            data: v
                .iter()
                .map(|&(a, b)| C::new(T::from_f64(a), T::from_f64(b)))
                .collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        self.data.iter().map(|z| (z.re.to_f64(), z.im.to_f64())).collect()
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &C<T> {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    pub fn matmul(&self, b: &Self) -> Self {
        assert_eq!(self.cols, b.rows);
        let mut out = CMat::zeros(self.rows, b.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k).clone();
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..b.cols {
                    let v = out.at(i, j).add(&a.mul(b.at(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn sub(&self, b: &Self) -> Self {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&b.data).map(|(x, y)| x.sub(y)).collect(),
        }
    }

    pub fn frobenius(&self) -> T {
        let mut s = T::zero();
        for z in &self.data {
            s = s + z.norm_sqr();
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for z in &self.data {
            let a = z.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn first_cols(&self, k: usize) -> Self {
        let mut out = CMat::zeros(self.rows, k);
        for i in 0..self.rows {
            for j in 0..k {
                out.set(i, j, self.at(i, j).clone());
            }
        }
        out
    }

    pub fn cols_range(&self, from: usize, to: usize) -> Self {
        let mut out = CMat::zeros(self.rows, to - from);
        for i in 0..self.rows {
            for j in from..to {
                out.set(i, j - from, self.at(i, j).clone());
            }
        }
        out
    }
}

/// Modified Gram-Schmidt on the columns, applied twice.
pub fn orthonormalize<T: Real>(v: &mut CMat<T>) {
    for _ in 0..2 {
        for j in 0..v.cols {
            for k in 0..j {
                let mut d = C::zero();
                for i in 0..v.rows {
                    d = d.add(&v.at(i, k).conj().mul(v.at(i, j)));
                }
                for i in 0..v.rows {
                    let nv = v.at(i, j).sub(&v.at(i, k).mul(&d));
                    v.set(i, j, nv);
                }
            }
            let mut s = T::zero();
            for i in 0..v.rows {
                s = s + v.at(i, j).norm_sqr();
            }
            let inv = T::one() / s.sqrt();
            for i in 0..v.rows {
                let nv = v.at(i, j).scale(&inv);
                v.set(i, j, nv);
            }
        }
    }
}

/// Cyclic complex Jacobi on a Hermitian matrix.
///
/// Starts from the basis `v0` (orthonormal columns; identity when `None`)
/// and sweeps until the off-diagonal Frobenius norm falls below
/// `tol * ||A||_F`. Returns eigenvalues in ascending order with matching
/// eigenvector columns.
pub fn jacobi_eigh<T: Real>(a: &CMat<T>, v0: Option<CMat<T>>, tol: f64, max_sweeps: usize) -> (Vec<T>, CMat<T>) {
    let n = a.rows;
    let mut v = v0.unwrap_or_else(|| CMat::identity(n));
    let mut b = v.adjoint().matmul(a).matmul(&v);
    let scale = a.frobenius();
    let thresh = scale * T::from_f64(tol);
    for _ in 0..max_sweeps {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off + b.at(p, q).norm_sqr();
            }
        }
        let off = (off.clone() + off).sqrt();
        if off <= thresh {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut b, &mut v, p, q);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        b.at(i, i)
            .re
            .partial_cmp(&b.at(j, j).re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&i| b.at(i, i).re.clone()).collect();
    let mut vecs = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            vecs.set(r, k, v.at(r, i).clone());
        }
    }
    (vals, vecs)
}

fn rotate<T: Real>(b: &mut CMat<T>, v: &mut CMat<T>, p: usize, q: usize) {
    let n = b.rows;
    let apq = b.at(p, q).clone();
    let r = apq.abs();
    if r == T::zero() {
        return;
    }
    let w = C::new(apq.re.clone() / r.clone(), apq.im.clone() / r.clone());
    let app = b.at(p, p).re.clone();
    let aqq = b.at(q, q).re.clone();
    let two = T::from_f64(2.0);
    let tau = (aqq - app) / (two * r);
    let t = if tau == T::zero() {
        T::one()
    } else {
        let mag = T::one() / (tau.abs() + (T::one() + tau.clone() * tau.clone()).sqrt());
        if tau < T::zero() {
            -mag
        } else {
            mag
        }
    };
    let c = T::one() / (T::one() + t.clone() * t.clone()).sqrt();
    let s = t * c.clone();
    let wc = w.conj();
    let vpp = C::real(c.clone());
    let vpq = C::real(s.clone());
    let vqp = wc.scale(&(-s));
    let vqq = wc.scale(&c);
    for k in 0..n {
        let (x, y) = (b.at(k, p).clone(), b.at(k, q).clone());
        b.set(k, p, x.mul(&vpp).add(&y.mul(&vqp)));
        b.set(k, q, x.mul(&vpq).add(&y.mul(&vqq)));
    }
    for k in 0..n {
        let (x, y) = (b.at(p, k).clone(), b.at(q, k).clone());
        b.set(p, k, vpp.conj().mul(&x).add(&vqp.conj().mul(&y)));
        b.set(q, k, vpq.conj().mul(&x).add(&vqq.conj().mul(&y)));
    }
    b.set(p, q, C::zero());
    b.set(q, p, C::zero());
    let dp = b.at(p, p).re.clone();
    let dq = b.at(q, q).re.clone();
    b.set(p, p, C::real(dp));
    b.set(q, q, C::real(dq));
    for k in 0..v.rows {
        let (x, y) = (v.at(k, p).clone(), v.at(k, q).clone());
        v.set(k, p, x.mul(&vpp).add(&y.mul(&vqp)));
        v.set(k, q, x.mul(&vpq).add(&y.mul(&vqq)));
    }
}

/// Eigenvalues and eigenvectors of a Hermitian matrix in binary64.
pub fn eigh_f64(n: usize, a: &[(f64, f64)]) -> (Vec<f64>, CMat<f64>) {
    let m = CMat::<f64>::from_f64(n, n, a);
    jacobi_eigh(&m, None, 1e-15, 60)
}

/// Singular values (descending) of an m x k complex matrix in binary64.
pub fn singular_values_f64(rows: usize, cols: usize, a: &[(f64, f64)]) -> Vec<f64> {
    let m = CMat::<f64>::from_f64(rows, cols, a);
    let g = m.adjoint().matmul(&m);
    let (vals, _) = jacobi_eigh(&g, None, 1e-15, 60);
    let mut s: Vec<f64> = vals.into_iter().map(|x| x.max(0.0).sqrt()).collect();
    s.reverse();
    s
}
