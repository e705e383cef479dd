//! Arithmetic kernels shared by every algorithm in the crate.
//!
//! [`SoftArith`] works on [`Fp`] and supports any width. [`F64Arith`] runs on
//! native doubles for widths up to 53 bits, rounding each result to `t` bits
//! with an exact error term. It raises a fault flag whenever a value leaves
//! the range where the two kernels are guaranteed to agree bit for bit; the
//! [`with_arith!`](crate::with_arith) macro then replays the job in software.

use std::cell::{Cell, RefCell};
use std::fmt::Debug;

use super::flops;
use super::matrix::FpMatrix;
use super::real::Fp;
use super::scalar::FpScalar;
use super::PrecisionConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cx<R> {
    pub re: R,
    pub im: R,
}

impl<R: Copy> Cx<R> {
    pub fn new(re: R, im: R) -> Self {
        Cx { re, im }
    }
}

/// Dense row-major complex matrix over a kernel's real type.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<R> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Cx<R>>,
}

impl<R: Copy + Default> Mat<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Cx::default(); rows * cols],
        }
    }

    pub fn identity(n: usize, one: R) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Cx::new(one, R::default());
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Cx<R> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cx<R>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Leading `k` columns.
    pub fn first_cols(&self, k: usize) -> Self {
        let mut m = Mat::zeros(self.rows, k);
        for i in 0..self.rows {
            m.data[i * k..(i + 1) * k]
                .copy_from_slice(&self.data[i * self.cols..i * self.cols + k]);
        }
        m
    }

    pub fn row(&self, i: usize) -> &[Cx<R>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// The operations every algorithm needs. Each rounded operation is one flop.
///
/// Kernels never return errors from individual operations: the first error
/// is latched and reported by [`Arith::check`], and later results are
/// meaningless until then.
pub trait Arith {
    type R: Copy + Default + PartialEq + Debug;

    fn config(&self) -> &PrecisionConfig;
    fn unit_roundoff(&self) -> f64 {
        self.config().unit_roundoff()
    }

    fn zero(&self) -> Self::R {
        Self::R::default()
    }
    fn one(&self) -> Self::R;
    /// Import a value that is representable under the configuration.
    fn import(&self, x: &Fp) -> Self::R;
    fn export(&self, x: Self::R) -> Fp;
    /// Round an exact f64 to the working width.
    fn fl64(&self, x: f64) -> Self::R;
    /// Nearest f64, for diagnostics and parameter formulas.
    fn approx(&self, x: Self::R) -> f64;

    fn add(&self, a: Self::R, b: Self::R) -> Self::R;
    fn sub(&self, a: Self::R, b: Self::R) -> Self::R;
    fn mul(&self, a: Self::R, b: Self::R) -> Self::R;
    fn div(&self, a: Self::R, b: Self::R) -> Self::R;
    fn sqrt(&self, a: Self::R) -> Self::R;
    /// Exact scaling by a power of two.
    fn mul_pow2(&self, a: Self::R, k: i32) -> Self::R;
    fn neg(&self, a: Self::R) -> Self::R;
    fn abs(&self, a: Self::R) -> Self::R;
    fn lt(&self, a: Self::R, b: Self::R) -> bool;
    fn is_zero(&self, a: Self::R) -> bool;

    fn check(&self) -> Result<()>;
    fn count(&self, real: u64, complex: u64);
    /// Move the flops counted by this kernel to the thread counters.
    fn commit_flops(&self);

    fn half(&self, a: Self::R) -> Self::R {
        self.mul_pow2(a, -1)
    }

    fn max(&self, a: Self::R, b: Self::R) -> Self::R {
        if self.lt(a, b) {
            b
        } else {
            a
        }
    }

    fn cadd(&self, a: Cx<Self::R>, b: Cx<Self::R>) -> Cx<Self::R> {
        self.count(0, 1);
        Cx::new(self.add(a.re, b.re), self.add(a.im, b.im))
    }

    fn csub(&self, a: Cx<Self::R>, b: Cx<Self::R>) -> Cx<Self::R> {
        self.count(0, 1);
        Cx::new(self.sub(a.re, b.re), self.sub(a.im, b.im))
    }

    fn cmul(&self, a: Cx<Self::R>, b: Cx<Self::R>) -> Cx<Self::R> {
        self.count(0, 1);
        let rr = self.mul(a.re, b.re);
        let ii = self.mul(a.im, b.im);
        let ri = self.mul(a.re, b.im);
        let ir = self.mul(a.im, b.re);
        Cx::new(self.sub(rr, ii), self.add(ri, ir))
    }

    /// Product with a real scalar: two rounded multiplications.
    fn cscale(&self, a: Cx<Self::R>, s: Self::R) -> Cx<Self::R> {
        self.count(0, 1);
        Cx::new(self.mul(a.re, s), self.mul(a.im, s))
    }

    fn cdiv_real(&self, a: Cx<Self::R>, s: Self::R) -> Cx<Self::R> {
        self.count(0, 1);
        Cx::new(self.div(a.re, s), self.div(a.im, s))
    }

    fn cconj(&self, a: Cx<Self::R>) -> Cx<Self::R> {
        Cx::new(a.re, self.neg(a.im))
    }

    fn cneg(&self, a: Cx<Self::R>) -> Cx<Self::R> {
        Cx::new(self.neg(a.re), self.neg(a.im))
    }

    fn chalf(&self, a: Cx<Self::R>) -> Cx<Self::R> {
        Cx::new(self.half(a.re), self.half(a.im))
    }

    fn cimport(&self, x: &FpScalar) -> Cx<Self::R> {
        Cx::new(self.import(&x.re), self.import(&x.im))
    }

    fn cexport(&self, x: Cx<Self::R>) -> FpScalar {
        FpScalar::new(self.export(x.re), self.export(x.im))
    }

    fn import_mat(&self, m: &FpMatrix) -> Mat<Self::R> {
        Mat {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().iter().map(|x| self.cimport(x)).collect(),
        }
    }

    fn export_mat(&self, m: &Mat<Self::R>) -> FpMatrix {
        FpMatrix::from_data(
            m.rows,
            m.cols,
            m.data.iter().map(|x| self.cexport(*x)).collect(),
        )
        .expect("shape is consistent")
    }

    fn identity(&self, n: usize) -> Mat<Self::R> {
        Mat::identity(n, self.one())
    }

    /// Exact conjugate transpose.
    fn adjoint(&self, m: &Mat<Self::R>) -> Mat<Self::R> {
        let mut out = Mat::zeros(m.cols, m.rows);
        for i in 0..m.rows {
            for j in 0..m.cols {
                out.set(j, i, self.cconj(m.at(i, j)));
            }
        }
        out
    }

    /// Nearest f64 rendering of a matrix.
    fn approx_mat(&self, m: &Mat<Self::R>) -> Vec<(f64, f64)> {
        m.data
            .iter()
            .map(|x| (self.approx(x.re), self.approx(x.im)))
            .collect()
    }
}

/// Software kernel over [`Fp`]; handles every supported width and reports
/// range errors exactly.
pub struct SoftArith {
    cfg: PrecisionConfig,
    err: RefCell<Option<Error>>,
    real: Cell<u64>,
    complex: Cell<u64>,
}

impl SoftArith {
    pub fn new(cfg: &PrecisionConfig) -> Self {
        SoftArith {
            cfg: cfg.clone(),
            err: RefCell::new(None),
            real: Cell::new(0),
            complex: Cell::new(0),
        }
    }

    fn take(&self, r: Result<Fp>) -> Fp {
        match r {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.err.borrow_mut();
                if slot.is_none() {
                    *slot = Some(e);
                }
                Fp::ZERO
            }
        }
    }

    #[inline]
    fn tick(&self) {
        self.real.set(self.real.get() + 1);
    }
}

impl Arith for SoftArith {
    type R = Fp;

    fn config(&self) -> &PrecisionConfig {
        &self.cfg
    }

    fn one(&self) -> Fp {
        Fp::ONE
    }

    fn import(&self, x: &Fp) -> Fp {
        if !x.is_representable(&self.cfg) {
            let r = x.round_to(&self.cfg);
            return self.take(r);
        }
        *x
    }

    fn export(&self, x: Fp) -> Fp {
        x
    }

    fn fl64(&self, x: f64) -> Fp {
        self.take(Fp::fl_f64(x, &self.cfg))
    }

    fn approx(&self, x: Fp) -> f64 {
        x.to_f64()
    }

    fn add(&self, a: Fp, b: Fp) -> Fp {
        self.tick();
        self.take(a.add(&b, &self.cfg))
    }

    fn sub(&self, a: Fp, b: Fp) -> Fp {
        self.tick();
        self.take(a.sub(&b, &self.cfg))
    }

    fn mul(&self, a: Fp, b: Fp) -> Fp {
        self.tick();
        self.take(a.mul(&b, &self.cfg))
    }

    fn div(&self, a: Fp, b: Fp) -> Fp {
        self.tick();
        self.take(a.div(&b, &self.cfg))
    }

    fn sqrt(&self, a: Fp) -> Fp {
        self.tick();
        self.take(a.sqrt(&self.cfg))
    }

    fn mul_pow2(&self, a: Fp, k: i32) -> Fp {
        self.take(a.mul_pow2(k, &self.cfg))
    }

    fn neg(&self, a: Fp) -> Fp {
        a.neg()
    }

    fn abs(&self, a: Fp) -> Fp {
        a.abs()
    }

    fn lt(&self, a: Fp, b: Fp) -> bool {
        a < b
    }

    fn is_zero(&self, a: Fp) -> bool {
        a.is_zero()
    }

    fn check(&self) -> Result<()> {
        match &*self.err.borrow() {
            Some(e) => Err(e.clone()),
            None => Ok(()),
        }
    }

    fn count(&self, real: u64, complex: u64) {
        self.real.set(self.real.get() + real);
        self.complex.set(self.complex.get() + complex);
    }

    fn commit_flops(&self) {
        flops::record(self.real.get(), self.complex.get());
    }
}

/// Native kernel for widths up to 53 bits.
///
/// Results are `RN_t(x op y)`: the binary64 result is rounded to `t` bits,
/// with the sign of the exact error term breaking binary64 ties, which is
/// exactly single rounding. Values must stay within `[lo, hi)` (a subset of
/// both the configured and the safe binary64 range); anything else sets the
/// fault flag.
pub struct F64Arith {
    cfg: PrecisionConfig,
    drop_bits: u32,
    lo: f64,
    hi: f64,
    fault: Cell<bool>,
    real: Cell<u64>,
    complex: Cell<u64>,
}

const SAFE_EXP: i32 = 900;

impl F64Arith {
    pub fn supports(cfg: &PrecisionConfig) -> bool {
        cfg.mantissa_bits() <= 53
    }

    pub fn new(cfg: &PrecisionConfig) -> Self {
        assert!(Self::supports(cfg));
        let lo = cfg.emin().max(-SAFE_EXP);
        let hi = (cfg.emax() + 1).min(SAFE_EXP);
        F64Arith {
            cfg: cfg.clone(),
            drop_bits: 53 - cfg.mantissa_bits(),
            lo: 2f64.powi(lo),
            hi: 2f64.powi(hi),
            fault: Cell::new(false),
            real: Cell::new(0),
            complex: Cell::new(0),
        }
    }

    pub fn faulted(&self) -> bool {
        self.fault.get()
    }

    #[inline(always)]
    fn guard(&self, x: f64) -> f64 {
        let a = x.abs();
        if !(a == 0.0 || (a >= self.lo && a < self.hi)) {
            self.fault.set(true);
        }
        x
    }

    #[inline(always)]
    fn tick(&self) {
        self.real.set(self.real.get() + 1);
    }

    /// Round a binary64 value `p` to `t` bits. `err` carries the sign of
    /// `exact - p` (zero when `p` is exact).
    #[inline(always)]
    fn round_t(&self, p: f64, err: f64) -> f64 {
        let d = self.drop_bits;
        if p == 0.0 || !p.is_finite() {
            return p;
        }
        let bits = p.to_bits();
        let mask = (1u64 << d) - 1;
        let low = bits & mask;
        let half = 1u64 << (d - 1);
        let base = bits & !mask;
        let up = if low != half {
            low > half
        } else if err == 0.0 {
            (base >> d) & 1 == 1
        } else {
            (err > 0.0) == (p > 0.0)
        };
        f64::from_bits(if up { base + (1u64 << d) } else { base })
    }
}

#[inline(always)]
fn split(a: f64) -> (f64, f64) {
    let c = 134_217_729.0 * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Error term of a binary64 product `p = fl(a*b)` (Dekker).
#[inline(always)]
fn prod_err(a: f64, b: f64, p: f64) -> f64 {
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (((ah * bh - p) + ah * bl) + al * bh) + al * bl
}

/// Error term of a binary64 sum `s = fl(a+b)` (Knuth).
#[inline(always)]
fn sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

impl Arith for F64Arith {
    type R = f64;

    fn config(&self) -> &PrecisionConfig {
        &self.cfg
    }

    fn one(&self) -> f64 {
        1.0
    }

    fn import(&self, x: &Fp) -> f64 {
        if !x.is_representable(&self.cfg) {
            // inputs are expected to be representable; round defensively
            return self.fl64(x.to_f64());
        }
        self.guard(x.to_f64())
    }

    fn export(&self, x: f64) -> Fp {
        Fp::from_f64_exact(x)
    }

    fn fl64(&self, x: f64) -> f64 {
        if self.drop_bits == 0 {
            return self.guard(x);
        }
        self.guard(self.round_t(x, 0.0))
    }

    fn approx(&self, x: f64) -> f64 {
        x
    }

    #[inline(always)]
    fn add(&self, a: f64, b: f64) -> f64 {
        self.tick();
        let s = a + b;
        if self.drop_bits == 0 {
            return self.guard(s);
        }
        self.guard(self.round_t(s, sum_err(a, b, s)))
    }

    #[inline(always)]
    fn sub(&self, a: f64, b: f64) -> f64 {
        self.add(a, -b)
    }

    #[inline(always)]
    fn mul(&self, a: f64, b: f64) -> f64 {
        self.tick();
        let p = a * b;
        if self.drop_bits == 0 {
            return self.guard(p);
        }
        self.guard(self.round_t(p, prod_err(a, b, p)))
    }

    fn div(&self, a: f64, b: f64) -> f64 {
        self.tick();
        if b == 0.0 {
            self.fault.set(true);
            return 0.0;
        }
        let q = a / b;
        if self.drop_bits == 0 {
            return self.guard(q);
        }
        let p = q * b;
        let r = (a - p) - prod_err(q, b, p);
        let err = if b > 0.0 { r } else { -r };
        self.guard(self.round_t(q, err))
    }

    fn sqrt(&self, a: f64) -> f64 {
        self.tick();
        if a < 0.0 {
            self.fault.set(true);
            return 0.0;
        }
        let s = a.sqrt();
        if self.drop_bits == 0 {
            return self.guard(s);
        }
        let p = s * s;
        let r = (a - p) - prod_err(s, s, p);
        self.guard(self.round_t(s, r))
    }

    fn mul_pow2(&self, a: f64, k: i32) -> f64 {
        self.guard(a * 2f64.powi(k))
    }

    fn neg(&self, a: f64) -> f64 {
        -a
    }

    fn abs(&self, a: f64) -> f64 {
        a.abs()
    }

    fn lt(&self, a: f64, b: f64) -> bool {
        a < b
    }

    fn is_zero(&self, a: f64) -> bool {
        a == 0.0
    }

    fn check(&self) -> Result<()> {
        if self.fault.get() {
            Err(Error::Range(
                "value outside the native kernel's safe range".into(),
            ))
        } else {
            Ok(())
        }
    }

    fn count(&self, real: u64, complex: u64) {
        self.real.set(self.real.get() + real);
        self.complex.set(self.complex.get() + complex);
    }

    fn commit_flops(&self) {
        flops::record(self.real.get(), self.complex.get());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn both(t: u32) -> (SoftArith, F64Arith) {
        let c = PrecisionConfig::new(t).unwrap();
        (SoftArith::new(&c), F64Arith::new(&c))
    }

    fn agree(t: u32, a: f64, b: f64) {
        let (s, f) = both(t);
        let (fa, fb) = (f.fl64(a), f.fl64(b));
        let (sa, sb) = (s.fl64(a), s.fl64(b));
        assert_eq!(Fp::from_f64_exact(fa), sa);
        assert_eq!(Fp::from_f64_exact(fb), sb);
        let pairs = [
            (f.add(fa, fb), s.add(sa, sb)),
            (f.sub(fa, fb), s.sub(sa, sb)),
            (f.mul(fa, fb), s.mul(sa, sb)),
            (f.div(fa, fb), s.div(sa, sb)),
            (f.sqrt(fa.abs()), s.sqrt(sa.abs())),
        ];
        for (k, (x, y)) in pairs.iter().enumerate() {
            assert_eq!(Fp::from_f64_exact(*x), *y, "t={t} a={a:e} b={b:e} op={k}");
        }
        assert!(!f.faulted());
    }

    #[test]
    fn ties_at_reduced_width() {
        for t in [8u32, 11, 24, 52] {
            let ulp = 2f64.powi(1 - t as i32);
            // exact midpoints between 1 and 1+ulp, above and below
            agree(t, 1.0, ulp / 2.0);
            agree(t, 1.0 + ulp, ulp / 2.0);
            agree(t, 1.0, ulp / 2.0 + 2f64.powi(-60));
            agree(t, 1.0, ulp / 2.0 - 2f64.powi(-60));
            agree(t, 3.0, -ulp);
        }
    }

    #[test]
    fn fault_outside_safe_range() {
        let (_, f) = both(24);
        let big = f.fl64(2f64.powi(800));
        let _ = f.mul(big, big);
        assert!(f.faulted());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(3000))]
        #[test]
        fn native_kernel_matches_soft(
            t in 8u32..=53,
            a in -1e6f64..1e6,
            b in -1e6f64..1e6,
            ea in -200i32..200,
            eb in -200i32..200,
        ) {
            prop_assume!(a != 0.0 && b != 0.0);
            agree(t, a * 2f64.powi(ea), b * 2f64.powi(eb));
        }

        #[test]
        fn native_kernel_matches_soft_near_cancellation(
            t in 8u32..=53,
            a in 0.5f64..2.0,
            k in 0u32..60,
        ) {
            let b = -(a + a * 2f64.powi(-(k as i32)));
            agree(t, a, b);
        }
    }
}
