//! Soft real numbers with an integer mantissa and a binary exponent.
//!
//! Every operation computes the exact result (or enough of it plus a sticky
//! bit) and rounds once to the configured width, ties to even.

use std::cmp::Ordering;
use std::fmt;

use super::wide::U256;
use super::PrecisionConfig;
use crate::error::{Error, Result};

/// A real value `(-1)^neg * mant * 2^(exp - 127)` with `mant` normalized so
/// bit 127 is set; zero is `mant == 0, exp == 0, neg == false`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fp {
    neg: bool,
    exp: i32,
    mant: u128,
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fp({})", self.to_hex())
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl Fp {
    pub const ZERO: Fp = Fp {
        neg: false,
        exp: 0,
        mant: 0,
    };
    pub const ONE: Fp = Fp {
        neg: false,
        exp: 0,
        mant: 1 << 127,
    };

    pub fn is_zero(&self) -> bool {
        self.mant == 0
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    /// Exponent of the leading bit: the value lies in `[2^e, 2^(e+1))`.
    pub fn exponent(&self) -> i32 {
        self.exp
    }

    /// Normalized mantissa with bit 127 set (zero for zero).
    pub fn mantissa(&self) -> u128 {
        self.mant
    }

    /// Number of significant bits (position of the lowest set bit counted from the top).
    pub fn precision(&self) -> u32 {
        if self.mant == 0 {
            0
        } else {
            128 - self.mant.trailing_zeros()
        }
    }

    pub fn neg(&self) -> Fp {
        if self.is_zero() {
            *self
        } else {
            Fp {
                neg: !self.neg,
                ..*self
            }
        }
    }

    pub fn abs(&self) -> Fp {
        Fp { neg: false, ..*self }
    }

    /// Exact conversion of a finite f64 (subnormals included).
    pub fn from_f64_exact(x: f64) -> Fp {
        assert!(x.is_finite(), "non-finite value {x}");
        if x == 0.0 {
            return Fp::ZERO;
        }
        let bits = x.to_bits();
        let neg = bits >> 63 == 1;
        let field = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), field - 1075)
        };
        // value = m * 2^e
        let lz = (m as u128).leading_zeros();
        let mant = (m as u128) << lz;
        let exp = e + (127 - lz as i32);
        Fp { neg, exp, mant }
    }

    /// Exact conversion of a signed integer.
    pub fn from_i64(v: i64) -> Fp {
        if v == 0 {
            return Fp::ZERO;
        }
        let m = v.unsigned_abs() as u128;
        let lz = m.leading_zeros();
        Fp {
            neg: v < 0,
            exp: 127 - lz as i32,
            mant: m << lz,
        }
    }

    /// Exact value `(-1)^neg * m * 2^scale`.
    pub fn from_int_scaled(neg: bool, m: u128, scale: i32) -> Fp {
        if m == 0 {
            return Fp::ZERO;
        }
        let lz = m.leading_zeros();
        Fp {
            neg,
            exp: scale + 127 - lz as i32,
            mant: m << lz,
        }
    }

    /// Nearest f64 (ties to even). Values outside the f64 range saturate to
    /// infinity or flush to zero; this is a diagnostic conversion.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let sign = if self.neg { -1.0 } else { 1.0 };
        if self.exp > 1023 {
            return sign * f64::INFINITY;
        }
        if self.exp < -1074 {
            return sign * 0.0;
        }
        // keep 53 bits (fewer for subnormals), round to even
        let keep: u32 = if self.exp >= -1022 {
            53
        } else {
            (53 - (-1022 - self.exp)) as u32
        };
        let w = U256::from_u128(self.mant);
        let drop = 128 - keep;
        let mut kept = (self.mant >> drop) as u64;
        let guard = w.bit(drop - 1);
        let rest = !w.low_bits(drop - 1).is_zero();
        if guard && (rest || kept & 1 == 1) {
            kept += 1;
        }
        let scale = self.exp - (keep as i32 - 1);
        sign * (kept as f64) * pow2_f64(scale)
    }

    /// Round an exact f64 value to the configured width.
    pub fn fl_f64(x: f64, cfg: &PrecisionConfig) -> Result<Fp> {
        Fp::from_f64_exact(x).round_to(cfg)
    }

    /// Round this value to the configured width.
    pub fn round_to(&self, cfg: &PrecisionConfig) -> Result<Fp> {
        if self.is_zero() {
            return Ok(Fp::ZERO);
        }
        round_wide(
            self.neg,
            U256::from_u128(self.mant),
            self.exp - 127,
            false,
            cfg,
        )
    }

    /// True when the value is exactly representable under `cfg`.
    pub fn is_representable(&self, cfg: &PrecisionConfig) -> bool {
        self.is_zero()
            || (self.precision() <= cfg.mantissa_bits()
                && self.exp >= cfg.emin()
                && self.exp <= cfg.emax())
    }

    pub fn add(&self, o: &Fp, cfg: &PrecisionConfig) -> Result<Fp> {
        if self.is_zero() {
            return o.round_to(cfg);
        }
        if o.is_zero() {
            return self.round_to(cfg);
        }
        let (a, b) = if cmp_mag(self, o) == Ordering::Less {
            (o, self)
        } else {
            (self, o)
        };
        let wa = U256::from_u128(a.mant).shl(127);
        let d = (a.exp - b.exp) as u32;
        let wb_full = U256::from_u128(b.mant).shl(127);
        let (wb, lost) = if d >= 255 {
            (U256::ZERO, true)
        } else {
            (wb_full.shr(d), !wb_full.low_bits(d).is_zero())
        };
        // jam lost bits into the lowest position
        let wb = if lost {
            U256::new(wb.hi, wb.lo | 1)
        } else {
            wb
        };
        let w = if a.neg == b.neg {
            wa.wrapping_add(&wb)
        } else {
            wa.wrapping_sub(&wb)
        };
        if w.is_zero() {
            return Ok(Fp::ZERO);
        }
        round_wide(a.neg, w, a.exp - 254, false, cfg)
    }

    pub fn sub(&self, o: &Fp, cfg: &PrecisionConfig) -> Result<Fp> {
        self.add(&o.neg(), cfg)
    }

    pub fn mul(&self, o: &Fp, cfg: &PrecisionConfig) -> Result<Fp> {
        if self.is_zero() || o.is_zero() {
            return Ok(Fp::ZERO);
        }
        let w = U256::mul_u128(self.mant, o.mant);
        round_wide(self.neg != o.neg, w, self.exp + o.exp - 254, false, cfg)
    }

    pub fn div(&self, o: &Fp, cfg: &PrecisionConfig) -> Result<Fp> {
        if o.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        if self.is_zero() {
            return Ok(Fp::ZERO);
        }
        let (ma, mb) = (self.mant, o.mant);
        let mut q = U256::from_u128((ma >= mb) as u128);
        let mut r = if ma >= mb { ma - mb } else { ma };
        for _ in 0..130 {
            let carry = r >> 127 == 1;
            let r2 = r << 1;
            let bit = carry || r2 >= mb;
            r = if bit { r2.wrapping_sub(mb) } else { r2 };
            q = q.shl(1);
            if bit {
                q.lo |= 1;
            }
        }
        round_wide(
            self.neg != o.neg,
            q,
            self.exp - o.exp - 130,
            r != 0,
            cfg,
        )
    }

    pub fn sqrt(&self, cfg: &PrecisionConfig) -> Result<Fp> {
        if self.is_zero() {
            return Ok(Fp::ZERO);
        }
        if self.neg {
            return Err(Error::Domain("square root of a negative value".into()));
        }
        // value = mant * 2^(exp-127); pick s so that exp-127-s is even
        let base = self.exp - 127;
        let s: u32 = if (base - 127).rem_euclid(2) == 0 {
            127
        } else {
            128
        };
        let k = base - s as i32;
        let n = U256::from_u128(self.mant).shl(s);
        let (r, rem) = n.isqrt();
        let guard = rem > U256::from_u128(r);
        let w = U256::from_u128(r).shl(1).wrapping_add(&U256::from_u128(guard as u128));
        round_wide(false, w, k / 2 - 1, !rem.is_zero(), cfg)
    }

    /// Exact halving; errors only on underflow.
    pub fn half(&self, cfg: &PrecisionConfig) -> Result<Fp> {
        self.mul_pow2(-1, cfg)
    }

    /// Exact scaling by `2^k`.
    pub fn mul_pow2(&self, k: i32, cfg: &PrecisionConfig) -> Result<Fp> {
        if self.is_zero() {
            return Ok(*self);
        }
        let exp = self.exp + k;
        check_range(exp, cfg)?;
        Ok(Fp { exp, ..*self })
    }

    /// Lowercase hexadecimal floating-point literal, e.g. `0x1.8p+1`.
    pub fn to_hex(&self) -> String {
        if self.is_zero() {
            return "0x0p+0".to_string();
        }
        let sign = if self.neg { "-" } else { "" };
        let frac = self.mant << 1;
        let mut digits = format!("{:032x}", frac);
        while digits.ends_with('0') {
            digits.pop();
        }
        let exp = if self.exp >= 0 {
            format!("+{}", self.exp)
        } else {
            format!("{}", self.exp)
        };
        if digits.is_empty() {
            format!("{sign}0x1p{exp}")
        } else {
            format!("{sign}0x1.{digits}p{exp}")
        }
    }

    /// Parse a hexadecimal floating-point literal (exactly, without rounding).
    pub fn from_hex(s: &str) -> Result<Fp> {
        let bad = || Error::Parse(format!("bad hex float literal `{s}`"));
        let t = s.trim();
        let (neg, t) = match t.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let t = t
            .strip_prefix("0x")
            .or_else(|| t.strip_prefix("0X"))
            .ok_or_else(bad)?;
        let (body, exp) = match t.find(['p', 'P']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (int_part, frac_part) = match body.find('.') {
            Some(i) => (&body[..i], &body[i + 1..]),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        let all: String = format!("{int_part}{frac_part}");
        let all = all.trim_start_matches('0');
        let mut digits = all.to_string();
        let mut shift = -4 * frac_part.len() as i32;
        while digits.ends_with('0') {
            digits.pop();
            shift += 4;
        }
        if digits.is_empty() {
            return Ok(Fp::ZERO);
        }
        let mut w = U256::ZERO;
        for ch in digits.chars() {
            if w.hi >> 120 != 0 {
                return Err(bad());
            }
            let d = ch.to_digit(16).ok_or_else(bad)? as u128;
            w = w.shl(4).wrapping_add(&U256::from_u128(d));
        }
        let msb = w.msb();
        let low = if w.lo != 0 {
            w.lo.trailing_zeros()
        } else {
            128 + w.hi.trailing_zeros()
        };
        if msb - low >= 128 {
            return Err(bad());
        }
        let m = w.shr(low).lo;
        let lz = m.leading_zeros();
        let v = Fp {
            neg,
            exp: exp + shift + low as i32 + (127 - lz as i32),
            mant: m << lz,
        };
        Ok(v)
    }

    pub fn cmp_value(&self, o: &Fp) -> Ordering {
        match (self.is_zero(), o.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => {
                if o.neg {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
            (false, true) => {
                if self.neg {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            _ => match (self.neg, o.neg) {
                (false, true) => Ordering::Greater,
                (true, false) => Ordering::Less,
                (false, false) => cmp_mag(self, o),
                (true, true) => cmp_mag(o, self),
            },
        }
    }
}

impl PartialOrd for Fp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

fn cmp_mag(a: &Fp, b: &Fp) -> Ordering {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => a.exp.cmp(&b.exp).then(a.mant.cmp(&b.mant)),
    }
}

pub(crate) fn pow2_f64(k: i32) -> f64 {
    // split to stay within the normal range at each step
    let mut v = 1.0f64;
    let mut k = k;
    while k > 1000 {
        v *= 2f64.powi(1000);
        k -= 1000;
    }
    while k < -1000 {
        v *= 2f64.powi(-1000);
        k += 1000;
    }
    v * 2f64.powi(k)
}

fn check_range(exp: i32, cfg: &PrecisionConfig) -> Result<()> {
    if exp > cfg.emax() {
        Err(Error::Range(format!(
            "overflow: exponent {exp} exceeds {} ({} exponent bits)",
            cfg.emax(),
            cfg.exponent_bits()
        )))
    } else if exp < cfg.emin() {
        Err(Error::Range(format!(
            "underflow: exponent {exp} below {} ({} exponent bits)",
            cfg.emin(),
            cfg.exponent_bits()
        )))
    } else {
        Ok(())
    }
}

/// Round `(-1)^neg * (w + sticky*tiny) * 2^scale` to the configured width.
/// `sticky` may only be set when `w` carries at least `t + 1` significant bits.
pub(crate) fn round_wide(neg: bool, w: U256, scale: i32, sticky: bool, cfg: &PrecisionConfig) -> Result<Fp> {
    debug_assert!(!w.is_zero());
    let t = cfg.mantissa_bits();
    let msb = w.msb();
    let mut e = msb as i32 + scale;
    let mant = if msb < t {
        debug_assert!(!sticky);
        w.lo << (127 - msb)
    } else {
        let drop = msb + 1 - t;
        let mut kept = w.shr(drop).lo;
        let guard = w.bit(drop - 1);
        let rest = sticky || !w.low_bits(drop - 1).is_zero();
        if guard && (rest || kept & 1 == 1) {
            let (k, overflow) = kept.overflowing_add(1);
            if overflow || (t < 128 && k >> t == 1) {
                kept = 1u128 << (t - 1);
                e += 1;
            } else {
                kept = k;
            }
        }
        kept << (128 - t)
    };
    check_range(e, cfg)?;
    Ok(Fp { neg, exp: e, mant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Signed, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(t: u32) -> PrecisionConfig {
        PrecisionConfig::new(t).unwrap()
    }

    fn to_rat(x: &Fp) -> BigRational {
        if x.is_zero() {
            return BigRational::zero();
        }
        let m = BigInt::from(x.mant);
        let e = x.exp - 127;
        let v = if e >= 0 {
            BigRational::from_integer(m << e as usize)
        } else {
            BigRational::new(m, BigInt::one() << (-e) as usize)
        };
        if x.neg {
            -v
        } else {
            v
        }
    }

    fn random_fp(rng: &mut ChaCha8Rng, c: &PrecisionConfig) -> Fp {
        let t = c.mantissa_bits();
        let m: u128 = rng.gen::<u128>() | (1 << 127);
        let m = if t < 128 { (m >> (128 - t)) << (128 - t) } else { m };
        Fp {
            neg: rng.gen(),
            exp: rng.gen_range(-40..40),
            mant: m,
        }
    }

    #[test]
    fn f64_round_trip() {
        for x in [1.0, -0.1, 3.5e-300, 1.7e308, 5e-324, 2.0f64.powi(-1022)] {
            assert_eq!(Fp::from_f64_exact(x).to_f64(), x);
        }
    }

    #[test]
    fn tie_rounds_to_even() {
        for t in [8, 24, 53, 100, 128] {
            let c = cfg(t);
            let tiny = Fp::ONE.mul_pow2(-(t as i32), &c).unwrap();
            assert_eq!(Fp::ONE.add(&tiny, &c).unwrap(), Fp::ONE);
            let below = Fp::ONE.mul_pow2(-(t as i32) - 2, &c).unwrap();
            assert_eq!(Fp::ONE.add(&below, &c).unwrap(), Fp::ONE);
        }
    }

    #[test]
    fn third_at_eight_bits() {
        let c = cfg(8);
        let q = Fp::ONE.div(&Fp::from_i64(3), &c).unwrap();
        let exact = BigRational::new(BigInt::one(), BigInt::from(3));
        let err = (to_rat(&q) - &exact).abs();
        let bound = exact / BigRational::from_integer(BigInt::from(256));
        assert!(err <= bound);
    }

    #[test]
    fn halving_is_exact() {
        let c = cfg(53);
        assert_eq!(Fp::from_i64(3).half(&c).unwrap().to_f64(), 1.5);
        let mut x = Fp::from_i64(1024);
        for _ in 0..10 {
            x = x.half(&c).unwrap();
        }
        assert_eq!(x, Fp::ONE);
        let third = Fp::ONE.div(&Fp::from_i64(3), &c).unwrap();
        let h = third.half(&c).unwrap();
        assert_eq!(h.mantissa(), third.mantissa());
        assert_eq!(h.exponent(), third.exponent() - 1);
    }

    #[test]
    fn range_errors() {
        let c = PrecisionConfig::with_exponent_bits(24, 8).unwrap();
        let big = Fp::from_i64(1).mul_pow2(127, &c).unwrap();
        assert!(matches!(big.mul(&big, &c), Err(Error::Range(_))));
        let small = Fp::from_i64(1).mul_pow2(-126, &c).unwrap();
        assert!(matches!(small.half(&c), Err(Error::Range(_))));
    }

    #[test]
    fn rounding_contract_against_rationals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in [8u32, 16, 24, 53, 64, 113, 128] {
            let c = cfg(t);
            let u = BigRational::new(BigInt::one(), BigInt::one() << t as usize);
            for _ in 0..2000 {
                let x = random_fp(&mut rng, &c);
                let y = random_fp(&mut rng, &c);
                let (rx, ry) = (to_rat(&x), to_rat(&y));
                for (got, exact) in [
                    (x.add(&y, &c).unwrap(), &rx + &ry),
                    (x.sub(&y, &c).unwrap(), &rx - &ry),
                    (x.mul(&y, &c).unwrap(), &rx * &ry),
                    (x.div(&y, &c).unwrap(), &rx / &ry),
                ] {
                    assert!(got.is_representable(&c));
                    let err = (to_rat(&got) - &exact).abs();
                    assert!(err <= &u * exact.abs(), "t={t} x={x:?} y={y:?}");
                }
            }
        }
    }

    #[test]
    fn nearest_is_really_nearest() {
        // neighbours of the result must not be closer than the result itself
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for t in [8u32, 24, 53, 128] {
            let c = cfg(t);
            for _ in 0..500 {
                let x = random_fp(&mut rng, &c);
                let y = random_fp(&mut rng, &c);
                let exact = to_rat(&x) * to_rat(&y);
                let got = x.mul(&y, &c).unwrap();
                let ulp = to_rat(&Fp::ONE.mul_pow2(got.exponent() + 1 - t as i32, &c).unwrap());
                let err = (to_rat(&got) - &exact).abs();
                assert!(err * BigRational::from_integer(BigInt::from(2)) <= ulp);
            }
        }
    }

    #[test]
    fn sqrt_matches_rational_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in [8u32, 24, 53, 127, 128] {
            let c = cfg(t);
            for _ in 0..300 {
                let x = random_fp(&mut rng, &c).abs();
                let s = x.sqrt(&c).unwrap();
                let rs = to_rat(&s);
                let rx = to_rat(&x);
                // s must be the nearest t-bit value: check (s - ulp/2)^2 <= x <= (s + ulp/2)^2
                let ulp = to_rat(&Fp::ONE.mul_pow2(s.exponent() + 1 - t as i32, &c).unwrap());
                let half = &ulp / BigRational::from_integer(BigInt::from(2));
                let lo = &rs - &half;
                let hi = &rs + &half;
                assert!(&lo * &lo <= rx && rx <= &hi * &hi, "t={t}");
            }
        }
        assert_eq!(Fp::from_i64(9).sqrt(&cfg(8)).unwrap(), Fp::from_i64(3));
    }

    #[test]
    fn t53_matches_native_binary64() {
        let c = PrecisionConfig::with_exponent_bits(53, 11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20000 {
            let a: f64 = rng.gen_range(-1e3..1e3) * 2f64.powi(rng.gen_range(-60..60));
            let b: f64 = rng.gen_range(-1e3..1e3) * 2f64.powi(rng.gen_range(-60..60));
            let (fa, fb) = (Fp::from_f64_exact(a), Fp::from_f64_exact(b));
            assert_eq!(fa.add(&fb, &c).unwrap().to_f64(), a + b);
            assert_eq!(fa.sub(&fb, &c).unwrap().to_f64(), a - b);
            assert_eq!(fa.mul(&fb, &c).unwrap().to_f64(), a * b);
            assert_eq!(fa.div(&fb, &c).unwrap().to_f64(), a / b);
            assert_eq!(fa.abs().sqrt(&c).unwrap().to_f64(), a.abs().sqrt());
        }
    }

    #[test]
    fn hex_round_trip() {
        let c = cfg(128);
        let third = Fp::ONE.div(&Fp::from_i64(3), &c).unwrap();
        for x in [Fp::ZERO, Fp::ONE, Fp::from_i64(-3), third, third.neg()] {
            assert_eq!(Fp::from_hex(&x.to_hex()).unwrap(), x);
        }
        assert_eq!(Fp::from_hex("0x1.8p+1").unwrap(), Fp::from_i64(3));
        assert_eq!(Fp::from_i64(3).to_hex(), "0x1.8p+1");
        assert!(Fp::from_hex("12").is_err());
    }
}
