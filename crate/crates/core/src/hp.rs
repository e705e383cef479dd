//! Conversions between [`Fp`] and arbitrary-precision `BigFloat` values, used
//! by the sampling routines at widths beyond binary64 and by the oracles.

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};

use crate::error::{Error, Result};
use crate::fparith::real::round_wide;
use crate::fparith::wide::U256;
use crate::fparith::{Fp, PrecisionConfig};

pub const RM: RoundingMode = RoundingMode::ToEven;

/// Arbitrary-precision context: working precision in bits plus the constant cache.
pub struct Hp {
    pub p: usize,
    pub cc: Consts,
}

impl Hp {
    pub fn new(p: usize) -> Self {
        Hp {
            p,
            cc: Consts::new().expect("constant cache allocation"),
        }
    }

    pub fn from_f64(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }
    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.p, RM)
    }
    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }
    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.p, RM)
    }
    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(self.p, RM)
    }
    pub fn ln(&mut self, a: &BigFloat) -> BigFloat {
        a.ln(self.p, RM, &mut self.cc)
    }
    pub fn sin(&mut self, a: &BigFloat) -> BigFloat {
        a.sin(self.p, RM, &mut self.cc)
    }
    pub fn cos(&mut self, a: &BigFloat) -> BigFloat {
        a.cos(self.p, RM, &mut self.cc)
    }
    pub fn pi(&mut self) -> BigFloat {
        self.cc.pi(self.p, RM)
    }
}

thread_local! {
    static CACHE: std::cell::RefCell<Option<Hp>> = const { std::cell::RefCell::new(None) };
}

/// Run `f` with a per-thread context at precision `p`, reusing its constant cache.
pub fn with_hp<T>(p: usize, f: impl FnOnce(&mut Hp) -> T) -> T {
    CACHE.with(|c| {
        let mut slot = c.borrow_mut();
        if slot.as_ref().map(|h| h.p) != Some(p) {
            *slot = Some(Hp::new(p));
        }
        f(slot.as_mut().expect("just set"))
    })
}

/// Exact conversion of a soft value.
pub fn fp_to_big(x: &Fp) -> BigFloat {
    if x.is_zero() {
        return BigFloat::from_word(0, 128);
    }
    let m = x.mantissa();
    let words: [Word; 2] = [m as u64, (m >> 64) as u64];
    let s = if x.is_negative() { Sign::Neg } else { Sign::Pos };
    BigFloat::from_words(&words, s, x.exponent() + 1)
}

/// Round a high-precision value to the configured width.
pub fn big_to_fp(x: &BigFloat, cfg: &PrecisionConfig) -> Result<Fp> {
    if x.is_zero() {
        return Ok(Fp::ZERO);
    }
    let (m, _n, s, e, _inexact) = x
        .as_raw_parts()
        .ok_or_else(|| Error::Domain("non-finite high-precision value".into()))?;
    // take the top four words, the rest only matters as a sticky bit
    let len = m.len();
    let word = |k: usize| -> u128 {
        if k < len {
            m[len - 1 - k] as u128
        } else {
            0
        }
    };
    let hi = (word(0) << 64) | word(1);
    let lo = (word(2) << 64) | word(3);
    let sticky = len > 4 && m[..len - 4].iter().any(|&w| w != 0);
    let w = U256::new(hi, lo);
    if w.is_zero() {
        return Ok(Fp::ZERO);
    }
    // value = w * 2^(e - 256)
    round_wide(s == Sign::Neg, w, e - 256, sticky, cfg)
}

/// Precision used by the oracles.
pub const ORACLE_BITS: usize = 256;

/// A `BigFloat` at oracle precision with operator overloads.
#[derive(Clone, Debug)]
pub struct Big(pub BigFloat);

impl Big {
    pub fn from_fp(x: &Fp) -> Big {
        Big(fp_to_big(x))
    }
}

macro_rules! big_binop {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr for Big {
            type Output = Big;
            fn $m(self, o: Big) -> Big {
                Big(self.0.$m(&o.0, ORACLE_BITS, RM))
            }
        }
        impl<'a> std::ops::$tr<&'a Big> for &'a Big {
            type Output = Big;
            fn $m(self, o: &'a Big) -> Big {
                Big(self.0.$m(&o.0, ORACLE_BITS, RM))
            }
        }
    };
}
big_binop!(Add, add);
big_binop!(Sub, sub);
big_binop!(Mul, mul);
big_binop!(Div, div);

impl std::ops::Neg for Big {
    type Output = Big;
    fn neg(self) -> Big {
        Big(self.0.neg())
    }
}

impl PartialEq for Big {
    fn eq(&self, o: &Big) -> bool {
        self.0.cmp(&o.0) == Some(0)
    }
}

impl PartialOrd for Big {
    fn partial_cmp(&self, o: &Big) -> Option<std::cmp::Ordering> {
        self.0.cmp(&o.0).map(|c| c.cmp(&0))
    }
}

/// Nearest f64 of a high-precision value.
pub fn big_to_f64(x: &BigFloat) -> f64 {
    let c = PrecisionConfig::with_exponent_bits(53, 24).expect("valid");
    big_to_fp(x, &c).map(|v| v.to_f64()).unwrap_or(f64::NAN)
}
