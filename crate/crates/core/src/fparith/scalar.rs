use serde::{Deserialize, Serialize};

use super::flops;
use super::real::Fp;
use super::PrecisionConfig;
use crate::error::Result;

/// A complex number whose parts are each representable at the working width.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct FpScalar {
    pub re: Fp,
    pub im: Fp,
}

impl FpScalar {
    pub const ZERO: FpScalar = FpScalar {
        re: Fp::ZERO,
        im: Fp::ZERO,
    };
    pub const ONE: FpScalar = FpScalar {
        re: Fp::ONE,
        im: Fp::ZERO,
    };

    pub fn real(re: Fp) -> Self {
        FpScalar { re, im: Fp::ZERO }
    }

    pub fn new(re: Fp, im: Fp) -> Self {
        FpScalar { re, im }
    }

    pub fn conj(&self) -> Self {
        FpScalar {
            re: self.re,
            im: self.im.neg(),
        }
    }

    pub fn neg(&self) -> Self {
        FpScalar {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_representable(&self, cfg: &PrecisionConfig) -> bool {
        self.re.is_representable(cfg) && self.im.is_representable(cfg)
    }

    /// Nearest complex f64 pair (diagnostic).
    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn abs_f64(&self) -> f64 {
        let (a, b) = self.to_f64();
        a.hypot(b)
    }
}

impl Serialize for Fp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_hex().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let h: String = Deserialize::deserialize(d)?;
        Fp::from_hex(&h).map_err(serde::de::Error::custom)
    }
}

impl Serialize for FpScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.re.to_hex(), self.im.to_hex()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FpScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (re, im): (String, String) = Deserialize::deserialize(d)?;
        let re = Fp::from_hex(&re).map_err(serde::de::Error::custom)?;
        let im = Fp::from_hex(&im).map_err(serde::de::Error::custom)?;
        Ok(FpScalar { re, im })
    }
}

/// Round an exact real to the working width.
pub fn fl_real(x: &Fp, cfg: &PrecisionConfig) -> Result<Fp> {
    x.round_to(cfg)
}

/// Round an exact f64 real to the working width.
pub fn fl(x: f64, cfg: &PrecisionConfig) -> Result<FpScalar> {
    Ok(FpScalar::real(Fp::fl_f64(x, cfg)?))
}

/// Round an exact complex value componentwise.
pub fn fl_complex(re: &Fp, im: &Fp, cfg: &PrecisionConfig) -> Result<FpScalar> {
    Ok(FpScalar {
        re: re.round_to(cfg)?,
        im: im.round_to(cfg)?,
    })
}

pub fn fp_add(x: &FpScalar, y: &FpScalar, cfg: &PrecisionConfig) -> Result<FpScalar> {
    flops::record(2, 1);
    Ok(FpScalar {
        re: x.re.add(&y.re, cfg)?,
        im: x.im.add(&y.im, cfg)?,
    })
}

pub fn fp_sub(x: &FpScalar, y: &FpScalar, cfg: &PrecisionConfig) -> Result<FpScalar> {
    flops::record(2, 1);
    Ok(FpScalar {
        re: x.re.sub(&y.re, cfg)?,
        im: x.im.sub(&y.im, cfg)?,
    })
}

/// Schoolbook complex product, each of the four products and two sums rounded.
pub fn fp_mul(x: &FpScalar, y: &FpScalar, cfg: &PrecisionConfig) -> Result<FpScalar> {
    flops::record(6, 1);
    let rr = x.re.mul(&y.re, cfg)?;
    let ii = x.im.mul(&y.im, cfg)?;
    let ri = x.re.mul(&y.im, cfg)?;
    let ir = x.im.mul(&y.re, cfg)?;
    Ok(FpScalar {
        re: rr.sub(&ii, cfg)?,
        im: ri.add(&ir, cfg)?,
    })
}

/// Real division of both components by a real divisor.
pub fn fp_div(x: &FpScalar, y: &Fp, cfg: &PrecisionConfig) -> Result<FpScalar> {
    flops::record(2, 1);
    Ok(FpScalar {
        re: x.re.div(y, cfg)?,
        im: x.im.div(y, cfg)?,
    })
}

pub fn fp_sqrt(x: &Fp, cfg: &PrecisionConfig) -> Result<Fp> {
    flops::record(1, 1);
    x.sqrt(cfg)
}

/// Exact halving of both components.
pub fn fp_half(x: &FpScalar, cfg: &PrecisionConfig) -> Result<FpScalar> {
    Ok(FpScalar {
        re: x.re.half(cfg)?,
        im: x.im.half(cfg)?,
    })
}
