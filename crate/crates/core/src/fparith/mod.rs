//! Configurable-precision floating point: soft reals, complex scalars,
//! matrices, and the two arithmetic kernels used by the algorithms.

mod arith;
pub mod flops;
mod matrix;
pub(crate) mod real;
mod scalar;
pub(crate) mod wide;

pub use arith::{Arith, Cx, F64Arith, Mat, SoftArith};
pub use matrix::FpMatrix;
pub use real::Fp;
pub use scalar::{fl, fl_complex, fl_real, fp_add, fp_div, fp_half, fp_mul, fp_sqrt, fp_sub, FpScalar};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_MANTISSA_BITS: u32 = 8;
pub const MAX_MANTISSA_BITS: u32 = 128;
pub const DEFAULT_EXPONENT_BITS: u32 = 16;

/// Working precision: `t` mantissa bits (u = 2^-t) and the exponent width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionConfig {
    mantissa_bits: u32,
    exponent_bits: u32,
}

impl PrecisionConfig {
    pub fn new(mantissa_bits: u32) -> Result<Self> {
        Self::with_exponent_bits(mantissa_bits, DEFAULT_EXPONENT_BITS)
    }

    pub fn with_exponent_bits(mantissa_bits: u32, exponent_bits: u32) -> Result<Self> {
        if !(MIN_MANTISSA_BITS..=MAX_MANTISSA_BITS).contains(&mantissa_bits) {
            return Err(Error::Domain(format!(
                "mantissa bits must lie in [{MIN_MANTISSA_BITS}, {MAX_MANTISSA_BITS}], got {mantissa_bits}"
            )));
        }
        if !(4..=24).contains(&exponent_bits) {
            return Err(Error::Domain(format!(
                "exponent bits must lie in [4, 24], got {exponent_bits}"
            )));
        }
        Ok(PrecisionConfig {
            mantissa_bits,
            exponent_bits,
        })
    }

    /// IEEE binary64 layout: 53 mantissa bits, 11 exponent bits.
    pub fn binary64() -> Self {
        PrecisionConfig {
            mantissa_bits: 53,
            exponent_bits: 11,
        }
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    /// Unit roundoff u = 2^-t (exact in f64 for every supported t).
    pub fn unit_roundoff(&self) -> f64 {
        2f64.powi(-(self.mantissa_bits as i32))
    }

    /// Largest exponent of a leading bit.
    pub fn emax(&self) -> i32 {
        (1i32 << (self.exponent_bits - 1)) - 1
    }

    /// Smallest exponent of a leading bit (no subnormals).
    pub fn emin(&self) -> i32 {
        1 - self.emax()
    }
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig::new(53).expect("53 bits is valid")
    }
}

/// Run `$body` with an arithmetic kernel bound to `$ar`.
///
/// Uses the native f64 kernel when the configuration allows it and replays
/// the body with the soft kernel if the fast path left its safe range. The
/// body must therefore be free of side effects other than through `$ar`, and
/// must evaluate to `Result<T>` with `T` independent of the kernel.
#[macro_export]
macro_rules! with_arith {
    ($cfg:expr, |$ar:ident| $body:expr) => {{
        let cfg_: &$crate::fparith::PrecisionConfig = $cfg;
        let fast = if $crate::fparith::F64Arith::supports(cfg_) {
            let $ar = $crate::fparith::F64Arith::new(cfg_);
            #[allow(clippy::redundant_closure_call)]
            let out = (|| $body)();
            if $ar.faulted() {
                None
            } else {
                $crate::fparith::Arith::commit_flops(&$ar);
                Some(out)
            }
        } else {
            None
        };
        match fast {
            Some(out) => out,
            None => {
                let $ar = $crate::fparith::SoftArith::new(cfg_);
                #[allow(clippy::redundant_closure_call)]
                let out = (|| $body)();
                $crate::fparith::Arith::commit_flops(&$ar);
                match $crate::fparith::Arith::check(&$ar) {
                    Err(e) => Err(e),
                    Ok(()) => out,
                }
            }
        }
    }};
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_bounds() {
        assert!(PrecisionConfig::new(7).is_err());
        assert!(PrecisionConfig::new(129).is_err());
        let c = PrecisionConfig::new(24).unwrap();
        assert_eq!(c.unit_roundoff(), 2f64.powi(-24));
        assert_eq!(PrecisionConfig::binary64().emax(), 1023);
        assert_eq!(PrecisionConfig::binary64().emin(), -1022);
        assert_eq!(c.emax(), 32767);
    }
}
