//! Minimal 256-bit unsigned arithmetic for exact intermediate results.

use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub(crate) struct U256 {
    pub hi: u128,
    pub lo: u128,
}

impl U256 {
    pub const ZERO: U256 = U256 { hi: 0, lo: 0 };

    pub fn new(hi: u128, lo: u128) -> Self {
        U256 { hi, lo }
    }

    pub fn from_u128(lo: u128) -> Self {
        U256 { hi: 0, lo }
    }

    pub fn is_zero(&self) -> bool {
        self.hi == 0 && self.lo == 0
    }

    /// Position of the most significant set bit (0-based). Undefined for zero.
    pub fn msb(&self) -> u32 {
        if self.hi != 0 {
            255 - self.hi.leading_zeros()
        } else {
            127 - self.lo.leading_zeros()
        }
    }

    pub fn bit(&self, i: u32) -> bool {
        if i >= 128 {
            (self.hi >> (i - 128)) & 1 == 1
        } else {
            (self.lo >> i) & 1 == 1
        }
    }

    pub fn shl(&self, s: u32) -> Self {
        match s {
            0 => *self,
            1..=127 => U256 {
                hi: (self.hi << s) | (self.lo >> (128 - s)),
                lo: self.lo << s,
            },
            128..=255 => U256 {
                hi: self.lo << (s - 128),
                lo: 0,
            },
            _ => U256::ZERO,
        }
    }

    pub fn shr(&self, s: u32) -> Self {
        match s {
            0 => *self,
            1..=127 => U256 {
                hi: self.hi >> s,
                lo: (self.lo >> s) | (self.hi << (128 - s)),
            },
            128..=255 => U256 {
                hi: 0,
                lo: self.hi >> (s - 128),
            },
            _ => U256::ZERO,
        }
    }

    /// Low `s` bits (s <= 256).
    pub fn low_bits(&self, s: u32) -> Self {
        match s {
            0 => U256::ZERO,
            1..=127 => U256 {
                hi: 0,
                lo: self.lo & ((1u128 << s) - 1),
            },
            128 => U256 { hi: 0, lo: self.lo },
            129..=255 => U256 {
                hi: self.hi & ((1u128 << (s - 128)) - 1),
                lo: self.lo,
            },
            _ => *self,
        }
    }

    pub fn wrapping_add(&self, o: &U256) -> Self {
        let (lo, c) = self.lo.overflowing_add(o.lo);
        U256 {
            hi: self.hi.wrapping_add(o.hi).wrapping_add(c as u128),
            lo,
        }
    }

    pub fn wrapping_sub(&self, o: &U256) -> Self {
        let (lo, b) = self.lo.overflowing_sub(o.lo);
        U256 {
            hi: self.hi.wrapping_sub(o.hi).wrapping_sub(b as u128),
            lo,
        }
    }

    /// Full 128x128 -> 256 product.
    pub fn mul_u128(a: u128, b: u128) -> Self {
        let mask = u64::MAX as u128;
        let (a0, a1) = (a & mask, a >> 64);
        let (b0, b1) = (b & mask, b >> 64);
        let p00 = a0 * b0;
        let p01 = a0 * b1;
        let p10 = a1 * b0;
        let p11 = a1 * b1;
        let mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
        let lo = (p00 & mask) | (mid << 64);
        let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
        U256 { hi, lo }
    }

    /// Integer square root and the remainder `self - root^2`.
    pub fn isqrt(&self) -> (u128, U256) {
        if self.is_zero() {
            return (0, U256::ZERO);
        }
        // digit-by-digit, two bits at a time from the top
        let mut rem = U256::ZERO;
        let mut root = U256::ZERO;
        let top = (self.msb() / 2) * 2;
        let mut i = top as i32;
        while i >= 0 {
            let pair = self.shr(i as u32).low_bits(2);
            rem = rem.shl(2).wrapping_add(&pair);
            let trial = root.shl(2).wrapping_add(&U256::from_u128(1));
            root = root.shl(1);
            if rem >= trial {
                rem = rem.wrapping_sub(&trial);
                root = root.wrapping_add(&U256::from_u128(1));
            }
            i -= 2;
        }
        debug_assert_eq!(root.hi, 0);
        (root.lo, rem)
    }
}

impl PartialOrd for U256 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for U256 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.hi.cmp(&other.hi).then(self.lo.cmp(&other.lo))
    }
}
