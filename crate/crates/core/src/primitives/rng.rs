//! Counter-based random streams and the two sampling primitives.

use astro_float::BigFloat;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fparith::{Arith, Cx, Fp, FpScalar, PrecisionConfig};
use crate::hp::{big_to_fp, fp_to_big, with_hp, Hp};

/// A position in a deterministic stream: every draw is a pure function of
/// `(seed, counter)`, and each draw consumes 128 bits and advances the counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub counter: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        RngState { seed, counter: 0 }
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        let mut z = self.seed;
        for chunk in key.chunks_mut(8) {
            z = splitmix64(z);
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        key
    }

    /// The 128-bit word at the current position; advances the counter.
    pub fn next_u128(&mut self) -> u128 {
        let mut g = ChaCha8Rng::from_seed(self.key());
        g.set_word_pos(self.counter as u128 * 4);
        self.counter += 1;
        let lo = g.next_u64() as u128;
        let hi = g.next_u64() as u128;
        (hi << 64) | lo
    }

    /// Fill `out` with consecutive draws (same values as repeated `next_u128`).
    pub fn fill_u128(&mut self, out: &mut [u128]) {
        let mut g = ChaCha8Rng::from_seed(self.key());
        g.set_word_pos(self.counter as u128 * 4);
        for slot in out.iter_mut() {
            let lo = g.next_u64() as u128;
            let hi = g.next_u64() as u128;
            *slot = (hi << 64) | lo;
        }
        self.counter += out.len() as u64;
    }

    /// An independent child stream identified by `tag`.
    pub fn split(&self, tag: u64) -> RngState {
        let mixed = splitmix64(self.seed ^ splitmix64(tag ^ splitmix64(self.counter)));
        RngState {
            seed: mixed,
            counter: 0,
        }
    }

    /// Skip `n` draws.
    pub fn advance(&mut self, n: u64) {
        self.counter += n;
    }
}

/// The exact sample `v = (2k + 1 - 2^128) / 2^128` in (-1, 1).
fn unit_from_bits(k: u128) -> Fp {
    // 2k+1-2^128 = 2(k - 2^127) + 1, a signed odd integer
    if k >= 1u128 << 127 {
        Fp::from_int_scaled(false, ((k - (1u128 << 127)) << 1) | 1, -128)
    } else {
        // k = 0 gives 2^128 - 1 through wrapping
        Fp::from_int_scaled(true, ((1u128 << 127) - k).wrapping_shl(1).wrapping_sub(1), -128)
    }
}

/// Uniform sample on `[-s, s]`: the exact value `s * v` of a 128-bit grid
/// point `v` in (-1, 1), rounded once. All-zero random bits give `-s`
/// (after rounding) and all-one bits give `s`.
pub fn unif(s: &Fp, rng: RngState, cfg: &PrecisionConfig) -> Result<(Fp, RngState)> {
    if s.is_negative() || s.is_zero() {
        return Err(Error::Domain("unif requires s > 0".into()));
    }
    let mut rng = rng;
    let v = unit_from_bits(rng.next_u128());
    let c = s.mul(&v, cfg)?;
    Ok((c, rng))
}

pub(crate) fn unif_k<A: Arith>(ar: &A, s: A::R, rng: RngState) -> Result<(A::R, RngState)> {
    ar.count(1, 0);
    let (c, rng) = unif(&ar.export(s), rng, ar.config())?;
    Ok((ar.import(&c), rng))
}

/// A complex Gaussian sample with independent real and imaginary parts of
/// variance 1/2, by Box-Muller: `z = sqrt(-ln U1) * exp(2 pi i U2)`.
///
/// For widths up to 53 bits the sample is evaluated in binary64 from 52-bit
/// uniforms; above that, in arbitrary precision at `t + 64` bits from 128-bit
/// uniforms. Each part is then rounded to the working width.
pub fn normal(rng: RngState, cfg: &PrecisionConfig) -> Result<(FpScalar, RngState)> {
    let mut rng = rng;
    let k1 = rng.next_u128();
    let k2 = rng.next_u128();
    let z = if cfg.mantissa_bits() <= 53 {
        let (re, im) = box_muller_f64(k1, k2);
        FpScalar::new(Fp::fl_f64(re, cfg)?, Fp::fl_f64(im, cfg)?)
    } else {
        let (re, im) = with_hp(cfg.mantissa_bits() as usize + 64, |hp| box_muller_hp(hp, k1, k2));
        FpScalar::new(big_to_fp(&re, cfg)?, big_to_fp(&im, cfg)?)
    };
    Ok((z, rng))
}

/// The 53-bit odd grid point `(2m + 1) / 2^53` from the top 52 bits of `k`.
fn open_unit_f64(k: u128) -> f64 {
    let m = (k >> 76) as u64;
    ((2 * m + 1) as f64) * 2f64.powi(-53)
}

fn quarter_turn(q: u32, c: f64, s: f64) -> (f64, f64) {
    match q {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

pub(crate) fn box_muller_f64(k1: u128, k2: u128) -> (f64, f64) {
    let u1 = open_unit_f64(k1);
    let ln = if u1 > 0.5 { (u1 - 1.0).ln_1p() } else { u1.ln() };
    let r = (-ln).sqrt();
    // angle = 2 pi (q + f) / 4 with q the top two bits and f the next 52
    let q = (k2 >> 126) as u32;
    let f = open_unit_f64(k2 << 2);
    let phi = std::f64::consts::FRAC_PI_2 * f;
    let (c, s) = quarter_turn(q, phi.cos(), phi.sin());
    (r * c, r * s)
}

#[cfg(test)]
/// Exact uniforms used by [`box_muller_f64`], for coupling checks.
pub(crate) fn box_muller_inputs_f64(k1: u128, k2: u128) -> (f64, u32, f64) {
    (open_unit_f64(k1), (k2 >> 126) as u32, open_unit_f64(k2 << 2))
}

/// The 128-bit odd grid point `(2m + 1) / 2^128` from the top 127 bits of `k`.
fn open_unit_fp(k: u128) -> Fp {
    Fp::from_int_scaled(false, ((k >> 1) << 1) | 1, -128)
}

pub(crate) fn box_muller_hp(hp: &mut Hp, k1: u128, k2: u128) -> (BigFloat, BigFloat) {
    let u1 = fp_to_big(&open_unit_fp(k1));
    let ln = hp.ln(&u1);
    let r = hp.sqrt(&ln.neg());
    let u2 = fp_to_big(&open_unit_fp(k2));
    let pi = hp.pi();
    let two_pi = hp.mul(&pi, &hp.from_f64(2.0));
    let phi = hp.mul(&two_pi, &u2);
    let c = hp.cos(&phi);
    let s = hp.sin(&phi);
    (hp.mul(&r, &c), hp.mul(&r, &s))
}

pub(crate) fn normal_k<A: Arith>(ar: &A, rng: RngState) -> Result<(Cx<A::R>, RngState)> {
    ar.count(2, 0);
    let (z, rng) = normal(rng, ar.config())?;
    Ok((ar.cimport(&z), rng))
}

/// `count` Gaussian samples in stream order.
pub(crate) fn normals_k<A: Arith>(
    ar: &A,
    count: usize,
    rng: RngState,
) -> Result<(Vec<Cx<A::R>>, RngState)> {
    let cfg = ar.config();
    let mut rng = rng;
    let mut out = Vec::with_capacity(count);
    if cfg.mantissa_bits() <= 53 {
        let mut bits = vec![0u128; 2 * count];
        rng.fill_u128(&mut bits);
        for pair in bits.chunks(2) {
            let (re, im) = box_muller_f64(pair[0], pair[1]);
            let z = FpScalar::new(Fp::fl_f64(re, cfg)?, Fp::fl_f64(im, cfg)?);
            out.push(ar.cimport(&z));
        }
        ar.count(2 * count as u64, 0);
    } else {
        for _ in 0..count {
            let (z, r) = normal_k(ar, rng)?;
            rng = r;
            out.push(z);
        }
    }
    Ok((out, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::big_to_f64;

    #[test]
    fn stream_is_deterministic_and_fill_matches() {
        let mut a = RngState::new(42);
        let mut b = RngState::new(42);
        let xs: Vec<u128> = (0..10).map(|_| a.next_u128()).collect();
        let mut ys = vec![0u128; 10];
        b.fill_u128(&mut ys);
        assert_eq!(xs, ys);
        assert_eq!(a, b);
        assert_ne!(RngState::new(1).next_u128(), RngState::new(2).next_u128());
        let p = RngState::new(9);
        assert_ne!(p.split(0).next_u128(), p.split(1).next_u128());
    }

    #[test]
    fn unif_endpoints() {
        let c = PrecisionConfig::new(24).unwrap();
        let s = Fp::from_i64(3);
        assert_eq!(s.mul(&unit_from_bits(0), &c).unwrap(), s.neg());
        assert_eq!(s.mul(&unit_from_bits(u128::MAX), &c).unwrap(), s);
        assert_eq!(unit_from_bits(1u128 << 127).to_f64(), 2f64.powi(-128));
    }

    #[test]
    fn unif_range_mean_and_coupling() {
        let c = PrecisionConfig::new(53).unwrap();
        let s = Fp::ONE;
        let mut rng = RngState::new(5);
        let mut sum = 0.0;
        let n = 100_000;
        for _ in 0..n {
            let before = rng;
            let (x, r) = unif(&s, rng, &c).unwrap();
            rng = r;
            let xv = x.to_f64();
            assert!((-1.0..=1.0).contains(&xv));
            // coupling: distance to the exact grid value is at most s*u
            let mut probe = before;
            let exact = unit_from_bits(probe.next_u128());
            let d = (xv - exact.to_f64()).abs();
            assert!(d <= c.unit_roundoff() * 1.0000001);
            sum += xv;
        }
        let mean = sum / n as f64;
        assert!(mean.abs() < 3.0 / (3.0 * n as f64).sqrt());
    }

    #[test]
    fn normal_second_moment() {
        let c = PrecisionConfig::new(53).unwrap();
        let mut rng = RngState::new(77);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let (z, r) = normal(rng, &c).unwrap();
            rng = r;
            let (a, b) = z.to_f64();
            acc += a * a + b * b;
        }
        let m2 = acc / n as f64;
        assert!((m2 - 1.0).abs() < 5.0 / (n as f64).sqrt(), "E|z|^2 = {m2}");
    }

    #[test]
    fn normal_coupling_bound_against_oracle() {
        let cfn = crate::primitives::ErrorModel::default().c_normal;
        for t in [24u32, 53, 80, 113] {
            let c = PrecisionConfig::new(t).unwrap();
            let u = c.unit_roundoff();
            let mut rng = RngState::new(t as u64);
            let mut hp = Hp::new(320);
            for _ in 0..300 {
                let mut probe = rng;
                let (k1, k2) = (probe.next_u128(), probe.next_u128());
                let (z, r) = normal(rng, &c).unwrap();
                rng = r;
                // exact Box-Muller of the exact uniforms
                let (er, ei) = if t <= 53 {
                    let (u1, q, f) = box_muller_inputs_f64(k1, k2);
                    let u1 = hp.from_f64(u1);
                    let ln = hp.ln(&u1);
                    let rad = hp.sqrt(&ln.neg());
                    let pi = hp.pi();
                    let quarter = hp.div(&pi, &hp.from_f64(2.0));
                    let phi = hp.mul(&quarter, &hp.from_f64(q as f64 + f));
                    let (c, s) = (hp.cos(&phi), hp.sin(&phi));
                    (hp.mul(&rad, &c), hp.mul(&rad, &s))
                } else {
                    box_muller_hp(&mut hp, k1, k2)
                };
                let dr = hp.sub(&fp_to_big(&z.re), &er);
                let di = hp.sub(&fp_to_big(&z.im), &ei);
                let err = big_to_f64(&dr).hypot(big_to_f64(&di));
                let mag = big_to_f64(&er).hypot(big_to_f64(&ei));
                assert!(err <= cfn * u * mag, "t={t} err={err:e} |z|={mag}");
            }
        }
    }

    #[test]
    fn normal_is_reproducible() {
        let c = PrecisionConfig::new(70).unwrap();
        let a = normal(RngState::new(3), &c).unwrap();
        let b = normal(RngState::new(3), &c).unwrap();
        assert_eq!(a, b);
    }
}
